"""Human evaluation sheets: blind export and rating aggregation.

Raters see a randomized sheet with five criteria per question:
Interrogative (I) and Grammatical (G) on a 0-2 scale, Clarity (C),
Answerability (A), and Answer-Match (AM) as yes/no.  The rating flow is a
cascade: a non-question scores zero everywhere, a zero for grammar or a "no"
anywhere forces every downstream criterion to its lowest value, so raters
may leave those cells blank.  Aggregation expands the cascade per rater,
then takes the per-row majority over the three raters.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from statistics import median

import numpy as np

SHEET_HEADER = ("blind_id", "question", "context", "answer", "I", "G", "C", "A", "AM")
SCALE_CRITERIA = ("I", "G")
BINARY_CRITERIA = ("C", "A", "AM")
CRITERIA = SCALE_CRITERIA + BINARY_CRITERIA


def export_human_eval_sheet(records_by_model: dict[str, list],
                            examples_by_id: dict[str, object],
                            n_per_model: int, seed: int = 0,
                            sheet_path: str | Path | None = None,
                            key_path: str | Path | None = None):
    """Sample n_per_model records per model into one shuffled blind sheet.

    Returns (rows, key) where key maps blind_id -> (model, example_id).
    The key is written separately from the sheet so raters never see it.
    """
    rng = np.random.default_rng(seed)
    picked = []
    for model in sorted(records_by_model):
        records = records_by_model[model]
        if len(records) < n_per_model:
            raise ValueError(
                f"model {model!r} has {len(records)} records, need {n_per_model}"
            )
        for idx in rng.choice(len(records), size=n_per_model, replace=False):
            picked.append((model, records[idx]))

    order = rng.permutation(len(picked))
    rows = []
    key = {}
    for blind_index, pick_index in enumerate(order):
        model, record = picked[pick_index]
        blind_id = f"q{blind_index:04d}"
        example = examples_by_id.get(record.example_id)
        rows.append({
            "blind_id": blind_id,
            "question": record.generated_question,
            "context": getattr(example, "context", ""),
            "answer": getattr(example, "answer_text", ""),
            "I": "", "G": "", "C": "", "A": "", "AM": "",
        })
        key[blind_id] = {"model": model, "example_id": record.example_id}

    if sheet_path is not None:
        sheet_path = Path(sheet_path)
        sheet_path.parent.mkdir(parents=True, exist_ok=True)
        with sheet_path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=SHEET_HEADER)
            writer.writeheader()
            writer.writerows(rows)
    if key_path is not None:
        key_path = Path(key_path)
        key_path.parent.mkdir(parents=True, exist_ok=True)
        key_path.write_text(json.dumps(key, indent=1), encoding="utf-8")
    return rows, key


def read_sheet(path: str | Path) -> list[dict]:
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def _parse_scale(value: str, criterion: str, blind_id: str) -> int | None:
    value = str(value).strip()
    if value == "":
        return None
    if value not in ("0", "1", "2"):
        raise ValueError(f"{blind_id}: {criterion} must be 0/1/2, got {value!r}")
    return int(value)


def _parse_binary(value: str, criterion: str, blind_id: str) -> int | None:
    value = str(value).strip().lower()
    if value == "":
        return None
    if value in ("yes", "y", "1"):
        return 1
    if value in ("no", "n", "0"):
        return 0
    raise ValueError(f"{blind_id}: {criterion} must be yes/no, got {value!r}")


def expand_cascade(row: dict) -> dict:
    """Fill one rater's row according to the cascade rules.

    I == 0 forces everything downstream to its lowest value; G == 0 or a
    "no" answer forces everything after it to the lowest.  Blank cells are
    only legal where the cascade fills them.
    """
    blind_id = row.get("blind_id", "?")
    i_val = _parse_scale(row.get("I", ""), "I", blind_id)
    g_val = _parse_scale(row.get("G", ""), "G", blind_id)
    c_val = _parse_binary(row.get("C", ""), "C", blind_id)
    a_val = _parse_binary(row.get("A", ""), "A", blind_id)
    am_val = _parse_binary(row.get("AM", ""), "AM", blind_id)

    if i_val is None:
        raise ValueError(f"{blind_id}: Interrogative rating is required")
    if i_val == 0:
        return {"I": 0, "G": 0, "C": 0, "A": 0, "AM": 0}
    if g_val is None:
        raise ValueError(f"{blind_id}: Grammatical rating is required when I > 0")
    if g_val == 0:
        return {"I": i_val, "G": 0, "C": 0, "A": 0, "AM": 0}
    if c_val is None:
        raise ValueError(f"{blind_id}: Clarity rating is required when G > 0")
    if c_val == 0:
        return {"I": i_val, "G": g_val, "C": 0, "A": 0, "AM": 0}
    if a_val is None:
        raise ValueError(f"{blind_id}: Answerability rating is required when C is yes")
    if a_val == 0:
        return {"I": i_val, "G": g_val, "C": 1, "A": 0, "AM": 0}
    if am_val is None:
        raise ValueError(f"{blind_id}: Answer-Match rating is required when A is yes")
    return {"I": i_val, "G": g_val, "C": 1, "A": 1, "AM": am_val}


def aggregate_human_ratings(sheets: list, key: dict) -> dict:
    """Majority-vote table per model from three filled sheets.

    Scale criteria report the mean of per-row majorities; binary criteria
    report the percentage of rows whose majority vote is yes.
    """
    if len(sheets) != 3:
        raise ValueError(f"expected 3 rater sheets, got {len(sheets)}")
    parsed = []
    for sheet in sheets:
        rows = read_sheet(sheet) if isinstance(sheet, (str, Path)) else sheet
        parsed.append({row["blind_id"]: row for row in rows})
    ids = [tuple(sorted(p)) for p in parsed]
    if not (ids[0] == ids[1] == ids[2]):
        raise ValueError("rater sheets cover different blind_id sets")
    if set(ids[0]) != set(key):
        raise ValueError("sheets and key cover different blind_id sets")

    per_model: dict[str, dict[str, list]] = {}
    for blind_id in ids[0]:
        model = key[blind_id]["model"]
        votes = [expand_cascade(p[blind_id]) for p in parsed]
        bucket = per_model.setdefault(model, {c: [] for c in CRITERIA})
        for criterion in CRITERIA:
            majority = median(v[criterion] for v in votes)
            bucket[criterion].append(majority)

    table = {}
    for model, bucket in sorted(per_model.items()):
        table[model] = {
            "n": len(bucket["I"]),
            "I": float(np.mean(bucket["I"])),
            "G": float(np.mean(bucket["G"])),
            "C": 100.0 * float(np.mean(bucket["C"])),
            "A": 100.0 * float(np.mean(bucket["A"])),
            "AM": 100.0 * float(np.mean(bucket["AM"])),
        }
    return table
