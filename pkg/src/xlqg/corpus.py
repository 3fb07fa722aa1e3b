"""Canonical QA corpus handling.

Every dataset flowing through the pipeline is reduced to one record shape: a
context--question--answer triplet with an optional answer span.  The on-disk
interchange format is "triplet-jsonl": UTF-8, one JSON object per line with
exactly the ``QAExample`` field names.  SQuAD v1.1 JSON can be imported
read-only; paragraphs are flattened and the first answer of each question is
kept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import CorpusFormatError, CorpusValidationError

# ISO 639-1 codes accepted by default, plus the two bundled toy languages.
KNOWN_LANGUAGES = {
    "en", "bn", "de", "fi", "hi", "id", "ko", "sw", "te", "zh",
    "ar", "es", "fr", "it", "ja", "nl", "pt", "ru", "th", "tr", "vi",
    "toy-src", "toy-tgt",
}

TRIPLET_FIELDS = ("id", "language", "context", "question", "answer_text", "answer_start")


@dataclass(frozen=True)
class QAExample:
    """One context--question--answer triplet with an optional answer span."""

    id: str
    language: str
    context: str
    question: str
    answer_text: str
    answer_start: int = -1

    def validate(self, languages: set[str] | None = None) -> list[str]:
        """Return a list of invariant violations (empty when valid)."""
        problems = []
        if not self.question.strip():
            problems.append("empty question")
        if not self.context.strip():
            problems.append("empty context")
        table = KNOWN_LANGUAGES if languages is None else languages
        if self.language not in table:
            problems.append(f"unknown language code {self.language!r}")
        if self.answer_start >= 0:
            end = self.answer_start + len(self.answer_text)
            if self.context[self.answer_start:end] != self.answer_text:
                problems.append(
                    f"answer span [{self.answer_start}:{end}] does not match answer_text"
                )
        return problems

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "language": self.language,
            "context": self.context,
            "question": self.question,
            "answer_text": self.answer_text,
            "answer_start": self.answer_start,
        }


@dataclass(frozen=True)
class Corpus:
    """An ordered, immutable collection of QA examples in one language."""

    name: str
    language: str
    split: str
    examples: tuple[QAExample, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.split not in ("train", "validation", "test"):
            raise ValueError(f"split must be train/validation/test, got {self.split!r}")
        seen: set[str] = set()
        for ex in self.examples:
            if ex.language != self.language:
                raise CorpusValidationError(
                    f"example {ex.id} has language {ex.language!r}, corpus is {self.language!r}",
                    bad_ids=[ex.id],
                )
            if ex.id in seen:
                raise CorpusValidationError(f"duplicate example id {ex.id}", bad_ids=[ex.id])
            seen.add(ex.id)

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[QAExample]:
        return iter(self.examples)

    def __getitem__(self, idx: int) -> QAExample:
        return self.examples[idx]


def _validate_examples(examples: Iterable[QAExample]) -> None:
    bad: dict[str, list[str]] = {}
    for ex in examples:
        problems = ex.validate()
        if problems:
            bad[ex.id] = problems
    if bad:
        detail = "; ".join(f"{k}: {', '.join(v)}" for k, v in list(bad.items())[:5])
        raise CorpusValidationError(
            f"{len(bad)} invalid example(s): {detail}", bad_ids=bad.keys()
        )


def _load_triplet_jsonl(path: Path, language_hint: str | None) -> list[QAExample]:
    examples = []
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(
                    f"{path}:{lineno}: invalid JSON ({exc.msg})", path=str(path), record=lineno
                ) from exc
            missing = [k for k in TRIPLET_FIELDS if k not in record and k != "answer_start"]
            if missing:
                raise CorpusFormatError(
                    f"{path}:{lineno}: missing field(s) {missing}", path=str(path), record=lineno
                )
            examples.append(
                QAExample(
                    id=str(record["id"]),
                    language=str(record["language"]),
                    context=str(record["context"]),
                    question=str(record["question"]),
                    answer_text=str(record["answer_text"]),
                    answer_start=int(record.get("answer_start", -1)),
                )
            )
    if language_hint and examples and any(ex.language != language_hint for ex in examples):
        raise CorpusFormatError(
            f"{path}: records disagree with requested language {language_hint!r}", path=str(path)
        )
    return examples


def _load_squad(path: Path, language: str) -> list[QAExample]:
    try:
        with path.open("r", encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"{path}: invalid JSON ({exc.msg})", path=str(path)) from exc
    if "data" not in payload:
        raise CorpusFormatError(f"{path}: no top-level 'data' key", path=str(path))
    examples = []
    for article in payload["data"]:
        for paragraph in article.get("paragraphs", []):
            context = paragraph.get("context", "")
            for qa in paragraph.get("qas", []):
                answers = qa.get("answers", [])
                if not answers:
                    continue
                first = answers[0]
                examples.append(
                    QAExample(
                        id=str(qa.get("id", f"squad-{len(examples)}")),
                        language=language,
                        context=context,
                        question=qa.get("question", ""),
                        answer_text=first.get("text", ""),
                        answer_start=int(first.get("answer_start", -1)),
                    )
                )
    return examples


def load_corpus(
    path: str | Path,
    format: str = "triplet-jsonl",
    name: str | None = None,
    language: str | None = None,
    split: str = "train",
) -> Corpus:
    """Load and validate a corpus from disk.

    ``format`` is "squad" (v1.1 JSON, import only) or "triplet-jsonl".
    SQuAD import requires ``language`` (the file itself does not carry one).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if format == "triplet-jsonl":
        examples = _load_triplet_jsonl(path, language)
    elif format == "squad":
        examples = _load_squad(path, language or "en")
    else:
        raise ValueError(f"unknown corpus format {format!r}")
    _validate_examples(examples)
    lang = language or (examples[0].language if examples else "en")
    return Corpus(
        name=name or path.stem,
        language=lang,
        split=split,
        examples=tuple(examples),
    )


def save_corpus(corpus: Corpus, path: str | Path) -> Path:
    """Write a corpus as triplet-jsonl (the round-trippable interchange format)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for ex in corpus:
            f.write(json.dumps(ex.to_json(), ensure_ascii=False) + "\n")
    return path


def split_corpus(corpus: Corpus, validation_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Partition a corpus into (train, validation) with a seeded uniform shuffle.

    Deterministic per seed; sizes are within one example of the requested
    fraction; the two halves are disjoint and exhaustive.
    """
    if not 0.0 < validation_fraction < 1.0:
        raise ValueError(f"validation_fraction must be in (0,1), got {validation_fraction}")
    if len(corpus) < 2:
        raise ValueError("cannot split a corpus with fewer than 2 examples")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(corpus))
    n_val = round(len(corpus) * validation_fraction)
    n_val = min(max(n_val, 1), len(corpus) - 1)
    val_idx = set(order[:n_val].tolist())
    train_examples = tuple(ex for i, ex in enumerate(corpus) if i not in val_idx)
    val_examples = tuple(ex for i, ex in enumerate(corpus) if i in val_idx)
    train = Corpus(corpus.name, corpus.language, "train", train_examples)
    validation = Corpus(corpus.name, corpus.language, "validation", val_examples)
    return train, validation
