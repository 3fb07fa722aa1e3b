"""Synthetic QA data emission and exact-match scoring.

Given bare (context, answer) pairs in some language, the generation pipeline
produces a question for each, yielding training examples for a downstream
multilingual QA model.  Every synthetic example carries full provenance
(mode, model seed, exemplar key) in a sidecar file; the examples themselves
round-trip through the ordinary corpus format.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .corpus import QAExample, save_corpus, Corpus
from .errors import BankKeyError
from .exemplars import ExemplarBank
from .qg import GenerationRecord, pipeline_generate
from .qtypes import QUESTION_TYPES, TYPELESS

ENGLISH_ARTICLES = ("a", "an", "the")


@dataclass(frozen=True)
class SyntheticQAExample:
    example: QAExample
    provenance: dict

    def to_json(self) -> dict:
        return {"example": self.example.to_json(), "provenance": self.provenance}


def generate_synthetic_qa(pairs: list[tuple[str, str, str]], qtc_classifier,
                          qg_model, bank: ExemplarBank, size: int,
                          exemplar_seeds: list[int], mode: str = "exemplar",
                          model_seed: int = 0, beam_size: int = 4,
                          typeless: bool = False) -> list[SyntheticQAExample]:
    """One synthetic example per (pair, exemplar seed).

    pairs are (context, answer, language) triples.  Bank coverage for every
    pair language is checked up front so nothing is generated on a doomed run.
    """
    languages = {language for _, _, language in pairs}
    for language in sorted(languages):
        for seed in exemplar_seeds:
            if typeless:
                missing = [] if bank.has(language, TYPELESS, size, seed) else [TYPELESS]
            else:
                missing = [t.value for t in QUESTION_TYPES
                           if not bank.has(language, t, size, seed)]
            if missing:
                raise BankKeyError(
                    f"bank lacks ({language}, size={size}, seed={seed}) sets "
                    f"for types: {missing}"
                )

    out = []
    for seed in exemplar_seeds:
        for index, (context, answer, language) in enumerate(pairs):
            example = QAExample(
                id=f"synth-{language}-{model_seed}-{seed}-{index:05d}",
                language=language,
                context=context,
                question="",  # bare pair: no reference question exists
                answer_text=answer,
                answer_start=context.find(answer),
            )
            record: GenerationRecord = pipeline_generate(
                qtc_classifier, qg_model, bank, example, size, seed,
                beam_size=beam_size, model_seed=model_seed, typeless=typeless,
            )
            final = QAExample(
                id=example.id,
                language=language,
                context=context,
                question=record.generated_question or "?",
                answer_text=answer,
                answer_start=context.find(answer),
            )
            out.append(SyntheticQAExample(
                example=final,
                provenance={
                    "mode": mode,
                    "model_seed": model_seed,
                    "exemplar_key": list(record.exemplar_key) if record.exemplar_key else None,
                    "predicted_qtype": record.predicted_qtype,
                },
            ))
    return out


def save_synthetic_qa(synthetic: list[SyntheticQAExample], data_path: str | Path,
                      provenance_path: str | Path | None = None) -> Path:
    """Write triplet-jsonl plus a provenance sidecar JSON."""
    data_path = Path(data_path)
    languages = {s.example.language for s in synthetic}
    if len(languages) == 1:
        corpus = Corpus(name=data_path.stem, language=languages.pop(),
                        split="train", examples=tuple(s.example for s in synthetic))
        save_corpus(corpus, data_path)
    else:
        data_path.parent.mkdir(parents=True, exist_ok=True)
        with data_path.open("w", encoding="utf-8") as f:
            for s in synthetic:
                f.write(json.dumps(s.example.to_json(), ensure_ascii=False) + "\n")
    if provenance_path is not None:
        provenance_path = Path(provenance_path)
        provenance_path.parent.mkdir(parents=True, exist_ok=True)
        payload = {s.example.id: s.provenance for s in synthetic}
        provenance_path.write_text(json.dumps(payload, indent=1), encoding="utf-8")
    return data_path


def normalize_answer(text: str, language: str = "en") -> str:
    """Lowercase, strip punctuation, collapse whitespace; drop English articles."""
    lowered = text.lower()
    stripped = "".join(
        ch for ch in lowered if not unicodedata.category(ch).startswith("P")
    )
    tokens = stripped.split()
    if language == "en":
        tokens = [t for t in tokens if t not in ENGLISH_ARTICLES]
    return " ".join(tokens)


def exact_match(prediction: str, gold_answers: list[str], language: str = "en") -> int:
    """1 iff the normalized prediction equals any normalized gold answer."""
    if not gold_answers:
        raise ValueError("need at least one gold answer")
    pred = normalize_answer(prediction, language)
    return int(any(pred == normalize_answer(g, language) for g in gold_answers))
