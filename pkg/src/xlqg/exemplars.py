"""Fixed per-type question exemplar banks.

An exemplar set is a small ordered list of questions in one language, all of
one interrogative type, sampled once and then never reshuffled: the same key
always returns the identical ordered list, in memory and across file
round-trips.  Target-language sets are built by translating candidate
questions into English, typing the translations with the lexical rule, and
storing the original target-language strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BankKeyError, ExemplarPoolError
from .qtypes import (
    DEFAULT_LEXICON,
    QUESTION_TYPES,
    TYPELESS,
    AuxiliaryLexicon,
    QuestionType,
    TypedQuestion,
    classify_rule,
)

STANDARD_SIZES = (1, 5, 10, 15)

PROVENANCE_HUMAN = "human-written"
PROVENANCE_TRANSLATED = "machine-translated"
PROVENANCE_TYPELESS = "typeless"


class TranslatorInterface:
    """Minimal translation surface; implementations must be total functions."""

    def translate(self, text: str, source_language: str, target_language: str) -> str:
        raise NotImplementedError


class DictionaryTranslator(TranslatorInterface):
    """Deterministic offline stub: sentence table first, then word-by-word.

    Unknown words pass through unchanged, keeping the function total.  Meant
    for tests and the bundled toy languages; a real service adapter slots in
    behind the same interface.
    """

    def __init__(self, sentence_table: dict[str, str] | None = None,
                 word_table: dict[str, str] | None = None):
        self.sentence_table = dict(sentence_table or {})
        self.word_table = dict(word_table or {})

    def translate(self, text: str, source_language: str, target_language: str) -> str:
        if text in self.sentence_table:
            return self.sentence_table[text]
        return " ".join(self.word_table.get(w, w) for w in text.split())


def _qtype_tag(qtype) -> str:
    return qtype.value if isinstance(qtype, QuestionType) else str(qtype)


@dataclass(frozen=True)
class ExemplarSet:
    language: str
    qtype: object  # QuestionType or the TYPELESS tag
    size: int
    seed: int
    questions: tuple[str, ...]

    def __post_init__(self):
        if len(self.questions) != self.size:
            raise ValueError(
                f"set declares size {self.size} but holds {len(self.questions)} questions"
            )
        if len(set(self.questions)) != len(self.questions):
            raise ValueError("exemplar sets must not contain duplicate questions")

    @property
    def key(self) -> tuple:
        return (self.language, _qtype_tag(self.qtype), self.size, self.seed)

    @property
    def is_standard_size(self) -> bool:
        return self.size in STANDARD_SIZES


class ExemplarBank:
    """Mapping from (language, type, size, seed) to an immutable exemplar set."""

    def __init__(self):
        self.sets: dict[tuple, ExemplarSet] = {}
        self.provenance: dict[tuple, str] = {}
        # full per-type candidate pools, kept for dynamic per-example sampling
        self.pools: dict[tuple[str, str], tuple[str, ...]] = {}

    def add(self, exemplar_set: ExemplarSet, provenance: str) -> None:
        key = exemplar_set.key
        if key in self.sets:
            raise ValueError(f"duplicate bank key {key}")
        self.sets[key] = exemplar_set
        self.provenance[key] = provenance

    def get(self, language: str, qtype, size: int, seed: int) -> ExemplarSet:
        key = (language, _qtype_tag(qtype), size, seed)
        if key not in self.sets:
            available = sorted(
                (k[2], k[3]) for k in self.sets
                if k[0] == language and k[1] == key[1]
            )
            raise BankKeyError(
                f"no exemplar set for {key}; available (size, seed) pairs for "
                f"({language}, {key[1]}): {available}",
                available=available,
            )
        return self.sets[key]

    def has(self, language: str, qtype, size: int, seed: int) -> bool:
        return (language, _qtype_tag(qtype), size, seed) in self.sets

    def merge(self, other: "ExemplarBank") -> None:
        for key, exemplar_set in other.sets.items():
            self.add(exemplar_set, other.provenance[key])
        self.pools.update(other.pools)

    def __len__(self) -> int:
        return len(self.sets)

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "sets": [
                {
                    "language": s.language,
                    "qtype": _qtype_tag(s.qtype),
                    "size": s.size,
                    "seed": s.seed,
                    "provenance": self.provenance[k],
                    "questions": list(s.questions),
                }
                for k, s in sorted(self.sets.items())
            ],
            "pools": [
                {"language": lang, "qtype": qtype, "questions": list(questions)}
                for (lang, qtype), questions in sorted(self.pools.items())
            ],
        }
        path.write_text(json.dumps(payload, ensure_ascii=False, indent=1),
                        encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "ExemplarBank":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        bank = cls()
        for entry in payload["sets"]:
            qtype = entry["qtype"]
            if qtype != TYPELESS:
                qtype = QuestionType.from_string(qtype)
            bank.add(
                ExemplarSet(
                    language=entry["language"],
                    qtype=qtype,
                    size=int(entry["size"]),
                    seed=int(entry["seed"]),
                    questions=tuple(entry["questions"]),
                ),
                provenance=entry["provenance"],
            )
        for entry in payload.get("pools", []):
            bank.pools[(entry["language"], entry["qtype"])] = tuple(entry["questions"])
        return bank


def _pools_by_type(typed: list[TypedQuestion]) -> dict[QuestionType, list[str]]:
    pools: dict[QuestionType, list[str]] = {t: [] for t in QUESTION_TYPES}
    seen: set[tuple] = set()
    for tq in typed:
        key = (tq.qtype, tq.question)
        if key in seen:
            continue
        seen.add(key)
        pools[tq.qtype].append(tq.question)
    return pools


def _sample_set(pool: list[str], language: str, qtype, size: int, seed: int,
                salt: int) -> ExemplarSet:
    # Child stream per (seed, type, size): sets of different sizes are
    # independent draws, not nested prefixes.
    rng = np.random.default_rng([seed, salt, size])
    picks = rng.choice(len(pool), size=size, replace=False)
    return ExemplarSet(
        language=language,
        qtype=qtype,
        size=size,
        seed=seed,
        questions=tuple(pool[i] for i in picks),
    )


def build_english_bank(typed: list[TypedQuestion], sizes=STANDARD_SIZES,
                       seeds=(0, 1, 2, 3, 4), language: str = "en",
                       keep_pools: bool = True) -> ExemplarBank:
    """Sample one exemplar set per (type, size, seed) from typed questions.

    Uniform draws without replacement, deterministic per seed; the draw order
    becomes the permanent set order.
    """
    sizes = sorted(set(sizes))
    pools = _pools_by_type(typed)
    need = max(sizes)
    for qtype in QUESTION_TYPES:
        if len(pools[qtype]) < need:
            raise ExemplarPoolError(
                f"type {qtype.value} has {len(pools[qtype])} questions, "
                f"need at least {need}",
                qtype=qtype,
            )
    bank = ExemplarBank()
    for qtype in QUESTION_TYPES:
        for size in sizes:
            for seed in seeds:
                bank.add(
                    _sample_set(pools[qtype], language, qtype, size, seed,
                                salt=qtype.index),
                    PROVENANCE_HUMAN,
                )
        if keep_pools:
            bank.pools[(language, qtype.value)] = tuple(pools[qtype])
    return bank


def build_target_bank(questions: list[str], language: str,
                      translator: TranslatorInterface,
                      lexicon: AuxiliaryLexicon = DEFAULT_LEXICON,
                      sizes=STANDARD_SIZES, seeds=(0, 1, 2, 3, 4),
                      keep_pools: bool = True) -> ExemplarBank:
    """Type target-language questions via their English translations.

    The stored exemplars are the original target-language strings; questions
    whose translation does not fit any of the eight categories are dropped
    from the pools.
    """
    typed = []
    for question in questions:
        english = translator.translate(question, language, "en")
        qtype = classify_rule(english, lexicon) if english.strip() else None
        if qtype is None:
            continue
        typed.append(TypedQuestion(question, qtype))
    return build_english_bank(typed, sizes=sizes, seeds=seeds,
                              language=language, keep_pools=keep_pools)


def build_translated_bank(typed_english: list[TypedQuestion], language: str,
                          translator: TranslatorInterface,
                          sizes=STANDARD_SIZES, seeds=(0, 1, 2, 3, 4)) -> ExemplarBank:
    """Ablation variant: exemplars are machine translations of English questions."""
    english_bank = build_english_bank(typed_english, sizes=sizes, seeds=seeds,
                                      language="en", keep_pools=False)
    bank = ExemplarBank()
    for key, exemplar_set in english_bank.sets.items():
        translated = []
        for question in exemplar_set.questions:
            out = translator.translate(question, "en", language)
            if out in translated:  # keep the no-duplicates invariant
                out = f"{out} ({len(translated)})"
            translated.append(out)
        bank.add(
            ExemplarSet(
                language=language,
                qtype=exemplar_set.qtype,
                size=exemplar_set.size,
                seed=exemplar_set.seed,
                questions=tuple(translated),
            ),
            PROVENANCE_TRANSLATED,
        )
    return bank


def build_typeless_bank(typed: list[TypedQuestion], per_type: int = 2,
                        seed: int = 0, language: str = "en") -> ExemplarSet:
    """One set covering all eight types, ordered by (type, draw order)."""
    pools = _pools_by_type(typed)
    questions: list[str] = []
    for qtype in QUESTION_TYPES:
        pool = pools[qtype]
        if len(pool) < per_type:
            raise ExemplarPoolError(
                f"type {qtype.value} has {len(pool)} questions, need {per_type}",
                qtype=qtype,
            )
        rng = np.random.default_rng([seed, qtype.index, per_type])
        picks = rng.choice(len(pool), size=per_type, replace=False)
        questions.extend(pool[i] for i in picks)
    return ExemplarSet(
        language=language,
        qtype=TYPELESS,
        size=8 * per_type,
        seed=seed,
        questions=tuple(questions),
    )


def select_exemplars(bank: ExemplarBank, language: str, qtype, size: int,
                     seed: int) -> ExemplarSet:
    """Return the stored set unchanged; no resampling ever happens here."""
    return bank.get(language, qtype, size, seed)
