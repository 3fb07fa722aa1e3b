"""Rule-based typing of English wh-questions into eight categories.

A question is typed by its leading interrogative word.  "How" questions are
split two ways: followed by an auxiliary verb they ask about manner (HOW_WAY),
followed by an adjective or adverb they ask about a degree or count
(HOW_NUMBER).  Anything that does not open with a recognized interrogative is
untypeable and gets dropped by the corpus annotator.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .corpus import Corpus, QAExample


class QuestionType(Enum):
    WHEN = "When"
    WHERE = "Where"
    WHAT = "What"
    WHICH = "Which"
    WHO = "Who"
    WHY = "Why"
    HOW_WAY = "How_way"
    HOW_NUMBER = "How_number"

    @property
    def index(self) -> int:
        return QUESTION_TYPES.index(self)

    @classmethod
    def from_string(cls, value: str) -> "QuestionType":
        for member in cls:
            if member.value.lower() == value.lower():
                return member
        raise ValueError(f"unknown question type {value!r}")


# Fixed enumeration order; classifier heads and tie-breaking use these indices.
QUESTION_TYPES: tuple[QuestionType, ...] = (
    QuestionType.WHEN,
    QuestionType.WHERE,
    QuestionType.WHAT,
    QuestionType.WHICH,
    QuestionType.WHO,
    QuestionType.WHY,
    QuestionType.HOW_WAY,
    QuestionType.HOW_NUMBER,
)

# Sentinel type tag for the all-types exemplar ablation (no QTC involved).
TYPELESS = "typeless"

# Closed-set English auxiliaries used to resolve "how + aux" as manner.
DEFAULT_AUXILIARIES = frozenset({
    "do", "does", "did", "is", "are", "was", "were",
    "can", "could", "will", "would", "shall", "should",
    "may", "might", "must", "has", "have", "had",
})

# Fallback hints for the "how + adjective/adverb" branch; anything ending in
# -ly also counts as an adverb.  Kept small and overridable from a file.
DEFAULT_HOW_HINTS = frozenset({
    "many", "much", "long", "old", "far", "often", "big", "tall", "high",
    "deep", "wide", "fast", "soon", "large", "small", "heavy", "close",
    "late", "early", "strong", "accurate", "frequently",
})


@dataclass(frozen=True)
class AuxiliaryLexicon:
    """Word lists resolving the two "how" branches."""

    auxiliaries: frozenset[str] = DEFAULT_AUXILIARIES
    adjective_adverb_hint: frozenset[str] = DEFAULT_HOW_HINTS

    def __post_init__(self):
        if not self.auxiliaries or not self.adjective_adverb_hint:
            raise ValueError("lexicon word sets must be non-empty")
        overlap = self.auxiliaries & self.adjective_adverb_hint
        if overlap:
            raise ValueError(f"lexicon sets must be disjoint, overlap: {sorted(overlap)}")

    @classmethod
    def from_files(cls, auxiliaries_path: str | Path, hints_path: str | Path) -> "AuxiliaryLexicon":
        """Load both word sets from UTF-8 word-per-line files."""
        def read_words(p):
            words = set()
            for line in Path(p).read_text(encoding="utf-8").splitlines():
                word = line.strip().lower()
                if word and not word.startswith("#"):
                    words.add(word)
            return frozenset(words)
        return cls(read_words(auxiliaries_path), read_words(hints_path))


DEFAULT_LEXICON = AuxiliaryLexicon()


@dataclass(frozen=True)
class TypedQuestion:
    question: str
    qtype: QuestionType


def _strip_punct(token: str) -> str:
    return "".join(ch for ch in token if not unicodedata.category(ch).startswith("P"))


def _leading_tokens(question: str, n: int = 2) -> list[str]:
    tokens = []
    for raw in question.split():
        token = _strip_punct(raw).lower()
        if token:
            tokens.append(token)
        if len(tokens) == n:
            break
    return tokens


def classify_rule(question: str, lexicon: AuxiliaryLexicon = DEFAULT_LEXICON) -> QuestionType | None:
    """Type an English question by its leading interrogative word.

    Returns None for questions that do not fit the eight categories (yes/no
    questions, imperatives, ...).  Pure and case-insensitive; leading quotes
    and punctuation are ignored.
    """
    if not question or not question.strip():
        raise ValueError("question must be non-empty")
    tokens = _leading_tokens(question)
    if not tokens:
        return None
    head = tokens[0]
    if head == "when":
        return QuestionType.WHEN
    if head == "where":
        return QuestionType.WHERE
    if head == "what":
        return QuestionType.WHAT
    if head == "which":
        return QuestionType.WHICH
    if head in ("who", "whom", "whose"):
        return QuestionType.WHO
    if head == "why":
        return QuestionType.WHY
    if head == "how":
        follower = tokens[1] if len(tokens) > 1 else ""
        if follower in lexicon.auxiliaries:
            return QuestionType.HOW_WAY
        if follower in lexicon.adjective_adverb_hint or follower.endswith("ly"):
            return QuestionType.HOW_NUMBER
        # Unknown follower: manner is the safer default for verbs.
        return QuestionType.HOW_WAY
    return None


def match_labels(predicted: QuestionType, gold: QuestionType, mode: str = "hard") -> bool:
    """Compare a predicted type against gold.

    "hard" requires equality; "relaxed" additionally accepts WHAT and WHICH
    predictions for any gold label, since most wh-questions can be paraphrased
    into those forms.
    """
    if mode == "hard":
        return predicted == gold
    if mode == "relaxed":
        return predicted == gold or predicted in (QuestionType.WHAT, QuestionType.WHICH)
    raise ValueError(f"mode must be 'hard' or 'relaxed', got {mode!r}")


# Languages whose questions the lexical rules apply to directly: English and
# the bundled toy language that mimics English interrogative leads.
RULE_COMPATIBLE_LANGUAGES = frozenset({"en", "toy-src"})


def annotate_corpus(
    corpus: Corpus,
    lexicon: AuxiliaryLexicon = DEFAULT_LEXICON,
) -> tuple[list[tuple[QAExample, QuestionType]], Counter]:
    """Type every English question in a corpus, dropping untypeable ones.

    Returns the (example, type) pairs in corpus order plus a per-type count
    histogram.  Only rule-compatible corpora can be annotated directly;
    target languages go through the translated path in the exemplar bank.
    """
    if corpus.language not in RULE_COMPATIBLE_LANGUAGES:
        raise ValueError(
            f"rule annotation requires an English corpus, got {corpus.language!r}; "
            "use the translated exemplar path for target languages"
        )
    annotated = []
    histogram: Counter = Counter()
    for ex in corpus:
        qtype = classify_rule(ex.question, lexicon)
        if qtype is None:
            continue
        annotated.append((ex, qtype))
        histogram[qtype] += 1
    return annotated, histogram
