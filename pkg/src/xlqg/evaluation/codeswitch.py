"""Code-switching detection for generated questions.

A question is labelled by how much of it is in the target language: below a
70% proportion it counts as fully code-switched; at or above the threshold
it is "interrogative" code-switched if it still contains an English
interrogative expression, and clean otherwise.  Language proportion comes
from a pluggable identifier; the bundled heuristic uses Unicode script
ranges for languages written in non-Latin scripts and word lists for the
rest.  Proportion is token-based for whitespace-delimited languages and
character-based for languages written without spaces.
"""

from __future__ import annotations

import csv
import re
import unicodedata
from collections import Counter
from enum import Enum
from pathlib import Path

from ..toy import TOY_SRC, TOY_TGT, toy_wordlist


class CodeSwitchLabel(Enum):
    NONE = "none"
    INTERROGATIVE = "interrogative"
    FULL = "full"


TARGET_PROPORTION_THRESHOLD = 0.70

# Unicode letter ranges for the supported no-whitespace / non-Latin scripts.
SCRIPT_RANGES: dict[str, tuple[tuple[int, int], ...]] = {
    "zh": ((0x4E00, 0x9FFF), (0x3400, 0x4DBF), (0xF900, 0xFAFF)),
    "ko": ((0xAC00, 0xD7AF), (0x1100, 0x11FF), (0x3130, 0x318F)),
    "hi": ((0x0900, 0x097F),),
    "bn": ((0x0980, 0x09FF),),
    "te": ((0x0C00, 0x0C7F),),
}

# Languages whose proportion is measured over characters, not tokens.
CHARACTER_BASED = {"zh"}

# Small bundled function-word lists; real deployments plug in a proper
# identifier behind the same interface.
_WORDLISTS: dict[str, frozenset[str]] = {
    "en": frozenset("the a an is are was were do does did what which who when where why how of in on to and or for with".split()),
    "de": frozenset("der die das ist sind war waren ein eine wo wer wann warum wie was und oder zu mit von für".split()),
    "fi": frozenset("on ovat oli olivat mikä mitä kuka missä milloin miksi miten kuinka ja tai".split()),
    "id": frozenset("yang adalah apa siapa kapan dimana mengapa bagaimana dan atau di ke dari untuk".split()),
    "sw": frozenset("ni na ya wa kwa nini nani lini wapi gani vipi je au katika".split()),
    TOY_SRC: toy_wordlist(TOY_SRC),
    TOY_TGT: toy_wordlist(TOY_TGT),
}

DEFAULT_INTERROGATIVE_LEXICON = frozenset({
    "what", "which", "who", "when", "where", "why", "how",
    "how long", "how many", "how much", "how old", "how far",
    "how did", "how do", "how does", "how is", "how are", "how was", "how were",
    "when did", "when was", "when is",
    "what is", "what was",
})


class StubIdentifier:
    """Fixed proportions for tests: per-text overrides plus a default."""

    def __init__(self, default: float = 1.0, by_text: dict[str, float] | None = None):
        self.default = default
        self.by_text = dict(by_text or {})

    def proportion(self, text: str, language: str) -> float:
        return self.by_text.get(text, self.default)


class HeuristicIdentifier:
    """Deterministic script/wordlist language-proportion estimate."""

    def __init__(self, wordlists: dict[str, frozenset[str]] | None = None):
        self.wordlists = dict(_WORDLISTS)
        if wordlists:
            self.wordlists.update(wordlists)

    def proportion(self, text: str, language: str) -> float:
        if language in CHARACTER_BASED:
            return self._character_proportion(text, language)
        if language in SCRIPT_RANGES:
            return self._script_token_proportion(text, language)
        return self._wordlist_proportion(text, language)

    @staticmethod
    def _in_ranges(ch: str, ranges) -> bool:
        code = ord(ch)
        return any(lo <= code <= hi for lo, hi in ranges)

    def _character_proportion(self, text: str, language: str) -> float:
        letters = [ch for ch in text if unicodedata.category(ch).startswith("L")]
        if not letters:
            return 1.0
        hits = sum(self._in_ranges(ch, SCRIPT_RANGES[language]) for ch in letters)
        return hits / len(letters)

    def _script_token_proportion(self, text: str, language: str) -> float:
        tokens = [t for t in text.split()
                  if any(unicodedata.category(ch).startswith("L") for ch in t)]
        if not tokens:
            return 1.0
        ranges = SCRIPT_RANGES[language]
        hits = sum(
            any(self._in_ranges(ch, ranges) for ch in token) for token in tokens
        )
        return hits / len(tokens)

    def _wordlist_proportion(self, text: str, language: str) -> float:
        words = self.wordlists.get(language)
        if words is None:
            raise ValueError(f"no wordlist or script table for language {language!r}")
        tokens = [
            "".join(ch for ch in token.lower()
                    if not unicodedata.category(ch).startswith("P"))
            for token in text.split()
        ]
        tokens = [t for t in tokens if t]
        if not tokens:
            return 1.0
        return sum(t in words for t in tokens) / len(tokens)


def contains_interrogative(question: str,
                           lexicon=DEFAULT_INTERROGATIVE_LEXICON) -> bool:
    """Case-insensitive word-boundary search for any lexicon expression."""
    lowered = question.lower()
    for phrase in lexicon:
        if re.search(rf"(?<!\w){re.escape(phrase)}(?!\w)", lowered):
            return True
    return False


def detect_code_switching(question: str, target_language: str, identifier,
                          lexicon=DEFAULT_INTERROGATIVE_LEXICON) -> CodeSwitchLabel:
    """Three-way label: full switch, interrogative-only switch, or clean."""
    if not question.strip():
        raise ValueError("question must be non-empty")
    proportion = identifier.proportion(question, target_language)
    if proportion < TARGET_PROPORTION_THRESHOLD:
        return CodeSwitchLabel.FULL
    if contains_interrogative(question, lexicon):
        return CodeSwitchLabel.INTERROGATIVE
    return CodeSwitchLabel.NONE


def code_switch_report(records_by_model: dict[str, list], identifier,
                       lexicon=DEFAULT_INTERROGATIVE_LEXICON,
                       csv_path: str | Path | None = None) -> dict:
    """Stacked percentages per model and language.

    ``interrogative_pct`` is the patterned lower bar section (interrogative
    switching only); ``total_pct`` adds fully switched questions on top.
    Optionally emits a (model, language, label, count) CSV for plotting.
    """
    if not records_by_model or not any(records_by_model.values()):
        raise ValueError("no records to analyse")
    report: dict = {}
    rows = []
    for model, records in records_by_model.items():
        counts_by_lang: dict[str, Counter] = {}
        for record in records:
            label = detect_code_switching(record.generated_question,
                                          record.language, identifier, lexicon)
            counts_by_lang.setdefault(record.language, Counter())[label] += 1
        report[model] = {}
        for language, counts in sorted(counts_by_lang.items()):
            n = sum(counts.values())
            interrogative = counts[CodeSwitchLabel.INTERROGATIVE]
            full = counts[CodeSwitchLabel.FULL]
            report[model][language] = {
                "n": n,
                "counts": {label.value: counts[label] for label in CodeSwitchLabel},
                "interrogative_pct": 100.0 * interrogative / n,
                "total_pct": 100.0 * (interrogative + full) / n,
            }
            for label in CodeSwitchLabel:
                rows.append((model, language, label.value, counts[label]))
    if csv_path is not None:
        csv_path = Path(csv_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with csv_path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(("model", "language", "label", "count"))
            writer.writerows(rows)
    return report
