"""Bundled bilingual templated toy corpus.

Two tiny parallel languages with identical template structure but disjoint
function words and interrogative leads: "toy-src" reads like pidgin English
(so the lexical type rules apply to it directly) and "toy-tgt" uses
Esperanto-flavored words.  Entities, years, and numerals are shared proper
tokens.  The corpus exists so the whole pipeline, including the zero-shot
transfer effect, can be exercised on a CPU in seconds.
"""

from __future__ import annotations

import numpy as np

from .corpus import Corpus, QAExample
from .exemplars import DictionaryTranslator
from .qtypes import QUESTION_TYPES, QuestionType

TOY_SRC = "toy-src"
TOY_TGT = "toy-tgt"

ENTITIES = (
    "mira", "tomas", "anda", "kiro", "lena", "pablo", "sofi", "ilya",
    "nera", "vlado", "rika", "dario", "mina", "zoltan", "petra", "emilio",
)
YEARS = tuple(str(y) for y in range(1990, 2010))
NUMBERS = ("2", "3", "4", "5", "6", "7", "8", "9")

SRC_SLOTS = {
    "place": ("london", "berlin", "lima", "cairo", "oslo", "quito"),
    "thing": ("bridge", "boat", "mill", "tower", "cart", "kite"),
    "team": ("red", "blue", "green", "amber", "violet", "gray"),
    "reason": ("rain", "debt", "war", "fear", "hunger", "storms"),
    "mode": ("train", "ship", "horse", "wagon", "foot", "sled"),
    "item": ("apples", "ropes", "lamps", "coins", "maps", "jars"),
}
TGT_SLOTS = {
    "place": ("londono", "berlino", "limao", "kairuo", "osloro", "kituo"),
    "thing": ("ponto", "barko", "muelo", "turbo", "cxaro", "kajto"),
    "team": ("rugxa", "blua", "verda", "ambra", "viola", "griza"),
    "reason": ("pluvo", "sxuldo", "milito", "timo", "malsato", "sxtormo"),
    "mode": ("trajno", "sxipo", "cxevalo", "vagono", "piedo", "sledo"),
    "item": ("pomoj", "sxnuroj", "lampoj", "moneroj", "mapoj", "vazoj"),
}

SOURCE_INTERROGATIVES = ("when", "where", "what", "which", "who", "why", "how")
TARGET_INTERROGATIVES = ("kiam", "kie", "kio", "kiu", "kiun", "kial", "kiel", "kiom")

# statement template, question template, answer slot
_SRC_TEMPLATES = {
    QuestionType.WHEN: ("{e} arrived in {year} .", "when did {e} arrive ?", "year"),
    QuestionType.WHERE: ("{e} lives in {place} .", "where does {e} live ?", "place"),
    QuestionType.WHAT: ("{e} builds a {thing} .", "what does {e} build ?", "thing"),
    QuestionType.WHICH: ("{e} joined the {team} team .", "which team did {e} join ?", "team"),
    QuestionType.WHO: ("{e2} met {e} .", "who met {e} ?", "e2"),
    QuestionType.WHY: ("{e} left because of {reason} .", "why did {e} leave ?", "reason"),
    QuestionType.HOW_WAY: ("{e} traveled by {mode} .", "how did {e} travel ?", "mode"),
    QuestionType.HOW_NUMBER: ("{e} bought {num} {item} .", "how many {item} did {e} buy ?", "num"),
}
_TGT_TEMPLATES = {
    QuestionType.WHEN: ("{e} alvenis en {year} .", "kiam {e} alvenis ?", "year"),
    QuestionType.WHERE: ("{e} logxas en {place} .", "kie {e} logxas ?", "place"),
    QuestionType.WHAT: ("{e} konstruas {thing} .", "kio {e} konstruas ?", "thing"),
    QuestionType.WHICH: ("{e} aligxis al {team} teamo .", "kiu teamo {e} aligxis ?", "team"),
    QuestionType.WHO: ("{e2} renkontis {e} .", "kiun renkontis {e} ?", "e2"),
    QuestionType.WHY: ("{e} foriris pro {reason} .", "kial {e} foriris ?", "reason"),
    QuestionType.HOW_WAY: ("{e} vojagxis per {mode} .", "kiel {e} vojagxis ?", "mode"),
    QuestionType.HOW_NUMBER: ("{e} acxetis {num} {item} .", "kiom {item} acxetis {e} ?", "num"),
}

_WORD_TABLE_TGT_TO_SRC = {
    "kiam": "when", "kie": "where", "kio": "what", "kiu": "which",
    "kiun": "who", "kial": "why", "kiel": "how", "kiom": "how many",
    "alvenis": "arrived", "logxas": "lives", "konstruas": "builds",
    "aligxis": "joined", "renkontis": "met", "foriris": "left",
    "vojagxis": "traveled", "acxetis": "bought",
    "en": "in", "al": "to", "pro": "because", "per": "by", "teamo": "team",
}
for _slot in SRC_SLOTS:
    for _s, _t in zip(SRC_SLOTS[_slot], TGT_SLOTS[_slot]):
        _WORD_TABLE_TGT_TO_SRC[_t] = _s


def _slots(language: str) -> dict:
    return SRC_SLOTS if language == TOY_SRC else TGT_SLOTS


def _templates(language: str) -> dict:
    if language == TOY_SRC:
        return _SRC_TEMPLATES
    if language == TOY_TGT:
        return _TGT_TEMPLATES
    raise ValueError(f"not a toy language: {language!r}")


def _fill(language: str, qtype: QuestionType, rng: np.random.Generator) -> dict:
    slots = _slots(language)
    e, e2 = (ENTITIES[i] for i in rng.choice(len(ENTITIES), size=2, replace=False))
    return {
        "e": e,
        "e2": e2,
        "year": YEARS[rng.integers(len(YEARS))],
        "num": NUMBERS[rng.integers(len(NUMBERS))],
        **{name: values[rng.integers(len(values))] for name, values in slots.items()},
    }


def make_toy_example(language: str, qtype: QuestionType, rng: np.random.Generator,
                     example_id: str, n_distractors: int = 2) -> QAExample:
    """One templated example: fact statement (plus distractor facts), question, answer."""
    templates = _templates(language)
    statement_t, question_t, answer_slot = templates[qtype]
    values = _fill(language, qtype, rng)
    statement = statement_t.format(**values)
    question = question_t.format(**values)
    answer = values[answer_slot]

    other_types = [t for t in QUESTION_TYPES if t is not qtype]
    distractors = []
    for i in rng.choice(len(other_types), size=n_distractors, replace=False):
        d_type = other_types[i]
        d_values = _fill(language, d_type, rng)
        # distractors about a different subject entity keep the answer unique
        while d_values["e"] == values["e"]:
            d_values = _fill(language, d_type, rng)
        distractors.append(templates[d_type][0].format(**d_values))

    sentences = distractors[: len(distractors) // 2] + [statement] + distractors[len(distractors) // 2:]
    context = " ".join(sentences)
    return QAExample(
        id=example_id,
        language=language,
        context=context,
        question=question,
        answer_text=answer,
        answer_start=context.find(answer),
    )


def generate_toy_corpus(language: str, n: int, seed: int = 0,
                        split: str = "train", name: str | None = None) -> Corpus:
    """Balanced deterministic corpus: types assigned round-robin."""
    rng = np.random.default_rng([seed, 7 if language == TOY_SRC else 11])
    examples = []
    for i in range(n):
        qtype = QUESTION_TYPES[i % len(QUESTION_TYPES)]
        examples.append(
            make_toy_example(language, qtype, rng, f"{language}-{split}-{i:05d}")
        )
    return Corpus(name=name or f"toy-{language}-{split}", language=language,
                  split=split, examples=tuple(examples))


def toy_pretraining_texts(n_per_language: int = 400, seed: int = 0) -> list[str]:
    """Raw sentences (statements and questions) from both toy languages.

    This is the stand-in for the multilingual pretraining corpus: it teaches
    the backbone both languages before any task fine-tuning happens.
    """
    texts = []
    for language, salt in ((TOY_SRC, 3), (TOY_TGT, 5)):
        rng = np.random.default_rng([seed, salt])
        templates = _templates(language)
        for i in range(n_per_language):
            qtype = QUESTION_TYPES[i % len(QUESTION_TYPES)]
            statement_t, question_t, _ = templates[qtype]
            values = _fill(language, qtype, rng)
            texts.append(statement_t.format(**values))
            texts.append(question_t.format(**values))
    return texts


def toy_translator() -> DictionaryTranslator:
    """Word-table stub translating toy-tgt into toy-src (pidgin-English)."""
    return DictionaryTranslator(word_table=dict(_WORD_TABLE_TGT_TO_SRC))


def toy_question_patterns(language: str) -> list[tuple[str, ...]]:
    """Question templates as token patterns; slot tokens become wildcards."""
    patterns = []
    for _, question_t, _ in _templates(language).values():
        pattern = tuple(
            "*" if token.startswith("{") else token
            for token in question_t.split()
        )
        patterns.append(pattern)
    return patterns


def toy_grammar_check(question: str, language: str) -> bool:
    """Does the question instantiate one of the language's templates?

    Wildcards must be filled with in-language (or shared) vocabulary.
    """
    tokens = tuple(question.split())
    vocabulary = toy_wordlist(language)
    for pattern in toy_question_patterns(language):
        if len(pattern) != len(tokens):
            continue
        if all(p == t or (p == "*" and t in vocabulary)
               for p, t in zip(pattern, tokens)):
            return True
    return False


def toy_wordlist(language: str) -> frozenset[str]:
    """Every word the toy language can produce, shared tokens included."""
    templates = _templates(language)
    slots = _slots(language)
    words: set[str] = set(ENTITIES) | set(YEARS) | set(NUMBERS)
    for values in slots.values():
        words.update(values)
    for statement_t, question_t, _ in templates.values():
        for template in (statement_t, question_t):
            for token in template.split():
                if not (token.startswith("{") or token in (".", "?")):
                    words.add(token)
    return frozenset(words)
