"""Evaluation: overlap metrics, code-switching analysis, human-eval tooling."""

from .codeswitch import (
    DEFAULT_INTERROGATIVE_LEXICON,
    CodeSwitchLabel,
    HeuristicIdentifier,
    StubIdentifier,
    code_switch_report,
    contains_interrogative,
    detect_code_switching,
)
from .humaneval import (
    SHEET_HEADER,
    aggregate_human_ratings,
    expand_cascade,
    export_human_eval_sheet,
    read_sheet,
)
from .metrics import (
    METRIC_NAMES,
    aggregate_runs,
    bleu4,
    compute_metric,
    lcs_f1,
    light_stem,
    meteor,
    rouge_l,
    sentence_bleu4,
    sp_rouge,
)

__all__ = [
    "CodeSwitchLabel", "DEFAULT_INTERROGATIVE_LEXICON", "HeuristicIdentifier",
    "METRIC_NAMES", "SHEET_HEADER", "StubIdentifier", "aggregate_human_ratings",
    "aggregate_runs", "bleu4", "code_switch_report", "compute_metric",
    "contains_interrogative", "detect_code_switching", "expand_cascade",
    "export_human_eval_sheet", "lcs_f1", "light_stem", "meteor", "read_sheet",
    "rouge_l", "sentence_bleu4", "sp_rouge",
]
