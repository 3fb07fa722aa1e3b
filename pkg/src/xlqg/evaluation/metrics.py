"""Text-overlap metrics: BLEU4, METEOR, ROUGE-L, and subword ROUGE.

All scores live in [0, 1].  ROUGE-L is the mean sentence-level LCS F1;
the subword variant runs the same computation over the pieces of a subword
tokenizer, which makes it usable for languages written without spaces.
BLEU4 is corpus-level with brevity penalty (a smoothed sentence-level helper
is available).  METEOR uses exact matching everywhere plus a light stem
stage for English, with alpha=0.9, beta=3.0, gamma=0.5.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from .. import kernels
from ..backend.tokenizers import Tokenizer

METRIC_NAMES = ("bleu4", "meteor", "rouge_l", "sp_rouge")


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def _lcs(a: list, b: list) -> int:
    table: dict = {}
    for tok in a:
        table.setdefault(tok, len(table))
    for tok in b:
        table.setdefault(tok, len(table))
    ai = np.asarray([table[t] for t in a], dtype=np.int64)
    bi = np.asarray([table[t] for t in b], dtype=np.int64)
    return kernels.lcs_length(ai, bi)


def lcs_f1(pred_tokens: list, ref_tokens: list) -> float:
    """LCS-based F1 between two token sequences."""
    if not pred_tokens or not ref_tokens:
        return 0.0
    lcs = _lcs(pred_tokens, ref_tokens)
    if lcs == 0:
        return 0.0
    precision = lcs / len(pred_tokens)
    recall = lcs / len(ref_tokens)
    return 2 * precision * recall / (precision + recall)


def rouge_l(predictions: list[str], references: list[str]) -> float:
    """Mean sentence-level LCS F1 over whitespace tokens (lowercased)."""
    _check_lengths(predictions, references)
    scores = [lcs_f1(_tokens(p), _tokens(r))
              for p, r in zip(predictions, references)]
    return float(np.mean(scores))


def sp_rouge(predictions: list[str], references: list[str],
             subword_model: Tokenizer) -> float:
    """ROUGE-L over subword pieces instead of whitespace tokens."""
    _check_lengths(predictions, references)
    if subword_model is None:
        raise ValueError("sp_rouge requires a subword tokenizer")
    scores = [
        lcs_f1(subword_model.pieces(p.lower()), subword_model.pieces(r.lower()))
        for p, r in zip(predictions, references)
    ]
    return float(np.mean(scores))


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i: i + n]) for i in range(len(tokens) - n + 1))


def bleu4(predictions: list[str], references: list[str]) -> float:
    """Corpus-level BLEU with 4-gram precision and brevity penalty."""
    _check_lengths(predictions, references)
    matched = [0] * 4
    total = [0] * 4
    pred_len = 0
    ref_len = 0
    for pred, ref in zip(predictions, references):
        p_tok, r_tok = _tokens(pred), _tokens(ref)
        pred_len += len(p_tok)
        ref_len += len(r_tok)
        for n in range(1, 5):
            p_counts = _ngrams(p_tok, n)
            r_counts = _ngrams(r_tok, n)
            total[n - 1] += sum(p_counts.values())
            matched[n - 1] += sum(min(c, r_counts[g]) for g, c in p_counts.items())
    if pred_len == 0 or any(t == 0 for t in total) or any(m == 0 for m in matched):
        return 0.0
    log_prec = sum(math.log(m / t) for m, t in zip(matched, total)) / 4.0
    bp = 1.0 if pred_len > ref_len else math.exp(1.0 - ref_len / pred_len)
    return float(bp * math.exp(log_prec))


def sentence_bleu4(prediction: str, reference: str, smooth_add: float = 1.0) -> float:
    """Add-k smoothed sentence-level BLEU, for per-example diagnostics."""
    p_tok, r_tok = _tokens(prediction), _tokens(reference)
    if not p_tok or not r_tok:
        return 0.0
    log_prec = 0.0
    for n in range(1, 5):
        p_counts = _ngrams(p_tok, n)
        r_counts = _ngrams(r_tok, n)
        total = sum(p_counts.values())
        matched = sum(min(c, r_counts[g]) for g, c in p_counts.items())
        log_prec += math.log((matched + smooth_add) / (total + smooth_add)) / 4.0
    bp = 1.0 if len(p_tok) > len(r_tok) else math.exp(1.0 - len(r_tok) / max(1, len(p_tok)))
    return float(bp * math.exp(log_prec))


# --- METEOR -----------------------------------------------------------------

METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5


def light_stem(word: str) -> str:
    """Small English suffix stripper for the METEOR stem stage.

    Rules, applied once in order: -ies -> -y; -ing / -ed dropped on words
    long enough to keep a 3+ letter stem; -es then -s dropped (not -ss).
    """
    if len(word) > 4 and word.endswith("ies"):
        return word[:-3] + "y"
    if len(word) > 5 and word.endswith("ing"):
        return word[:-3]
    if len(word) > 4 and word.endswith("ed"):
        return word[:-2]
    if len(word) > 3 and word.endswith("es"):
        return word[:-2]
    if len(word) > 2 and word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    return word


def _greedy_stage(pred_tokens, ref_tokens, pred_free, ref_free, key):
    pairs = []
    for i in pred_free:
        want = key(pred_tokens[i])
        for j in ref_free:
            if key(ref_tokens[j]) == want:
                pairs.append((i, j))
                ref_free.remove(j)
                break
    for i, _ in pairs:
        pred_free.remove(i)
    return pairs


def meteor_alignment(pred_tokens: list[str], ref_tokens: list[str],
                     use_stem: bool) -> tuple[int, int]:
    """(match count, chunk count) from exact-then-stem greedy alignment."""
    pred_free = list(range(len(pred_tokens)))
    ref_free = list(range(len(ref_tokens)))
    pairs = _greedy_stage(pred_tokens, ref_tokens, pred_free, ref_free,
                          key=lambda w: w)
    if use_stem:
        pairs += _greedy_stage(pred_tokens, ref_tokens, pred_free, ref_free,
                               key=light_stem)
    if not pairs:
        return 0, 0
    pairs.sort()
    chunks = 1
    for (i1, j1), (i2, j2) in zip(pairs, pairs[1:]):
        if not (i2 == i1 + 1 and j2 == j1 + 1):
            chunks += 1
    return len(pairs), chunks


def meteor(predictions: list[str], references: list[str],
           language: str = "en") -> float:
    """System-level METEOR: counts aggregate over all pairs before scoring.

    The stem stage runs for English only; other languages use exact matches.
    """
    _check_lengths(predictions, references)
    use_stem = language == "en"
    total_m = total_chunks = total_pred = total_ref = 0
    for pred, ref in zip(predictions, references):
        p_tok, r_tok = _tokens(pred), _tokens(ref)
        m, chunks = meteor_alignment(p_tok, r_tok, use_stem)
        total_m += m
        total_chunks += chunks
        total_pred += len(p_tok)
        total_ref += len(r_tok)
    if total_m == 0 or total_pred == 0 or total_ref == 0:
        return 0.0
    precision = total_m / total_pred
    recall = total_m / total_ref
    f_mean = precision * recall / (METEOR_ALPHA * precision + (1 - METEOR_ALPHA) * recall)
    penalty = METEOR_GAMMA * (total_chunks / total_m) ** METEOR_BETA
    return float(f_mean * (1.0 - penalty))


# --- dispatch and aggregation -------------------------------------------------

def _check_lengths(predictions, references):
    if len(predictions) != len(references):
        raise ValueError(
            f"got {len(predictions)} predictions vs {len(references)} references"
        )
    if not predictions:
        raise ValueError("need at least one prediction/reference pair")


def compute_metric(name: str, predictions: list[str], references: list[str],
                   language: str = "en",
                   subword_model: Tokenizer | None = None) -> float:
    """Uniform entry point over the four metric names."""
    if name not in METRIC_NAMES:
        raise ValueError(f"unknown metric {name!r}; choose from {METRIC_NAMES}")
    if name == "bleu4":
        return bleu4(predictions, references)
    if name == "meteor":
        return meteor(predictions, references, language)
    if name == "rouge_l":
        return rouge_l(predictions, references)
    if subword_model is None:
        raise ValueError("sp_rouge requires a subword_model")
    return sp_rouge(predictions, references, subword_model)


def aggregate_runs(per_run_scores: list[float]) -> tuple[float, float]:
    """(mean, sample standard deviation); a single run has std 0 by convention."""
    if not per_run_scores:
        raise ValueError("no run scores to aggregate")
    values = np.asarray(per_run_scores, dtype=np.float64)
    mean = float(values.mean())
    if len(values) == 1:
        return mean, 0.0
    return mean, float(values.std(ddof=1))
