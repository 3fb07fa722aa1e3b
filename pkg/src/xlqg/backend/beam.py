"""Beam search over the reference seq2seq model.

Hypotheses are ranked during search by cumulative log-probability; the final
winner among completed hypotheses is chosen by length-normalized score
(cumulative log-probability divided by generated length).  Beam size 1
reduces to greedy decoding.  Fully deterministic: candidate ties break on
(beam index, token id).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tokenizers import BOS, EOS
from .transformer import Seq2SeqTransformer, pad_batch


@dataclass
class Hypothesis:
    tokens: list[int]  # generated tokens, EOS excluded
    logprob: float
    finished: bool

    @property
    def normalized_score(self) -> float:
        return self.logprob / max(1, len(self.tokens) + (1 if self.finished else 0))


def beam_decode(model: Seq2SeqTransformer, source: list[int],
                beam_size: int = 4, max_length: int | None = None) -> list[int]:
    """Highest length-normalized-score completed hypothesis for one source."""
    hyp = beam_decode_with_score(model, source, beam_size, max_length)
    return hyp.tokens


def beam_decode_with_score(model: Seq2SeqTransformer, source: list[int],
                           beam_size: int = 4,
                           max_length: int | None = None) -> Hypothesis:
    if beam_size < 1:
        raise ValueError(f"beam_size must be >= 1, got {beam_size}")
    if max_length is None:
        max_length = model.config.max_target_len
    max_length = min(max_length, model.config.max_target_len)

    memory, src_ids, _ = model.encode([source])
    beams = [Hypothesis(tokens=[], logprob=0.0, finished=False)]
    completed: list[Hypothesis] = []

    for _ in range(max_length):
        active = [h for h in beams if not h.finished]
        if not active:
            break
        prefixes = pad_batch([[BOS] + h.tokens for h in active],
                             max_length + 1)
        mem = np.repeat(memory, len(active), axis=0)
        src = np.repeat(src_ids, len(active), axis=0)
        logprobs = model.next_token_logprobs(mem, src, prefixes)

        candidates = []  # (-score, beam_idx, token, hypothesis fields)
        for bi, h in enumerate(active):
            row = logprobs[bi]
            top = np.argsort(-row, kind="stable")[: beam_size + 1]
            for token in top:
                candidates.append((-(h.logprob + float(row[token])), bi, int(token)))
        candidates.sort()

        next_beams: list[Hypothesis] = []
        for neg_score, bi, token in candidates:
            if len(next_beams) == beam_size:
                break
            parent = active[bi]
            if token == EOS:
                completed.append(
                    Hypothesis(parent.tokens, -neg_score, finished=True)
                )
            else:
                next_beams.append(
                    Hypothesis(parent.tokens + [token], -neg_score, finished=False)
                )
        beams = next_beams
        if len(completed) >= beam_size:
            break

    if not completed:
        completed = beams or [Hypothesis(tokens=[], logprob=-np.inf, finished=False)]
    completed.sort(key=lambda h: (-h.normalized_score, h.tokens))
    return completed[0]
