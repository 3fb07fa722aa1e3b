"""Denoising warm-up for the bundled backbone.

The reference transformer starts from random weights, unlike the multilingual
pretrained backbones the pipeline targets in production.  This module gives
it the same kind of footing at toy scale: a mask-and-reconstruct task over
raw sentences (typically covering every language the model must later emit),
training all parameter groups.  Encoder-only fine-tuning afterwards then has
a decoder that already knows the target-side token distributions, which is
the property the frozen-decoder transfer recipe relies on.
"""

from __future__ import annotations

import math

import numpy as np

from .optim import AdamW
from .tokenizers import EOS, MASK
from .transformer import Seq2SeqTransformer, TrainingLog


def mask_token_ids(ids: list[int], mask_ratio: float,
                   rng: np.random.Generator, mask_id: int = MASK) -> list[int]:
    """Replace ceil(ratio * len) positions, chosen without replacement, by mask_id."""
    if not 0.0 < mask_ratio < 1.0:
        raise ValueError(f"mask_ratio must be in (0,1), got {mask_ratio}")
    if not ids:
        return []
    n_mask = math.ceil(mask_ratio * len(ids))
    positions = rng.choice(len(ids), size=n_mask, replace=False)
    corrupted = list(ids)
    for pos in positions:
        corrupted[pos] = mask_id
    return corrupted


def pretrain_denoising(model: Seq2SeqTransformer, texts: list[str], steps: int,
                       batch_size: int = 16, lr: float = 3e-3,
                       mask_ratio: float = 0.3, warmup_steps: int = 50,
                       weight_decay: float = 0.0, seed: int = 0) -> TrainingLog:
    """Train all groups to reconstruct masked sentences; returns the loss log."""
    if not texts:
        raise ValueError("no pretraining texts given")
    previous_trainable = model.store.trainable_groups
    model.store.set_trainable_groups(model.store.groups)
    rng = np.random.default_rng(seed)
    encoded = [model.tokenizer.encode(t) for t in texts]
    encoded = [ids for ids in encoded if ids]
    optimizer = AdamW(model.store, lr=lr, weight_decay=weight_decay,
                      warmup_steps=warmup_steps)
    log = TrainingLog(notes={"task": "denoising", "mask_ratio": mask_ratio})
    for step in range(1, steps + 1):
        picks = rng.integers(0, len(encoded), size=batch_size)
        src, tgt = [], []
        for i in picks:
            ids = encoded[i]
            src.append(mask_token_ids(ids, mask_ratio, rng))
            tgt.append(ids + [EOS])
        model.store.zero_grads()
        loss = model.loss_and_grads(src, tgt)
        optimizer.step()
        log.record(step, loss)
    model.store.set_trainable_groups(previous_trainable)
    return log
