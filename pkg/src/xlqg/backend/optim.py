"""Decoupled-weight-decay first-order optimizer with linear warmup.

Only parameters in trainable groups are touched; moment state is keyed by
parameter name so a later unfreeze starts fresh moments rather than stale
ones.  The update itself is the fused kernel from the kernels package.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from .params import ParameterStore


class AdamW:
    def __init__(self, store: ParameterStore, lr: float = 5e-4,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 weight_decay: float = 0.01, warmup_steps: int = 100,
                 total_steps: int | None = None, schedule: str = "warmup_constant"):
        if schedule not in ("warmup_constant", "warmup_linear_decay"):
            raise ValueError(f"unknown schedule {schedule!r}")
        if schedule == "warmup_linear_decay" and not total_steps:
            raise ValueError("warmup_linear_decay needs total_steps")
        self.store = store
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.warmup_steps = max(1, warmup_steps)
        self.total_steps = total_steps
        self.schedule = schedule
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def lr_at(self, t: int) -> float:
        warm = min(1.0, t / self.warmup_steps)
        if self.schedule == "warmup_constant":
            return self.lr * warm
        span = max(1, self.total_steps - self.warmup_steps)
        decay = max(0.0, (self.total_steps - t) / span)
        return self.lr * min(warm, decay)

    def step(self) -> float:
        """Apply one update to all trainable parameters; returns the lr used."""
        self.t += 1
        lr_t = self.lr_at(self.t)
        for p in self.store.trainable_parameters():
            if p.name not in self._m:
                self._m[p.name] = np.zeros(p.value.size)
                self._v[p.name] = np.zeros(p.value.size)
            kernels.adamw_update(
                p.value.reshape(-1), p.grad.reshape(-1),
                self._m[p.name], self._v[p.name],
                lr_t, self.beta1, self.beta2, self.eps, self.weight_decay, self.t,
            )
        return lr_t
