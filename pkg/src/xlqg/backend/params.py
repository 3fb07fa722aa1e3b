"""Parameter storage with named groups and a freezing contract.

Every model parameter belongs to exactly one of four groups: embeddings,
encoder, decoder, head.  Optimizers touch only parameters whose group is
currently trainable, so frozen groups stay bitwise identical across any
number of steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GROUP_NAMES = ("embeddings", "encoder", "decoder", "head")


@dataclass
class ParameterGroup:
    name: str
    trainable: bool


class Parameter:
    __slots__ = ("name", "group", "value", "grad")

    def __init__(self, name: str, group: str, value: np.ndarray):
        self.name = name
        self.group = group
        self.value = value
        self.grad = np.zeros_like(value)

    def __repr__(self):
        return f"Parameter({self.name}, group={self.group}, shape={self.value.shape})"


class ParameterStore:
    """Flat registry of named parameters partitioned into the four groups."""

    def __init__(self, groups=GROUP_NAMES):
        self._params: dict[str, Parameter] = {}
        self.groups = tuple(groups)
        self._trainable: set[str] = set(self.groups)

    def add(self, name: str, group: str, value: np.ndarray) -> Parameter:
        if group not in self.groups:
            raise ValueError(f"unknown parameter group {group!r}")
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        param = Parameter(name, group, np.ascontiguousarray(value, dtype=np.float64))
        self._params[name] = param
        return param

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __iter__(self):
        return iter(self._params.values())

    def __len__(self):
        return len(self._params)

    @property
    def parameter_groups(self) -> list[ParameterGroup]:
        return [ParameterGroup(g, g in self._trainable) for g in self.groups]

    @property
    def trainable_groups(self) -> frozenset[str]:
        return frozenset(self._trainable)

    def set_trainable_groups(self, names) -> None:
        names = set(names)
        unknown = names - set(self.groups)
        if unknown:
            raise ValueError(f"unknown parameter group(s): {sorted(unknown)}")
        self._trainable = names

    def trainable_parameters(self):
        return [p for p in self._params.values() if p.group in self._trainable]

    def zero_grads(self) -> None:
        for p in self._params.values():
            p.grad.fill(0.0)

    def n_parameters(self) -> int:
        return sum(p.value.size for p in self._params.values())

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.value.copy() for name, p in self._params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        missing = set(self._params) - set(state)
        if missing:
            raise ValueError(f"state dict missing parameters: {sorted(missing)[:5]}")
        for name, p in self._params.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != p.value.shape:
                raise ValueError(
                    f"shape mismatch for {name}: {arr.shape} vs {p.value.shape}"
                )
            p.value[...] = arr
