"""Transformer building blocks with hand-written forward/backward passes.

Each block owns its parameters (registered in a shared ParameterStore) and
returns an opaque cache from ``forward`` that ``backward`` consumes.  Gradient
arrays accumulate into ``Parameter.grad``; callers zero them between steps.
Row-wise reductions (softmax, layer norm) go through the kernels package so
they pick up the numba fast path when it is enabled.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from .params import ParameterStore

NEG_INF = -1e30
LN_EPS = 1e-5


def _rows(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x.reshape(-1, x.shape[-1]))


class Linear:
    def __init__(self, store: ParameterStore, name: str, group: str,
                 d_in: int, d_out: int, rng: np.random.Generator, bias: bool = True):
        scale = 1.0 / np.sqrt(d_in)
        self.w = store.add(f"{name}.w", group, rng.normal(0.0, scale, (d_in, d_out)))
        self.b = store.add(f"{name}.b", group, np.zeros(d_out)) if bias else None

    def forward(self, x: np.ndarray):
        out = x @ self.w.value
        if self.b is not None:
            out += self.b.value
        return out, x

    def backward(self, dout: np.ndarray, cache):
        x = cache
        self.w.grad += _rows(x).T @ _rows(dout)
        if self.b is not None:
            self.b.grad += _rows(dout).sum(axis=0)
        return dout @ self.w.value.T


class LayerNorm:
    def __init__(self, store: ParameterStore, name: str, group: str, d: int):
        self.gain = store.add(f"{name}.g", group, np.ones(d))
        self.bias = store.add(f"{name}.b", group, np.zeros(d))

    def forward(self, x: np.ndarray):
        shape = x.shape
        out, xhat, inv_std = kernels.layer_norm_forward(
            _rows(x), self.gain.value, self.bias.value, LN_EPS
        )
        return out.reshape(shape), (xhat, inv_std, shape)

    def backward(self, dout: np.ndarray, cache):
        xhat, inv_std, shape = cache
        dx, dgain, dbias = kernels.layer_norm_backward(
            _rows(dout), xhat, inv_std, self.gain.value
        )
        self.gain.grad += dgain
        self.bias.grad += dbias
        return dx.reshape(shape)


class MultiHeadAttention:
    """Scaled dot-product attention; self-attention when memory is the input."""

    def __init__(self, store: ParameterStore, name: str, group: str,
                 d_model: int, n_heads: int, rng: np.random.Generator):
        if d_model % n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        self.d_model = d_model
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.wq = Linear(store, f"{name}.q", group, d_model, d_model, rng, bias=False)
        self.wk = Linear(store, f"{name}.k", group, d_model, d_model, rng, bias=False)
        self.wv = Linear(store, f"{name}.v", group, d_model, d_model, rng, bias=False)
        self.wo = Linear(store, f"{name}.o", group, d_model, d_model, rng, bias=True)

    def _split(self, x: np.ndarray) -> np.ndarray:
        b, t, _ = x.shape
        return x.reshape(b, t, self.n_heads, self.d_head).transpose(0, 2, 1, 3)

    def _merge(self, x: np.ndarray) -> np.ndarray:
        b, h, t, dh = x.shape
        return np.ascontiguousarray(x.transpose(0, 2, 1, 3)).reshape(b, t, h * dh)

    def forward(self, x: np.ndarray, memory: np.ndarray, add_mask: np.ndarray):
        """x: (B,T,d) queries; memory: (B,S,d) keys/values; add_mask additive,
        broadcastable to (B,1,T,S) with NEG_INF on blocked key positions."""
        q2, qc = self.wq.forward(x)
        k2, kc = self.wk.forward(memory)
        v2, vc = self.wv.forward(memory)
        q = self._split(q2)
        k = self._split(k2)
        v = self._split(v2)
        scores = q @ k.transpose(0, 1, 3, 2) / np.sqrt(self.d_head)
        scores = scores + add_mask
        b, h, t, s = scores.shape
        att = kernels.softmax_rows(_rows(scores)).reshape(b, h, t, s)
        ctx = att @ v
        merged = self._merge(ctx)
        out, oc = self.wo.forward(merged)
        cache = (qc, kc, vc, q, k, v, att, oc)
        return out, cache

    def backward(self, dout: np.ndarray, cache):
        qc, kc, vc, q, k, v, att, oc = cache
        dmerged = self.wo.backward(dout, oc)
        b, t, _ = dmerged.shape
        dctx = dmerged.reshape(b, t, self.n_heads, self.d_head).transpose(0, 2, 1, 3)
        datt = dctx @ v.transpose(0, 1, 3, 2)
        dv = att.transpose(0, 1, 3, 2) @ dctx
        dscores = kernels.softmax_rows_backward(
            _rows(att), _rows(datt)
        ).reshape(att.shape) / np.sqrt(self.d_head)
        dq = dscores @ k
        dk = dscores.transpose(0, 1, 3, 2) @ q
        dx = self.wq.backward(self._merge(dq), qc)
        dmem = self.wk.backward(self._merge(dk), kc)
        dmem += self.wv.backward(self._merge(dv), vc)
        return dx, dmem


class FeedForward:
    def __init__(self, store: ParameterStore, name: str, group: str,
                 d_model: int, d_ff: int, rng: np.random.Generator):
        self.w1 = Linear(store, f"{name}.in", group, d_model, d_ff, rng)
        self.w2 = Linear(store, f"{name}.out", group, d_ff, d_model, rng)

    def forward(self, x: np.ndarray):
        pre, c1 = self.w1.forward(x)
        act = np.maximum(pre, 0.0)
        out, c2 = self.w2.forward(act)
        return out, (c1, pre, c2)

    def backward(self, dout: np.ndarray, cache):
        c1, pre, c2 = cache
        dact = self.w2.backward(dout, c2)
        dpre = dact * (pre > 0.0)
        return self.w1.backward(dpre, c1)


class EncoderLayer:
    """Pre-norm residual block: x + attn(LN(x)), then x + ffn(LN(x))."""

    def __init__(self, store, name, group, d_model, n_heads, d_ff, rng):
        self.ln1 = LayerNorm(store, f"{name}.ln1", group, d_model)
        self.attn = MultiHeadAttention(store, f"{name}.attn", group, d_model, n_heads, rng)
        self.ln2 = LayerNorm(store, f"{name}.ln2", group, d_model)
        self.ffn = FeedForward(store, f"{name}.ffn", group, d_model, d_ff, rng)

    def forward(self, x, add_mask):
        normed, c_ln1 = self.ln1.forward(x)
        attn_out, c_attn = self.attn.forward(normed, normed, add_mask)
        x = x + attn_out
        normed, c_ln2 = self.ln2.forward(x)
        ffn_out, c_ffn = self.ffn.forward(normed)
        return x + ffn_out, (c_ln1, c_attn, c_ln2, c_ffn)

    def backward(self, dout, cache):
        c_ln1, c_attn, c_ln2, c_ffn = cache
        dffn = self.ffn.backward(dout, c_ffn)
        dx = dout + self.ln2.backward(dffn, c_ln2)
        dattn, dmem = self.attn.backward(dx, c_attn)
        return dx + self.ln1.backward(dattn + dmem, c_ln1)


class DecoderLayer:
    """Pre-norm masked self-attention, cross-attention, feed-forward."""

    def __init__(self, store, name, group, d_model, n_heads, d_ff, rng):
        self.ln1 = LayerNorm(store, f"{name}.ln1", group, d_model)
        self.self_attn = MultiHeadAttention(store, f"{name}.self", group, d_model, n_heads, rng)
        self.ln2 = LayerNorm(store, f"{name}.ln2", group, d_model)
        self.cross_attn = MultiHeadAttention(store, f"{name}.cross", group, d_model, n_heads, rng)
        self.ln3 = LayerNorm(store, f"{name}.ln3", group, d_model)
        self.ffn = FeedForward(store, f"{name}.ffn", group, d_model, d_ff, rng)

    def forward(self, x, memory, self_mask, cross_mask):
        normed, c_ln1 = self.ln1.forward(x)
        self_out, c_self = self.self_attn.forward(normed, normed, self_mask)
        x = x + self_out
        normed, c_ln2 = self.ln2.forward(x)
        cross_out, c_cross = self.cross_attn.forward(normed, memory, cross_mask)
        x = x + cross_out
        normed, c_ln3 = self.ln3.forward(x)
        ffn_out, c_ffn = self.ffn.forward(normed)
        return x + ffn_out, (c_ln1, c_self, c_ln2, c_cross, c_ln3, c_ffn)

    def backward(self, dout, cache):
        c_ln1, c_self, c_ln2, c_cross, c_ln3, c_ffn = cache
        dffn = self.ffn.backward(dout, c_ffn)
        dx = dout + self.ln3.backward(dffn, c_ln3)
        dcross, dmem = self.cross_attn.backward(dx, c_cross)
        dx = dx + self.ln2.backward(dcross, c_ln2)
        dself, dself_mem = self.self_attn.backward(dx, c_self)
        dx = dx + self.ln1.backward(dself + dself_mem, c_ln1)
        return dx, dmem


def sinusoidal_positions(max_len: int, d_model: int) -> np.ndarray:
    """Fixed sin/cos positional table, (max_len, d_model)."""
    pos = np.arange(max_len)[:, None].astype(np.float64)
    dim = np.arange(d_model)[None, :].astype(np.float64)
    angle = pos / np.power(10000.0, (2.0 * (dim // 2)) / d_model)
    table = np.where(dim % 2 == 0, np.sin(angle), np.cos(angle))
    return table


def padding_mask(ids: np.ndarray, pad_id: int) -> np.ndarray:
    """Additive key mask (B,1,1,S): NEG_INF on pad positions."""
    blocked = (ids == pad_id)[:, None, None, :]
    return np.where(blocked, NEG_INF, 0.0)


def causal_mask(t: int) -> np.ndarray:
    """Additive causal mask (1,1,T,T): NEG_INF above the diagonal."""
    upper = np.triu(np.ones((t, t), dtype=bool), k=1)
    return np.where(upper, NEG_INF, 0.0)[None, None, :, :]
