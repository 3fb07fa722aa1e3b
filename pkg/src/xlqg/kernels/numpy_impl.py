"""Pure-numpy reference implementations of the hot numeric kernels.

Every function here has a jit-compiled twin in ``numba_impl`` with the same
signature and (up to floating-point association) the same output.  This module
is the fallback path used when numba is unavailable or disabled via the
``XLQG_KERNELS=numpy`` environment variable, and it doubles as the oracle the
kernel parity tests compare against.

All float arrays are float64 and C-contiguous; token id arrays are int64.
"""

import numpy as np


def softmax_rows(x):
    """Row-wise softmax over the last axis of a 2-d array."""
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_rows_backward(probs, dprobs):
    """Backprop through softmax_rows: returns d(logits)."""
    inner = (dprobs * probs).sum(axis=1, keepdims=True)
    return probs * (dprobs - inner)


def layer_norm_forward(x, gain, bias, eps):
    """Normalize rows of a 2-d array; returns (out, xhat, inv_std)."""
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * inv_std
    return xhat * gain + bias, xhat, inv_std[:, 0]


def layer_norm_backward(dout, xhat, inv_std, gain):
    """Backprop through layer_norm_forward; returns (dx, dgain, dbias)."""
    dgain = (dout * xhat).sum(axis=0)
    dbias = dout.sum(axis=0)
    dxhat = dout * gain
    term = dxhat - dxhat.mean(axis=1, keepdims=True) \
        - xhat * (dxhat * xhat).mean(axis=1, keepdims=True)
    return term * inv_std[:, None], dgain, dbias


def cross_entropy(logits, targets, mask):
    """Masked token-level cross entropy.

    logits: (N, V), targets: (N,), mask: (N,) of {0.0, 1.0}.
    Returns (mean_loss, dlogits) where dlogits is the gradient of the
    mean loss (already divided by the number of unmasked positions).
    """
    n_tok = mask.sum()
    if n_tok == 0.0:
        return 0.0, np.zeros_like(logits)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    z = exp.sum(axis=1)
    log_probs = shifted - np.log(z)[:, None]
    picked = log_probs[np.arange(logits.shape[0]), targets]
    loss = -(picked * mask).sum() / n_tok
    dlogits = np.exp(log_probs)
    dlogits[np.arange(logits.shape[0]), targets] -= 1.0
    dlogits *= (mask / n_tok)[:, None]
    return loss, dlogits


def adamw_update(param, grad, m, v, lr, beta1, beta2, eps, weight_decay, t):
    """One decoupled-weight-decay Adam step, in place on param/m/v (1-d views)."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    mhat = m / (1.0 - beta1 ** t)
    vhat = v / (1.0 - beta2 ** t)
    param -= lr * (mhat / (np.sqrt(vhat) + eps) + weight_decay * param)


def embedding_grad(ids, dout, dtable):
    """Scatter-add gradient rows into the embedding table gradient.

    ids: (N,) int64, dout: (N, d), dtable: (V, d) accumulated in place.
    """
    np.add.at(dtable, ids, dout)


def lcs_length(a, b):
    """Length of the longest common subsequence of two int64 sequences."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    prev = np.zeros(m + 1, dtype=np.int64)
    curr = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        ai = a[i]
        for j in range(m):
            if ai == b[j]:
                curr[j + 1] = prev[j] + 1
            else:
                curr[j + 1] = max(prev[j + 1], curr[j])
        prev, curr = curr, prev
    return int(prev[m])
