"""Numba-compiled twins of the kernels in ``numpy_impl``.

Loop-heavy formulations so that nopython compilation pays off on the row-wise
reductions and the LCS table fill.  Kept numerically aligned with the numpy
path: same accumulation order within a row, float64 throughout.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def softmax_rows(x):
    n, m = x.shape
    out = np.empty((n, m))
    for i in range(n):
        row_max = x[i, 0]
        for j in range(1, m):
            if x[i, j] > row_max:
                row_max = x[i, j]
        total = 0.0
        for j in range(m):
            e = np.exp(x[i, j] - row_max)
            out[i, j] = e
            total += e
        for j in range(m):
            out[i, j] /= total
    return out


@njit(cache=True)
def softmax_rows_backward(probs, dprobs):
    n, m = probs.shape
    out = np.empty((n, m))
    for i in range(n):
        inner = 0.0
        for j in range(m):
            inner += dprobs[i, j] * probs[i, j]
        for j in range(m):
            out[i, j] = probs[i, j] * (dprobs[i, j] - inner)
    return out


@njit(cache=True)
def layer_norm_forward(x, gain, bias, eps):
    n, m = x.shape
    out = np.empty((n, m))
    xhat = np.empty((n, m))
    inv_std = np.empty(n)
    for i in range(n):
        mean = 0.0
        for j in range(m):
            mean += x[i, j]
        mean /= m
        var = 0.0
        for j in range(m):
            d = x[i, j] - mean
            var += d * d
        var /= m
        istd = 1.0 / np.sqrt(var + eps)
        inv_std[i] = istd
        for j in range(m):
            h = (x[i, j] - mean) * istd
            xhat[i, j] = h
            out[i, j] = h * gain[j] + bias[j]
    return out, xhat, inv_std


@njit(cache=True)
def layer_norm_backward(dout, xhat, inv_std, gain):
    n, m = xhat.shape
    dx = np.empty((n, m))
    dgain = np.zeros(m)
    dbias = np.zeros(m)
    for i in range(n):
        mean_dxhat = 0.0
        mean_dxhat_xhat = 0.0
        for j in range(m):
            dgain[j] += dout[i, j] * xhat[i, j]
            dbias[j] += dout[i, j]
            dxh = dout[i, j] * gain[j]
            mean_dxhat += dxh
            mean_dxhat_xhat += dxh * xhat[i, j]
        mean_dxhat /= m
        mean_dxhat_xhat /= m
        for j in range(m):
            dxh = dout[i, j] * gain[j]
            dx[i, j] = (dxh - mean_dxhat - xhat[i, j] * mean_dxhat_xhat) * inv_std[i]
    return dx, dgain, dbias


@njit(cache=True)
def cross_entropy(logits, targets, mask):
    n, v = logits.shape
    n_tok = 0.0
    for i in range(n):
        n_tok += mask[i]
    dlogits = np.zeros((n, v))
    if n_tok == 0.0:
        return 0.0, dlogits
    loss = 0.0
    for i in range(n):
        row_max = logits[i, 0]
        for j in range(1, v):
            if logits[i, j] > row_max:
                row_max = logits[i, j]
        z = 0.0
        for j in range(v):
            z += np.exp(logits[i, j] - row_max)
        log_z = np.log(z)
        loss -= (logits[i, targets[i]] - row_max - log_z) * mask[i]
        scale = mask[i] / n_tok
        for j in range(v):
            dlogits[i, j] = np.exp(logits[i, j] - row_max - log_z) * scale
        dlogits[i, targets[i]] -= scale
    return loss / n_tok, dlogits


@njit(cache=True)
def adamw_update(param, grad, m, v, lr, beta1, beta2, eps, weight_decay, t):
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for i in range(param.shape[0]):
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i]
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i]
        mhat = m[i] / bc1
        vhat = v[i] / bc2
        param[i] -= lr * (mhat / (np.sqrt(vhat) + eps) + weight_decay * param[i])


@njit(cache=True)
def embedding_grad(ids, dout, dtable):
    n, d = dout.shape
    for i in range(n):
        row = ids[i]
        for j in range(d):
            dtable[row, j] += dout[i, j]


@njit(cache=True)
def lcs_length(a, b):
    n = a.shape[0]
    m = b.shape[0]
    if n == 0 or m == 0:
        return 0
    prev = np.zeros(m + 1, dtype=np.int64)
    curr = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        ai = a[i]
        for j in range(m):
            if ai == b[j]:
                curr[j + 1] = prev[j] + 1
            elif prev[j + 1] > curr[j]:
                curr[j + 1] = prev[j + 1]
            else:
                curr[j + 1] = curr[j]
        tmp = prev
        prev = curr
        curr = tmp
    return int(prev[m])
