"""Benchmark the numba kernels against the pure-numpy fallbacks.

Runs each hot kernel on training-shaped inputs and reports per-call times
for both paths plus the speedup.  A full reference-model training step is
timed at the end under whichever kernel path the XLQG_KERNELS env flag
selected for this process (default: numba when available).

Usage:
    python benchmarks/bench_kernels.py [--repeats 50]
    XLQG_KERNELS=numpy python benchmarks/bench_kernels.py   # fallback path
"""

import argparse
import time

import numpy as np

from xlqg import kernels
from xlqg.kernels import numpy_impl

try:
    from xlqg.kernels import numba_impl
except ImportError:
    numba_impl = None


def timeit(fn, repeats):
    fn()  # warm-up (and JIT compile on the numba side)
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_kernels(repeats):
    rng = np.random.default_rng(0)
    rows, width = 2048, 96          # attention-row shaped
    vocab = 512
    x = rng.normal(size=(rows, width))
    gain = np.ones(width)
    bias = np.zeros(width)
    probs = numpy_impl.softmax_rows(x)
    dprobs = rng.normal(size=(rows, width))
    logits = rng.normal(size=(rows, vocab))
    targets = rng.integers(0, vocab, size=rows)
    mask = (rng.random(rows) > 0.1).astype(np.float64)
    param = rng.normal(size=65536)
    grad = rng.normal(size=65536)
    m = np.zeros_like(param)
    v = np.zeros_like(param)
    ids = rng.integers(0, vocab, size=rows)
    dout = rng.normal(size=(rows, width))
    dtable = np.zeros((vocab, width))
    seq_a = rng.integers(0, 30, size=40)
    seq_b = rng.integers(0, 30, size=40)

    cases = [
        ("softmax_rows", lambda impl: impl.softmax_rows(x)),
        ("softmax_backward", lambda impl: impl.softmax_rows_backward(probs, dprobs)),
        ("layer_norm_forward", lambda impl: impl.layer_norm_forward(x, gain, bias, 1e-5)),
        ("cross_entropy", lambda impl: impl.cross_entropy(logits, targets, mask)),
        ("adamw_update", lambda impl: impl.adamw_update(
            param.copy(), grad, m.copy(), v.copy(), 1e-3, 0.9, 0.999, 1e-8, 0.01, 10)),
        ("embedding_grad", lambda impl: impl.embedding_grad(ids, dout, dtable.copy())),
        ("lcs_length", lambda impl: impl.lcs_length(seq_a, seq_b)),
    ]

    print(f"{'kernel':<20} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for name, call in cases:
        t_np = timeit(lambda: call(numpy_impl), repeats) * 1e3
        if numba_impl is None:
            print(f"{name:<20} {t_np:>12.3f} {'n/a':>12} {'n/a':>9}")
            continue
        t_nb = timeit(lambda: call(numba_impl), repeats) * 1e3
        print(f"{name:<20} {t_np:>12.3f} {t_nb:>12.3f} {t_np / t_nb:>8.1f}x")


def bench_training_step(repeats):
    from xlqg.backend import AdamW, EOS, ModelConfig, Seq2SeqTransformer, WhitespaceTokenizer

    words = " ".join(f"w{i}" for i in range(300))
    tok = WhitespaceTokenizer.train([words])
    model = Seq2SeqTransformer(
        tok,
        ModelConfig(d_model=64, n_heads=4, n_encoder_layers=2,
                    n_decoder_layers=2, d_ff=128, max_source_len=64,
                    max_target_len=12),
        seed=0,
    )
    optimizer = AdamW(model.store, lr=1e-3, warmup_steps=10)
    rng = np.random.default_rng(0)
    src = [list(rng.integers(7, tok.vocab_size, size=48)) for _ in range(16)]
    tgt = [list(rng.integers(7, tok.vocab_size, size=8)) + [EOS] for _ in range(16)]

    def step():
        model.store.zero_grads()
        model.loss_and_grads(src, tgt)
        optimizer.step()

    t = timeit(step, repeats) * 1e3
    print(f"\ntraining step (B=16, S=48, T=9, d=64) "
          f"under '{kernels.KERNEL_BACKEND}' kernels: {t:.1f} ms")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()
    print(f"active kernel backend: {kernels.KERNEL_BACKEND}\n")
    bench_kernels(args.repeats)
    bench_training_step(max(5, args.repeats // 5))


if __name__ == "__main__":
    main()
