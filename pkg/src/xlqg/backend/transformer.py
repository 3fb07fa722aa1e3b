"""Reference backend: a small encoder-decoder transformer in plain numpy.

Deliberately desk-scale (a couple of layers, narrow width, float64) so that
the full pipeline, including training, runs on a CPU in minutes.  The output
projection is tied to the input embedding table; the only head-group
parameter of the seq2seq model is the logit bias.  Parameter groups follow
the freezing contract in ``params``.

External pretrained backbones plug in behind the same method surface; this
module is the bundled implementation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from .layers import (
    DecoderLayer,
    EncoderLayer,
    LayerNorm,
    Linear,
    causal_mask,
    padding_mask,
    sinusoidal_positions,
)
from .params import ParameterStore
from .tokenizers import BOS, CLS, PAD, Tokenizer


@dataclass(frozen=True)
class ModelConfig:
    d_model: int = 64
    n_heads: int = 4
    n_encoder_layers: int = 2
    n_decoder_layers: int = 2
    d_ff: int = 128
    max_source_len: int = 128
    max_target_len: int = 32

    def to_dict(self) -> dict:
        return {
            "d_model": self.d_model,
            "n_heads": self.n_heads,
            "n_encoder_layers": self.n_encoder_layers,
            "n_decoder_layers": self.n_decoder_layers,
            "d_ff": self.d_ff,
            "max_source_len": self.max_source_len,
            "max_target_len": self.max_target_len,
        }


@dataclass
class TrainingLog:
    """Per-step losses plus whatever periodic evaluations the loop records."""

    steps: list[int] = field(default_factory=list)
    losses: list[float] = field(default_factory=list)
    eval_steps: list[int] = field(default_factory=list)
    eval_values: list[dict] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def record(self, step: int, loss: float) -> None:
        self.steps.append(step)
        self.losses.append(float(loss))

    def record_eval(self, step: int, **values) -> None:
        self.eval_steps.append(step)
        self.eval_values.append({k: float(v) for k, v in values.items()})


def pad_batch(seqs: list[list[int]], max_len: int, pad_id: int = PAD) -> np.ndarray:
    """Right-pad (and tail-truncate) id sequences into an int64 matrix."""
    clipped = [s[:max_len] for s in seqs]
    width = max(1, max((len(s) for s in clipped), default=1))
    out = np.full((len(seqs), width), pad_id, dtype=np.int64)
    for i, s in enumerate(clipped):
        out[i, : len(s)] = s
    return out


class _EncoderStack:
    def __init__(self, store, tokenizer, config, rng):
        self.config = config
        self.embedding = store.add(
            "embedding.table",
            "embeddings",
            rng.normal(0.0, 1.0 / np.sqrt(config.d_model),
                       (tokenizer.vocab_size, config.d_model)),
        )
        # Input embeddings are scaled by sqrt(d) (the tied output projection
        # is not), keeping token and positional signals comparable.
        self.emb_scale = float(np.sqrt(config.d_model))
        self.positions = sinusoidal_positions(
            max(config.max_source_len, config.max_target_len) + 2, config.d_model
        )
        self.layers = [
            EncoderLayer(store, f"encoder.{i}", "encoder",
                         config.d_model, config.n_heads, config.d_ff, rng)
            for i in range(config.n_encoder_layers)
        ]
        self.ln_out = LayerNorm(store, "encoder.ln_out", "encoder", config.d_model)

    def embed(self, ids: np.ndarray) -> np.ndarray:
        return self.embedding.value[ids] * self.emb_scale + self.positions[: ids.shape[1]]

    def embed_backward(self, ids: np.ndarray, dout: np.ndarray) -> None:
        flat_ids = np.ascontiguousarray(ids.reshape(-1))
        flat_d = np.ascontiguousarray(dout.reshape(-1, dout.shape[-1]) * self.emb_scale)
        kernels.embedding_grad(flat_ids, flat_d, self.embedding.grad)

    def forward(self, ids: np.ndarray):
        mask = padding_mask(ids, PAD)
        x = self.embed(ids)
        caches = []
        for layer in self.layers:
            x, c = layer.forward(x, mask)
            caches.append(c)
        out, c_ln = self.ln_out.forward(x)
        return out, (ids, caches, c_ln)

    def backward(self, dout: np.ndarray, cache) -> None:
        ids, caches, c_ln = cache
        dx = self.ln_out.backward(dout, c_ln)
        for layer, c in zip(reversed(self.layers), reversed(caches)):
            dx = layer.backward(dx, c)
        self.embed_backward(ids, dx)


class Seq2SeqTransformer:
    """Encoder-decoder model with teacher forcing and tied output projection."""

    def __init__(self, tokenizer: Tokenizer, config: ModelConfig = ModelConfig(),
                 seed: int = 0):
        self.tokenizer = tokenizer
        self.config = config
        self.seed = seed
        self.store = ParameterStore()
        rng = np.random.default_rng(seed)
        self.encoder = _EncoderStack(self.store, tokenizer, config, rng)
        self.dec_layers = [
            DecoderLayer(self.store, f"decoder.{i}", "decoder",
                         config.d_model, config.n_heads, config.d_ff, rng)
            for i in range(config.n_decoder_layers)
        ]
        self.dec_ln_out = LayerNorm(self.store, "decoder.ln_out", "decoder", config.d_model)
        self.logit_bias = self.store.add(
            "head.logit_bias", "head", np.zeros(tokenizer.vocab_size)
        )

    # -- core passes -------------------------------------------------------

    def encode(self, src: list[list[int]]):
        ids = pad_batch(src, self.config.max_source_len)
        memory, cache = self.encoder.forward(ids)
        return memory, ids, cache

    def _decode(self, memory: np.ndarray, src_ids: np.ndarray, dec_in: np.ndarray):
        self_mask = causal_mask(dec_in.shape[1]) + padding_mask(dec_in, PAD)
        cross_mask = padding_mask(src_ids, PAD)
        x = self.encoder.embed(dec_in)
        caches = []
        for layer in self.dec_layers:
            x, c = layer.forward(x, memory, self_mask, cross_mask)
            caches.append(c)
        h, c_ln = self.dec_ln_out.forward(x)
        logits = h @ self.encoder.embedding.value.T + self.logit_bias.value
        return logits, (dec_in, caches, c_ln, h)

    def _decode_backward(self, dlogits: np.ndarray, cache):
        dec_in, caches, c_ln, h = cache
        flat_dl = dlogits.reshape(-1, dlogits.shape[-1])
        flat_h = h.reshape(-1, h.shape[-1])
        self.encoder.embedding.grad += flat_dl.T @ flat_h
        self.logit_bias.grad += flat_dl.sum(axis=0)
        dh = dlogits @ self.encoder.embedding.value
        dx = self.dec_ln_out.backward(dh, c_ln)
        dmem = None
        for layer, c in zip(reversed(self.dec_layers), reversed(caches)):
            dx, dm = layer.backward(dx, c)
            dmem = dm if dmem is None else dmem + dm
        self.encoder.embed_backward(dec_in, dx)
        return dmem

    def _teacher_forcing_arrays(self, src, tgt):
        src_batch = pad_batch(src, self.config.max_source_len)
        tgt_batch = pad_batch(tgt, self.config.max_target_len)
        dec_in = np.full_like(tgt_batch, PAD)
        dec_in[:, 0] = BOS
        dec_in[:, 1:] = tgt_batch[:, :-1]
        return src_batch, tgt_batch, dec_in

    def _forward_loss(self, src, tgt):
        src_ids, tgt_ids, dec_in = self._teacher_forcing_arrays(src, tgt)
        memory, enc_cache = self.encoder.forward(src_ids)
        logits, dec_cache = self._decode(memory, src_ids, dec_in)
        flat_logits = np.ascontiguousarray(logits.reshape(-1, logits.shape[-1]))
        flat_targets = np.ascontiguousarray(tgt_ids.reshape(-1))
        mask = (flat_targets != PAD).astype(np.float64)
        loss, dlogits = kernels.cross_entropy(flat_logits, flat_targets, mask)
        return loss, dlogits.reshape(logits.shape), enc_cache, dec_cache

    def teacher_forced_loss(self, src: list[list[int]], tgt: list[list[int]]) -> float:
        """Mean cross-entropy of target tokens given gold prefixes."""
        loss, _, _, _ = self._forward_loss(src, tgt)
        return float(loss)

    def loss_and_grads(self, src: list[list[int]], tgt: list[list[int]]) -> float:
        """Forward and backward; gradients accumulate into the store."""
        loss, dlogits, enc_cache, dec_cache = self._forward_loss(src, tgt)
        dmem = self._decode_backward(dlogits, dec_cache)
        self.encoder.backward(dmem, enc_cache)
        return float(loss)

    # -- inference ---------------------------------------------------------

    def next_token_logprobs(self, memory: np.ndarray, src_ids: np.ndarray,
                            prefixes: np.ndarray) -> np.ndarray:
        """Log-probabilities of the next token after each prefix row.

        prefixes: (B,T) int64 starting with BOS.  Recomputes the decoder
        forward pass per call; fine at reference scale.
        """
        logits, _ = self._decode(memory, src_ids, prefixes)
        last = logits[:, -1, :]
        shifted = last - last.max(axis=1, keepdims=True)
        return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


class EncoderClassifier:
    """Encoder with a feed-forward class head over the leading CLS position."""

    def __init__(self, tokenizer: Tokenizer, config: ModelConfig = ModelConfig(),
                 n_classes: int = 8, seed: int = 0):
        self.tokenizer = tokenizer
        self.config = config
        self.n_classes = n_classes
        self.seed = seed
        self.store = ParameterStore(groups=("embeddings", "encoder", "head"))
        rng = np.random.default_rng(seed)
        self.encoder = _EncoderStack(self.store, tokenizer, config, rng)
        self.head = Linear(self.store, "head.cls", "head",
                           config.d_model, n_classes, rng)

    def _forward(self, ids: np.ndarray):
        memory, enc_cache = self.encoder.forward(ids)
        pooled = memory[:, 0, :]
        logits, head_cache = self.head.forward(pooled)
        return logits, (memory, enc_cache, head_cache)

    def logits(self, batch: list[list[int]]) -> np.ndarray:
        ids = pad_batch(batch, self.config.max_source_len)
        out, _ = self._forward(ids)
        return out

    def probabilities(self, batch: list[list[int]]) -> np.ndarray:
        return kernels.softmax_rows(np.ascontiguousarray(self.logits(batch)))

    def encode_for_classification(self, ids: list[int]) -> np.ndarray:
        """Probability vector over classes for one CLS-led sequence."""
        if not ids or ids[0] != CLS:
            raise ValueError("input must begin with the classifier_start token")
        return self.probabilities([ids])[0]

    def loss_and_grads(self, batch: list[list[int]], labels: list[int]) -> float:
        ids = pad_batch(batch, self.config.max_source_len)
        logits, (memory, enc_cache, head_cache) = self._forward(ids)
        targets = np.asarray(labels, dtype=np.int64)
        mask = np.ones(len(labels), dtype=np.float64)
        loss, dlogits = kernels.cross_entropy(
            np.ascontiguousarray(logits), targets, mask
        )
        dpooled = self.head.backward(dlogits, head_cache)
        dmem = np.zeros_like(memory)
        dmem[:, 0, :] = dpooled
        self.encoder.backward(dmem, enc_cache)
        return float(loss)


def freeze_groups(model, trainable_names) -> object:
    """Restrict optimization to the named groups; others stay bitwise frozen."""
    model.store.set_trainable_groups(trainable_names)
    return model


def sequence_logprob(model: Seq2SeqTransformer, src: list[int], tgt: list[int]) -> float:
    """Sum of token log-probabilities of tgt (incl. EOS if present) given src."""
    memory, src_ids, _ = model.encode([src])
    prefix = [BOS]
    total = 0.0
    for token in tgt:
        logprobs = model.next_token_logprobs(memory, src_ids, pad_batch([prefix], len(prefix)))
        total += float(logprobs[0, token])
        prefix.append(token)
    return total
