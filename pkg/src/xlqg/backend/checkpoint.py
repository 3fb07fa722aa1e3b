"""Checkpoint I/O: parameter blob + plain-text manifest + tokenizer file.

A checkpoint directory holds:

* params.npz        all parameter arrays, keyed by parameter name
* manifest.txt      key: value lines (model type/config, group trainability,
                    seed, tokenizer mode, step count)
* tokenizer.json    vocabulary (and merges for subword mode)
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .tokenizers import load_tokenizer
from .transformer import EncoderClassifier, ModelConfig, Seq2SeqTransformer


def _manifest_text(model, step: int, extra: dict | None) -> str:
    lines = {
        "model_type": "classifier" if isinstance(model, EncoderClassifier) else "seq2seq",
        "seed": model.seed,
        "step_count": step,
        "tokenizer_mode": model.tokenizer.mode,
        "trainable_groups": ",".join(sorted(model.store.trainable_groups)),
        "all_groups": ",".join(model.store.groups),
    }
    lines.update(model.config.to_dict())
    if isinstance(model, EncoderClassifier):
        lines["n_classes"] = model.n_classes
    if extra:
        lines.update(extra)
    return "".join(f"{k}: {v}\n" for k, v in sorted(lines.items()))


def save_checkpoint(model, directory: str | Path, step: int = 0,
                    extra_manifest: dict | None = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    arrays = {p.name: p.value for p in model.store}
    np.savez(directory / "params.npz", **arrays)
    (directory / "manifest.txt").write_text(
        _manifest_text(model, step, extra_manifest), encoding="utf-8"
    )
    model.tokenizer.save(directory / "tokenizer.json")
    return directory


def read_manifest(directory: str | Path) -> dict[str, str]:
    manifest = {}
    for line in (Path(directory) / "manifest.txt").read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(":")
        manifest[key.strip()] = value.strip()
    return manifest


def load_checkpoint(directory: str | Path):
    """Rebuild a model (with tokenizer and trainability) from a checkpoint dir."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    tokenizer = load_tokenizer(directory / "tokenizer.json")
    config = ModelConfig(
        d_model=int(manifest["d_model"]),
        n_heads=int(manifest["n_heads"]),
        n_encoder_layers=int(manifest["n_encoder_layers"]),
        n_decoder_layers=int(manifest["n_decoder_layers"]),
        d_ff=int(manifest["d_ff"]),
        max_source_len=int(manifest["max_source_len"]),
        max_target_len=int(manifest["max_target_len"]),
    )
    seed = int(manifest["seed"])
    if manifest["model_type"] == "classifier":
        model = EncoderClassifier(tokenizer, config,
                                  n_classes=int(manifest["n_classes"]), seed=seed)
    else:
        model = Seq2SeqTransformer(tokenizer, config, seed=seed)
    with np.load(directory / "params.npz") as blob:
        model.store.load_state_dict({k: blob[k] for k in blob.files})
    groups = manifest.get("trainable_groups", "")
    model.store.set_trainable_groups(
        set(g for g in groups.split(",") if g) if groups else set()
    )
    return model, manifest
