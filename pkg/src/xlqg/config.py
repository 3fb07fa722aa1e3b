"""Run configuration: one YAML tree, flag overrides, labeled seed fan-out.

Every run is driven by a single config file.  All randomness descends from
``global_seed`` through named derivations (component label -> child seed), so
a manifest recording the config hash and the global seed pins every stream
in the run.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import yaml

from .backend.transformer import ModelConfig
from .errors import ConfigError


def derive_seed(global_seed: int, label: str) -> int:
    """Deterministic child seed for a named component."""
    digest = hashlib.sha256(f"{global_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


@dataclass
class TrainSection:
    batch_size: int = 16
    learning_rate: float = 2e-3
    weight_decay: float = 0.01
    warmup_steps: int = 50
    max_steps: int = 500
    eval_every: int = 100
    patience: int = 3


@dataclass
class RunConfig:
    global_seed: int = 0
    backend: str = "reference"
    out_dir: str = "runs/out"
    language: str = "en"
    corpus_format: str = "triplet-jsonl"
    mode: str = "exemplar"
    beam_size: int = 4
    metrics: list = field(default_factory=lambda: ["rouge_l", "bleu4", "meteor"])

    # file inputs; commands validate the subset they need
    train_corpus: str | None = None
    validation_corpus: str | None = None
    test_corpus: str | None = None
    bank_path: str | None = None
    target_bank_path: str | None = None
    qtc_checkpoint: str | None = None
    qg_checkpoint: str | None = None
    records_path: str | None = None
    translator: str = "identity"  # "identity" | "toy" | path to a JSON table
    lexicon_auxiliaries: str | None = None  # word-per-line override files
    lexicon_how_hints: str | None = None

    # exemplar protocol
    exemplar_sizes: list = field(default_factory=lambda: [1, 5, 10, 15])
    exemplar_seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    exemplar_size: int = 5
    exemplar_seed: int = 0
    model_seeds: list = field(default_factory=lambda: [0])
    typeless: bool = False

    # reference backend shape and training knobs
    model: dict = field(default_factory=dict)
    qtc_training: dict = field(default_factory=dict)
    qg_training: dict = field(default_factory=dict)
    pretrain_texts: str | None = None
    pretrain_steps: int = 0
    upsample: bool = True
    validation_fraction: float = 0.1

    def model_config(self) -> ModelConfig:
        defaults = dict(d_model=64, n_heads=4, n_encoder_layers=2,
                        n_decoder_layers=2, d_ff=128, max_source_len=96,
                        max_target_len=16)
        defaults.update(self.model or {})
        return ModelConfig(**defaults)

    def train_section(self, which: str) -> TrainSection:
        overrides = self.qtc_training if which == "qtc" else self.qg_training
        section = TrainSection()
        for key, value in (overrides or {}).items():
            if not hasattr(section, key):
                raise ConfigError(f"unknown {which}_training key {key!r}")
            setattr(section, key, _coerce(f"{which}_training.{key}", value,
                                          type(getattr(section, key))))
        return section

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _coerce(name: str, value, target_type):
    """Cast a config value; YAML 1.1 reads bare scientific notation (1e-3)
    as a string, so numeric fields coerce explicitly."""
    if target_type is float:
        try:
            return float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name} must be a number, got {value!r}") from exc
    if target_type is int:
        try:
            coerced = int(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name} must be an integer, got {value!r}") from exc
        if isinstance(value, float) and value != coerced:
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        return coerced
    return value


# RunConfig fields that must arrive as numbers whatever the YAML said.
_INT_FIELDS = ("global_seed", "beam_size", "exemplar_size", "exemplar_seed",
               "pretrain_steps")
_FLOAT_FIELDS = ("validation_fraction",)
_INT_LIST_FIELDS = ("exemplar_sizes", "exemplar_seeds", "model_seeds")


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """YAML file plus CLI overrides; unknown keys are config errors."""
    payload = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            payload = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"config parse failure: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError("config root must be a mapping")
    config = RunConfig()
    known = set(config.to_dict())
    for source in (payload, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(config, key, value)
    for name in _INT_FIELDS:
        setattr(config, name, _coerce(name, getattr(config, name), int))
    for name in _FLOAT_FIELDS:
        setattr(config, name, _coerce(name, getattr(config, name), float))
    for name in _INT_LIST_FIELDS:
        values = getattr(config, name)
        if not isinstance(values, (list, tuple)) or not values:
            raise ConfigError(f"{name} must be a non-empty list")
        setattr(config, name, [_coerce(name, v, int) for v in values])
    return config


def require(config: RunConfig, *fields_needed: str) -> None:
    missing = [name for name in fields_needed if not getattr(config, name)]
    if missing:
        raise ConfigError(f"config is missing required field(s): {missing}")
    for name in fields_needed:
        value = getattr(config, name)
        if name.endswith(("_corpus", "_path", "_checkpoint")) and isinstance(value, str):
            if not Path(value).exists():
                raise ConfigError(f"{name} does not exist: {value}")


def write_manifest(config: RunConfig, command: str, artifacts: list[str],
                   seeds: dict[str, int]) -> Path:
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    from . import __version__

    manifest = {
        "command": command,
        "config_hash": config.config_hash(),
        "config": config.to_dict(),
        "seeds": seeds,
        "artifacts": sorted(artifacts),
        "version": __version__,
    }
    path = out_dir / f"manifest-{command}.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True),
                    encoding="utf-8")
    return path
