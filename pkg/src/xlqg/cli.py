"""Command-line orchestration of the full pipeline.

Subcommands: annotate, build-bank, train-qtc, train-qg, generate, evaluate,
codeswitch-report, augment, sweep.  Every run is driven by a YAML config
(plus a few flag overrides) and writes a manifest recording the config hash,
derived seeds, and produced artifacts.  Exit codes: 0 success, 1 runtime
failure (with a machine-readable error report), 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .backend import (
    EncoderClassifier,
    Seq2SeqTransformer,
    WhitespaceTokenizer,
    load_checkpoint,
    pretrain_denoising,
    save_checkpoint,
)
from .backend.tokenizers import SubwordTokenizer
from .config import RunConfig, derive_seed, load_config, require, write_manifest
from .corpus import Corpus, load_corpus
from .errors import ConfigError, XlqgError
from .evaluation import (
    HeuristicIdentifier,
    aggregate_runs,
    code_switch_report,
    compute_metric,
)
from .exemplars import (
    DictionaryTranslator,
    ExemplarBank,
    build_english_bank,
    build_target_bank,
    build_typeless_bank,
)
from .qg import (
    QGMode,
    QGTrainConfig,
    denoising_pool_from_bank,
    load_records,
    pipeline_generate,
    save_records,
    train_qg,
)
from .qtc import QTCTrainConfig, evaluate_qtc, qtc_examples_from_annotated, train_qtc, upsample
from .qtypes import DEFAULT_LEXICON, TypedQuestion, annotate_corpus, classify_rule

CHECKPOINT_CACHE_ENV = "XLQG_CHECKPOINT_DIR"


def _out(config: RunConfig, name: str) -> Path:
    path = Path(config.out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _checkpoint_path(config: RunConfig, configured: str | None, default_name: str) -> Path:
    base = os.environ.get(CHECKPOINT_CACHE_ENV)
    if configured:
        path = Path(configured)
        if base and not path.is_absolute():
            return Path(base) / path
        return path
    if base:
        return Path(base) / default_name
    return Path(config.out_dir) / default_name


def _load_main_corpus(config: RunConfig, which: str = "train_corpus") -> Corpus:
    return load_corpus(getattr(config, which), format=config.corpus_format,
                       language=config.language if config.corpus_format == "squad" else None)


def _typed_questions(corpus: Corpus, lexicon) -> list[TypedQuestion]:
    """Rule-typed questions; non-English corpora must go through a translator."""
    if corpus.language == "en":
        annotated, _ = annotate_corpus(corpus, lexicon)
        return [TypedQuestion(ex.question, qtype) for ex, qtype in annotated]
    typed = []
    for ex in corpus:
        qtype = classify_rule(ex.question, lexicon)
        if qtype is not None:
            typed.append(TypedQuestion(ex.question, qtype))
    return typed


def _lexicon(config: RunConfig):
    if config.lexicon_auxiliaries or config.lexicon_how_hints:
        if not (config.lexicon_auxiliaries and config.lexicon_how_hints):
            raise ConfigError(
                "lexicon_auxiliaries and lexicon_how_hints must be set together")
        from .qtypes import AuxiliaryLexicon

        return AuxiliaryLexicon.from_files(config.lexicon_auxiliaries,
                                           config.lexicon_how_hints)
    return DEFAULT_LEXICON


def _translator(config: RunConfig):
    if config.translator == "identity":
        return DictionaryTranslator()
    if config.translator == "toy":
        from .toy import toy_translator

        return toy_translator()
    table_path = Path(config.translator)
    if not table_path.exists():
        raise ConfigError(f"translator table not found: {table_path}")
    payload = json.loads(table_path.read_text(encoding="utf-8"))
    return DictionaryTranslator(payload.get("sentence_table"), payload.get("word_table"))


def _build_tokenizer(config: RunConfig, corpora: list[Corpus]) -> WhitespaceTokenizer:
    from .qg import ANSWER_TAG, CONTEXT_TAG, EXEMPLAR_TAG

    texts = [f"{EXEMPLAR_TAG} {ANSWER_TAG} {CONTEXT_TAG}"]
    if config.pretrain_texts:
        texts.extend(Path(config.pretrain_texts).read_text(encoding="utf-8").splitlines())
    for corpus in corpora:
        for ex in corpus:
            texts.extend((ex.question, ex.context, ex.answer_text))
    return WhitespaceTokenizer.train(texts)


def _maybe_pretrain(config: RunConfig, model: Seq2SeqTransformer, label: str):
    if not config.pretrain_texts or config.pretrain_steps <= 0:
        return
    texts = [line for line in
             Path(config.pretrain_texts).read_text(encoding="utf-8").splitlines()
             if line.strip()]
    pretrain_denoising(model, texts, steps=config.pretrain_steps,
                       lr=3e-3, seed=derive_seed(config.global_seed, label))


def _require_reference_backend(config: RunConfig) -> None:
    if config.backend == "reference":
        return
    if config.backend == "external":
        raise ConfigError(
            "backend 'external' needs a pretrained-backbone adapter; this "
            "build bundles only the reference backend"
        )
    raise ConfigError(f"unknown backend {config.backend!r}")


# --- command handlers -------------------------------------------------------

def cmd_annotate(config: RunConfig):
    require(config, "train_corpus")
    corpus = _load_main_corpus(config)
    annotated, histogram = annotate_corpus(corpus, _lexicon(config))
    out_path = _out(config, "annotated.jsonl")
    with out_path.open("w", encoding="utf-8") as f:
        for example, qtype in annotated:
            f.write(json.dumps({"id": example.id, "question": example.question,
                                "qtype": qtype.value}, ensure_ascii=False) + "\n")
    hist_path = _out(config, "type_histogram.json")
    hist_path.write_text(
        json.dumps({t.value: histogram.get(t, 0) for t in histogram}, indent=1),
        encoding="utf-8",
    )
    return [str(out_path), str(hist_path)], {}


def cmd_build_bank(config: RunConfig):
    require(config, "train_corpus")
    corpus = _load_main_corpus(config)
    sizes = [int(s) for s in config.exemplar_sizes]
    seeds = [int(s) for s in config.exemplar_seeds]
    lexicon = _lexicon(config)
    if corpus.language == "en" or config.translator == "identity":
        typed = _typed_questions(corpus, lexicon)
        bank = build_english_bank(typed, sizes=sizes, seeds=seeds,
                                  language=corpus.language)
    else:
        translator = _translator(config)
        bank = build_target_bank([ex.question for ex in corpus], corpus.language,
                                 translator, lexicon, sizes=sizes, seeds=seeds)
    if config.typeless:
        from .qtypes import QuestionType

        pool_typed = []
        for (lang, qtype_name), pool in bank.pools.items():
            for question in pool:
                pool_typed.append(
                    TypedQuestion(question, QuestionType.from_string(qtype_name))
                )
        bank.add(
            build_typeless_bank(pool_typed, per_type=2,
                                seed=derive_seed(config.global_seed, "typeless"),
                                language=corpus.language),
            "typeless",
        )
    bank_path = Path(config.bank_path) if config.bank_path else _out(config, "bank.json")
    bank.save(bank_path)
    return [str(bank_path)], {"bank": config.global_seed}


def cmd_train_qtc(config: RunConfig):
    require(config, "train_corpus")
    _require_reference_backend(config)
    corpus = _load_main_corpus(config)
    lexicon = _lexicon(config)
    pairs = [(ex, classify_rule(ex.question, lexicon)) for ex in corpus]
    pairs = [(ex, qtype) for ex, qtype in pairs if qtype is not None]
    examples = qtc_examples_from_annotated(pairs)
    seeds = {
        "split": derive_seed(config.global_seed, "qtc-split"),
        "upsample": derive_seed(config.global_seed, "qtc-upsample"),
        "train": derive_seed(config.global_seed, "qtc-train"),
        "model": derive_seed(config.global_seed, "qtc-model"),
    }
    if config.validation_corpus:
        val_corpus = _load_main_corpus(config, "validation_corpus")
        val_pairs = [(ex, classify_rule(ex.question, lexicon)) for ex in val_corpus]
        val_examples = qtc_examples_from_annotated(
            [(ex, t) for ex, t in val_pairs if t is not None])
        train_examples = examples
    else:
        split_at = max(1, int(len(examples) * config.validation_fraction))
        order = np.random.default_rng(seeds["split"]).permutation(len(examples))
        val_examples = [examples[i] for i in order[:split_at]]
        train_examples = [examples[i] for i in order[split_at:]]
    if config.upsample:
        train_examples = upsample(train_examples, seeds["upsample"])

    tokenizer = _build_tokenizer(config, [corpus])
    classifier = EncoderClassifier(tokenizer, config.model_config(),
                                   n_classes=8, seed=seeds["model"])
    section = config.train_section("qtc")
    qtc_config = QTCTrainConfig(
        batch_size=section.batch_size, learning_rate=section.learning_rate,
        weight_decay=section.weight_decay, warmup_steps=section.warmup_steps,
        max_steps=section.max_steps, eval_every=section.eval_every,
        patience=section.patience, seed=seeds["train"],
    )
    classifier, log = train_qtc(train_examples, val_examples, classifier, qtc_config)
    ckpt = _checkpoint_path(config, config.qtc_checkpoint, "qtc")
    save_checkpoint(classifier, ckpt, step=log.steps[-1] if log.steps else 0)
    _, report = evaluate_qtc(classifier, val_examples, "hard", checkpoint_id=str(ckpt))
    report_path = _out(config, "qtc_validation_report.json")
    report_path.write_text(json.dumps(report, indent=1), encoding="utf-8")
    return [str(ckpt), str(report_path)], seeds


def _qg_mode(config: RunConfig) -> QGMode:
    try:
        return QGMode(config.mode)
    except ValueError as exc:
        raise ConfigError(
            f"unknown mode {config.mode!r}; choose from "
            f"{[m.value for m in QGMode]}"
        ) from exc


def cmd_train_qg(config: RunConfig):
    require(config, "train_corpus")
    _require_reference_backend(config)
    mode = _qg_mode(config)
    corpus = _load_main_corpus(config)
    bank = None
    if mode.trains_with_exemplars:
        require(config, "bank_path")
        bank = ExemplarBank.load(config.bank_path)
    denoising_questions = None
    if mode is QGMode.BASELINE_MULTI:
        require(config, "target_bank_path")
        target_bank = ExemplarBank.load(config.target_bank_path)
        target_language = next(iter({k[0] for k in target_bank.sets}))
        denoising_questions = denoising_pool_from_bank(
            target_bank, target_language, size=15, seed=config.exemplar_seed)

    seeds = {
        "model": derive_seed(config.global_seed, "qg-model"),
        "train": derive_seed(config.global_seed, "qg-train"),
        "pretrain": derive_seed(config.global_seed, "qg-pretrain"),
    }
    tokenizer = _build_tokenizer(config, [corpus])
    model = Seq2SeqTransformer(tokenizer, config.model_config(), seed=seeds["model"])
    _maybe_pretrain(config, model, "qg-pretrain")
    section = config.train_section("qg")
    qg_config = QGTrainConfig(
        batch_size=section.batch_size, learning_rate=section.learning_rate,
        weight_decay=section.weight_decay, warmup_steps=section.warmup_steps,
        max_steps=section.max_steps, eval_every=section.eval_every,
        patience=section.patience, seed=seeds["train"],
        exemplar_size=config.exemplar_size, exemplar_seed=config.exemplar_seed,
    )
    validation = None
    if config.validation_corpus:
        validation = _load_main_corpus(config, "validation_corpus")
    model, log = train_qg(corpus, bank, mode, model, qg_config,
                          validation=validation,
                          denoising_questions=denoising_questions,
                          lexicon=_lexicon(config))
    ckpt = _checkpoint_path(config, config.qg_checkpoint, "qg")
    save_checkpoint(model, ckpt, step=log.steps[-1] if log.steps else 0,
                    extra_manifest={"mode": mode.value})
    log_path = _out(config, "qg_training_log.json")
    log_path.write_text(json.dumps({
        "mode": mode.value,
        "final_loss": log.losses[-1] if log.losses else None,
        "n_steps": len(log.steps),
        "notes": {k: v for k, v in log.notes.items() if k != "per_task"},
    }, indent=1), encoding="utf-8")
    return [str(ckpt), str(log_path)], seeds


def cmd_generate(config: RunConfig):
    require(config, "test_corpus", "bank_path", "qg_checkpoint")
    mode = _qg_mode(config)
    if not config.typeless:
        require(config, "qtc_checkpoint")
    corpus = _load_main_corpus(config, "test_corpus")
    bank = ExemplarBank.load(config.bank_path)
    qg_model, _ = load_checkpoint(
        _checkpoint_path(config, config.qg_checkpoint, "qg"))
    classifier = None
    if not config.typeless:
        classifier, _ = load_checkpoint(
            _checkpoint_path(config, config.qtc_checkpoint, "qtc"))
    use_exemplars = mode.infers_with_exemplars or config.typeless
    records = []
    for ex in corpus:
        if use_exemplars:
            records.append(pipeline_generate(
                classifier, qg_model, bank, ex, config.exemplar_size,
                config.exemplar_seed, beam_size=config.beam_size,
                model_seed=config.global_seed, typeless=config.typeless))
        else:
            from .qg import GenerationRecord, generate

            question = generate(qg_model, None, ex.answer_text, ex.context,
                                beam_size=config.beam_size)
            records.append(GenerationRecord(
                example_id=ex.id, language=ex.language, predicted_qtype="",
                exemplar_key=None, generated_question=question,
                reference_question=ex.question, model_seed=config.global_seed))
    records_path = Path(config.records_path) if config.records_path \
        else _out(config, "records.jsonl")
    save_records(records, records_path)
    return [str(records_path)], {"generate": config.global_seed}


def _records_runs(config: RunConfig) -> list[list]:
    path = Path(config.records_path)
    if path.is_dir():
        files = sorted(path.glob("*.jsonl"))
        if not files:
            raise ConfigError(f"no .jsonl record files under {path}")
        return [load_records(f) for f in files]
    return [load_records(path)]


def _subword_model_for(records_runs: list[list]):
    texts = []
    for records in records_runs:
        for record in records:
            texts.extend((record.generated_question, record.reference_question))
    return SubwordTokenizer.train(texts, vocab_size=512)


def _eval_report(config: RunConfig, records_runs: list[list]) -> dict:
    languages = sorted({r.language for records in records_runs for r in records})
    subword = _subword_model_for(records_runs) if "sp_rouge" in config.metrics else None
    per_metric: dict[str, list[float]] = {name: [] for name in config.metrics}
    for records in records_runs:
        predictions = [r.generated_question for r in records]
        references = [r.reference_question for r in records]
        for name in config.metrics:
            per_metric[name].append(
                compute_metric(name, predictions, references,
                               language=languages[0] if languages else "en",
                               subword_model=subword))
    report = {
        "language": languages[0] if len(languages) == 1 else languages,
        "n_runs": len(records_runs),
        "metrics": {},
        "codeswitch_histogram": _codeswitch_histogram(records_runs),
    }
    for name, values in per_metric.items():
        mean, std = aggregate_runs(values)
        report["metrics"][name] = {"mean": mean, "std": std, "per_run": values}
    return report


def _codeswitch_histogram(records_runs: list[list]) -> dict | None:
    """Label counts over all runs; None when no identifier covers the language."""
    from .evaluation import detect_code_switching

    identifier = HeuristicIdentifier()
    histogram = {"none": 0, "interrogative": 0, "full": 0}
    try:
        for records in records_runs:
            for record in records:
                label = detect_code_switching(record.generated_question,
                                              record.language, identifier)
                histogram[label.value] += 1
    except ValueError:
        return None
    return histogram


def cmd_evaluate(config: RunConfig):
    require(config, "records_path")
    records_runs = _records_runs(config)
    report = _eval_report(config, records_runs)
    report_path = _out(config, "eval_report.json")
    report_path.write_text(json.dumps(report, indent=1, sort_keys=True),
                           encoding="utf-8")
    return [str(report_path)], {}


def cmd_codeswitch_report(config: RunConfig):
    require(config, "records_path")
    records_runs = _records_runs(config)
    merged = [r for records in records_runs for r in records]
    identifier = HeuristicIdentifier()
    report = code_switch_report({config.mode: merged}, identifier,
                                csv_path=_out(config, "codeswitch.csv"))
    report_path = _out(config, "codeswitch_report.json")
    report_path.write_text(json.dumps(report, indent=1, sort_keys=True),
                           encoding="utf-8")
    return [str(report_path), str(_out(config, "codeswitch.csv"))], {}


def cmd_augment(config: RunConfig):
    require(config, "test_corpus", "bank_path", "qg_checkpoint")
    if not config.typeless:
        require(config, "qtc_checkpoint")
    from .augmentation import generate_synthetic_qa, save_synthetic_qa

    corpus = _load_main_corpus(config, "test_corpus")
    bank = ExemplarBank.load(config.bank_path)
    qg_model, _ = load_checkpoint(_checkpoint_path(config, config.qg_checkpoint, "qg"))
    classifier = None
    if not config.typeless:
        classifier, _ = load_checkpoint(
            _checkpoint_path(config, config.qtc_checkpoint, "qtc"))
    pairs = [(ex.context, ex.answer_text, ex.language) for ex in corpus]
    synthetic = generate_synthetic_qa(
        pairs, classifier, qg_model, bank, config.exemplar_size,
        [int(s) for s in config.exemplar_seeds], mode=config.mode,
        model_seed=config.global_seed, beam_size=config.beam_size,
        typeless=config.typeless)
    data_path = _out(config, "synthetic_qa.jsonl")
    prov_path = _out(config, "synthetic_qa_provenance.json")
    save_synthetic_qa(synthetic, data_path, prov_path)
    return [str(data_path), str(prov_path)], {}


def cmd_sweep(config: RunConfig):
    """Model-seed x exemplar-seed protocol: train N generators, evaluate each
    against every inference exemplar set, aggregate mean/std over all runs."""
    require(config, "train_corpus", "test_corpus", "bank_path", "target_bank_path",
            "qtc_checkpoint")
    _require_reference_backend(config)
    mode = _qg_mode(config)
    train = _load_main_corpus(config)
    test = _load_main_corpus(config, "test_corpus")
    train_bank = ExemplarBank.load(config.bank_path)
    target_bank = ExemplarBank.load(config.target_bank_path)
    classifier, _ = load_checkpoint(
        _checkpoint_path(config, config.qtc_checkpoint, "qtc"))

    tokenizer = _build_tokenizer(config, [train, test])
    base = Seq2SeqTransformer(tokenizer, config.model_config(),
                              seed=derive_seed(config.global_seed, "sweep-base"))
    _maybe_pretrain(config, base, "sweep-pretrain")
    base_state = base.store.state_dict()

    section = config.train_section("qg")
    artifacts = []
    seeds: dict[str, int] = {}
    run_dir = Path(config.out_dir) / "runs"
    run_dir.mkdir(parents=True, exist_ok=True)
    for model_seed in [int(s) for s in config.model_seeds]:
        model = Seq2SeqTransformer(tokenizer, config.model_config(), seed=model_seed)
        model.store.load_state_dict(base_state)
        train_seed = derive_seed(config.global_seed, f"sweep-train-{model_seed}")
        seeds[f"train-{model_seed}"] = train_seed
        qg_config = QGTrainConfig(
            batch_size=section.batch_size, learning_rate=section.learning_rate,
            weight_decay=section.weight_decay, warmup_steps=section.warmup_steps,
            max_steps=section.max_steps, eval_every=section.eval_every,
            patience=section.patience, seed=train_seed,
            exemplar_size=config.exemplar_size, exemplar_seed=model_seed,
        )
        model, _ = train_qg(train, train_bank, mode, model, qg_config)
        for exemplar_seed in [int(s) for s in config.exemplar_seeds]:
            records = [
                pipeline_generate(classifier, model, target_bank, ex,
                                  config.exemplar_size, exemplar_seed,
                                  beam_size=config.beam_size,
                                  model_seed=model_seed)
                for ex in test
            ]
            records_path = run_dir / f"records-m{model_seed}-e{exemplar_seed}.jsonl"
            save_records(records, records_path)
            artifacts.append(str(records_path))

    records_runs = [load_records(Path(p)) for p in artifacts]
    report = _eval_report(config, records_runs)
    report_path = _out(config, "sweep_report.json")
    report_path.write_text(json.dumps(report, indent=1, sort_keys=True),
                           encoding="utf-8")
    artifacts.append(str(report_path))
    return artifacts, seeds


COMMANDS = {
    "annotate": cmd_annotate,
    "build-bank": cmd_build_bank,
    "train-qtc": cmd_train_qtc,
    "train-qg": cmd_train_qg,
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
    "codeswitch-report": cmd_codeswitch_report,
    "augment": cmd_augment,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xlqg",
        description="Cross-lingual question generation with question exemplars",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, default=None, help="YAML run config")
    parser.add_argument("--seed", type=int, default=None, help="override global_seed")
    parser.add_argument("--backend", choices=("reference", "external"), default=None)
    parser.add_argument("--out", type=Path, default=None, help="override out_dir")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["global_seed"] = args.seed
    if args.backend is not None:
        overrides["backend"] = args.backend
    if args.out is not None:
        overrides["out_dir"] = str(args.out)
    try:
        config = load_config(args.config, overrides)
        handler = COMMANDS[args.command]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        artifacts, seeds = handler(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (XlqgError, OSError, ValueError) as exc:
        report = {
            "command": args.command,
            "error_type": type(exc).__name__,
            "message": str(exc),
        }
        try:
            path = _out(config, "error_report.json")
            path.write_text(json.dumps(report, indent=1), encoding="utf-8")
        except OSError:
            pass
        print(f"run failed: {exc}", file=sys.stderr)
        return 1

    write_manifest(config, args.command, artifacts, seeds)
    for artifact in artifacts:
        print(artifact)
    return 0


if __name__ == "__main__":
    sys.exit(main())
