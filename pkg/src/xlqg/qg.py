"""Exemplar-conditioned question generation and its baselines.

The generator reads a serialized input of the form

    exemplar: q1 exemplar: q2 ... answer: A context: C

and is trained with teacher forcing to emit the gold question.  In the
exemplar mode only the encoder group trains; embeddings, decoder, and the
tied output head stay frozen, so everything the model knows about emitting
target-language tokens survives fine-tuning.  Baselines drop the exemplar
block and/or unfreeze everything; the multi-task baseline interleaves a
question-denoising task over a small target-language question pool.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .backend import AdamW, EOS, Seq2SeqTransformer, TrainingLog, beam_decode, mask_token_ids
from .backend.tokenizers import Tokenizer
from .corpus import Corpus, QAExample
from .errors import BankKeyError
from .exemplars import ExemplarBank, ExemplarSet, select_exemplars
from .qtc import EncoderClassifier, predict_type
from .qtypes import (
    DEFAULT_LEXICON,
    QUESTION_TYPES,
    TYPELESS,
    AuxiliaryLexicon,
    classify_rule,
)

EXEMPLAR_TAG = "exemplar:"
ANSWER_TAG = "answer:"
CONTEXT_TAG = "context:"


class QGMode(Enum):
    """Training regimes; each fixes the input template and trainable groups."""

    EXEMPLAR = "exemplar"              # encoder-only + exemplar block
    BASELINE_ENCDEC = "baseline_encdec"  # all groups, no exemplars
    BASELINE_ENC = "baseline_enc"      # encoder-only, no exemplars
    BASELINE_MULTI = "baseline_multi"  # all groups, QG + denoising interleaved
    INFERENCE_ONLY = "inference_only"  # train like baseline_enc, infer with exemplars

    @property
    def trains_with_exemplars(self) -> bool:
        return self is QGMode.EXEMPLAR

    @property
    def infers_with_exemplars(self) -> bool:
        return self in (QGMode.EXEMPLAR, QGMode.INFERENCE_ONLY)

    @property
    def trainable_groups(self) -> frozenset[str]:
        if self in (QGMode.EXEMPLAR, QGMode.BASELINE_ENC, QGMode.INFERENCE_ONLY):
            return frozenset({"encoder"})
        return frozenset({"embeddings", "encoder", "decoder", "head"})


@dataclass(frozen=True)
class GenerationRecord:
    example_id: str
    language: str
    predicted_qtype: str  # a QuestionType value, the typeless tag, or ""
    exemplar_key: tuple | None  # (language, qtype, size, seed)
    generated_question: str
    reference_question: str
    model_seed: int

    def to_json(self) -> dict:
        return {
            "example_id": self.example_id,
            "language": self.language,
            "predicted_qtype": self.predicted_qtype,
            "exemplar_key": list(self.exemplar_key) if self.exemplar_key else None,
            "generated_question": self.generated_question,
            "reference_question": self.reference_question,
            "model_seed": self.model_seed,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "GenerationRecord":
        key = payload.get("exemplar_key")
        return cls(
            example_id=payload["example_id"],
            language=payload["language"],
            predicted_qtype=payload.get("predicted_qtype", ""),
            exemplar_key=tuple(key) if key else None,
            generated_question=payload["generated_question"],
            reference_question=payload.get("reference_question", ""),
            model_seed=int(payload.get("model_seed", 0)),
        )


def build_qg_text(exemplars: ExemplarSet | None, answer: str, context: str) -> str:
    """Serialized model input; with no exemplars the block is omitted entirely."""
    if not answer.strip():
        raise ValueError("answer must be non-empty")
    if not context.strip():
        raise ValueError("context must be non-empty")
    parts = []
    if exemplars is not None:
        for question in exemplars.questions:
            parts.append(f"{EXEMPLAR_TAG} {question}")
    parts.append(f"{ANSWER_TAG} {answer}")
    parts.append(f"{CONTEXT_TAG} {context}")
    return " ".join(parts)


def build_qg_input(exemplars: ExemplarSet | None, answer: str, context: str,
                   tokenizer: Tokenizer, max_len: int | None = None) -> list[int]:
    """Tokenized template; truncation removes context tokens from the tail,
    never touching the exemplar block or the answer."""
    if not answer.strip():
        raise ValueError("answer must be non-empty")
    if not context.strip():
        raise ValueError("context must be non-empty")
    head_parts = []
    if exemplars is not None:
        for question in exemplars.questions:
            head_parts.append(f"{EXEMPLAR_TAG} {question}")
    head_parts.append(f"{ANSWER_TAG} {answer}")
    head_parts.append(CONTEXT_TAG)
    head_ids = tokenizer.encode(" ".join(head_parts))
    context_ids = tokenizer.encode(context)
    if max_len is not None:
        budget = max(0, max_len - len(head_ids))
        context_ids = context_ids[:budget]
    return head_ids + context_ids


def mask_question(question: str, mask_ratio: float, seed: int,
                  tokenizer: Tokenizer) -> tuple[list[int], list[int]]:
    """Denoising pair: ceil(ratio * len) token positions masked, target intact.

    Deterministic per (question, seed): the RNG stream is derived from both.
    """
    ids = tokenizer.encode(question)
    digest = hashlib.sha256(question.encode("utf-8")).digest()
    salt = int.from_bytes(digest[:8], "little")
    rng = np.random.default_rng([seed, salt])
    corrupted = mask_token_ids(ids, mask_ratio, rng)
    return corrupted, list(ids)


@dataclass
class QGTrainConfig:
    """Defaults follow the full-scale recipe; reference runs scale them down."""

    batch_size: int = 16
    learning_rate: float = 5e-5
    weight_decay: float = 0.01
    warmup_steps: int = 1000
    max_steps: int = 2000
    eval_every: int = 200
    patience: int = 3
    seed: int = 0
    exemplar_size: int = 5
    exemplar_seed: int = 0
    dynamic_exemplars: bool = False
    denoise_mask_ratio: float = 0.15


def _gold_exemplars_for(example: QAExample, bank: ExemplarBank, language: str,
                        config: QGTrainConfig, lexicon: AuxiliaryLexicon,
                        rng: np.random.Generator) -> ExemplarSet | None:
    qtype = classify_rule(example.question, lexicon)
    if qtype is None:
        return None
    if not config.dynamic_exemplars:
        return select_exemplars(bank, language, qtype, config.exemplar_size,
                                config.exemplar_seed)
    pool = bank.pools.get((language, qtype.value))
    if not pool or len(pool) < config.exemplar_size:
        raise BankKeyError(
            f"dynamic sampling needs a pool of >= {config.exemplar_size} "
            f"questions for ({language}, {qtype.value})"
        )
    picks = rng.choice(len(pool), size=config.exemplar_size, replace=False)
    return ExemplarSet(language=language, qtype=qtype, size=config.exemplar_size,
                       seed=-1, questions=tuple(pool[i] for i in picks))


def prepare_qg_pairs(corpus: Corpus, bank: ExemplarBank | None, mode: QGMode,
                     tokenizer: Tokenizer, config: QGTrainConfig,
                     max_source_len: int,
                     lexicon: AuxiliaryLexicon = DEFAULT_LEXICON,
                     exemplar_language: str | None = None,
                     rng: np.random.Generator | None = None):
    """Serialized (source, target) id pairs for one training corpus.

    In exemplar mode the gold question's rule type selects its exemplar set;
    untypeable questions are skipped.  Other modes keep every example.
    """
    rng = rng or np.random.default_rng(config.seed)
    language = exemplar_language or corpus.language
    pairs = []
    for ex in corpus:
        exemplars = None
        if mode.trains_with_exemplars:
            exemplars = _gold_exemplars_for(ex, bank, language, config, lexicon, rng)
            if exemplars is None:
                continue
        src = build_qg_input(exemplars, ex.answer_text, ex.context, tokenizer,
                             max_source_len)
        tgt = tokenizer.encode(ex.question) + [EOS]
        pairs.append((src, tgt))
    return pairs


def train_qg(corpus: Corpus, bank: ExemplarBank | None, mode: QGMode,
             backend: Seq2SeqTransformer,
             config: QGTrainConfig = QGTrainConfig(),
             validation: Corpus | None = None,
             denoising_questions: list[str] | None = None,
             lexicon: AuxiliaryLexicon = DEFAULT_LEXICON,
             exemplar_language: str | None = None) -> tuple[Seq2SeqTransformer, TrainingLog]:
    """Teacher-forced training in one of the five regimes.

    Exemplar mode requires a bank; the multi-task baseline requires a
    target-language question pool for its denoising half and alternates the
    two tasks 1:1 by batch.
    """
    if mode.trains_with_exemplars and bank is None:
        raise ValueError(f"mode {mode.value} requires an exemplar bank")
    if mode is QGMode.BASELINE_MULTI and not denoising_questions:
        raise ValueError("baseline_multi requires denoising_questions")

    backend.store.set_trainable_groups(mode.trainable_groups)
    tokenizer = backend.tokenizer
    rng = np.random.default_rng(config.seed)
    pairs = prepare_qg_pairs(corpus, bank, mode, tokenizer, config,
                             backend.config.max_source_len, lexicon,
                             exemplar_language, rng)
    if not pairs:
        raise ValueError("no usable training pairs (all questions untypeable?)")

    val_pairs = None
    if validation is not None:
        val_pairs = prepare_qg_pairs(validation, bank, mode, tokenizer, config,
                                     backend.config.max_source_len, lexicon,
                                     exemplar_language, rng)

    denoise_pairs = []
    if mode is QGMode.BASELINE_MULTI:
        for question in denoising_questions:
            corrupted, target = mask_question(question, config.denoise_mask_ratio,
                                              config.seed, tokenizer)
            if target:
                denoise_pairs.append((corrupted, target + [EOS]))

    optimizer = AdamW(backend.store, lr=config.learning_rate,
                      weight_decay=config.weight_decay,
                      warmup_steps=config.warmup_steps)
    log = TrainingLog(notes={
        "task": "qg",
        "mode": mode.value,
        "n_pairs": len(pairs),
        "n_denoise": len(denoise_pairs),
        "per_task": {"qg": [], "denoising": []},
    })

    best_val = np.inf
    best_state = None
    best_step = 0
    evals_since_best = 0

    order = rng.permutation(len(pairs))
    cursor = 0
    for step in range(1, config.max_steps + 1):
        denoise_turn = mode is QGMode.BASELINE_MULTI and step % 2 == 0
        if denoise_turn:
            picks = rng.integers(0, len(denoise_pairs), size=config.batch_size)
            batch = [denoise_pairs[i] for i in picks]
        else:
            if cursor + config.batch_size > len(order):
                order = rng.permutation(len(pairs))
                cursor = 0
            picks = order[cursor: cursor + config.batch_size]
            cursor += config.batch_size
            batch = [pairs[i] for i in picks]
        src = [s for s, _ in batch]
        tgt = [t for _, t in batch]
        backend.store.zero_grads()
        loss = backend.loss_and_grads(src, tgt)
        optimizer.step()
        log.record(step, loss)
        log.notes["per_task"]["denoising" if denoise_turn else "qg"].append(
            (step, float(loss))
        )

        if val_pairs and (step % config.eval_every == 0 or step == config.max_steps):
            val_loss = _pair_loss(backend, val_pairs)
            log.record_eval(step, val_loss=val_loss)
            if val_loss < best_val:
                best_val, best_step, evals_since_best = val_loss, step, 0
                best_state = backend.store.state_dict()
            else:
                evals_since_best += 1
                if evals_since_best >= config.patience:
                    break

    if best_state is not None:
        backend.store.load_state_dict(best_state)
        log.notes["best_step"] = best_step
        log.notes["best_val_loss"] = float(best_val)
    return backend, log


def _pair_loss(backend, pairs, batch_size: int = 32) -> float:
    total, n = 0.0, 0
    for i in range(0, len(pairs), batch_size):
        chunk = pairs[i: i + batch_size]
        loss = backend.teacher_forced_loss([s for s, _ in chunk],
                                           [t for _, t in chunk])
        total += loss * len(chunk)
        n += len(chunk)
    return total / max(1, n)


def generate(model: Seq2SeqTransformer, exemplars: ExemplarSet | None,
             answer: str, context: str, beam_size: int = 4,
             max_length: int | None = None) -> str:
    """Beam-decode one question from the serialized template."""
    src = build_qg_input(exemplars, answer, context, model.tokenizer,
                         model.config.max_source_len)
    ids = beam_decode(model, src, beam_size=beam_size, max_length=max_length)
    return model.tokenizer.decode(ids)


def pipeline_generate(qtc_classifier: EncoderClassifier | None,
                      qg_model: Seq2SeqTransformer, bank: ExemplarBank,
                      example: QAExample, size: int, exemplar_seed: int,
                      beam_size: int = 4, model_seed: int = 0,
                      typeless: bool = False) -> GenerationRecord:
    """Full two-stage inference for one example.

    Predict the question type from (answer, context), select the type-matched
    target-language exemplar set, and generate.  With ``typeless=True`` the
    classifier is bypassed and the all-types set is used instead.
    """
    language = example.language
    if typeless:
        exemplar_set = select_exemplars(bank, language, TYPELESS, size, exemplar_seed)
        predicted = TYPELESS
    else:
        missing = [t.value for t in QUESTION_TYPES
                   if not bank.has(language, t, size, exemplar_seed)]
        if missing:
            raise BankKeyError(
                f"bank lacks ({language}, size={size}, seed={exemplar_seed}) "
                f"sets for types: {missing}"
            )
        qtype, _ = predict_type(qtc_classifier, example.answer_text, example.context)
        exemplar_set = select_exemplars(bank, language, qtype, size, exemplar_seed)
        predicted = qtype.value
    question = generate(qg_model, exemplar_set, example.answer_text,
                        example.context, beam_size=beam_size)
    return GenerationRecord(
        example_id=example.id,
        language=language,
        predicted_qtype=predicted,
        exemplar_key=exemplar_set.key,
        generated_question=question,
        reference_question=example.question,
        model_seed=model_seed,
    )


def denoising_pool_from_bank(bank: ExemplarBank, language: str, size: int = 15,
                             seed: int = 0) -> list[str]:
    """The multi-task baseline's question pool: one size-15 set per type."""
    pool = []
    for qtype in QUESTION_TYPES:
        pool.extend(select_exemplars(bank, language, qtype, size, seed).questions)
    return pool


def save_records(records: list[GenerationRecord], path) -> None:
    import json
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")


def load_records(path) -> list[GenerationRecord]:
    import json
    from pathlib import Path

    records = []
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                records.append(GenerationRecord.from_json(json.loads(line)))
    return records
