"""Question-type classification over answer + context inputs.

The classifier never sees the question: it predicts which of the eight
interrogative categories a question asked about this answer in this context
would belong to.  Inputs are serialized as
``classifier_start answer separator context separator`` and the model trains
with all parameter groups unfrozen.  Evaluation reports macro-F1 under hard
matching and under the relaxed convention where What/Which predictions count
for any gold label.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import kernels
from .backend import AdamW, CLS, EncoderClassifier, SEP, TrainingLog
from .backend.tokenizers import Tokenizer
from .corpus import QAExample
from .qtypes import QUESTION_TYPES, QuestionType, match_labels


@dataclass(frozen=True)
class QTCExample:
    answer_text: str
    context: str
    qtype: QuestionType

    def __post_init__(self):
        if not self.answer_text.strip():
            raise ValueError("answer_text must be non-empty")


def qtc_examples_from_annotated(pairs: list[tuple[QAExample, QuestionType]]) -> list[QTCExample]:
    return [QTCExample(ex.answer_text, ex.context, t) for ex, t in pairs]


@dataclass
class QTCTrainConfig:
    """Defaults follow the full-scale recipe; reference-backend runs pass
    scaled-down values (fewer warmup steps, larger lr)."""

    batch_size: int = 8
    learning_rate: float = 1e-5
    weight_decay: float = 0.01
    warmup_steps: int = 1000
    max_steps: int = 2000
    eval_every: int = 200
    patience: int = 3
    seed: int = 0


def build_qtc_input(answer: str, context: str, tokenizer: Tokenizer,
                    max_len: int | None = None) -> list[int]:
    """classifier_start + answer + separator + context + separator.

    Context is tail-truncated to fit ``max_len``; the answer block is only
    cut as a last resort when it alone overflows the budget.
    """
    if not answer.strip():
        raise ValueError("answer must be non-empty")
    answer_ids = tokenizer.encode(answer)
    context_ids = tokenizer.encode(context)
    if max_len is not None:
        budget = max_len - 3 - len(answer_ids)
        if budget < 0:
            answer_ids = answer_ids[: max_len - 3]
            budget = 0
        context_ids = context_ids[:budget]
    return [CLS] + answer_ids + [SEP] + context_ids + [SEP]


def upsample(examples: list[QTCExample], seed: int) -> list[QTCExample]:
    """Bring every present type up to the majority type's count.

    Originals are all kept (in order); extra copies are drawn uniformly with
    replacement per type, deterministically for a given seed.
    """
    if not examples:
        raise ValueError("cannot upsample an empty example list")
    by_type: dict[QuestionType, list[QTCExample]] = {}
    for ex in examples:
        by_type.setdefault(ex.qtype, []).append(ex)
    target = max(len(v) for v in by_type.values())
    rng = np.random.default_rng(seed)
    out = list(examples)
    for qtype in QUESTION_TYPES:
        pool = by_type.get(qtype)
        if not pool:
            continue
        extra = target - len(pool)
        if extra > 0:
            picks = rng.integers(0, len(pool), size=extra)
            out.extend(pool[i] for i in picks)
    return out


def _encode_batch(examples, tokenizer, max_len):
    return [build_qtc_input(ex.answer_text, ex.context, tokenizer, max_len)
            for ex in examples]


def train_qtc(train: list[QTCExample], validation: list[QTCExample],
              backend: EncoderClassifier,
              config: QTCTrainConfig = QTCTrainConfig()) -> tuple[EncoderClassifier, TrainingLog]:
    """Fine-tune the classifier with cross-entropy over all parameter groups.

    Early-stops on validation loss with the configured patience and restores
    the best checkpoint seen.
    """
    if not train or not validation:
        raise ValueError("train and validation sets must be non-empty")
    if len({ex.qtype for ex in train}) < 2:
        raise ValueError("training set must cover at least two question types")

    backend.store.set_trainable_groups(backend.store.groups)
    max_len = backend.config.max_source_len
    tokenizer = backend.tokenizer
    train_ids = _encode_batch(train, tokenizer, max_len)
    train_labels = [ex.qtype.index for ex in train]
    val_ids = _encode_batch(validation, tokenizer, max_len)
    val_labels = [ex.qtype.index for ex in validation]

    optimizer = AdamW(backend.store, lr=config.learning_rate,
                      weight_decay=config.weight_decay,
                      warmup_steps=config.warmup_steps)
    rng = np.random.default_rng(config.seed)
    log = TrainingLog(notes={"task": "qtc"})
    best_val = np.inf
    best_state = backend.store.state_dict()
    best_step = 0
    evals_since_best = 0

    order = rng.permutation(len(train_ids))
    cursor = 0
    for step in range(1, config.max_steps + 1):
        if cursor + config.batch_size > len(order):
            order = rng.permutation(len(train_ids))
            cursor = 0
        picks = order[cursor: cursor + config.batch_size]
        cursor += config.batch_size
        batch = [train_ids[i] for i in picks]
        labels = [train_labels[i] for i in picks]
        backend.store.zero_grads()
        loss = backend.loss_and_grads(batch, labels)
        optimizer.step()
        log.record(step, loss)

        if step % config.eval_every == 0 or step == config.max_steps:
            val_loss = _validation_loss(backend, val_ids, val_labels)
            val_f1 = _quick_macro_f1(backend, val_ids, val_labels)
            log.record_eval(step, val_loss=val_loss, val_macro_f1=val_f1)
            if val_loss < best_val:
                best_val = val_loss
                best_state = backend.store.state_dict()
                best_step = step
                evals_since_best = 0
            else:
                evals_since_best += 1
                if evals_since_best >= config.patience:
                    break

    backend.store.load_state_dict(best_state)
    log.notes["best_step"] = best_step
    log.notes["best_val_loss"] = float(best_val)
    return backend, log


def _validation_loss(backend, ids, labels, batch_size: int = 64) -> float:
    total, n = 0.0, 0
    for i in range(0, len(ids), batch_size):
        chunk = ids[i: i + batch_size]
        logits = backend.logits(chunk)
        targets = np.asarray(labels[i: i + batch_size], dtype=np.int64)
        mask = np.ones(len(chunk))
        loss, _ = kernels.cross_entropy(np.ascontiguousarray(logits), targets, mask)
        total += loss * len(chunk)
        n += len(chunk)
    return total / max(1, n)


def _quick_macro_f1(backend, ids, labels, batch_size: int = 64) -> float:
    preds = []
    for i in range(0, len(ids), batch_size):
        logits = backend.logits(ids[i: i + batch_size])
        preds.extend(int(k) for k in logits.argmax(axis=1))
    golds = [QUESTION_TYPES[i] for i in labels]
    predictions = [QUESTION_TYPES[i] for i in preds]
    f1, _ = macro_f1_report(predictions, golds, mode="hard")
    return f1


def predict_type(classifier: EncoderClassifier, answer: str,
                 context: str) -> tuple[QuestionType, np.ndarray]:
    """Argmax type and the full probability vector; ties break in enum order."""
    ids = build_qtc_input(answer, context, classifier.tokenizer,
                          classifier.config.max_source_len)
    probs = classifier.encode_for_classification(ids)
    return QUESTION_TYPES[int(np.argmax(probs))], probs


def predict_types_batch(classifier: EncoderClassifier,
                        examples: list[QTCExample]) -> list[QuestionType]:
    ids = _encode_batch(examples, classifier.tokenizer, classifier.config.max_source_len)
    out = []
    for i in range(0, len(ids), 64):
        logits = classifier.logits(ids[i: i + 64])
        out.extend(QUESTION_TYPES[int(k)] for k in logits.argmax(axis=1))
    return out


def macro_f1_report(predictions: list[QuestionType], golds: list[QuestionType],
                    mode: str = "hard") -> tuple[float, dict]:
    """Macro-F1 over the eight classes plus a per-class report.

    Relaxed mode credits What/Which predictions as correct for any gold label
    (they replace the prediction with the gold before counting).  Classes that
    never occur as gold contribute F1 = 0 if they were predicted and are
    excluded from the mean if they were not.
    """
    if len(predictions) != len(golds):
        raise ValueError("predictions and golds must align")
    effective = [
        gold if match_labels(pred, gold, mode) else pred
        for pred, gold in zip(predictions, golds)
    ]
    n_types = len(QUESTION_TYPES)
    confusion = np.zeros((n_types, n_types), dtype=np.int64)
    for pred, gold in zip(effective, golds):
        confusion[gold.index, pred.index] += 1

    per_class = {}
    f1_values = []
    for qtype in QUESTION_TYPES:
        i = qtype.index
        tp = int(confusion[i, i])
        fp = int(confusion[:, i].sum() - tp)
        fn = int(confusion[i, :].sum() - tp)
        support = tp + fn
        if support == 0 and fp == 0:
            continue  # never gold, never predicted: excluded from the mean
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[qtype.value] = {
            "precision": precision, "recall": recall, "f1": f1, "support": support,
        }
        f1_values.append(f1)

    macro = float(np.mean(f1_values)) if f1_values else 0.0
    report = {
        "mode": mode,
        "macro_f1": macro,
        "per_class": per_class,
        "confusion_matrix": confusion.tolist(),
        "class_order": [t.value for t in QUESTION_TYPES],
        "n_examples": len(golds),
    }
    return macro, report


def evaluate_qtc(classifier: EncoderClassifier, examples: list[QTCExample],
                 mode: str = "hard", checkpoint_id: str | None = None) -> tuple[float, dict]:
    """Predict every example and score macro-F1 under the given label mode."""
    if not examples:
        raise ValueError("no examples to evaluate")
    predictions = predict_types_batch(classifier, examples)
    golds = [ex.qtype for ex in examples]
    macro, report = macro_f1_report(predictions, golds, mode)
    report["checkpoint_id"] = checkpoint_id
    return macro, report


def type_histogram(examples: list[QTCExample]) -> Counter:
    return Counter(ex.qtype for ex in examples)
