from collections import Counter

import numpy as np
import pytest

from xlqg.backend import CLS, EncoderClassifier, SEP, WhitespaceTokenizer
from xlqg.qtc import (
    QTCExample,
    QTCTrainConfig,
    build_qtc_input,
    evaluate_qtc,
    macro_f1_report,
    predict_type,
    train_qtc,
    upsample,
)
from xlqg.qtypes import QUESTION_TYPES, QuestionType, classify_rule
from xlqg.toy import TOY_SRC, generate_toy_corpus


def toy_qtc_examples(corpus):
    return [QTCExample(ex.answer_text, ex.context, classify_rule(ex.question))
            for ex in corpus]


def test_input_template_structure():
    tok = WhitespaceTokenizer.train(["France Paris is in ."])
    ids = build_qtc_input("France", "Paris is in France .", tok)
    assert ids[0] == CLS
    assert ids.count(SEP) == 2
    assert ids[-1] == SEP
    answer_ids = tok.encode("France")
    assert ids[1: 1 + len(answer_ids)] == answer_ids


def test_truncation_cuts_context_tail_not_answer():
    tok = WhitespaceTokenizer.train(["a b c d e f g h answer"])
    long_context = " ".join(["a"] * 50)
    ids = build_qtc_input("answer answer answer", long_context, tok, max_len=12)
    assert len(ids) == 12
    answer_ids = tok.encode("answer answer answer")
    assert ids[1: 1 + len(answer_ids)] == answer_ids


def test_empty_answer_rejected():
    tok = WhitespaceTokenizer.train(["a"])
    with pytest.raises(ValueError):
        build_qtc_input("  ", "context", tok)


def example_of(qtype, tag):
    return QTCExample(f"ans-{tag}", f"context {tag}", qtype)


def test_upsample_equalizes_counts_exactly():
    examples = (
        [example_of(QuestionType.WHAT, f"what{i}") for i in range(5)]
        + [example_of(QuestionType.WHO, f"who{i}") for i in range(2)]
        + [example_of(QuestionType.WHY, "why0")]
    )
    out = upsample(examples, seed=0)
    counts = Counter(ex.qtype for ex in out)
    assert counts == {QuestionType.WHAT: 5, QuestionType.WHO: 5, QuestionType.WHY: 5}
    assert len(out) == 15
    # originals retained in order
    assert out[: len(examples)] == examples


def test_upsample_balanced_input_is_fixed_point():
    examples = [example_of(t, t.value) for t in QUESTION_TYPES]
    assert upsample(examples, seed=1) == examples


def test_upsample_deterministic():
    examples = (
        [example_of(QuestionType.WHAT, f"w{i}") for i in range(4)]
        + [example_of(QuestionType.WHO, "x")]
    )
    assert upsample(examples, seed=9) == upsample(examples, seed=9)


def test_upsample_empty_rejected():
    with pytest.raises(ValueError):
        upsample([], seed=0)


def test_macro_f1_perfect_predictions():
    golds = [t for t in QUESTION_TYPES for _ in range(3)]
    for mode in ("hard", "relaxed"):
        macro, report = macro_f1_report(golds, golds, mode)
        assert macro == 1.0
        assert all(v["f1"] == 1.0 for v in report["per_class"].values())


def test_macro_f1_all_what_predictions_relaxed_dominates_hard():
    golds = [QuestionType.WHEN, QuestionType.WHO, QuestionType.WHAT,
             QuestionType.WHY, QuestionType.WHERE]
    predictions = [QuestionType.WHAT] * 5
    hard, _ = macro_f1_report(predictions, golds, "hard")
    relaxed, _ = macro_f1_report(predictions, golds, "relaxed")
    assert relaxed == 1.0
    assert relaxed >= hard


def test_macro_f1_absent_class_conventions():
    # WHO never gold; predicted once -> counted as zero F1.
    golds = [QuestionType.WHEN, QuestionType.WHEN]
    predictions = [QuestionType.WHEN, QuestionType.WHO]
    _, report = macro_f1_report(predictions, golds, "hard")
    assert report["per_class"]["Who"]["f1"] == 0.0
    # classes neither gold nor predicted are excluded entirely
    assert "Why" not in report["per_class"]


def test_relaxed_ge_hard_on_random_prediction_sets():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 40))
        golds = [QUESTION_TYPES[i] for i in rng.integers(0, 8, size=n)]
        predictions = [QUESTION_TYPES[i] for i in rng.integers(0, 8, size=n)]
        hard, _ = macro_f1_report(predictions, golds, "hard")
        relaxed, _ = macro_f1_report(predictions, golds, "relaxed")
        assert relaxed >= hard - 1e-12


@pytest.fixture(scope="module")
def trained_toy_classifier(toy_tokenizer, small_config):
    corpus = generate_toy_corpus(TOY_SRC, 200, seed=0)
    validation = generate_toy_corpus(TOY_SRC, 48, seed=5, split="validation")
    classifier = EncoderClassifier(toy_tokenizer, small_config, n_classes=8, seed=0)
    config = QTCTrainConfig(batch_size=16, learning_rate=1e-3, warmup_steps=50,
                            max_steps=600, eval_every=100, patience=5, seed=0)
    classifier, log = train_qtc(toy_qtc_examples(corpus),
                                toy_qtc_examples(validation), classifier, config)
    return classifier, log, toy_qtc_examples(corpus), toy_qtc_examples(validation)


def test_train_qtc_overfits_toy_set(trained_toy_classifier):
    classifier, _, train_examples, _ = trained_toy_classifier
    macro, _ = evaluate_qtc(classifier, train_examples, "hard")
    assert macro >= 0.95


def test_early_stop_checkpoint_not_worse_than_final(trained_toy_classifier):
    _, log, _, _ = trained_toy_classifier
    val_losses = [entry["val_loss"] for entry in log.eval_values]
    assert log.notes["best_val_loss"] <= val_losses[-1] + 1e-12


def test_predict_type_returns_argmax_and_probs(trained_toy_classifier):
    classifier, _, train_examples, _ = trained_toy_classifier
    example = train_examples[0]
    qtype, probs = predict_type(classifier, example.answer_text, example.context)
    assert probs.sum() == pytest.approx(1.0, abs=1e-6)
    assert qtype is QUESTION_TYPES[int(np.argmax(probs))]
    again, _ = predict_type(classifier, example.answer_text, example.context)
    assert again is qtype


def test_tie_breaks_in_enumeration_order():
    probs = np.full(8, 0.125)
    assert QUESTION_TYPES[int(np.argmax(probs))] is QuestionType.WHEN


def test_evaluation_report_shape(trained_toy_classifier):
    classifier, _, _, val_examples = trained_toy_classifier
    macro, report = evaluate_qtc(classifier, val_examples, "relaxed",
                                 checkpoint_id="toy-ckpt")
    assert report["mode"] == "relaxed"
    assert report["checkpoint_id"] == "toy-ckpt"
    assert len(report["confusion_matrix"]) == 8
    assert report["macro_f1"] == macro


def test_single_class_training_rejected(toy_tokenizer, small_config):
    classifier = EncoderClassifier(toy_tokenizer, small_config, n_classes=8, seed=0)
    examples = [example_of(QuestionType.WHAT, str(i)) for i in range(4)]
    with pytest.raises(ValueError):
        train_qtc(examples, examples, classifier)


def test_overfit_sixteen_example_fixture_reproduces_labels():
    # two examples per type, answers made type-distinctive
    fixture = [
        QTCExample(f"answer-{qtype.value}-{i}", f"context about {qtype.value} {i}",
                   qtype)
        for qtype in QUESTION_TYPES for i in range(2)
    ]
    tok = WhitespaceTokenizer.train(
        [f"{ex.answer_text} {ex.context}" for ex in fixture])
    from xlqg.backend import ModelConfig

    config = ModelConfig(d_model=32, n_heads=2, n_encoder_layers=1,
                         n_decoder_layers=1, d_ff=48, max_source_len=24,
                         max_target_len=4)
    classifier = EncoderClassifier(tok, config, n_classes=8, seed=0)
    train_config = QTCTrainConfig(batch_size=8, learning_rate=2e-3,
                                  warmup_steps=20, max_steps=300,
                                  eval_every=100, patience=10, seed=0)
    classifier, _ = train_qtc(fixture, fixture, classifier, train_config)
    for ex in fixture:
        predicted, _ = predict_type(classifier, ex.answer_text, ex.context)
        assert predicted is ex.qtype
