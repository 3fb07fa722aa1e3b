"""Shared fixtures: toy corpora, tokenizers, and small model shapes."""

import pytest

from xlqg.backend import ModelConfig, WhitespaceTokenizer
from xlqg.qg import ANSWER_TAG, CONTEXT_TAG, EXEMPLAR_TAG
from xlqg.toy import TOY_SRC, TOY_TGT, generate_toy_corpus, toy_pretraining_texts


@pytest.fixture(scope="session")
def toy_texts():
    return toy_pretraining_texts(n_per_language=300, seed=0)


@pytest.fixture(scope="session")
def toy_tokenizer(toy_texts):
    return WhitespaceTokenizer.train(
        toy_texts + [f"{EXEMPLAR_TAG} {ANSWER_TAG} {CONTEXT_TAG}"]
    )


@pytest.fixture(scope="session")
def tiny_config():
    """Mechanics-test shape: one layer each side, very narrow."""
    return ModelConfig(d_model=32, n_heads=2, n_encoder_layers=1,
                       n_decoder_layers=1, d_ff=48, max_source_len=64,
                       max_target_len=12)


@pytest.fixture(scope="session")
def small_config():
    """Training-test shape used by the toy experiments."""
    return ModelConfig(d_model=64, n_heads=4, n_encoder_layers=2,
                       n_decoder_layers=2, d_ff=128, max_source_len=96,
                       max_target_len=14)


@pytest.fixture(scope="session")
def toy_src_train():
    return generate_toy_corpus(TOY_SRC, 200, seed=0, split="train")


@pytest.fixture(scope="session")
def toy_src_small():
    return generate_toy_corpus(TOY_SRC, 50, seed=3, split="train")


@pytest.fixture(scope="session")
def toy_tgt_train():
    return generate_toy_corpus(TOY_TGT, 200, seed=1, split="train")


@pytest.fixture(scope="session")
def toy_tgt_test():
    return generate_toy_corpus(TOY_TGT, 100, seed=99, split="test")
