"""Model backend: tokenizers, reference transformer, optimizer, decoding."""

from .beam import beam_decode, beam_decode_with_score
from .checkpoint import load_checkpoint, read_manifest, save_checkpoint
from .optim import AdamW
from .params import GROUP_NAMES, Parameter, ParameterGroup, ParameterStore
from .pretrain import mask_token_ids, pretrain_denoising
from .tokenizers import (
    BOS, CLS, EOS, MASK, PAD, SEP, UNK,
    SubwordTokenizer,
    Tokenizer,
    WhitespaceTokenizer,
    load_tokenizer,
)
from .transformer import (
    EncoderClassifier,
    ModelConfig,
    Seq2SeqTransformer,
    TrainingLog,
    freeze_groups,
    pad_batch,
    sequence_logprob,
)

__all__ = [
    "AdamW", "BOS", "CLS", "EOS", "MASK", "PAD", "SEP", "UNK",
    "EncoderClassifier", "GROUP_NAMES", "ModelConfig", "Parameter",
    "ParameterGroup", "ParameterStore", "Seq2SeqTransformer",
    "SubwordTokenizer", "Tokenizer", "TrainingLog", "WhitespaceTokenizer",
    "beam_decode", "beam_decode_with_score", "freeze_groups",
    "load_checkpoint", "load_tokenizer", "mask_token_ids", "pad_batch",
    "pretrain_denoising", "read_manifest", "save_checkpoint",
    "sequence_logprob",
]
