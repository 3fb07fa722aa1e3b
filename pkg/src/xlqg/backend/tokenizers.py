"""Tokenizers for the reference backend.

Two modes share one interface: a whitespace tokenizer (lossless for
in-vocabulary text, used by the reference models) and a small byte-pair
subword tokenizer with SentencePiece-style word-boundary markers (usable for
languages without whitespace word separation, and by the subword ROUGE
variant).
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

PAD, UNK, BOS, EOS, CLS, SEP, MASK = range(7)
SPECIAL_TOKENS = ["<pad>", "<unk>", "<bos>", "<eos>", "<cls>", "<sep>", "<mask>"]
WORD_BOUNDARY = "▁"  # ▁


class Tokenizer:
    """Shared id bookkeeping; subclasses implement text <-> token pieces."""

    mode = "whitespace"

    def __init__(self, vocab: list[str]):
        self.vocab = list(vocab)
        self._ids = {tok: i for i, tok in enumerate(self.vocab)}
        if self.vocab[: len(SPECIAL_TOKENS)] != SPECIAL_TOKENS:
            raise ValueError("vocab must start with the special tokens")

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    @property
    def special_tokens(self) -> dict[str, int]:
        """Named special token ids (the classifier/separator pair mirrors BERT's CLS/SEP)."""
        return {
            "classifier_start": CLS,
            "separator": SEP,
            "pad": PAD,
            "end_of_sequence": EOS,
            "mask": MASK,
            "unknown": UNK,
            "begin_of_sequence": BOS,
        }

    def pieces(self, text: str) -> list[str]:
        raise NotImplementedError

    def encode(self, text: str) -> list[int]:
        return [self._ids.get(piece, UNK) for piece in self.pieces(text)]

    def decode(self, ids, skip_special: bool = True) -> str:
        pieces = []
        for i in ids:
            if skip_special and i < len(SPECIAL_TOKENS):
                continue
            pieces.append(self.vocab[i])
        return self.join(pieces)

    def join(self, pieces: list[str]) -> str:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"mode": self.mode, "vocab": self.vocab}

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), ensure_ascii=False), encoding="utf-8"
        )


class WhitespaceTokenizer(Tokenizer):
    """Token per whitespace-delimited word; encode/decode round-trips in-vocab text."""

    mode = "whitespace"

    @classmethod
    def train(cls, texts, min_freq: int = 1, max_vocab: int | None = None) -> "WhitespaceTokenizer":
        counts = Counter()
        for text in texts:
            counts.update(text.split())
        words = [w for w, c in counts.items() if c >= min_freq]
        words.sort(key=lambda w: (-counts[w], w))
        if max_vocab is not None:
            words = words[: max(0, max_vocab - len(SPECIAL_TOKENS))]
        return cls(SPECIAL_TOKENS + words)

    def pieces(self, text: str) -> list[str]:
        return text.split()

    def join(self, pieces: list[str]) -> str:
        return " ".join(pieces)


class SubwordTokenizer(Tokenizer):
    """Byte-pair merges over characters, with ▁ marking word starts.

    Greedy merge application in training order; deterministic training with
    lexicographic tie-breaking.  Words here are whitespace chunks, so for
    languages written without spaces the merges simply grow inside the one
    chunk.
    """

    mode = "subword"

    def __init__(self, vocab: list[str], merges: list[tuple[str, str]]):
        super().__init__(vocab)
        self.merges = [tuple(m) for m in merges]
        self._merge_rank = {m: r for r, m in enumerate(self.merges)}

    @classmethod
    def train(cls, texts, vocab_size: int = 512, min_pair_freq: int = 2) -> "SubwordTokenizer":
        word_counts = Counter()
        for text in texts:
            word_counts.update(text.split())
        words = {w: cls._initial_symbols(w) for w in word_counts}

        symbols = set()
        for sym_list in words.values():
            symbols.update(sym_list)
        merges: list[tuple[str, str]] = []

        while len(symbols) + len(SPECIAL_TOKENS) + len(merges) < vocab_size:
            pair_counts: Counter = Counter()
            for word, sym_list in words.items():
                count = word_counts[word]
                for a, b in zip(sym_list, sym_list[1:]):
                    pair_counts[(a, b)] += count
            if not pair_counts:
                break
            best, best_count = max(
                pair_counts.items(), key=lambda kv: (kv[1], kv[0])
            )
            if best_count < min_pair_freq:
                break
            merges.append(best)
            merged = best[0] + best[1]
            symbols.add(merged)
            for word, sym_list in words.items():
                words[word] = cls._apply_merge(sym_list, best, merged)

        vocab = SPECIAL_TOKENS + sorted(symbols)
        return cls(vocab, merges)

    @staticmethod
    def _initial_symbols(word: str) -> list[str]:
        chars = list(word)
        chars[0] = WORD_BOUNDARY + chars[0]
        return chars

    @staticmethod
    def _apply_merge(symbols: list[str], pair: tuple[str, str], merged: str) -> list[str]:
        out = []
        i = 0
        while i < len(symbols):
            if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
                out.append(merged)
                i += 2
            else:
                out.append(symbols[i])
                i += 1
        return out

    def pieces(self, text: str) -> list[str]:
        out = []
        for word in text.split():
            symbols = self._initial_symbols(word)
            while len(symbols) > 1:
                ranked = [
                    (self._merge_rank.get((a, b)), idx)
                    for idx, (a, b) in enumerate(zip(symbols, symbols[1:]))
                ]
                ranked = [(r, idx) for r, idx in ranked if r is not None]
                if not ranked:
                    break
                rank, idx = min(ranked)
                pair = (symbols[idx], symbols[idx + 1])
                symbols = self._apply_merge(symbols, pair, pair[0] + pair[1])
            out.extend(symbols)
        return out

    def join(self, pieces: list[str]) -> str:
        return "".join(pieces).replace(WORD_BOUNDARY, " ").strip()

    def to_json(self) -> dict:
        return {"mode": self.mode, "vocab": self.vocab, "merges": self.merges}


def load_tokenizer(path: str | Path) -> Tokenizer:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload["mode"] == "whitespace":
        return WhitespaceTokenizer(payload["vocab"])
    if payload["mode"] == "subword":
        return SubwordTokenizer(payload["vocab"], [tuple(m) for m in payload["merges"]])
    raise ValueError(f"unknown tokenizer mode {payload['mode']!r}")
