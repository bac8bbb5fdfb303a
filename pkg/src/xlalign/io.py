"""Reading and writing embedding files and bilingual dictionaries.

Embedding files use the text word2vec layout: a "n d" header line followed
by one "word x_1 ... x_d" line per word. Dictionary files hold one
"src_word trg_word" pair per line. All matrices are float64.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError, FormatError

# A bilingual dictionary is an ordered list of (source-index, target-index)
# pairs; modules pass it around as plain tuples.
BilingualDictionary = list[tuple[int, int]]


@dataclass
class Vocabulary:
    """Ordered word list with word -> 0-based index lookup."""

    words: list[str]
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ContractError("vocabulary contains duplicate words")
        if "" in self.index:
            raise ContractError("vocabulary contains an empty word")

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index


@dataclass
class GoldDictionary:
    """Gold translations for evaluation: source index -> set of target indices."""

    entries: dict[int, set[int]]
    oov_sources: int


def load_embeddings(path, max_vocab=None):
    """Load a text-format embedding file.

    Returns ``(Vocabulary, matrix)`` where row i of the float64 matrix is the
    vector of word i. Duplicate words keep their first occurrence; at most
    ``max_vocab`` words are returned.
    """
    if max_vocab is not None and max_vocab < 1:
        raise ContractError("max_vocab must be positive")
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8")
    except FileNotFoundError:
        raise FormatError(f"embedding file not found: {path}") from None
    with fh:
        try:
            header = fh.readline()
        except UnicodeDecodeError:
            raise FormatError(
                f"{path}: not valid UTF-8 text; binary embedding formats are not supported"
            ) from None
        parts = header.split()
        if len(parts) != 2:
            raise FormatError(f"{path}: header must be two integers 'n d'", line=1)
        try:
            n, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"{path}: header must be two integers 'n d'", line=1) from None
        if n < 0 or dim < 1:
            raise FormatError(f"{path}: invalid header counts n={n} d={dim}", line=1)

        limit = n if max_vocab is None else min(n, max_vocab)
        words: list[str] = []
        seen: set[str] = set()
        rows: list[np.ndarray] = []
        duplicates = 0
        for lineno in range(2, n + 2):
            if len(words) >= limit:
                break
            try:
                line = fh.readline()
            except UnicodeDecodeError:
                raise FormatError(f"{path}: not valid UTF-8 text", line=lineno) from None
            if not line:
                raise FormatError(
                    f"{path}: file ends after {lineno - 2} rows, header declared {n}"
                )
            tokens = line.split()
            if len(tokens) != dim + 1:
                raise FormatError(
                    f"{path}: expected a word and {dim} values, got {len(tokens)} tokens",
                    line=lineno,
                )
            word = tokens[0]
            try:
                vec = np.array([float(t) for t in tokens[1:]], dtype=np.float64)
            except ValueError:
                raise FormatError(f"{path}: unparseable number", line=lineno) from None
            if not np.all(np.isfinite(vec)):
                raise FormatError(f"{path}: non-finite value", line=lineno)
            if word in seen:
                duplicates += 1
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if duplicates:
        warnings.warn(f"{path}: dropped {duplicates} duplicate word(s), first occurrence kept")
    matrix = np.array(rows, dtype=np.float64) if rows else np.zeros((0, dim))
    return Vocabulary(words), matrix


def save_embeddings(vocab, emb, path):
    """Write vocabulary and matrix in the text format ``load_embeddings`` reads.

    Values are written with 9 significant digits, so a reload is within 1e-6
    of the original element-wise.
    """
    emb = np.asarray(emb)
    if len(vocab) != emb.shape[0]:
        raise ContractError(
            f"vocabulary size {len(vocab)} does not match matrix rows {emb.shape[0]}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{emb.shape[0]} {emb.shape[1]}\n")
        for word, row in zip(vocab.words, emb):
            fh.write(word + " " + " ".join(f"{v:.9g}" for v in row) + "\n")


def load_dictionary_pairs(path, src, trg):
    """Load a word-pair file as (source-index, target-index) pairs.

    Pairs with either word out of vocabulary are dropped (with a count
    warning); duplicates are kept once, first occurrence order preserved.
    """
    pairs: BilingualDictionary = []
    seen = set()
    dropped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise FormatError(
                    f"{path}: expected 'src_word trg_word', got {len(tokens)} tokens",
                    line=lineno,
                )
            sw, tw = tokens
            if sw not in src or tw not in trg:
                dropped += 1
                continue
            pair = (src.index[sw], trg.index[tw])
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} out-of-vocabulary pair(s)")
    return pairs


def save_dictionary_pairs(pairs, src, trg, path):
    """Write (source-index, target-index) pairs as a word-pair file."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in pairs:
            fh.write(f"{src.words[i]} {trg.words[j]}\n")


def load_gold_dictionary(path, src, trg):
    """Load a gold dictionary, grouping target words per source word.

    Source words absent from ``src`` are counted in ``oov_sources`` and
    dropped. Target words absent from ``trg`` are dropped from their source's
    set; a source whose set empties is dropped (logged, not counted as OOV).
    """
    entries: dict[int, set[int]] = {}
    oov_words: set[str] = set()
    emptied: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise FormatError(
                    f"{path}: expected 'src_word trg_word', got {len(tokens)} tokens",
                    line=lineno,
                )
            sw, tw = tokens
            if sw not in src:
                oov_words.add(sw)
                continue
            if tw not in trg:
                emptied.add(sw)
                continue
            entries.setdefault(src.index[sw], set()).add(trg.index[tw])
    emptied = {w for w in emptied if src.index[w] not in entries}
    if emptied:
        warnings.warn(
            f"{path}: {len(emptied)} gold source(s) dropped because all targets "
            "are out of the target vocabulary"
        )
    return GoldDictionary(entries=entries, oov_sources=len(oov_words))
