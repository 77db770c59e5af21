"""Corpus ingestion: tokenization, vocabularies, id encoding, data splits.

Input is plain UTF-8 text, one sentence per line, whitespace-tokenized.
Sentences are encoded as word-id sequences terminated by EOS; BOS exists
only as context padding and is never a predicted token.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

BOS_TOKEN = "<s>"
EOS_TOKEN = "</s>"
UNK_TOKEN = "<unk>"
_RESERVED = (BOS_TOKEN, EOS_TOKEN, UNK_TOKEN)


class DataError(ValueError):
    """Raised for malformed or insufficient input data."""


def tokenize(line: str, lowercase: bool = False) -> list[str]:
    """Split a line on runs of whitespace; empty lines give empty lists."""
    if lowercase:
        line = line.lower()
    return line.split()


def read_sentences(path: str | Path, lowercase: bool = False) -> list[list[str]]:
    """Read one sentence per line, skipping empty lines."""
    sentences = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            tokens = tokenize(line, lowercase=lowercase)
            if tokens:
                sentences.append(tokens)
    return sentences


@dataclass
class Vocabulary:
    """Bijective token/id map with BOS, EOS and an optional UNK.

    Ids are dense in 0..size-1.  Regular words come first in first-seen
    order, then UNK (if present), then EOS, then BOS.  BOS is always the
    final id, so the predictable ids are exactly range(size - 1).
    """

    tokens: list[str]
    index: dict[str, int]
    policy: str
    bos_id: int
    eos_id: int
    unk_id: int | None

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def n_predictable(self) -> int:
        """Number of ids a model may predict (everything except BOS)."""
        return len(self.tokens) - 1

    def predictable_ids(self) -> range:
        return range(self.n_predictable)

    def id_for(self, token: str) -> int:
        """Map a surface token to its id, falling back to UNK."""
        wid = self.index.get(token)
        if wid is not None:
            return wid
        if self.unk_id is None:
            raise DataError(f"OOV token {token!r} and vocabulary has no UNK")
        return self.unk_id

    def token_for(self, wid: int) -> str:
        return self.tokens[wid]

    def save(self, path: str | Path) -> None:
        """Write one token per line in id order."""
        with open(path, "w", encoding="utf-8") as handle:
            for token in self.tokens:
                handle.write(token + "\n")


def _assemble_vocabulary(words: list[str], policy: str, add_unk: bool) -> Vocabulary:
    tokens = list(words)
    unk_id = None
    if add_unk:
        unk_id = len(tokens)
        tokens.append(UNK_TOKEN)
    eos_id = len(tokens)
    tokens.append(EOS_TOKEN)
    bos_id = len(tokens)
    tokens.append(BOS_TOKEN)
    index = {token: wid for wid, token in enumerate(tokens)}
    return Vocabulary(tokens, index, policy, bos_id, eos_id, unk_id)


def build_vocabulary(
    tokens: Iterable[str],
    min_count: int | None = None,
    add_unk: bool = False,
) -> Vocabulary:
    """Build a vocabulary from a token stream.

    min_count=None is the all-words policy: every distinct token gets an
    id and UNK appears only if add_unk is set.  min_count=K keeps tokens
    occurring at least K times and always adds UNK.
    """
    if min_count is not None and min_count < 1:
        raise ValueError("min_count must be >= 1")
    freqs = Counter()
    for token in tokens:
        if token in _RESERVED:
            raise DataError(f"corpus contains reserved token {token!r}")
        freqs[token] += 1
    if not freqs:
        raise DataError("empty corpus")
    if min_count is None:
        words = list(freqs)
        policy = "all-words"
    else:
        words = [w for w, c in freqs.items() if c >= min_count]
        policy = f"min-count({min_count})"
        add_unk = True
    return _assemble_vocabulary(words, policy, add_unk)


def load_vocabulary(path: str | Path) -> Vocabulary:
    """Read a vocabulary exported by Vocabulary.save (one token per line)."""
    words = []
    has_unk = False
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            token = line.rstrip("\n")
            if not token:
                continue
            if token == UNK_TOKEN:
                has_unk = True
            elif token not in (BOS_TOKEN, EOS_TOKEN):
                words.append(token)
    if not words:
        raise DataError(f"empty vocabulary file: {path}")
    return _assemble_vocabulary(words, "file", has_unk)


@dataclass
class EncodedCorpus:
    """Sentences as id sequences, each terminated by EOS.

    word_count is the number of predicted tokens N (EOS included, BOS
    excluded -- BOS never appears in encoded sentences at all).
    """

    sentences: list[list[int]]
    word_count: int = field(init=False)

    def __post_init__(self) -> None:
        self.word_count = sum(len(s) for s in self.sentences)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[list[int]]:
        return iter(self.sentences)


def encode(sentences: Iterable[list[str]], vocab: Vocabulary) -> EncodedCorpus:
    """Map token sentences to id sequences, appending EOS to each."""
    eos = vocab.eos_id
    encoded = [[vocab.id_for(tok) for tok in sent] + [eos] for sent in sentences]
    return EncodedCorpus(encoded)


def decode(sentence: list[int], vocab: Vocabulary) -> list[str]:
    """Inverse of encode for one sentence; strips the trailing EOS."""
    ids = sentence[:-1] if sentence and sentence[-1] == vocab.eos_id else sentence
    return [vocab.token_for(wid) for wid in ids]


def recode(corpus: EncodedCorpus, old: Vocabulary, new: Vocabulary) -> EncodedCorpus:
    """Re-express a corpus encoded under one vocabulary in another.

    Ids unknown to the new vocabulary map to its UNK (error without one).
    """
    mapping = [new.id_for(tok) if tok != EOS_TOKEN else new.eos_id
               for tok in old.tokens]
    return EncodedCorpus([[mapping[wid] for wid in sent] for sent in corpus])


@dataclass
class SplitSpec:
    """Targets for carving one corpus into train/dev1/dev2/test.

    Dev/test segments are drawn sentence-wise until their word targets are
    reached, after a seeded shuffle of contiguous sentence blocks; train
    then takes the requested sentence count from the remainder.
    """

    train_sentences: int
    dev1_words: int
    dev2_words: int
    test_words: int
    shuffle_seed: int
    block_sentences: int = 10


@dataclass
class CorpusSplit:
    train: EncodedCorpus
    dev1: EncodedCorpus
    dev2: EncodedCorpus
    test: EncodedCorpus


def _take_words(pool: list[list[int]], start: int, target: int, name: str
                ) -> tuple[list[list[int]], int]:
    taken = []
    words = 0
    pos = start
    while words < target:
        if pos >= len(pool):
            raise DataError(
                f"insufficient data for {name}: required {target} words, "
                f"got {words} before the corpus ran out")
        taken.append(pool[pos])
        words += len(pool[pos])
        pos += 1
    if target > 0 and words > 1.1 * target:
        raise DataError(
            f"{name} overshoots its word target by more than 10% "
            f"({words} vs {target}); sentences are too long for this target")
    return taken, pos


def split_corpus(corpus: EncodedCorpus, spec: SplitSpec) -> CorpusSplit:
    """Deterministically carve dev1, dev2, test and train segments."""
    sents = corpus.sentences
    blocks = [sents[i:i + spec.block_sentences]
              for i in range(0, len(sents), spec.block_sentences)]
    rng = random.Random(spec.shuffle_seed)
    rng.shuffle(blocks)
    pool = [s for block in blocks for s in block]

    dev1, pos = _take_words(pool, 0, spec.dev1_words, "dev1")
    dev2, pos = _take_words(pool, pos, spec.dev2_words, "dev2")
    test, pos = _take_words(pool, pos, spec.test_words, "test")
    remaining = len(pool) - pos
    if remaining < spec.train_sentences:
        raise DataError(
            f"insufficient data for train: required {spec.train_sentences} "
            f"sentences, {remaining} available after held-out carve-out")
    train = pool[pos:pos + spec.train_sentences]
    return CorpusSplit(
        train=EncodedCorpus(train),
        dev1=EncodedCorpus(dev1),
        dev2=EncodedCorpus(dev2),
        test=EncodedCorpus(test),
    )
