"""Deterministic text generator with natural-language-like statistics.

Produces corpora for benchmarking when no real text is at hand: a Zipfian
unigram marginal plus sparse per-context successor distributions whose
peakedness varies by word, which is the structure count-based smoothing
methods exploit (contexts differ both in how often they occur and in how
concentrated their successors are).  Each word id owns a cheap bijective
remap of a shared Zipfian rank distribution, so conditionals differ per
context while sampling stays O(1) per token.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

_SHAPE_EXPONENTS = (1.05, 1.25, 1.55, 2.0)


def _zipf_cdf(size: int, exponent: float) -> np.ndarray:
    weights = 1.0 / np.power(np.arange(1, size + 1, dtype=float), exponent)
    cdf = np.cumsum(weights)
    return cdf / cdf[-1]


def generate_corpus(
    n_sentences: int,
    seed: int,
    vocab_size: int = 16384,
    marginal_exponent: float = 1.05,
    mean_sentence_len: int = 20,
    max_sentence_len: int = 80,
) -> list[list[str]]:
    """Sample sentences of wNNNNN tokens from a seeded bigram process.

    Each word id carries a successor-shape class (one of several Zipf
    exponents) and a stickiness in [0.2, 0.92]: the next token comes from
    the word-specific successor distribution with that probability, and
    from the global Zipf marginal otherwise.  Sentence-initial tokens are
    always global draws.
    """
    if vocab_size & (vocab_size - 1):
        raise ValueError("vocab_size must be a power of two")
    rng = np.random.default_rng(seed)
    mask = vocab_size - 1

    lengths = np.minimum(rng.geometric(1.0 / mean_sentence_len, n_sentences),
                         max_sentence_len)
    total = int(lengths.sum())

    global_draws = np.searchsorted(_zipf_cdf(vocab_size, marginal_exponent),
                                   rng.random(total))
    rank_uniforms = rng.random(total)
    ranks_by_shape = [np.searchsorted(_zipf_cdf(vocab_size, ex), rank_uniforms)
                      for ex in _SHAPE_EXPONENTS]
    stick_uniforms = rng.random(total)

    shape_of = rng.integers(0, len(_SHAPE_EXPONENTS), vocab_size)
    stickiness = rng.uniform(0.2, 0.92, vocab_size)
    # Successor permutation per word: rank k maps to (a_u k + b_u) mod V,
    # a_u odd so the map is a bijection.
    mult = rng.integers(0, vocab_size // 2, vocab_size) * 2 + 1
    offset = rng.integers(0, vocab_size, vocab_size)

    names = [f"w{i:05d}" for i in range(vocab_size)]
    sentences: list[list[str]] = []
    pos = 0
    for length in lengths:
        sent = []
        prev = -1
        for _ in range(length):
            if prev >= 0 and stick_uniforms[pos] < stickiness[prev]:
                rank = ranks_by_shape[shape_of[prev]][pos]
                wid = int((mult[prev] * rank + offset[prev]) & mask)
            else:
                wid = int(global_draws[pos])
            sent.append(names[wid])
            prev = wid
            pos += 1
        sentences.append(sent)
    return sentences


def write_corpus(path: str | Path, sentences: list[list[str]]) -> None:
    """One sentence per line, whitespace-joined."""
    with open(path, "w", encoding="utf-8") as handle:
        for sent in sentences:
            handle.write(" ".join(sent) + "\n")
