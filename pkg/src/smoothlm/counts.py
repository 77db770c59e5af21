"""N-gram count accumulation and the statistics smoothing methods consume.

Counts are stored in nested mappings keyed by context then successor, so
successor iteration for a context is O(distinct successors).  For each
sentence, n-1 BOS padding ids are prepended and every k-gram ending at a
predicted position is recorded for k = 1..n; EOS is a predicted position,
BOS-initial grams appear only as contexts.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterator

from smoothlm.corpus import DataError, EncodedCorpus, Vocabulary

Gram = tuple[int, ...]


@dataclass
class NGramTable:
    """Counts for all orders 1..order plus derived successor statistics."""

    order: int
    vocab: Vocabulary
    successors: dict[Gram, dict[int, int]]
    context_totals: dict[Gram, int]
    distinct_successors: dict[Gram, int] = field(default_factory=dict)
    one_counts: dict[Gram, int] = field(default_factory=dict)
    _coc_cache: dict[int, "CountOfCounts"] = field(default_factory=dict, repr=False)

    @property
    def total_words(self) -> int:
        """N: number of predicted tokens in the training data."""
        return self.context_totals.get((), 0)

    @property
    def n_predictable(self) -> int:
        return self.vocab.n_predictable

    @property
    def bos_id(self) -> int:
        return self.vocab.bos_id

    def count(self, gram: Gram) -> int:
        """Occurrence count of a full gram (order 1..n)."""
        succ = self.successors.get(gram[:-1])
        return succ.get(gram[-1], 0) if succ else 0

    def context_total(self, context: Gram) -> int:
        return self.context_totals.get(context, 0)

    def successor_counts(self, context: Gram) -> dict[int, int]:
        return self.successors.get(context, {})

    def contexts(self, k: int) -> Iterator[Gram]:
        """All stored contexts of order-k grams (tuples of length k-1)."""
        want = k - 1
        return (ctx for ctx in self.successors if len(ctx) == want)

    def grams(self, k: int) -> Iterator[tuple[Gram, int, int]]:
        """(context, word, count) triples for every stored order-k gram."""
        for ctx in self.contexts(k):
            for wid, cnt in self.successors[ctx].items():
                yield ctx, wid, cnt


def accumulate_counts(corpus: EncodedCorpus, order: int, vocab: Vocabulary) -> NGramTable:
    """Count every 1..order gram ending at a predicted position."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    successors: dict[Gram, dict[int, int]] = {}
    context_totals: dict[Gram, int] = {}
    pad = (vocab.bos_id,) * (order - 1)
    for sent in corpus:
        ids = pad + tuple(sent)
        for pos in range(order - 1, len(ids)):
            w = ids[pos]
            for k in range(order, 0, -1):
                ctx = ids[pos - k + 1:pos]
                succ = successors.get(ctx)
                if succ is None:
                    successors[ctx] = succ = {}
                succ[w] = succ.get(w, 0) + 1
                context_totals[ctx] = context_totals.get(ctx, 0) + 1
    table = NGramTable(order, vocab, successors, context_totals)
    for ctx, succ in successors.items():
        table.distinct_successors[ctx] = len(succ)
        table.one_counts[ctx] = sum(1 for c in succ.values() if c == 1)
    return table


def context_stats(table: NGramTable, context: Gram) -> tuple[int, int, int, float]:
    """(count, distinct successors, one-count successors, average count).

    The average count is count/distinct for seen contexts, 0 for unseen.
    """
    total = table.context_total(context)
    distinct = table.distinct_successors.get(context, 0)
    ones = table.one_counts.get(context, 0)
    avg = total / distinct if distinct else 0.0
    return total, distinct, ones, avg


@dataclass
class CountOfCounts:
    """Histogram r -> n_r over grams with count >= 1, plus optional n_0."""

    counts: dict[int, int]
    n_zero: int | None = None

    def n(self, r: int) -> int:
        if r == 0:
            return self.n_zero or 0
        return self.counts.get(r, 0)

    def rows(self) -> list[tuple[int, int]]:
        """(r, n_r) pairs with n_r > 0, ascending in r."""
        return sorted((r, n) for r, n in self.counts.items() if n > 0)

    def token_mass(self) -> int:
        """Total gram tokens covered: sum of r * n_r."""
        return sum(r * n for r, n in self.counts.items())


def count_of_counts(table: NGramTable, k: int) -> CountOfCounts:
    """Count-of-counts over all stored grams of order k (memoized)."""
    if k > table.order:
        raise ValueError(f"order {k} exceeds table order {table.order}")
    cached = table._coc_cache.get(k)
    if cached is not None:
        return cached
    hist = Counter()
    for ctx in table.contexts(k):
        for cnt in table.successors[ctx].values():
            hist[cnt] += 1
    coc = CountOfCounts(dict(hist))
    table._coc_cache[k] = coc
    return coc


def truncate_corpus(corpus: EncodedCorpus, sentences: int) -> EncodedCorpus:
    """First `sentences` sentences, preserving order (nested-size support)."""
    if sentences > len(corpus.sentences):
        raise DataError(
            f"cannot truncate to {sentences} sentences; only "
            f"{len(corpus.sentences)} available")
    return EncodedCorpus(corpus.sentences[:sentences])


def dump_counts(table: NGramTable, k: int, stream: IO[str]) -> None:
    """Write order-k counts as 'gram<TAB>count', sorted by id sequence."""
    rows = sorted((ctx + (wid,), cnt) for ctx, wid, cnt in table.grams(k))
    for gram, cnt in rows:
        stream.write(" ".join(str(i) for i in gram) + f"\t{cnt}\n")
