"""Church-Gale smoothing: bucketed Good-Turing over the joint gram space.

Every candidate gram gets a prior j from lower-order probabilities
(bigram: P(u) P(w) with Good-Turing unigrams; trigram: P(u,v) P(w) with
the smoothed joint bigram as the context prior).  The j axis is cut into
contiguous buckets of at least c_min nonzero grams, Good-Turing corrected
counts are computed inside each bucket (with n_0 from exact enumeration
of the candidate space, budget-guarded), and the globally normalized
corrected counts give joint probabilities; conditionals renormalize one
context row.  Rows with zero corrected mass fall back to the row of
unigram probabilities.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from smoothlm.corpus import DataError
from smoothlm.counts import CountOfCounts, Gram, NGramTable, count_of_counts
from smoothlm.good_turing import (
    GoodTuringError,
    fit_simple_good_turing,
    raw_adjusted_counts,
)
from smoothlm.smoothing import ParameterError, SmoothedModel

DEFAULT_ENUMERATION_BUDGET = 10**8


def good_turing_unigram_probs(table: NGramTable) -> np.ndarray:
    """Good-Turing smoothed unigram distribution, no bucketing.

    Seen words share 1 - p0 in proportion to their adjusted counts;
    unseen vocabulary words split p0 = n_1/N evenly.  Falls back to raw
    adjusted counts when the regression is unfittable.
    """
    n_pred = table.n_predictable
    unigrams = table.successor_counts(())
    probs = np.zeros(n_pred)
    if not unigrams:
        probs[:] = 1.0 / n_pred
        return probs
    coc = count_of_counts(table, 1)
    total = coc.token_mass()
    try:
        est = fit_simple_good_turing(coc)
        adjusted = est.adjusted
        p0 = est.p0
    except GoodTuringError:
        adjusted = raw_adjusted_counts(coc)
        p0 = coc.n(1) / total
    n_unseen = n_pred - len(unigrams)
    if n_unseen == 0:
        p0 = 0.0
    seen_mass = sum(n * adjusted[r] for r, n in coc.rows())
    if seen_mass <= 0:
        probs[:] = 1.0 / n_pred
        return probs
    scale = (1.0 - p0) / seen_mass
    for wid, cnt in unigrams.items():
        probs[wid] = adjusted[cnt] * scale
    if n_unseen:
        unseen_p = p0 / n_unseen
        mask = np.ones(n_pred, dtype=bool)
        mask[list(unigrams)] = False
        probs[mask] = unseen_p
    return probs


class ChurchGaleModel(SmoothedModel):
    method = "church-gale"

    def __init__(self, table: NGramTable, order: int, c_min: int,
                 enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET):
        if order not in (2, 3):
            raise ParameterError(f"Church-Gale handles orders 2 and 3, got {order}")
        if c_min < 1:
            raise ParameterError(f"c_min must be >= 1, got {c_min}")
        self.table = table
        self.order = order
        self.c_min = c_min
        self.bos_id = table.bos_id
        self.n_pred = table.n_predictable

        self.succ_probs = good_turing_unigram_probs(table)
        fallback = self.succ_probs.sum()
        self.fallback_row = (self.succ_probs / fallback if fallback > 0
                             else np.full(self.n_pred, 1.0 / self.n_pred))

        self._ctx_priors = self._build_context_priors(c_min, enumeration_budget)
        n_candidates = len(self._ctx_priors) * self.n_pred
        if n_candidates > enumeration_budget:
            raise DataError(
                f"Church-Gale would enumerate {n_candidates} candidate "
                f"grams, above the budget of {enumeration_budget}; use a "
                f"smaller vocabulary or raise enumeration_budget")

        self._build_buckets()
        self._row_cache: dict[Gram, float] = {}

    # -- construction ---------------------------------------------------

    def _build_context_priors(self, c_min: int, budget: int) -> np.ndarray:
        """Flat array of prior probabilities over the context axis."""
        n_pred = self.n_pred
        n_words = self.table.total_words
        if self.order == 2:
            # Context ids are 0..n_pred with BOS (== id n_pred) last; its
            # prior is the sentence-start share of predicted positions.
            priors = np.empty(n_pred + 1)
            priors[:n_pred] = self.succ_probs
            bos_mass = (self.table.context_total((self.bos_id,)) / n_words
                        if n_words else 0.0)
            priors[n_pred] = bos_mass
            return priors

        trigram_candidates = ((n_pred + 1) * n_pred + 1) * n_pred
        if trigram_candidates > budget:
            raise DataError(
                f"Church-Gale trigrams would enumerate {trigram_candidates} "
                f"candidate grams, above the budget of {budget}; use a "
                f"smaller vocabulary or raise enumeration_budget")
        bigram = ChurchGaleModel(self.table, 2, c_min, budget)
        self._bigram = bigram
        scale = 1.0 / bigram.total if bigram.total > 0 else 0.0
        priors = np.empty((n_pred + 1) * n_pred + 1)
        for u in range(n_pred + 1):
            row = bigram._corrected_row((u,))
            priors[u * n_pred:(u + 1) * n_pred] = row * scale
        bos2 = self.table.context_total((self.bos_id, self.bos_id))
        priors[-1] = bos2 / n_words if n_words else 0.0
        return priors

    def _ctx_prior(self, context: Gram) -> float:
        if self.order == 2:
            return float(self._ctx_priors[context[0]])
        u, v = context
        if v == self.bos_id:
            return float(self._ctx_priors[-1])
        return float(self._ctx_priors[u * self.n_pred + v])

    def _build_buckets(self) -> None:
        table = self.table
        seen = [(self._ctx_prior(ctx) * self.succ_probs[w], ctx + (w,), cnt)
                for ctx, w, cnt in table.grams(self.order)]
        seen.sort(key=lambda item: item[0])

        # Greedy ascending-j buckets of >= c_min nonzero grams, extending
        # through ties so equal-j grams share a bucket; a trailing partial
        # bucket merges into its predecessor.
        boundaries: list[float] = []
        bucket_of_gram: list[int] = []
        in_bucket = 0
        idx = 0
        while idx < len(seen):
            bucket_of_gram.append(len(boundaries))
            in_bucket += 1
            j = seen[idx][0]
            last_of_tie = idx + 1 >= len(seen) or seen[idx + 1][0] > j
            if in_bucket >= self.c_min and last_of_tie and idx + 1 < len(seen):
                boundaries.append(j)
                in_bucket = 0
            idx += 1
        if boundaries and in_bucket < self.c_min:
            boundaries.pop()
            bucket_of_gram = [min(b, len(boundaries)) for b in bucket_of_gram]

        n_buckets = len(boundaries) + 1
        self.boundaries = np.array(boundaries)
        self._boundaries_list = boundaries

        seen_in_bucket = np.zeros(n_buckets, dtype=np.int64)
        cocs = [Counter() for _ in range(n_buckets)]
        for (j, gram, cnt), b in zip(seen, bucket_of_gram):
            cocs[b][cnt] += 1
            seen_in_bucket[b] += 1

        candidates = self._count_candidates_per_bucket(n_buckets)
        n_zero = candidates - seen_in_bucket

        self.bucket_cocs = [CountOfCounts(dict(c), n_zero=int(z))
                            for c, z in zip(cocs, n_zero)]
        self.r0 = np.zeros(n_buckets)
        adjusted_by_bucket: list[dict[int, float]] = []
        for b, coc in enumerate(self.bucket_cocs):
            try:
                adjusted = fit_simple_good_turing(coc).adjusted
            except GoodTuringError:
                adjusted = raw_adjusted_counts(coc)
            adjusted_by_bucket.append(adjusted)
            if coc.n_zero:
                self.r0[b] = coc.n(1) / coc.n_zero

        self.cstar: dict[Gram, float] = {}
        for (j, gram, cnt), b in zip(seen, bucket_of_gram):
            self.cstar[gram] = adjusted_by_bucket[b][cnt]

        self.total = (sum(self.cstar.values())
                      + float(np.dot(n_zero, self.r0)))

    def _count_candidates_per_bucket(self, n_buckets: int) -> np.ndarray:
        """Exact enumeration of the candidate space, chunked over contexts."""
        counts = np.zeros(n_buckets, dtype=np.int64)
        sp = self.succ_probs
        chunk = max(1, 10_000_000 // max(1, self.n_pred))
        for start in range(0, len(self._ctx_priors), chunk):
            block = self._ctx_priors[start:start + chunk]
            j = np.multiply.outer(block, sp).ravel()
            idx = np.searchsorted(self.boundaries, j, side="left")
            counts += np.bincount(idx, minlength=n_buckets)
        return counts

    # -- probabilities ---------------------------------------------------

    def _corrected_row(self, context: Gram) -> np.ndarray:
        """Corrected counts for every successor of one context."""
        j_row = self._ctx_prior(context) * self.succ_probs
        idx = np.searchsorted(self.boundaries, j_row, side="left")
        row = self.r0[idx]
        for w, _ in self.table.successor_counts(context).items():
            row[w] = self.cstar[context + (w,)]
        return row

    def _row_mass(self, context: Gram) -> float:
        mass = self._row_cache.get(context)
        if mass is None:
            mass = float(self._corrected_row(context).sum())
            self._row_cache[context] = mass
        return mass

    def cond_prob(self, context: Gram, w: int) -> float:
        mass = self._row_mass(context)
        if mass <= 0.0:
            return float(self.fallback_row[w])
        gram = context + (w,)
        cc = self.cstar.get(gram)
        if cc is None:
            j = self._ctx_prior(context) * self.succ_probs[w]
            b = int(np.searchsorted(self.boundaries, j, side="left"))
            cc = self.r0[b]
        return cc / mass

    def joint_prob(self, context: Gram, w: int) -> float:
        """Globally normalized joint probability of one candidate gram."""
        gram = context + (w,)
        cc = self.cstar.get(gram)
        if cc is None:
            j = self._ctx_prior(context) * self.succ_probs[w]
            b = int(np.searchsorted(self.boundaries, j, side="left"))
            cc = self.r0[b]
        return cc / self.total if self.total > 0 else 0.0

    def all_contexts(self) -> list[Gram]:
        """The enumerated context axis (for exhaustive joint checks)."""
        if self.order == 2:
            return [(u,) for u in range(self.n_pred)] + [(self.bos_id,)]
        ctxs = [(u, v) for u in range(self.n_pred + 1)
                for v in range(self.n_pred)]
        ctxs.append((self.bos_id, self.bos_id))
        return ctxs


def build_church_gale(table: NGramTable, c_min: int,
                      enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET
                      ) -> ChurchGaleModel:
    return ChurchGaleModel(table, table.order, c_min, enumeration_budget)
