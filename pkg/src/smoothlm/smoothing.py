"""Conditional-probability models: one class per smoothing method.

Every model answers cond_prob(context, w) for a context of length
order - 1 (ids may include BOS) and a predictable word id w.  Recursive
methods hold a lower-order model and terminate in the uniform
distribution over the predictable vocabulary.  All methods except pure
maximum likelihood keep sum_w cond_prob(context, w) = 1 and assign
nonzero mass everywhere the count-of-counts statistics allow.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from smoothlm.counts import CountOfCounts, Gram, NGramTable, count_of_counts

METHODS = (
    "interp-baseline",
    "plus-one",
    "plus-delta",
    "katz",
    "church-gale",
    "interp-held-out",
    "interp-del-int",
    "new-avg-count",
    "new-one-count",
)

LOG2 = math.log(2.0)


class ParameterError(ValueError):
    """Raised for smoothing parameters outside their legal range."""


class SmoothedModel:
    """Base: conditional probabilities plus shared sentence scoring."""

    method: str = "?"
    order: int = 0
    bos_id: int | None = None

    def cond_prob(self, context: Gram, w: int) -> float:
        raise NotImplementedError

    def events(self, sentence: Sequence[int]) -> Iterable[tuple[Gram, int]]:
        """(context, word) pairs for each predicted position, BOS-padded."""
        k = max(self.order - 1, 0)
        ids = (self.bos_id,) * k + tuple(sentence)
        for pos in range(k, len(ids)):
            yield ids[pos - k:pos], ids[pos]

    def sequence_logprob(self, sentence: Sequence[int]) -> float:
        """log2 probability of one EOS-terminated sentence."""
        total = 0.0
        for ctx, w in self.events(sentence):
            p = self.cond_prob(ctx, w)
            if p <= 0.0:
                return -math.inf
            total += math.log(p)
        return total / LOG2


class UniformModel(SmoothedModel):
    """Terminal distribution: 1/|V| for every predictable word."""

    method = "uniform"
    order = 0

    def __init__(self, n_predictable: int):
        if n_predictable < 1:
            raise ParameterError("uniform model needs a nonempty vocabulary")
        self.n_predictable = n_predictable
        self._p = 1.0 / n_predictable

    def cond_prob(self, context: Gram, w: int) -> float:
        return self._p


class MaximumLikelihoodModel(SmoothedModel):
    """Relative frequencies; zero for unseen grams and contexts."""

    method = "ml"

    def __init__(self, table: NGramTable, order: int | None = None):
        self.table = table
        self.order = order if order is not None else table.order
        self.bos_id = table.bos_id

    def cond_prob(self, context: Gram, w: int) -> float:
        total = self.table.context_total(context)
        if total == 0:
            return 0.0
        succ = self.table.successor_counts(context)
        return succ.get(w, 0) / total


class AdditiveModel(SmoothedModel):
    """P(w|ctx) = (c(ctx.w) + delta) / (c(ctx) + delta |V|), top order only."""

    def __init__(self, table: NGramTable, delta: float, order: int | None = None):
        if delta <= 0:
            raise ParameterError(f"additive delta must be > 0, got {delta}")
        self.table = table
        self.delta = delta
        self.order = order if order is not None else table.order
        self.bos_id = table.bos_id
        self.method = "plus-one" if delta == 1 else "plus-delta"
        self._denom_add = delta * table.n_predictable

    def cond_prob(self, context: Gram, w: int) -> float:
        total = self.table.context_total(context)
        succ = self.table.successor_counts(context)
        return (succ.get(w, 0) + self.delta) / (total + self._denom_add)


def build_additive(table: NGramTable, delta: float) -> AdditiveModel:
    return AdditiveModel(table, delta)


@dataclass
class BucketMap:
    """Tied interpolation weights over ranges of a context statistic.

    boundaries are the inclusive upper edges of all but the last bucket;
    a statistic equal to a boundary goes to the lower bucket, and the last
    bucket is open-ended.  bucket_stats records the mean training
    statistic per bucket (diagnostics only).
    """

    scheme: str
    boundaries: list[float]
    lambdas: list[float]
    c_min: int = 0
    bucket_stats: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.lambdas) != len(self.boundaries) + 1:
            raise ParameterError(
                f"{len(self.boundaries)} boundaries need "
                f"{len(self.boundaries) + 1} lambdas, got {len(self.lambdas)}")
        if any(b >= a for a, b in zip(self.boundaries[1:], self.boundaries)):
            raise ParameterError("bucket boundaries must be strictly ascending")
        for lam in self.lambdas:
            if not 0.0 <= lam <= 1.0:
                raise ParameterError(f"lambda {lam} outside [0, 1]")

    def bucket_index(self, statistic: float) -> int:
        return bisect_left(self.boundaries, statistic)

    def lambda_for(self, statistic: float) -> float:
        return self.lambdas[self.bucket_index(statistic)]

    def statistic_lambda_pairs(self) -> list[tuple[float, float]]:
        """(mean training statistic, trained lambda) per occupied bucket."""
        return [(s, lam) for s, lam in zip(self.bucket_stats, self.lambdas)
                if not math.isnan(s)]


def bucket_statistic(scheme: str, table: NGramTable, context: Gram) -> float:
    """context-count: c(ctx).  average-count: c(ctx) per distinct successor."""
    total = table.context_total(context)
    if scheme == "context-count":
        return float(total)
    if scheme == "average-count":
        distinct = table.distinct_successors.get(context, 0)
        return total / distinct if distinct else 0.0
    raise ParameterError(f"unknown bucketing scheme {scheme!r}")


class InterpolatedModel(SmoothedModel):
    """Jelinek-Mercer level: lambda(ctx) ML + (1 - lambda(ctx)) lower.

    lambda comes either from a single per-order constant or from a
    BucketMap keyed on the context statistic; contexts with zero count get
    lambda = 0 (their ML estimate is 0/0), i.e. the lower-order value.
    """

    def __init__(
        self,
        table: NGramTable,
        order: int,
        lower: SmoothedModel,
        lam: float | None = None,
        buckets: BucketMap | None = None,
        method: str = "interp-baseline",
    ):
        if (lam is None) == (buckets is None):
            raise ParameterError("specify exactly one of lam or buckets")
        if lam is not None and not 0.0 <= lam <= 1.0:
            raise ParameterError(f"lambda {lam} outside [0, 1]")
        self.table = table
        self.order = order
        self.lower = lower
        self.lam = lam
        self.buckets = buckets
        self.method = method
        self.bos_id = table.bos_id

    def lambda_for_context(self, context: Gram) -> float:
        if self.table.context_total(context) == 0:
            return 0.0
        if self.lam is not None:
            return self.lam
        stat = bucket_statistic(self.buckets.scheme, self.table, context)
        return self.buckets.lambda_for(stat)

    def cond_prob(self, context: Gram, w: int) -> float:
        total = self.table.context_total(context)
        p_low = self.lower.cond_prob(context[1:], w)
        if total == 0:
            return p_low
        lam = (self.lam if self.lam is not None else
               self.buckets.lambda_for(
                   bucket_statistic(self.buckets.scheme, self.table, context)))
        if lam == 0.0:
            return p_low
        p_ml = self.table.successor_counts(context).get(w, 0) / total
        return lam * p_ml + (1.0 - lam) * p_low


def build_interp(
    table: NGramTable,
    scheme: str = "baseline",
    lambdas: Sequence[float] | None = None,
    bucket_maps: Sequence[BucketMap] | None = None,
    method: str | None = None,
) -> InterpolatedModel:
    """Assemble the recursive interpolation chain down to uniform.

    baseline takes one lambda per order, lowest order first; the bucketed
    schemes take one BucketMap per order (see smoothlm.em for training).
    """
    model: SmoothedModel = UniformModel(table.n_predictable)
    if scheme == "baseline":
        if lambdas is None or len(lambdas) != table.order:
            raise ParameterError(
                f"baseline needs {table.order} lambdas, got "
                f"{None if lambdas is None else len(lambdas)}")
        tag = method or "interp-baseline"
        for k, lam in enumerate(lambdas, start=1):
            model = InterpolatedModel(table, k, model, lam=lam, method=tag)
        return model
    if scheme in ("context-count", "average-count"):
        if bucket_maps is None or len(bucket_maps) != table.order:
            raise ParameterError(
                f"bucketed interpolation needs {table.order} bucket maps")
        tag = method or ("new-avg-count" if scheme == "average-count"
                         else "interp-held-out")
        for k, bmap in enumerate(bucket_maps, start=1):
            model = InterpolatedModel(table, k, model, buckets=bmap, method=tag)
        return model
    raise ParameterError(f"unknown interpolation scheme {scheme!r}")


class OneCountModel(SmoothedModel):
    """P = (c + a P_lower) / (c(ctx) + a), a = gamma (n_1(ctx) + beta)."""

    method = "new-one-count"

    def __init__(self, table: NGramTable, order: int, beta: float, gamma: float,
                 lower: SmoothedModel):
        if gamma <= 0:
            raise ParameterError(f"gamma must be > 0, got {gamma}")
        if beta <= 0:
            # beta > 0 guarantees alpha > 0; otherwise every seen context
            # needs n_1(ctx) + beta > 0.
            min_ones = _min_one_count(table, order)
            if min_ones + beta <= 0:
                raise ParameterError(
                    f"alpha = gamma (n_1 + beta) is not positive for every "
                    f"order-{order} context (min n_1 = {min_ones}, "
                    f"beta = {beta})")
        self.table = table
        self.order = order
        self.beta = beta
        self.gamma = gamma
        self.lower = lower
        self.bos_id = table.bos_id

    def cond_prob(self, context: Gram, w: int) -> float:
        total = self.table.context_total(context)
        p_low = self.lower.cond_prob(context[1:], w)
        if total == 0:
            return p_low
        alpha = self.gamma * (self.table.one_counts.get(context, 0) + self.beta)
        c = self.table.successor_counts(context).get(w, 0)
        return (c + alpha * p_low) / (total + alpha)


def _min_one_count(table: NGramTable, k: int) -> int:
    ones = [table.one_counts[ctx] for ctx in table.contexts(k)]
    return min(ones) if ones else 0


def build_one_count(
    table: NGramTable,
    betas: Sequence[float],
    gammas: Sequence[float],
) -> OneCountModel:
    """Chain of one-count levels, lowest order first in betas/gammas."""
    if len(betas) != table.order or len(gammas) != table.order:
        raise ParameterError(
            f"need {table.order} betas and gammas, got "
            f"{len(betas)} and {len(gammas)}")
    model: SmoothedModel = UniformModel(table.n_predictable)
    for k in range(1, table.order + 1):
        model = OneCountModel(table, k, betas[k - 1], gammas[k - 1], model)
    return model


class KatzModel(SmoothedModel):
    """Good-Turing discounted counts with back-off to the lower order.

    Counts r <= k are discounted by d_r; the freed mass goes to unseen
    successors in proportion to the lower-order model, through the
    context-specific weight alpha(ctx).  Degenerate count-of-counts
    (mu >= 1, gaps, or d_r outside (0, 1]) fall back to d_r = 1, leaving
    alpha to carry whatever mass remains (possibly none).  A context
    whose lower-order distribution has no mass left for its unseen
    successors cannot back off at all; it keeps its raw ML estimates so
    the row still sums to one.
    """

    method = "katz"

    def __init__(self, table: NGramTable, order: int, k_cut: int,
                 discounts: dict[int, float], lower: SmoothedModel):
        self.table = table
        self.order = order
        self.k_cut = k_cut
        self.discounts = discounts
        self.lower = lower
        self.bos_id = table.bos_id
        self._alpha_cache: dict[Gram, tuple[float, bool]] = {}

    def _weights(self, context: Gram) -> tuple[float, bool]:
        cached = self._alpha_cache.get(context)
        if cached is None:
            cached = self._compute_weights(context)
            self._alpha_cache[context] = cached
        return cached

    def cond_prob(self, context: Gram, w: int) -> float:
        total = self.table.context_total(context)
        if total == 0:
            return self.lower.cond_prob(context[1:], w)
        r = self.table.successor_counts(context).get(w, 0)
        if r > 0:
            if r > self.k_cut:
                return r / total
            d = self.discounts.get(r, 1.0)
            if d == 1.0:
                return r / total
            alpha, discounted = self._weights(context)
            return d * r / total if discounted else r / total
        alpha, _ = self._weights(context)
        if alpha == 0.0:
            return 0.0
        return alpha * self.lower.cond_prob(context[1:], w)

    def _compute_weights(self, context: Gram) -> tuple[float, bool]:
        """(back-off weight, whether discounts apply to this context)."""
        succ = self.table.successor_counts(context)
        total = self.table.context_total(context)
        seen_mass = 0.0
        for r in succ.values():
            d = 1.0 if r > self.k_cut else self.discounts.get(r, 1.0)
            seen_mass += d * r
        numer = 1.0 - seen_mass / total
        if numer <= 0.0:
            return 0.0, True
        shorter = context[1:]
        lower_seen = math.fsum(
            self.lower.cond_prob(shorter, w) for w in succ)
        denom = 1.0 - lower_seen
        if denom <= 0.0:
            return 0.0, False
        return numer / denom, True

    def alpha(self, context: Gram) -> float:
        """Back-off weight for one context (0 when no mass can move)."""
        return self._weights(context)[0]

    def precompute_alphas(self) -> None:
        """Eagerly fill the per-context back-off cache."""
        for ctx in self.table.contexts(self.order):
            self._weights(ctx)


def katz_discounts(coc: CountOfCounts, k_cut: int) -> dict[int, float]:
    """d_r = (r*/r - mu) / (1 - mu) for 1 <= r <= k, mu = (k+1) n_{k+1} / n_1.

    Only well-behaved discounts are returned; absent entries mean d_r = 1.
    """
    n1 = coc.n(1)
    if n1 == 0:
        return {}
    mu = (k_cut + 1) * coc.n(k_cut + 1) / n1
    if mu >= 1.0:
        return {}
    discounts = {}
    for r in range(1, k_cut + 1):
        n_r = coc.n(r)
        n_next = coc.n(r + 1)
        if n_r == 0 or n_next == 0:
            continue
        rstar = (r + 1) * n_next / n_r
        d = (rstar / r - mu) / (1.0 - mu)
        if 0.0 < d <= 1.0:
            discounts[r] = d
    return discounts


def build_katz(
    table: NGramTable,
    k_cuts: Sequence[int],
    delta: float,
    eager_alpha: bool = False,
) -> SmoothedModel:
    """Katz chain: discounted back-off at orders n..2 over an additive-
    smoothed unigram level.  k_cuts holds one cutoff per order > 1,
    lowest first (so bigram: [k_2], trigram: [k_2, k_3])."""
    if table.order < 2:
        raise ParameterError("Katz smoothing needs order >= 2")
    if len(k_cuts) != table.order - 1:
        raise ParameterError(
            f"need {table.order - 1} cutoffs for order {table.order}, "
            f"got {len(k_cuts)}")
    if any(k < 1 for k in k_cuts):
        raise ParameterError("every Katz cutoff must be >= 1")
    model: SmoothedModel = AdditiveModel(table, delta, order=1)
    for k in range(2, table.order + 1):
        cut = k_cuts[k - 2]
        discounts = katz_discounts(count_of_counts(table, k), cut)
        level = KatzModel(table, k, cut, discounts, model)
        if eager_alpha:
            level.precompute_alphas()
        model = level
    return model


def dump_top_successors(model: SmoothedModel, contexts: Iterable[Gram],
                        top_k: int, stream: IO[str],
                        candidates: Iterable[int] | None = None) -> None:
    """Debug dump: 'context<TAB>word<TAB>probability' for top-K successors."""
    if candidates is None:
        candidates = range(getattr(model, "table").n_predictable)
    cand = list(candidates)
    for ctx in contexts:
        scored = sorted(((model.cond_prob(ctx, w), w) for w in cand),
                        reverse=True)[:top_k]
        for p, w in scored:
            ctx_str = " ".join(str(i) for i in ctx)
            stream.write(f"{ctx_str}\t{w}\t{p!r}\n")
