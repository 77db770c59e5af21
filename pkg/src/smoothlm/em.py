"""EM training of bucketed interpolation weights.

Held-out mode maximizes the likelihood of a disjoint development corpus;
deleted mode uses the training corpus itself, with each event's ML term
computed as if that single occurrence were removed (relaxed deleted
interpolation, one word at a time, bucketed by the undeleted count).
Lambdas are trained lowest order first with all lower levels frozen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from smoothlm.corpus import EncodedCorpus
from smoothlm.counts import NGramTable
from smoothlm.smoothing import (
    BucketMap,
    InterpolatedModel,
    SmoothedModel,
    UniformModel,
    bucket_statistic,
)

DEFAULT_MAX_ITERS = 200
DEFAULT_TOL_BITS = 1e-6
LOG2 = np.log(2.0)


@dataclass
class EventSet:
    """Per-event constants feeding the EM updates at one order."""

    p_ml: np.ndarray
    p_lower: np.ndarray
    statistic: np.ndarray


def heldout_events(table: NGramTable, order: int, lower: SmoothedModel,
                   heldout: EncodedCorpus, scheme: str) -> EventSet:
    """Events from held-out data whose context is seen in training.

    Zero-count contexts are excluded: their lambda is pinned to 0, so they
    carry no information about the bucket weights.
    """
    p_ml, p_lower, stats = [], [], []
    pad = (table.bos_id,) * (order - 1)
    for sent in heldout:
        ids = pad + tuple(sent)
        for pos in range(order - 1, len(ids)):
            ctx, w = ids[pos - order + 1:pos], ids[pos]
            total = table.context_total(ctx)
            if total == 0:
                continue
            p_ml.append(table.successor_counts(ctx).get(w, 0) / total)
            p_lower.append(lower.cond_prob(ctx[1:], w))
            stats.append(bucket_statistic(scheme, table, ctx))
    return EventSet(np.asarray(p_ml), np.asarray(p_lower), np.asarray(stats))


def deleted_events(table: NGramTable, order: int, lower: SmoothedModel,
                   train: EncodedCorpus) -> EventSet:
    """Leave-one-out events over the training corpus itself.

    The ML term is (c(gram) - 1) / (c(ctx) - 1), zero when the context
    occurs exactly once; the bucket statistic is the undeleted c(ctx).
    """
    p_ml, p_lower, stats = [], [], []
    pad = (table.bos_id,) * (order - 1)
    for sent in train:
        ids = pad + tuple(sent)
        for pos in range(order - 1, len(ids)):
            ctx, w = ids[pos - order + 1:pos], ids[pos]
            total = table.context_total(ctx)
            if total <= 1:
                p_ml.append(0.0)
            else:
                c = table.successor_counts(ctx).get(w, 0)
                p_ml.append((c - 1) / (total - 1))
            p_lower.append(lower.cond_prob(ctx[1:], w))
            stats.append(float(total))
    return EventSet(np.asarray(p_ml), np.asarray(p_lower), np.asarray(stats))


def build_bucket_map(statistics: np.ndarray, scheme: str, c_min: int) -> BucketMap:
    """Greedy buckets of >= c_min training events in ascending statistic.

    Ties extend a bucket so equal statistics always share one; a trailing
    partial bucket merges into its predecessor.  Lambdas start at 0.5.
    """
    values = np.sort(statistics)
    boundaries: list[float] = []
    in_bucket = 0
    for idx, v in enumerate(values):
        in_bucket += 1
        last_of_tie = idx + 1 >= len(values) or values[idx + 1] > v
        if in_bucket >= c_min and last_of_tie and idx + 1 < len(values):
            boundaries.append(float(v))
            in_bucket = 0
    if boundaries and in_bucket < c_min:
        boundaries.pop()
    return BucketMap(scheme, boundaries, [0.5] * (len(boundaries) + 1), c_min)


def em_train_lambdas(
    buckets: BucketMap,
    events: EventSet,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol_bits: float = DEFAULT_TOL_BITS,
) -> tuple[BucketMap, list[float]]:
    """Train the bucket lambdas; returns the map and the bits/word trace.

    Each iteration sets every bucket's lambda to the mean responsibility
    of its events; the data log-likelihood is non-decreasing throughout.
    Buckets that received no events inherit the nearest trained lambda
    below them (or above, for a leading run of empty buckets).
    """
    n_buckets = len(buckets.lambdas)
    if len(events.p_ml) == 0:
        return buckets, []
    bucket_idx = np.searchsorted(buckets.boundaries, events.statistic,
                                 side="left")
    counts = np.bincount(bucket_idx, minlength=n_buckets).astype(float)
    occupied = counts > 0
    lam = np.asarray(buckets.lambdas, dtype=float)
    n_events = len(events.p_ml)

    trace: list[float] = []
    prev_bits = None
    for _ in range(max_iters):
        lam_ev = lam[bucket_idx]
        num = lam_ev * events.p_ml
        den = num + (1.0 - lam_ev) * events.p_lower
        safe = den > 0
        bits = -float(np.log(den, where=safe, out=np.zeros_like(den)).sum()
                      ) / (LOG2 * n_events)
        trace.append(bits)
        rho = np.divide(num, den, out=np.zeros_like(num), where=safe)
        new_lam = np.divide(
            np.bincount(bucket_idx, weights=rho, minlength=n_buckets),
            counts, out=lam.copy(), where=occupied)
        if prev_bits is not None and prev_bits - bits < tol_bits:
            lam = new_lam
            break
        prev_bits = bits
        lam = new_lam

    filled: list[float | None] = [
        float(lam[b]) if occupied[b] else None for b in range(n_buckets)]
    prev = None
    for b in range(n_buckets):
        if filled[b] is None:
            filled[b] = prev  # lower-boundary neighbor; leading run stays None
        else:
            prev = filled[b]
    nxt = None
    for b in reversed(range(n_buckets)):
        if filled[b] is None:
            filled[b] = nxt  # leading empty buckets take the first trained one
        else:
            nxt = filled[b]
    filled = [min(1.0, max(0.0, v)) for v in filled]

    stats_sum = np.bincount(bucket_idx, weights=events.statistic,
                            minlength=n_buckets)
    bucket_stats = [float(s / c) if c else float("nan")
                    for s, c in zip(stats_sum, counts)]
    trained = BucketMap(buckets.scheme, list(buckets.boundaries), filled,
                        buckets.c_min, bucket_stats)
    return trained, trace


def train_interpolated_model(
    table: NGramTable,
    scheme: str,
    c_min: int,
    data: EncodedCorpus,
    deleted: bool = False,
    method: str | None = None,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol_bits: float = DEFAULT_TOL_BITS,
) -> tuple[InterpolatedModel, dict[int, list[float]]]:
    """Train all levels bottom-up and assemble the interpolation chain.

    data is the held-out corpus, or the training corpus itself when
    deleted is set.  Returns the model and the per-order EM traces.
    """
    lower: SmoothedModel = UniformModel(table.n_predictable)
    tag = method or ("interp-del-int" if deleted else
                     "new-avg-count" if scheme == "average-count"
                     else "interp-held-out")
    traces: dict[int, list[float]] = {}
    for k in range(1, table.order + 1):
        if deleted:
            events = deleted_events(table, k, lower, data)
        else:
            events = heldout_events(table, k, lower, data, scheme)
        buckets = build_bucket_map(events.statistic, scheme, c_min)
        trained, trace = em_train_lambdas(buckets, events, max_iters, tol_bits)
        traces[k] = trace
        lower = InterpolatedModel(table, k, lower, buckets=trained, method=tag)
    return lower, traces
