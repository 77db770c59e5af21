"""Good-Turing frequency estimation, raw and regression-smoothed.

The smoothed estimator follows the Gale/Sampson recipe: transform the
count-of-counts to rate densities Z_r, fit log Z against log r by least
squares, and use the raw Turing adjusted count until it stops differing
from the smoothed one by more than 1.65 standard errors, switching
permanently to the smoothed value from then on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from smoothlm.counts import CountOfCounts


class GoodTuringError(ValueError):
    """Raised when an adjusted count or a smoothing fit is undefined."""


def gt_adjusted_count(coc: CountOfCounts, r: int) -> float:
    """Raw adjusted count r* = (r+1) n_{r+1} / n_r.

    Returns 0 when n_{r+1} = 0; the caller decides what to fall back to.
    """
    n_r = coc.n(r)
    if n_r == 0:
        raise GoodTuringError(f"n_{r} = 0: adjusted count undefined")
    return (r + 1) * coc.n(r + 1) / n_r


@dataclass
class GoodTuringEstimator:
    """Combined raw/smoothed adjusted counts for one count-of-counts."""

    rows: list[tuple[int, int]]
    intercept: float
    slope: float
    switch_r: int
    total: int
    p0: float
    adjusted: dict[int, float]
    _seen_mass: float = 0.0

    def __post_init__(self) -> None:
        self._seen_mass = sum(n * self.adjusted[r] for r, n in self.rows)

    def smoothed_nr(self, r: float) -> float:
        """Fitted S(r) from the log-log regression line."""
        return math.exp(self.intercept + self.slope * math.log(r))

    def adjusted_count(self, r: int) -> float:
        try:
            return self.adjusted[r]
        except KeyError:
            raise GoodTuringError(f"count {r} not present in the fit") from None

    def prob_for_count(self, r: int) -> float:
        """Renormalized probability of a single item observed r times.

        Seen items share 1 - p0 in proportion to their adjusted counts, so
        sum_r n_r * prob_for_count(r) + p0 == 1.
        """
        return (1.0 - self.p0) * self.adjusted[r] / self._seen_mass


def fit_simple_good_turing(coc: CountOfCounts) -> GoodTuringEstimator:
    """Fit the smoothed estimator; needs at least two nonzero n_r rows."""
    rows = coc.rows()
    if len(rows) < 2:
        raise GoodTuringError(
            f"need at least two distinct counts to fit, got {len(rows)}")
    rs = [r for r, _ in rows]
    ns = [n for _, n in rows]
    total = sum(r * n for r, n in rows)
    p0 = ns[0] / total if rs[0] == 1 else 0.0

    # Z_r = 2 n_r / (t - q): q is the previous nonzero rank (0 for the
    # first), t the next (2r - q for the last).
    log_r = []
    log_z = []
    for j, (r, n) in enumerate(rows):
        q = rs[j - 1] if j > 0 else 0
        t = rs[j + 1] if j + 1 < len(rows) else 2 * r - q
        log_r.append(math.log(r))
        log_z.append(math.log(2.0 * n / (t - q)))

    m = len(rows)
    mean_x = sum(log_r) / m
    mean_y = sum(log_z) / m
    sxx = sum((x - mean_x) ** 2 for x in log_r)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(log_r, log_z))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x

    def smoothed(x: float) -> float:
        return math.exp(intercept + slope * math.log(x))

    nr = dict(rows)
    adjusted: dict[int, float] = {}
    use_turing = True
    switch_r = rs[-1] + 1
    for r, n in rows:
        lgt = (r + 1) * smoothed(r + 1) / smoothed(r)
        if use_turing:
            n_next = nr.get(r + 1, 0)
            if n_next == 0:
                use_turing = False
                switch_r = r
                adjusted[r] = lgt
                continue
            turing = (r + 1) * n_next / n
            sd = math.sqrt((r + 1) ** 2 * (n_next / n ** 2) * (1.0 + n_next / n))
            if abs(turing - lgt) > 1.65 * sd:
                adjusted[r] = turing
            else:
                use_turing = False
                switch_r = r
                adjusted[r] = lgt
        else:
            adjusted[r] = lgt

    return GoodTuringEstimator(rows, intercept, slope, switch_r, total, p0, adjusted)


def raw_adjusted_counts(coc: CountOfCounts) -> dict[int, float]:
    """Fallback when the regression is unfittable: raw r*, keeping r
    wherever n_{r+1} = 0 so no seen gram is zeroed out."""
    out = {}
    for r, n in coc.rows():
        n_next = coc.n(r + 1)
        out[r] = (r + 1) * n_next / n if n_next else float(r)
    return out
