"""Powell's direction-set minimization with Brent line searches.

Box constraints are handled by a monotone sigmoid reparameterization per
parameter (optionally on a log10 scale for parameters spanning orders of
magnitude), so the direction-set core stays unconstrained.  Termination:
relative objective decrease below tol across a full direction cycle, or
a cycle budget.  Everything is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Callable, Sequence

import numpy as np
from scipy.optimize import brent as _brent

GOLDEN = 1.618033988749895
_Z_CAP = 36.0  # sigmoid is saturated to ~1e-16 beyond this


class ObjectiveError(RuntimeError):
    """Objective returned a non-finite value; .params holds the offender."""

    def __init__(self, params: Sequence[float]):
        super().__init__(f"objective is not finite at {list(params)}")
        self.params = list(params)


@dataclass
class OptimizerResult:
    params: list[float]
    objective: float
    iterations: int
    converged: bool
    trace: list[tuple[int, tuple[float, ...], float]] = field(default_factory=list)


class _BoxTransform:
    """Bijection between the search space R^n and open parameter boxes."""

    def __init__(self, bounds: Sequence[tuple[float, float]] | None,
                 log_scale: Sequence[bool] | None, n: int):
        self.bounds = list(bounds) if bounds is not None else None
        if self.bounds is not None and len(self.bounds) != n:
            raise ValueError(f"need {n} bounds, got {len(self.bounds)}")
        self.log_scale = list(log_scale) if log_scale else [False] * n
        if self.bounds is not None:
            for (lo, hi), is_log in zip(self.bounds, self.log_scale):
                if not lo < hi:
                    raise ValueError(f"empty bound interval ({lo}, {hi})")
                if is_log and lo <= 0:
                    raise ValueError("log-scale bounds must be positive")

    def to_internal(self, x: Sequence[float]) -> np.ndarray:
        if self.bounds is None:
            return np.asarray(x, dtype=float)
        z = np.empty(len(x))
        for i, ((lo, hi), is_log) in enumerate(zip(self.bounds, self.log_scale)):
            v, a, b = x[i], lo, hi
            if is_log:
                v, a, b = math.log10(v), math.log10(lo), math.log10(hi)
            frac = min(max((v - a) / (b - a), 1e-12), 1.0 - 1e-12)
            z[i] = math.log(frac / (1.0 - frac))
        return z

    def to_external(self, z: np.ndarray) -> list[float]:
        if self.bounds is None:
            return [float(v) for v in z]
        x = []
        for zi, (lo, hi), is_log in zip(z, self.bounds, self.log_scale):
            s = 1.0 / (1.0 + math.exp(-min(max(zi, -_Z_CAP), _Z_CAP)))
            if is_log:
                a, b = math.log10(lo), math.log10(hi)
                x.append(10.0 ** (a + (b - a) * s))
            else:
                x.append(lo + (hi - lo) * s)
        return x


def _bracket(g: Callable[[float], float], f0: float, step: float,
             max_expand: int = 40):
    """Find a < b < c with g(b) below both ends, starting from 0.

    Returns ("bracket", (a, b, c)) on success, ("point", (s, f)) when the
    function descends but flattens before a rise is found (sigmoid
    saturation), and None when there is no usable descent.  Both probes
    uphill still brackets an interior minimum around 0 for Brent to
    refine.
    """
    s1 = step
    f1 = g(s1)
    if f1 >= f0:
        f_neg = g(-step)
        if f_neg >= f0:
            if f1 > f0 and f_neg > f0:
                return "bracket", (-step, 0.0, step)
            return None
        s1, f1 = -step, f_neg
    a, b, fb = 0.0, s1, f1
    c = b + GOLDEN * (b - a)
    fc = g(c)
    for _ in range(max_expand):
        if fc > fb:
            if a < c:
                return "bracket", (a, b, c)
            return "bracket", (c, b, a)
        if fc == fb or abs(c) > 1e6:
            break
        a, b, fb = b, c, fc
        c = b + GOLDEN * (b - a)
        fc = g(c)
    return "point", (b, fb)


def powell_minimize(
    objective: Callable[[Sequence[float]], float],
    start: Sequence[float],
    bounds: Sequence[tuple[float, float]] | None = None,
    tol: float = 1e-4,
    max_cycles: int = 100,
    log_scale: Sequence[bool] | None = None,
    line_step: float = 0.25,
    line_tol: float = 1e-9,
) -> OptimizerResult:
    """Minimize a bits/word-style objective over a parameter box.

    The returned point is never worse than the start.  A non-finite
    objective value aborts with ObjectiveError carrying the parameters.
    """
    n = len(start)
    box = _BoxTransform(bounds, log_scale, n)

    def f(z: np.ndarray) -> float:
        x = box.to_external(z)
        val = float(objective(x))
        if not math.isfinite(val):
            raise ObjectiveError(x)
        return val

    z = box.to_internal(start)
    fz = f(z)
    trace = [(0, tuple(box.to_external(z)), fz)]

    def linmin(point: np.ndarray, direction: np.ndarray, f_at: float
               ) -> tuple[np.ndarray, float]:
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            return point, f_at
        unit = direction / norm

        def g(s: float) -> float:
            return f(point + s * unit)

        found = _bracket(g, f_at, line_step)
        if found is None:
            return point, f_at
        kind, payload = found
        if kind == "point":
            s_min, f_min = payload
        else:
            s_min, f_min, _, _ = _brent(g, brack=payload, tol=line_tol,
                                        full_output=True)
            if f_min >= f_at:
                s_min, f_min = payload[1], g(payload[1])
        if f_min >= f_at:
            return point, f_at
        return point + s_min * unit, float(f_min)

    directions = [np.eye(n)[i] for i in range(n)]
    converged = False
    cycle = 0
    for cycle in range(1, max_cycles + 1):
        f_start = fz
        z_start = z.copy()
        biggest_drop = 0.0
        biggest_idx = 0
        for i, direction in enumerate(directions):
            z_new, f_new = linmin(z, direction, fz)
            if fz - f_new > biggest_drop:
                biggest_drop = fz - f_new
                biggest_idx = i
            z, fz = z_new, f_new
        trace.append((cycle, tuple(box.to_external(z)), fz))
        if 2.0 * (f_start - fz) <= tol * (abs(f_start) + abs(fz)) + 1e-20:
            converged = True
            break
        # Press-style direction replacement along the cycle displacement.
        displacement = z - z_start
        if float(np.linalg.norm(displacement)) > 0.0:
            f_extrap = f(z_start + 2.0 * displacement)
            if f_extrap < f_start:
                t = (2.0 * (f_start - 2.0 * fz + f_extrap)
                     * (f_start - fz - biggest_drop) ** 2
                     - biggest_drop * (f_start - f_extrap) ** 2)
                if t < 0.0:
                    z, fz = linmin(z, displacement, fz)
                    directions[biggest_idx] = directions[-1]
                    directions[-1] = displacement / np.linalg.norm(displacement)

    return OptimizerResult(box.to_external(z), fz, cycle, converged, trace)


def write_trace_csv(result: OptimizerResult, stream: IO[str]) -> None:
    """Optimizer trace rows: cycle,param_vector,objective."""
    stream.write("cycle,param_vector,objective\n")
    for cycle, params, value in result.trace:
        vec = " ".join(repr(p) for p in params)
        stream.write(f"{cycle},{vec},{value!r}\n")
