"""Functionals on barcodes and level-set counts of scalar fields.

The central quantity is the weighted barcode length: the integral of a
non-negative weight over the value range plus, for every finite bar,
the integral over the bar. Its truncation to the k heaviest bars, the
Banach indicatrix (number of connected components of a level set), the
count of significant endpoint values, bar sorting with a runtime
witness and the approximation lower bounds all live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import ScalarField, classify_critical_points
from .persistence import Barcode
from .quadrature import adaptive_simpson


class WeightFunction:
    """Continuous non-negative weight on the real line.

    Integrals use the closed-form antiderivative when one is supplied
    and adaptive Simpson quadrature (absolute tolerance `tol`) otherwise.
    Non-negativity is checked by sampling on every queried interval.
    """

    def __init__(self, evaluator, antiderivative=None, tol=1e-9, domain=None,
                 label="custom"):
        self.evaluator = evaluator
        self.antiderivative = antiderivative
        self.tol = tol
        self.domain = domain  # optional (lo, hi) coverage constraint
        self.label = label

    @classmethod
    def one(cls):
        return cls(lambda t: 1.0, antiderivative=lambda t: t, label="one")

    @classmethod
    def polynomial(cls, coeffs):
        """Weight sum(c_i * t**i) with its exact antiderivative."""
        cs = [float(c) for c in coeffs]
        anti = [0.0] + [c / (i + 1) for i, c in enumerate(cs)]

        def ev(t, _cs=cs):
            acc = 0.0
            for c in reversed(_cs):
                acc = acc * t + c
            return acc

        def anti_ev(t, _cs=anti):
            acc = 0.0
            for c in reversed(_cs):
                acc = acc * t + c
            return acc

        return cls(ev, antiderivative=anti_ev,
                   label="poly:" + ",".join(repr(c) for c in cs))

    @classmethod
    def from_table(cls, ts, us):
        """Piecewise-linear weight through (t, u) samples.

        Queries outside the tabulated domain raise, so the table must
        cover the value range it is used on.
        """
        ts = np.asarray(ts, dtype=float)
        us = np.asarray(us, dtype=float)
        if len(ts) < 2 or np.any(np.diff(ts) <= 0):
            raise ValueError("table abscissae must be strictly increasing")
        if np.any(us < 0):
            raise ValueError("table weights must be non-negative")
        cumulative = np.concatenate(
            [[0.0], np.cumsum(0.5 * (us[1:] + us[:-1]) * np.diff(ts))])

        def ev(t):
            if t < ts[0] or t > ts[-1]:
                raise ValueError("query outside the tabulated weight domain")
            return float(np.interp(t, ts, us))

        def anti_ev(t):
            if t < ts[0] or t > ts[-1]:
                raise ValueError("query outside the tabulated weight domain")
            k = int(np.searchsorted(ts, t, side="right") - 1)
            k = min(k, len(ts) - 2)
            dt = t - ts[k]
            slope = (us[k + 1] - us[k]) / (ts[k + 1] - ts[k])
            return float(cumulative[k] + us[k] * dt + 0.5 * slope * dt * dt)

        return cls(ev, antiderivative=anti_ev, domain=(float(ts[0]), float(ts[-1])),
                   label="table")

    def __call__(self, t):
        return self.evaluator(t)

    def check_nonnegative(self, lo, hi, samples=257):
        for t in np.linspace(lo, hi, samples):
            if self.evaluator(float(t)) < 0:
                raise ValueError(f"weight is negative at t={t}")

    def integral(self, a, b):
        if a == b:
            return 0.0
        if self.antiderivative is not None:
            return self.antiderivative(b) - self.antiderivative(a)
        return adaptive_simpson(self.evaluator, a, b, tol=self.tol)

    def max_on(self, lo, hi, samples=4097):
        if hi < lo:
            lo, hi = hi, lo
        return float(max(self.evaluator(float(t))
                         for t in np.linspace(lo, hi, samples)))


@dataclass(frozen=True)
class WeightedLengthReport:
    """Weighted barcode length with its decomposition.

    `lipschitz_constant` is the factor that bounds how much the value
    can drop under a bottleneck perturbation of the barcode:
    2*(n_finite+1)*max(u) on closed surfaces, (2*n_finite+1)*max(u)
    with boundary.
    """

    value: float
    range_term: float
    bar_terms: tuple
    lipschitz_constant: float
    n_finite: int

    def __float__(self):
        return self.value


def _endpoint_range(barcode: Barcode):
    lo, hi = barcode.min_endpoint(), barcode.max_endpoint()
    if lo is None:
        return None
    if barcode.boundary:
        hi_range = 0.0
    else:
        hi_range = hi
    return lo, hi_range, hi


def weighted_length(barcode: Barcode, weight: WeightFunction) -> WeightedLengthReport:
    """Integral of the weight over the range plus over every finite bar."""
    span = _endpoint_range(barcode)
    if span is None:
        return WeightedLengthReport(0.0, 0.0, (), 0.0, 0)
    lo, hi_range, hi = span
    weight.check_nonnegative(lo, hi)
    range_term = weight.integral(lo, hi_range)
    bar_terms = tuple(weight.integral(b.birth, b.death)
                      for b in barcode.finite_bars())
    n = len(bar_terms)
    max_u = weight.max_on(lo, hi)
    constant = (2 * n + 1) * max_u if barcode.boundary else 2 * (n + 1) * max_u
    return WeightedLengthReport(range_term + sum(bar_terms), range_term,
                                bar_terms, constant, n)


def weighted_length_topk(barcode: Barcode, weight: WeightFunction, k: int) -> float:
    """Range term plus the k largest bar integrals.

    Bars are ordered by their weight integral, ties broken by
    (birth, death) so the truncation is deterministic.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    span = _endpoint_range(barcode)
    if span is None:
        return 0.0
    lo, hi_range, hi = span
    weight.check_nonnegative(lo, hi)
    range_term = weight.integral(lo, hi_range)
    weighted = sorted(
        ((weight.integral(b.birth, b.death), b.birth, b.death)
         for b in barcode.finite_bars()),
        key=lambda x: (-x[0], x[1], x[2]))
    return range_term + sum(w for w, _, _ in weighted[:k])


def banach_indicatrix(fld: ScalarField, t: float) -> int:
    """Number of connected components of the level set {f = t}.

    t must be a regular value, which for a simple PL field just means
    it is not a vertex value. Crossing edges are glued through the
    triangles containing them and counted by union-find.
    """
    values = fld.values
    if np.any(values == t):
        raise ValueError(f"t={t} is a vertex value, not regular")
    surface = fld.surface
    ev = values[surface.edges]
    cross = (np.min(ev, axis=1) < t) & (np.max(ev, axis=1) > t)
    idx = np.nonzero(cross)[0]
    if len(idx) == 0:
        return 0
    compact = np.full(surface.n_edges, -1, dtype=np.int64)
    compact[idx] = np.arange(len(idx))
    tri_cross = cross[surface.triangle_edges]
    glue = surface.triangle_edges[np.sum(tri_cross, axis=1) == 2]
    parent = list(range(len(idx)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for row in glue:
        pair = [compact[e] for e in row if compact[e] >= 0]
        ra, rb = find(int(pair[0])), find(int(pair[1]))
        if ra != rb:
            parent[ra] = rb
    return len({find(i) for i in range(len(idx))})


@dataclass(frozen=True)
class IndicatrixProfile:
    """Piecewise-constant level-set component count.

    `breakpoints` are the sorted distinct vertex values; `counts[i]` is
    the component count on the open interval between breakpoints i and
    i+1. The count is zero outside the value range.
    """

    breakpoints: np.ndarray
    counts: np.ndarray

    def __call__(self, t):
        if t <= self.breakpoints[0] or t >= self.breakpoints[-1]:
            return 0
        k = int(np.searchsorted(self.breakpoints, t, side="right") - 1)
        return int(self.counts[k])

    def integral(self, weight: WeightFunction) -> float:
        total = 0.0
        for k in range(len(self.counts)):
            if self.counts[k]:
                total += self.counts[k] * weight.integral(
                    float(self.breakpoints[k]), float(self.breakpoints[k + 1]))
        return total


def indicatrix_profile(fld: ScalarField, dense: bool = False) -> IndicatrixProfile:
    """Level-set component count on every gap between vertex values.

    On closed surfaces the count only changes at critical vertices, so
    by default it is evaluated once per critical-value gap and copied
    to the vertex-value gaps inside; `dense=True` (and any surface with
    boundary) evaluates every gap directly.
    """
    values = np.sort(fld.values)
    if len(np.unique(values)) != len(values):
        raise ValueError("tied values; perturb the field first")
    gaps = len(values) - 1
    counts = np.zeros(gaps, dtype=np.int64)
    if dense or fld.surface.has_boundary:
        for k in range(gaps):
            t = _interior_point(values[k], values[k + 1])
            if t is not None:
                counts[k] = banach_indicatrix(fld, t)
        return IndicatrixProfile(values, counts)

    report = classify_critical_points(fld)
    crit = np.array(sorted({v for _, v in report.minima}
                           | {v for _, v in report.maxima}
                           | {v for _, v, _ in report.saddles}))
    # Between consecutive critical values the level sets only deform, so
    # one evaluation per critical gap determines every vertex gap in it.
    positions = np.searchsorted(values, crit)
    for a, b in zip(positions[:-1], positions[1:]):
        if b <= a:
            continue
        mid_gap = (a + b) // 2
        t = _interior_point(values[mid_gap], values[mid_gap + 1])
        if t is not None:
            counts[a:b] = banach_indicatrix(fld, t)
    return IndicatrixProfile(values, counts)


def _interior_point(lo, hi):
    """A float strictly between lo and hi, or None for 1-ulp gaps."""
    t = 0.5 * (lo + hi)
    if lo < t < hi:
        return float(t)
    t = np.nextafter(lo, hi)
    return float(t) if t < hi else None


def weighted_indicatrix_integral(fld: ScalarField, weight: WeightFunction,
                                 profile: IndicatrixProfile | None = None) -> float:
    """Integral of weight(t) times the level-set component count."""
    if profile is None:
        profile = indicatrix_profile(fld)
    return profile.integral(weight)


@dataclass(frozen=True)
class LevelBoundReport:
    """Per-sample results of the level-set lower bound check.

    Each entry is (t, bound, indicatrix); a violation is an entry whose
    bound exceeds the level-set component count.
    """

    entries: tuple
    violations: tuple

    @property
    def ok(self):
        return not self.violations


def check_indicatrix_inequality(fld: ScalarField, barcode: Barcode,
                                t_samples) -> LevelBoundReport:
    """Check that range and low/top-degree bar indicators bound the level count.

    For each regular t the indicator of the range interval plus the
    indicators of the finite bars in degrees 0 and 1 must not exceed
    the number of level-set components at t.
    """
    lo = barcode.min_endpoint()
    hi = 0.0 if barcode.boundary else barcode.max_endpoint()
    bars = [b for b in barcode.finite_bars() if b.degree in (0, 1)]
    entries = []
    violations = []
    for t in t_samples:
        t = float(t)
        lhs = 0
        if lo is not None and lo < t <= hi:
            lhs += 1
        lhs += sum(1 for b in bars if b.birth < t <= b.death)
        beta = banach_indicatrix(fld, t)
        entries.append((t, lhs, beta))
        if lhs > beta:
            violations.append((t, lhs, beta))
    return LevelBoundReport(tuple(entries), tuple(violations))


def significant_value_count(barcode: Barcode, delta: float) -> int:
    """Endpoint count of bars of length at least delta, with multiplicity.

    Every endpoint value is counted once per qualifying bar that has it
    as an endpoint; infinite bars qualify for every delta and contribute
    their birth.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    total = 0
    for b in barcode.bars:
        if b.death is None:
            total += 1
        elif b.length >= delta:
            total += 2
    return total


@dataclass(frozen=True)
class SortedBarsResult:
    """Descending significant bar lengths plus a runtime witness.

    `comparisons` counts the threshold pass (one per finite bar) plus
    the comparisons spent sorting the kept bars.
    """

    lengths: tuple
    n_finite: int
    n_kept: int
    comparisons: int


def sort_significant_bars(barcode: Barcode, eps: float) -> SortedBarsResult:
    """Keep finite bars of length >= eps and sort their lengths descending."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    counter = [0]

    class _Cmp:
        __slots__ = ("v",)

        def __init__(self, v):
            self.v = v

        def __lt__(self, other):
            counter[0] += 1
            return self.v < other.v

    kept = []
    n_finite = 0
    for b in barcode.bars:
        if b.death is None:
            continue
        n_finite += 1
        counter[0] += 1  # threshold comparison of the linear pass
        if b.length >= eps:
            kept.append(b.length)
    ordered = sorted(kept, key=_Cmp, reverse=True)
    return SortedBarsResult(tuple(ordered), n_finite, len(kept), counter[0])


def approx_lower_bound(barcode: Barcode, lam: float, kappa: float) -> float:
    """Certified lower bound for the uniform approximation defect.

    Uses the total bar length of the barcode against the budget
    kappa*(lam+1); a nonpositive result means no obstruction.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    phi1 = weighted_length(barcode, WeightFunction.one()).value
    n = barcode.n_finite
    denom = (2 * n + 1) if barcode.boundary else 2 * (n + 1)
    return (phi1 - kappa * (lam + 1.0)) / denom


def circle_approx_lower_bound(total_variation: float, n_critical: int,
                              lam: float) -> float:
    """Circle variant of the approximation bound, in variation terms."""
    if n_critical <= 0:
        raise ValueError("the function must have critical points")
    return (0.5 * total_variation - math.sqrt(math.pi / 2.0) * math.sqrt(lam)) / n_critical


def eigenvalue_lower_bound(n_bars: int, length: float, kappa: float) -> float:
    """Smallest spectral budget compatible with close approximation.

    With n_bars finite bars of length at least `length` (plus twice the
    approximation defect), the budget lambda must be at least
    (n_bars+1)*length/kappa - 1.
    """
    if n_bars < 0:
        raise ValueError("bar count must be non-negative")
    if length <= 0 or kappa <= 0:
        raise ValueError("length and kappa must be positive")
    return (n_bars + 1) * length / kappa - 1.0


def weighted_length_continuous(fld: ScalarField, weight: WeightFunction,
                               seed: int = 0, tol: float = 1e-9) -> float:
    """Weighted length for fields that may carry ties.

    The field is made simple first; the truncated functionals are then
    increased through a doubling schedule of k until they stabilise,
    which happens at latest when k reaches the finite bar count.
    """
    from .mesh import perturb_to_simple
    from .persistence import compute_barcode, lower_star_filtration

    simple = perturb_to_simple(fld, seed=seed)
    barcode = compute_barcode(lower_star_filtration(simple))
    n = barcode.n_finite
    if n == 0:
        return weighted_length(barcode, weight).value
    k = 1
    prev = weighted_length_topk(barcode, weight, k)
    while k < n:
        k = min(2 * k, n)
        cur = weighted_length_topk(barcode, weight, k)
        if cur - prev < tol:
            return cur
        prev = cur
    return prev
