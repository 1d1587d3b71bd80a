"""Bessel function J0 by power series and its first positive zero.

The series is truncated at relative level 1e-15 and is only used for
arguments up to 8, which covers every evaluation the smoothing kernel
needs (arguments never exceed the first zero times two).
"""

from __future__ import annotations

import numpy as np

# First positive zero of J0 lies strictly inside this bracket.
_ZERO_BRACKET = (2.0, 3.0)


def bessel_j0(x):
    """J0(x) for scalar or array x with |x| <= 8."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 8.0):
        raise ValueError("series evaluation of J0 is limited to |x| <= 8")
    q = 0.25 * arr * arr
    term = np.ones_like(arr)
    total = np.ones_like(arr)
    for m in range(1, 80):
        term = term * (-q) / (m * m)
        total = total + term
        if np.max(np.abs(term)) < 1e-15:
            break
    if np.ndim(x) == 0:
        return float(total)
    return total


def bessel_j0_first_zero(tol: float = 1e-12) -> float:
    """First positive root of J0, located by bisection in [2, 3]."""
    lo, hi = _ZERO_BRACKET
    flo = bessel_j0(lo)
    fhi = bessel_j0(hi)
    if not (flo > 0.0 > fhi):
        raise RuntimeError("J0 does not change sign on the root bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bessel_j0(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
