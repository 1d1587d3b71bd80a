"""Adaptive Simpson quadrature for the weight-function integrals."""

from __future__ import annotations

from typing import Callable


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-9, max_depth: int = 48) -> float:
    """Integrate f over [a, b] to absolute tolerance tol.

    Signed in the usual way: a > b flips the sign of the result.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _recurse(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * tol:
        # Richardson extrapolation of the two half-interval estimates.
        return left + right + err / 15.0
    half = 0.5 * tol
    return (_recurse(f, a, m, fa, flm, fm, left, half, depth - 1)
            + _recurse(f, m, b, fm, frm, fb, right, half, depth - 1))
