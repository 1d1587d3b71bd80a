"""Barcodes of sum-functions on product spaces, in closed form.

The product of two graded barcodes follows the Kunneth rules for
persistence modules over a field:

* infinite x infinite -> infinite bar at the birth sum, degrees add;
* infinite (a, inf) x finite (c, d] -> finite (a+c, a+d], degrees add;
* finite x finite -> one bar in the degree sum and one in the degree
  sum plus one, splitting at the smaller and larger of the two mixed
  endpoint sums.

Multiplicities multiply and zero-length output intervals are dropped.
These products give exact reference barcodes for eigenfunction sums on
tori of any dimension.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .persistence import Bar, Barcode

ROOT_TWO = math.sqrt(2.0)


@dataclass
class GradedBarcode:
    """Map degree -> Counter of (birth, death) with positive multiplicity."""

    degrees: dict = field(default_factory=dict)

    def add(self, degree, birth, death, mult=1):
        if death is not None and not birth < death:
            if death is not None and birth == death:
                return  # zero-length interval, empty in the half-open convention
            raise ValueError("bar with negative length")
        if mult <= 0:
            raise ValueError("multiplicity must be positive")
        self.degrees.setdefault(degree, Counter())[(birth, death)] += mult

    def items(self):
        for degree in sorted(self.degrees):
            for (birth, death), mult in sorted(
                    self.degrees[degree].items(),
                    key=lambda kv: (kv[0][0], math.inf if kv[0][1] is None else kv[0][1])):
                yield degree, birth, death, mult

    @property
    def n_infinite(self):
        return sum(m for _, _, d, m in self.items() if d is None)

    @property
    def n_finite(self):
        return sum(m for _, _, d, m in self.items() if d is not None)

    def finite_lengths(self):
        out = []
        for _, b, d, m in self.items():
            if d is not None:
                out.extend([d - b] * m)
        return out

    def to_barcode(self) -> Barcode:
        bars = []
        for degree, birth, death, mult in self.items():
            bars.extend([Bar(birth, death, degree)] * mult)
        return Barcode(tuple(bars), boundary=False)

    def __eq__(self, other):
        if not isinstance(other, GradedBarcode):
            return NotImplemented
        a = {k: +v for k, v in self.degrees.items() if +v}
        b = {k: +v for k, v in other.degrees.items() if +v}
        return a == b


def barcode_product(first: GradedBarcode, second: GradedBarcode) -> GradedBarcode:
    """Graded barcode of the sum-function on the product space."""
    out = GradedBarcode()
    for i, a, b, m1 in first.items():
        for j, c, d, m2 in second.items():
            mult = m1 * m2
            deg = i + j
            if b is None and d is None:
                out.add(deg, a + c, None, mult)
            elif b is None:
                out.add(deg, a + c, a + d, mult)
            elif d is None:
                out.add(deg, a + c, c + b, mult)
            else:
                cross_lo = min(a + d, b + c)
                cross_hi = max(a + d, b + c)
                out.add(deg, a + c, cross_lo, mult)
                if cross_hi < b + d:
                    out.add(deg + 1, cross_hi, b + d, mult)
    return out


def circle_sine_barcode(frequency: int) -> GradedBarcode:
    """Barcode of sin(l*x) on the circle.

    One essential class per degree plus l-1 finite bars (-1, 1] in
    degree 0, one per non-global minimum.
    """
    if frequency < 1:
        raise ValueError("frequency must be a positive integer")
    out = GradedBarcode()
    out.add(0, -1.0, None)
    if frequency > 1:
        out.add(0, -1.0, 1.0, frequency - 1)
    out.add(1, 1.0, None)
    return out


def torus_sum_barcode(dim: int, frequency: int) -> GradedBarcode:
    """n-fold product barcode of sin(l*x_1) + ... + sin(l*x_n)."""
    if dim < 1 or frequency < 1:
        raise ValueError("dimension and frequency must be positive integers")
    acc = circle_sine_barcode(frequency)
    for _ in range(dim - 1):
        acc = barcode_product(acc, circle_sine_barcode(frequency))
    return acc


def torus_sum_total_length(dim: int, frequency: int) -> float:
    """Closed-form total bar length of the sine sum: 2n + (2l)^n - 2^n."""
    if dim < 1 or frequency < 1:
        raise ValueError("dimension and frequency must be positive integers")
    return float(2 * dim + (2 * frequency) ** dim - 2 ** dim)


def torus_sum_constants(dim: int):
    """Leading and constant coefficient of the normalised total length."""
    scale = ROOT_TWO / (dim * (2.0 * math.pi) ** (dim / 2.0))
    a_n = scale * 2 ** dim
    b_n = scale * (2 * dim - 2 ** dim)
    return a_n, b_n


def normalized_torus_sum_total_length(dim: int, frequency: int) -> float:
    """Total bar length of the unit-norm sine sum: A_n*lam^(n/2) + B_n.

    The spectral parameter is lam = l**2, so the value equals
    A_n * l**n + B_n with the constants from `torus_sum_constants`.
    """
    if dim < 1 or frequency < 1:
        raise ValueError("dimension and frequency must be positive integers")
    a_n, b_n = torus_sum_constants(dim)
    return a_n * float(frequency) ** dim + b_n


def torus_eigenfunction_barcode(n: int) -> GradedBarcode:
    """Exact barcode of (1/pi) sin(n x) cos(n y) on the flat square torus.

    Degree 0 holds one essential bar at -1/pi plus 2n^2 - 1 copies of
    (-1/pi, 0]; degree 1 two essential bars at 0 plus 2n^2 - 1 copies of
    (0, 1/pi]; degree 2 one essential bar at 1/pi.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    amp = 1.0 / math.pi
    out = GradedBarcode()
    out.add(0, -amp, None)
    copies = 2 * n * n - 1
    if copies:
        out.add(0, -amp, 0.0, copies)
        out.add(1, 0.0, amp, copies)
    out.add(1, 0.0, None, 2)
    out.add(2, amp, None)
    return out
