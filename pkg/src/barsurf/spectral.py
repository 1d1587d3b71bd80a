"""Trigonometric polynomials on the flat square torus and the circle.

Provides Parseval norms, seeded sampling of unit-norm functions with a
bounded Laplacian, the damped Fourier smoothing kernel built from the
first Dirichlet eigenfunction of the half-unit disk, discrete moduli
of continuity and smoothness, and the average-bar-length check that
ties them to barcodes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .bessel import bessel_j0, bessel_j0_first_zero

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TrigPoly:
    """Finite Fourier sum on the torus with real values.

    Coefficients are indexed by integer frequency pairs and must be
    conjugate-symmetric (c[-v] == conj(c[v])).
    """

    coeffs: dict

    def __post_init__(self):
        cleaned = {}
        for v, c in self.coeffs.items():
            c = complex(c)
            if c != 0:
                cleaned[(int(v[0]), int(v[1]))] = c
        for v, c in cleaned.items():
            mirror = (-v[0], -v[1])
            if mirror not in cleaned or abs(cleaned[mirror] - c.conjugate()) > 1e-12 * (1 + abs(c)):
                raise ValueError("coefficients are not conjugate-symmetric")
        object.__setattr__(self, "coeffs", cleaned)

    @property
    def max_frequency(self) -> float:
        if not self.coeffs:
            return 0.0
        return max(math.hypot(v[0], v[1]) for v in self.coeffs)

    def l2_norm(self) -> float:
        return TWO_PI * math.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def laplacian_l2_norm(self) -> float:
        return TWO_PI * math.sqrt(sum((v[0] ** 2 + v[1] ** 2) ** 2 * abs(c) ** 2
                                      for v, c in self.coeffs.items()))

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for (v1, v2), c in self.coeffs.items():
            out += c * np.exp(1j * (v1 * x + v2 * y))
        return out.real if out.ndim else float(out.real)

    def on_grid(self, n: int) -> np.ndarray:
        """Values at the n x n torus grid points (i, j) -> 2*pi*(i, j)/n."""
        if self.max_frequency >= n / 2:
            raise ValueError("grid too coarse for the highest frequency")
        spectrum = np.zeros((n, n), dtype=complex)
        for (v1, v2), c in self.coeffs.items():
            spectrum[v1 % n, v2 % n] += c
        return np.fft.ifft2(spectrum).real * n * n

    def scaled(self, factor: float) -> "TrigPoly":
        return TrigPoly({v: c * factor for v, c in self.coeffs.items()})

    @classmethod
    def from_grid(cls, values: np.ndarray, max_radius: float | None = None,
                  tol: float = 0.0) -> "TrigPoly":
        """Discrete Fourier coefficients of a gridded field.

        For inputs that are not band-limited below the Nyquist frequency
        the coefficients are aliased, as with any DFT.
        """
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        spectrum = np.fft.fft2(values) / (n * n)
        freqs = np.fft.fftfreq(n, d=1.0 / n).astype(int)
        coeffs = {}
        cutoff = tol * np.max(np.abs(spectrum)) if tol else 0.0
        for a in range(n):
            for b in range(n):
                c = spectrum[a, b]
                if abs(c) <= cutoff:
                    continue
                v = (int(freqs[a]), int(freqs[b]))
                if max_radius is not None and math.hypot(*v) > max_radius:
                    continue
                coeffs[v] = c
        return cls(coeffs)


def l2_norm(poly: TrigPoly) -> float:
    return poly.l2_norm()


def laplacian_l2_norm(poly: TrigPoly) -> float:
    return poly.laplacian_l2_norm()


def torus_eigenfunction(n: int) -> TrigPoly:
    """(1/pi) sin(n x) cos(n y), a unit-norm Laplace eigenfunction."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    a = -0.25j / math.pi
    return TrigPoly({(n, n): a, (-n, -n): -a, (n, -n): a, (-n, n): -a})


@dataclass(frozen=True)
class SpectralSample:
    """A unit-norm function whose Laplacian norm is within the budget."""

    poly: TrigPoly
    lam: float
    norm: float
    laplacian_norm: float


def sample_laplacian_bounded(lam: float, count: int, seed: int):
    """Seeded unit-norm random Fourier sums with frequencies |v|^2 <= lam.

    Each coefficient pair gets independent complex Gaussian weight, so
    the ensemble is rotation-invariant on every frequency shell; the
    Laplacian bound holds automatically because |v|^4 <= lam^2 termwise.
    """
    if lam < 1:
        raise ValueError("lam must be at least 1")
    radius = int(math.floor(math.sqrt(lam)))
    reps = [(v1, v2)
            for v1 in range(0, radius + 1)
            for v2 in range(-radius, radius + 1)
            if v1 * v1 + v2 * v2 <= lam and (v1 > 0 or v2 >= 0)]
    if not reps:
        raise ValueError("empty frequency set")
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        coeffs = {}
        for v in reps:
            if v == (0, 0):
                coeffs[v] = complex(rng.standard_normal())
            else:
                c = complex(rng.standard_normal(), rng.standard_normal())
                coeffs[v] = c
                coeffs[(-v[0], -v[1])] = c.conjugate()
        poly = TrigPoly(coeffs)
        poly = poly.scaled(1.0 / poly.l2_norm())
        samples.append(SpectralSample(poly, float(lam), poly.l2_norm(),
                                      poly.laplacian_l2_norm()))
    return samples


@dataclass(frozen=True)
class CircleTrigPoly:
    """Finite Fourier sum on the circle with real values."""

    coeffs: dict

    def __post_init__(self):
        cleaned = {int(k): complex(c) for k, c in self.coeffs.items() if c != 0}
        for k, c in cleaned.items():
            if -k not in cleaned or abs(cleaned[-k] - c.conjugate()) > 1e-12 * (1 + abs(c)):
                raise ValueError("coefficients are not conjugate-symmetric")
        object.__setattr__(self, "coeffs", cleaned)

    def l2_norm(self) -> float:
        return math.sqrt(TWO_PI * sum(abs(c) ** 2 for c in self.coeffs.values()))

    def second_derivative_l2_norm(self) -> float:
        return math.sqrt(TWO_PI * sum(k ** 4 * abs(c) ** 2
                                      for k, c in self.coeffs.items()))

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for k, c in self.coeffs.items():
            out += c * np.exp(1j * k * x)
        return out.real


def sample_circle_laplacian_bounded(lam: float, count: int, seed: int):
    """Seeded unit-norm random circle polynomials with k^2 <= lam."""
    if lam < 1:
        raise ValueError("lam must be at least 1")
    radius = int(math.floor(math.sqrt(lam)))
    rng = np.random.default_rng(seed)
    polys = []
    for _ in range(count):
        coeffs = {0: complex(rng.standard_normal())}
        for k in range(1, radius + 1):
            c = complex(rng.standard_normal(), rng.standard_normal())
            coeffs[k] = c
            coeffs[-k] = c.conjugate()
        poly = CircleTrigPoly(coeffs)
        scale = 1.0 / poly.l2_norm()
        polys.append(CircleTrigPoly({k: c * scale for k, c in poly.coeffs.items()}))
    return polys


@dataclass(frozen=True)
class KorovkinKernel:
    """Radially tabulated damping profile W used by the smoothing mean.

    W is the self-convolution of the first Dirichlet eigenfunction of
    the disk of radius 1/2 (extended by zero and L2-normalised); it is
    supported in the unit disk, equals 1 at the origin and never
    exceeds 1 in absolute value. `scale_constant` is twice the first
    J0 zero, the shift scale the approximation bounds use.
    """

    first_zero: float
    scale_constant: float
    radii: np.ndarray
    table: np.ndarray
    profile_scale: float
    _spline: object = field(repr=False, default=None)

    def eigenprofile(self, r):
        """The normalised eigenfunction profile U(r) on the disk, 0 outside."""
        scalar = np.ndim(r) == 0
        rr = np.atleast_1d(np.asarray(r, dtype=float))
        vals = np.where(
            rr <= 0.5,
            self.profile_scale * bessel_j0(2.0 * self.first_zero * np.minimum(rr, 0.5)),
            0.0)
        return float(vals[0]) if scalar else vals

    def w(self, x):
        """W evaluated at |x|; accepts radii or vectors of any shape."""
        scalar = np.ndim(x) == 0
        r = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
        out = np.where(r < 1.0, self._spline(np.minimum(r, 1.0)), 0.0)
        return float(out[0]) if scalar else out


@lru_cache(maxsize=4)
def init_korovkin_kernel(radial_resolution: int = 4096) -> KorovkinKernel:
    """Build the damping kernel table.

    The eigenfunction profile is c*J0(2*j01*r) on [0, 1/2]; the
    convolution is integrated in polar coordinates with the angular
    interval split exactly where the shifted copy leaves its support,
    so every quadrature piece is smooth.
    """
    if radial_resolution < 256:
        raise ValueError("radial resolution must be at least 256")
    j01 = bessel_j0_first_zero(1e-12)

    gl_x, gl_w = np.polynomial.legendre.leggauss(64)
    # Normalise the profile: 2*pi*c^2 * int_0^{1/2} J0(2*j01*r)^2 r dr = 1.
    r_nodes = 0.25 * (gl_x + 1.0)
    r_weights = 0.25 * gl_w
    base = bessel_j0(2.0 * j01 * r_nodes)
    norm_sq = TWO_PI * float(np.sum(r_weights * base * base * r_nodes))
    c = 1.0 / math.sqrt(norm_sq)

    radii = np.linspace(0.0, 1.0, radial_resolution)
    table = np.empty_like(radii)
    u_r = c * base  # profile at the radial quadrature nodes

    theta_x = 0.5 * (gl_x + 1.0)  # unit nodes for the angular interval
    theta_w = 0.5 * gl_w
    chunk = 256
    for start in range(0, len(radii), chunk):
        rho = radii[start:start + chunk][:, None]          # (m, 1)
        r = r_nodes[None, :]                               # (1, 64)
        cos_cut = (r * r + rho * rho - 0.25) / (2.0 * r * rho + 1e-300)
        theta_max = np.where(r + rho <= 0.5, math.pi,
                             np.where(np.abs(r - rho) >= 0.5, 0.0,
                                      np.arccos(np.clip(cos_cut, -1.0, 1.0))))
        theta = theta_max[:, :, None] * theta_x[None, None, :]
        dist = np.sqrt(np.maximum(
            r[:, :, None] ** 2 + rho[:, :, None] ** 2
            - 2.0 * r[:, :, None] * rho[:, :, None] * np.cos(theta), 0.0))
        u_shift = c * bessel_j0(2.0 * j01 * np.minimum(dist, 0.5))
        inner = np.sum(theta_w[None, None, :] * u_shift, axis=2) * theta_max
        table[start:start + chunk] = 2.0 * np.sum(
            r_weights[None, :] * u_r[None, :] * r_nodes[None, :] * inner, axis=1)
    table[-1] = 0.0
    spline = CubicSpline(radii, table)
    return KorovkinKernel(first_zero=j01, scale_constant=2.0 * j01,
                          radii=radii, table=table, profile_scale=c,
                          _spline=spline)


def korovkin_mean(f, lam: float, kernel: KorovkinKernel | None) -> TrigPoly:
    """Damped Fourier truncation h with coefficients c_v * W(v/sqrt(lam)).

    Accepts a TrigPoly or a gridded field (whose DFT coefficients are
    used, with the usual aliasing caveat). The result keeps frequencies
    with |v| <= sqrt(lam) only and satisfies ||h|| <= ||f||.
    """
    if kernel is None:
        raise RuntimeError("smoothing kernel is not initialised")
    if lam <= 0:
        raise ValueError("lam must be positive")
    root = math.sqrt(lam)
    if not isinstance(f, TrigPoly):
        f = TrigPoly.from_grid(_as_grid(f), max_radius=root)
    coeffs = {}
    for v, cv in f.coeffs.items():
        r = math.hypot(*v)
        if r <= root:
            w = kernel.w(r / root)
            if w != 0.0:
                coeffs[v] = cv * w
    return TrigPoly(coeffs)


def _as_grid(f):
    values = getattr(f, "values", f)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        n = int(round(math.sqrt(values.size)))
        if n * n != values.size:
            raise ValueError("flat field is not a square grid")
        values = values.reshape(n, n)
    return values


def modulus_of_smoothness(f, delta: float, order: int = 1) -> float:
    """Discrete sup of the order-m difference over shifts of length <= delta.

    f is a gridded torus field (or a ScalarField on the periodic grid).
    Shifts run over all lattice vectors inside the disk, so the value
    is a lower bound of the continuum sup that refines with the grid;
    it is monotone in delta and vanishes at delta = 0.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta == 0:
        return 0.0
    values = _as_grid(f)
    n = values.shape[0]
    h = TWO_PI / n
    if h > delta / 4.0:
        raise ValueError("grid too coarse for this shift scale: need h <= delta/4")
    binom = [math.comb(order, j) * (-1) ** (order - j) for j in range(order + 1)]
    reach = int(math.floor(delta / h))
    best = 0.0
    for a in range(0, reach + 1):
        b_start = 1 if a == 0 else -reach
        for b in range(b_start, reach + 1):
            if a == 0 and b <= 0:
                continue
            if h * math.hypot(a, b) > delta:
                continue
            acc = binom[0] * values
            for j in range(1, order + 1):
                acc = acc + binom[j] * np.roll(values, (-j * a, -j * b), axis=(0, 1))
            best = max(best, float(np.max(np.abs(acc))))
    return best


def grid_l2_norm(values) -> float:
    values = _as_grid(values)
    n = values.shape[0]
    return float(np.sqrt(np.sum(values * values))) * TWO_PI / n


def grid_c0_distance(a, b) -> float:
    return float(np.max(np.abs(_as_grid(a) - _as_grid(b))))


@dataclass(frozen=True)
class AverageBarLengthReport:
    """Average bar length against the norm plus modulus bound.

    `full` is (lhs, rhs, ok) for the all-bars average (None when the
    barcode has no finite bars); `truncated` maps k to the same triple
    for the k-bar average.
    """

    full: tuple | None
    truncated: dict


def average_bar_length_check(f, barcode, c1: float, kernel: KorovkinKernel,
                             ks=(1, 3, 10)) -> AverageBarLengthReport:
    """Compare average bar lengths with c1*||f|| + 8*omega_1 at matched scale."""
    from .functionals import WeightFunction, weighted_length, weighted_length_topk

    values = _as_grid(f)
    one = WeightFunction.one()
    norm = grid_l2_norm(values)
    n_fin = barcode.n_finite
    full = None
    if n_fin > 0:
        lhs = weighted_length(barcode, one).value / (n_fin + 1)
        rhs = c1 * norm + 8.0 * modulus_of_smoothness(
            values, kernel.scale_constant / math.sqrt(n_fin), order=1)
        full = (lhs, rhs, lhs <= rhs)
    truncated = {}
    for k in ks:
        lhs = weighted_length_topk(barcode, one, k) / (k + 1)
        rhs = c1 * norm + 8.0 * modulus_of_smoothness(
            values, kernel.scale_constant / math.sqrt(k), order=1)
        truncated[k] = (lhs, rhs, lhs <= rhs)
    return AverageBarLengthReport(full, truncated)


# -- grid field files -------------------------------------------------------

def write_grid_csv(path, values):
    """Write a torus grid field as `i,j,value` rows under an `n=...` header."""
    values = _as_grid(values)
    n = values.shape[0]
    with open(path, "w", newline="") as fh:
        fh.write(f"n={n}\n")
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "value"])
        for i in range(n):
            for j in range(n):
                writer.writerow([i, j, repr(float(values[i, j]))])


def read_grid_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        head = fh.readline().strip()
        if not head.startswith("n="):
            raise ValueError("grid file must start with an n=<size> line")
        n = int(head[2:])
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["i", "j", "value"]:
            raise ValueError("expected header 'i,j,value'")
        values = np.full((n, n), np.nan)
        for row in reader:
            if row:
                values[int(row[0]), int(row[1])] = float(row[2])
    if np.any(np.isnan(values)):
        raise ValueError("missing grid entries")
    return values
