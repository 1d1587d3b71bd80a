"""Verification campaigns, the golden check suite and plot-data export.

A campaign samples unit-norm functions with a bounded Laplacian on a
seeded grid of spectral budgets, computes their barcodes and checks the
chain: weighted barcode length <= weighted level-count integral (a hard
assertion) while recording the ratio against the budget, whose maximum
is reported as the empirical constant. Runs are sequential and fully
determined by the seed.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .functionals import (WeightFunction, check_indicatrix_inequality,
                          indicatrix_profile, significant_value_count,
                          weighted_length)
from .kunneth import (torus_eigenfunction_barcode, torus_sum_barcode,
                      torus_sum_total_length)
from .mesh import build_flat_torus_grid, field_from_grid, perturb_to_simple
from .persistence import Barcode, compute_barcode, lower_star_filtration
from .spectral import (TWO_PI, init_korovkin_kernel, sample_laplacian_bounded,
                       torus_eigenfunction)

DEFAULT_DELTAS = (0.05, 0.1, 0.25, 0.5)


class CampaignViolation(RuntimeError):
    """A hard inequality of the campaign failed."""


@dataclass
class CampaignConfig:
    lambda_grid: tuple = (2.0, 8.0, 18.0, 32.0)
    samples_per_lambda: int = 5
    resolution: int = 64
    seed: int = 0
    weight: str = "one"
    kappa: float | None = None
    output_dir: str | None = None
    t_samples: int = 100
    deltas: tuple = DEFAULT_DELTAS

    def validate(self):
        grid = tuple(float(x) for x in self.lambda_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("lambda grid must be non-empty and ascending")
        if self.resolution < 64:
            raise ValueError("resolution must be at least 64")
        if self.samples_per_lambda < 1:
            raise ValueError("need at least one sample per lambda")
        # Keep at least 8 grid points per wavelength of the top frequency.
        if self.resolution < 8.0 * math.sqrt(grid[-1]):
            raise ValueError("resolution too coarse for the largest lambda")
        return self

    @classmethod
    def from_toml(cls, path):
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data):
        cfg = cls()
        for key, value in data.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown campaign option {key!r}")
            if key in ("lambda_grid", "deltas"):
                value = tuple(float(v) for v in value)
            setattr(cfg, key, value)
        return cfg


@dataclass
class CampaignReport:
    records: list
    kappa_hat: float
    per_lambda_max: dict
    eigenfunction_ratios: dict
    config: dict

    def to_json_dict(self):
        return {
            "records": self.records,
            "kappa_hat": self.kappa_hat,
            "per_lambda_max": {repr(k): v for k, v in self.per_lambda_max.items()},
            "eigenfunction_ratios": {str(k): v for k, v in self.eigenfunction_ratios.items()},
            "config": self.config,
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_json_dict(), indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def parse_weight(spec: str) -> WeightFunction:
    """Weight specs: `one`, `poly:c0,c1,...` or `table:file.csv`."""
    if spec == "one":
        return WeightFunction.one()
    if spec.startswith("poly:"):
        return WeightFunction.polynomial([float(c) for c in spec[5:].split(",")])
    if spec.startswith("table:"):
        ts, us = [], []
        with open(spec[6:], newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [h.strip() for h in header[:2]] != ["t", "u"]:
                raise ValueError("weight table needs header 't,u'")
            for row in reader:
                if row:
                    ts.append(float(row[0]))
                    us.append(float(row[1]))
        return WeightFunction.from_table(ts, us)
    raise ValueError(f"unknown weight spec {spec!r}")


def grid_field(values2d, surface=None, seed: int = 0):
    """Perturbed simple field on the periodic grid holding these values."""
    return perturb_to_simple(field_from_grid(values2d, surface), seed=seed)


def grid_barcode(values2d, surface=None, seed: int = 0):
    fld = grid_field(values2d, surface, seed)
    return fld, compute_barcode(lower_star_filtration(fld))


def eigenfunction_field(n: int, resolution: int, surface=None, seed: int = 0):
    """Perturbed grid field of the unit-norm eigenfunction family member."""
    return grid_field(torus_eigenfunction(n).on_grid(resolution), surface, seed)


def _composed_weight_norm(weight, values, n):
    evaluated = np.array([weight(float(t)) for t in values.ravel()])
    return float(np.sqrt(np.sum(evaluated * evaluated))) * TWO_PI / n


def run_verification_campaign(config: CampaignConfig) -> CampaignReport:
    """Run the seeded sampling campaign and collect the ratio statistics.

    Hard assertions: the level-bound spot checks must report zero
    violations and the weighted length may not exceed the weighted
    level-count integral. The budget ratio itself is recorded only,
    because the metric constant it estimates has no pinned value.
    """
    config.validate()
    weight = parse_weight(config.weight)
    res = config.resolution
    surface = build_flat_torus_grid(res)
    rng = np.random.default_rng(config.seed + 987654321)
    records = []
    per_lambda_max = {}
    for li, lam in enumerate(config.lambda_grid):
        samples = sample_laplacian_bounded(lam, config.samples_per_lambda,
                                           seed=config.seed + 1000 * li)
        for si, sample in enumerate(samples):
            values = sample.poly.on_grid(res)
            fld = grid_field(values, surface, seed=config.seed)
            barcode = compute_barcode(lower_star_filtration(fld))
            report = weighted_length(barcode, weight)
            profile = indicatrix_profile(fld)
            level_integral = profile.integral(weight)
            if report.value > level_integral + 1e-9:
                raise CampaignViolation(
                    f"weighted length {report.value} exceeds level integral "
                    f"{level_integral} (lambda={lam}, sample={si})")
            lo, hi = float(np.min(values)), float(np.max(values))
            ts = rng.uniform(lo, hi, size=config.t_samples)
            ts = ts[~np.isin(ts, fld.values)]
            spot = check_indicatrix_inequality(fld, barcode, ts)
            if not spot.ok:
                raise CampaignViolation(
                    f"level bound violated at t={spot.violations[0][0]} "
                    f"(lambda={lam}, sample={si})")
            u_norm = _composed_weight_norm(weight, values, res)
            ratio = report.value / ((lam + 1.0) * u_norm)
            records.append({
                "lambda": float(lam),
                "sample": si,
                "phi": report.value,
                "u_norm": u_norm,
                "ratio": ratio,
                "n_finite": barcode.n_finite,
                "indicatrix_integral": level_integral,
                "n_delta": {repr(d): significant_value_count(barcode, d)
                            for d in config.deltas},
                "violations": 0,
            })
            per_lambda_max[float(lam)] = max(per_lambda_max.get(float(lam), 0.0),
                                             ratio)
    # Eigenfunction family ratios: total length over (lambda + 1).
    eig = {}
    for n in range(1, 6):
        lam = 2.0 * n * n
        if 8.0 * math.sqrt(lam) > res:
            break
        fld = eigenfunction_field(n, res, surface, seed=config.seed)
        barcode = compute_barcode(lower_star_filtration(fld))
        phi1 = weighted_length(barcode, WeightFunction.one()).value
        eig[n] = phi1 / (lam + 1.0)
    kappa_hat = max(r["ratio"] for r in records)
    report = CampaignReport(records, kappa_hat, per_lambda_max, eig,
                            asdict(config))
    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
        report.to_json(os.path.join(config.output_dir, "campaign.json"))
        export_plot_data(report, "ratios", config.output_dir)
    return report


@dataclass
class GoldenCheck:
    name: str
    passed: bool
    detail: str


@dataclass
class GoldenReport:
    checks: list

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)

    def table(self):
        lines = []
        for c in self.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
        return "\n".join(lines)


def run_golden_suite(resolution: int = 256, circle_fields: int = 50,
                     seed: int = 0) -> GoldenReport:
    """Self-contained reproduction of the worked reference examples."""
    from .functionals import weighted_length
    from .mesh import CircleField
    from .persistence import circle_barcode

    checks = []
    one = WeightFunction.one()
    amp = 1.0 / math.pi
    h = TWO_PI / resolution
    surface = build_flat_torus_grid(resolution)

    for n in (1, 2, 3):
        fld = eigenfunction_field(n, resolution, surface, seed=seed)
        barcode = compute_barcode(lower_star_filtration(fld))
        expect = 2 * n * n - 1
        fin0 = [b for b in barcode.finite_bars() if b.degree == 0]
        fin1 = [b for b in barcode.finite_bars() if b.degree == 1]
        inf_counts = tuple(sum(1 for b in barcode.infinite_bars() if b.degree == k)
                           for k in range(3))
        endpoints = [b.birth for b in barcode.bars] + \
                    [b.death for b in barcode.finite_bars()]
        targets = np.array([-amp, 0.0, amp])
        end_ok = all(np.min(np.abs(targets - e)) <= 5 * h for e in endpoints)
        phi1 = weighted_length(barcode, one).value
        phi_ok = abs(phi1 - 4.0 * n * n / math.pi) <= 0.02 * (4.0 * n * n / math.pi)
        ok = (len(fin0) == expect and len(fin1) == expect
              and inf_counts == (1, 2, 1) and end_ok and phi_ok)
        checks.append(GoldenCheck(
            f"torus eigenfunction n={n}", ok,
            f"finite bars ({len(fin0)},{len(fin1)}) vs {expect}, "
            f"infinite {inf_counts}, phi1={phi1:.6f}"))

    kunneth_ok = True
    detail = []
    for n in range(1, 5):
        for l in range(1, 5):
            graded = torus_sum_barcode(n, l)
            closed_form = torus_sum_total_length(n, l)
            phi = weighted_length(graded.to_barcode(), one).value
            expect_inf = 2 ** n
            expect_fin = ((2 * l) ** n - 2 ** n) // 2
            lengths_ok = all(abs(x - 2.0) < 1e-12 for x in graded.finite_lengths())
            if not (closed_form == 2 * n + (2 * l) ** n - 2 ** n
                    and phi == closed_form
                    and graded.n_infinite == expect_inf
                    and graded.n_finite == expect_fin
                    and lengths_ok):
                kunneth_ok = False
                detail.append(f"n={n},l={l}")
    checks.append(GoldenCheck("product closed form n,l<=4", kunneth_ok,
                              "exact" if kunneth_ok else "failed: " + ",".join(detail)))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(circle_fields):
        m = int(rng.integers(5, 40))
        values = rng.standard_normal(m)
        values += np.linspace(0, 1e-9, m)  # break ties deterministically
        fld = CircleField(values)
        barcode = circle_barcode(fld)
        phi1 = weighted_length(barcode, one).value
        worst = max(worst, abs(phi1 - 0.5 * fld.total_variation()))
    checks.append(GoldenCheck(f"circle variation identity x{circle_fields}",
                              worst <= 1e-12, f"max deviation {worst:.2e}"))

    kernel = init_korovkin_kernel()
    j_ok = abs(kernel.first_zero - 2.404825557695773) <= 1e-9
    w0_ok = abs(kernel.w(0.0) - 1.0) <= 1e-6
    outside_ok = kernel.w(1.0) == 0.0 and kernel.w(1.7) == 0.0
    bounded_ok = float(np.max(np.abs(kernel.table))) <= 1.0 + 1e-9
    checks.append(GoldenCheck(
        "smoothing kernel constants", j_ok and w0_ok and outside_ok and bounded_ok,
        f"j01={kernel.first_zero:.15f}, W(0)={kernel.w(0.0):.8f}"))

    census = buhovsky_census(3, 10)
    checks.append(GoldenCheck(
        "high-dimensional census demo", census["bar_count"] == 1000,
        f"n=3,k=10 predicts {census['bar_count']} bars of length "
        f"{census['bar_length']} in degree {census['degree']}, "
        f"total-length scale {census['phi1_scale']}"))
    return GoldenReport(checks)


def buhovsky_census(n: int, k: int) -> dict:
    """Analytic bar census of the bump-lattice family on the n-torus.

    Predicts about k^n bars of length 1/k^2 in degree n-1 and a total
    length growing like k^(n-2); no persistence is computed since the
    construction lives above dimension two.
    """
    if n < 3:
        raise ValueError("the census needs dimension at least 3")
    if k < 1:
        raise ValueError("k must be a positive integer")
    return {
        "n": n,
        "k": k,
        "degree": n - 1,
        "bar_count": k ** n,
        "bar_length": float(k) ** -2,
        "phi1_scale": float(k) ** (n - 2),
    }


def export_plot_data(data, kind: str, out_dir, deltas=DEFAULT_DELTAS):
    """Write plot-ready CSV files; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if kind == "diagram":
        barcode = data if isinstance(data, Barcode) else Barcode.from_json(data)
        path = os.path.join(out_dir, "diagram.csv")
        barcode.to_diagram_csv(path)
        paths.append(path)
    elif kind == "histogram":
        barcode = data if isinstance(data, Barcode) else Barcode.from_json(data)
        lengths = [b.length for b in barcode.finite_bars()]
        path = os.path.join(out_dir, "bar_lengths.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["length"])
            for x in sorted(lengths, reverse=True):
                writer.writerow([repr(x)])
        paths.append(path)
    elif kind == "ratios":
        report = data if isinstance(data, CampaignReport) else None
        if report is None:
            with open(data) as fh:
                payload = json.load(fh)
            rows = [(r["lambda"], r["ratio"]) for r in payload["records"]]
        else:
            rows = [(r["lambda"], r["ratio"]) for r in report.records]
        path = os.path.join(out_dir, "ratio_vs_lambda.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "ratio"])
            for lam, ratio in sorted(rows):
                writer.writerow([repr(lam), repr(ratio)])
        paths.append(path)
    elif kind == "ndelta":
        barcode = data if isinstance(data, Barcode) else Barcode.from_json(data)
        path = os.path.join(out_dir, "n_delta.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["delta", "count"])
            for d in deltas:
                writer.writerow([repr(float(d)),
                                 significant_value_count(barcode, float(d))])
        paths.append(path)
    else:
        raise ValueError(f"unknown export kind {kind!r}")
    return paths
