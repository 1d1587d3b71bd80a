"""Command-line interface.

Exit codes: 0 on success, 1 when a verification or assertion fails,
2 on usage errors (argparse's default). All randomness is controlled
by --seed, default 0.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import campaign as camp
from .functionals import (WeightFunction, banach_indicatrix,
                          check_indicatrix_inequality, indicatrix_profile,
                          significant_value_count, sort_significant_bars,
                          weighted_length, weighted_length_topk)
from .kunneth import torus_sum_barcode, torus_sum_total_length
from .matching import bottleneck_distance, epsilon_matching
from .mesh import (build_flat_torus_grid, perturb_to_simple, read_field_csv,
                   read_off)
from .persistence import Barcode, compute_barcode, lower_star_filtration
from .spectral import (grid_c0_distance, init_korovkin_kernel, korovkin_mean,
                       modulus_of_smoothness, read_grid_csv,
                       sample_laplacian_bounded, write_grid_csv)


def _load_field(args, need_simple=True):
    if getattr(args, "grid", None):
        values = read_grid_csv(args.grid)
        fld = camp.grid_field(values, seed=args.seed) if need_simple \
            else camp.field_from_grid(values)
        return fld
    surface = read_off(args.mesh)
    fld = read_field_csv(args.field, surface)
    if need_simple:
        fld = perturb_to_simple(fld, seed=args.seed)
    return fld


def _cmd_barcode(args):
    if not args.grid and not (args.mesh and args.field):
        raise ValueError("barcode needs either --grid or both --mesh and --field")
    if args.grid:
        values = read_grid_csv(args.grid)
        _, barcode = camp.grid_barcode(values, seed=args.seed)
    else:
        surface = read_off(args.mesh)
        fld = perturb_to_simple(read_field_csv(args.field, surface), seed=args.seed)
        barcode = compute_barcode(lower_star_filtration(fld))
    text = barcode.to_json(args.out)
    if args.out is None:
        print(text)
    else:
        print(f"wrote {args.out} ({len(barcode.bars)} bars)")
    if args.diagram_csv:
        barcode.to_diagram_csv(args.diagram_csv)
    return 0


def _cmd_distance(args):
    a = Barcode.from_json(args.a)
    b = Barcode.from_json(args.b)
    dist = bottleneck_distance(a, b)
    print("inf" if math.isinf(dist) else repr(dist))
    if not math.isinf(dist):
        matching = epsilon_matching(a, b, dist)
        payload = {
            "eps": dist,
            "pairs": [[{"birth": x.birth, "death": x.death, "degree": x.degree},
                       {"birth": y.birth, "death": y.death, "degree": y.degree}]
                      for x, y in matching.pairs],
            "deleted_a": [{"birth": x.birth, "death": x.death, "degree": x.degree}
                          for x in matching.deleted_a],
            "deleted_b": [{"birth": x.birth, "death": x.death, "degree": x.degree}
                          for x in matching.deleted_b],
        }
        text = json.dumps(payload, indent=1)
        if args.matching_out:
            with open(args.matching_out, "w") as fh:
                fh.write(text)
        else:
            print(text)
    return 0


def _cmd_phi(args):
    barcode = Barcode.from_json(args.barcode)
    weight = camp.parse_weight(args.weight)
    if args.k is not None:
        value = weighted_length_topk(barcode, weight, args.k)
        print(repr(value))
    else:
        report = weighted_length(barcode, weight)
        print(json.dumps({
            "value": report.value,
            "range_term": report.range_term,
            "bar_terms": list(report.bar_terms),
            "lipschitz_constant": report.lipschitz_constant,
            "n_finite": report.n_finite,
        }, indent=1))
    return 0


def _cmd_ndelta(args):
    barcode = Barcode.from_json(args.barcode)
    for d in args.delta:
        print(f"{d!r},{significant_value_count(barcode, d)}")
    return 0


def _cmd_sortbars(args):
    barcode = Barcode.from_json(args.barcode)
    result = sort_significant_bars(barcode, args.eps)
    print(json.dumps({
        "lengths": list(result.lengths),
        "n_finite": result.n_finite,
        "n_kept": result.n_kept,
        "comparisons": result.comparisons,
    }, indent=1))
    return 0


def _cmd_indicatrix(args):
    fld = _load_field(args)
    weight = camp.parse_weight(args.weight)
    if args.t is not None:
        print(banach_indicatrix(fld, args.t))
        return 0
    profile = indicatrix_profile(fld)
    print(repr(profile.integral(weight)))
    return 0


def _cmd_check_prop31(args):
    rng = np.random.default_rng(args.seed)
    surface = build_flat_torus_grid(args.resolution)
    failures = 0
    for si, sample in enumerate(sample_laplacian_bounded(
            args.lam, args.samples, seed=args.seed)):
        values = sample.poly.on_grid(args.resolution)
        fld = camp.grid_field(values, surface, seed=args.seed)
        barcode = compute_barcode(lower_star_filtration(fld))
        ts = rng.uniform(float(np.min(values)), float(np.max(values)),
                         size=args.t_samples)
        ts = ts[~np.isin(ts, fld.values)]
        report = check_indicatrix_inequality(fld, barcode, ts)
        status = "ok" if report.ok else f"{len(report.violations)} violations"
        print(f"sample {si}: {len(report.entries)} levels checked, {status}")
        failures += len(report.violations)
    return 0 if failures == 0 else 1


def _cmd_kunneth(args):
    graded = torus_sum_barcode(args.n, args.l)
    print(json.dumps({
        "phi1": torus_sum_total_length(args.n, args.l),
        "infinite_bars": graded.n_infinite,
        "finite_bars": graded.n_finite,
    }, indent=1))
    if args.emit_barcode:
        graded.to_barcode().to_json(args.emit_barcode)
        print(f"wrote {args.emit_barcode}")
    return 0


def _cmd_sample(args):
    os.makedirs(args.emit, exist_ok=True)
    samples = sample_laplacian_bounded(args.lam, args.count, seed=args.seed)
    for i, s in enumerate(samples):
        path = os.path.join(args.emit, f"field_{i:03d}.csv")
        write_grid_csv(path, s.poly.on_grid(args.resolution))
        print(f"{path}: norm={s.norm!r} laplacian_norm={s.laplacian_norm!r}")
    return 0


def _cmd_korovkin(args):
    values = read_grid_csv(args.field)
    kernel = init_korovkin_kernel()
    mean = korovkin_mean(values, args.lam, kernel)
    smoothed = mean.on_grid(values.shape[0])
    if args.out:
        write_grid_csv(args.out, smoothed)
    print(json.dumps({
        "c0_distance": grid_c0_distance(values, smoothed),
        "norm_ratio": (float(np.sqrt(np.sum(smoothed ** 2)))
                       / max(float(np.sqrt(np.sum(values ** 2))), 1e-300)),
    }, indent=1))
    return 0


def _cmd_modulus(args):
    values = read_grid_csv(args.field)
    print(repr(modulus_of_smoothness(values, args.delta, args.order)))
    return 0


def _cmd_campaign(args):
    if args.config:
        config = camp.CampaignConfig.from_toml(args.config)
    else:
        config = camp.CampaignConfig()
    if args.lambda_grid:
        config.lambda_grid = tuple(float(x) for x in args.lambda_grid.split(","))
    if args.samples is not None:
        config.samples_per_lambda = args.samples
    if args.resolution is not None:
        config.resolution = args.resolution
    if args.seed is not None:
        config.seed = args.seed
    if args.weight is not None:
        config.weight = args.weight
    if args.out is not None:
        config.output_dir = args.out
    try:
        report = camp.run_verification_campaign(config)
    except camp.CampaignViolation as exc:
        print(f"FAIL: {exc}")
        return 1
    print(f"samples: {len(report.records)}")
    print(f"kappa_hat: {report.kappa_hat!r}")
    for lam, ratio in sorted(report.per_lambda_max.items()):
        print(f"  lambda {lam}: max ratio {ratio!r}")
    for n, ratio in sorted(report.eigenfunction_ratios.items()):
        print(f"  eigenfunction n={n}: phi1/(lambda+1) = {ratio!r}"
              f"  (2/pi = {2.0 / math.pi:.6f})")
    return 0


def _cmd_golden(args):
    report = camp.run_golden_suite(resolution=args.resolution, seed=args.seed)
    print(report.table())
    return 0 if report.all_passed else 1


def _cmd_export(args):
    paths = camp.export_plot_data(args.input, args.kind, args.out)
    for p in paths:
        print(p)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="barsurf",
        description="Sublevel persistence barcodes of scalar fields on "
                    "surfaces, with oscillation functionals and spectral checks.")
    parser.add_argument("--seed", type=int, default=0, help="global random seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("barcode", help="compute a barcode from a field")
    p.add_argument("--mesh", help="OFF mesh file")
    p.add_argument("--field", help="vertex_id,value CSV on the mesh")
    p.add_argument("--grid", help="torus grid field CSV (i,j,value)")
    p.add_argument("--out", help="barcode JSON output path")
    p.add_argument("--diagram-csv", help="persistence diagram CSV output")
    p.set_defaults(func=_cmd_barcode)

    p = sub.add_parser("distance", help="bottleneck distance of two barcodes")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--matching-out", help="write the optimal matching JSON here")
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("phi", help="weighted barcode length")
    p.add_argument("--barcode", required=True)
    p.add_argument("--weight", default="one",
                   help="one | poly:c0,c1,... | table:file.csv")
    p.add_argument("--k", type=int, help="truncate to the k heaviest bars")
    p.set_defaults(func=_cmd_phi)

    p = sub.add_parser("ndelta", help="count significant endpoint values")
    p.add_argument("--barcode", required=True)
    p.add_argument("--delta", type=float, nargs="+", required=True)
    p.set_defaults(func=_cmd_ndelta)

    p = sub.add_parser("sortbars", help="sort significant bar lengths")
    p.add_argument("--barcode", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=_cmd_sortbars)

    p = sub.add_parser("indicatrix", help="level-set component counts")
    p.add_argument("--field", help="vertex_id,value CSV on the mesh")
    p.add_argument("--mesh", help="OFF mesh file")
    p.add_argument("--grid", help="torus grid field CSV instead of mesh+field")
    p.add_argument("--weight", default="one")
    p.add_argument("--t", type=float, help="single level instead of the integral")
    p.set_defaults(func=_cmd_indicatrix)

    p = sub.add_parser("check-prop31", help="level-set lower bound spot checks")
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--lambda", dest="lam", type=float, default=8.0)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--t-samples", type=int, default=100)
    p.set_defaults(func=_cmd_check_prop31)

    p = sub.add_parser("kunneth", help="closed-form product barcodes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--emit-barcode")
    p.set_defaults(func=_cmd_kunneth)

    p = sub.add_parser("sample", help="sample unit-norm spectral functions")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--emit", required=True, help="output directory")
    p.add_argument("--resolution", type=int, default=64)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("korovkin", help="damped Fourier smoothing mean")
    p.add_argument("--field", required=True, help="torus grid field CSV")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--out", help="smoothed grid CSV output")
    p.set_defaults(func=_cmd_korovkin)

    p = sub.add_parser("modulus", help="modulus of continuity or smoothness")
    p.add_argument("--field", required=True, help="torus grid field CSV")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--order", type=int, default=1)
    p.set_defaults(func=_cmd_modulus)

    p = sub.add_parser("campaign", help="seeded verification campaign")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--lambda-grid", help="comma-separated ascending grid")
    p.add_argument("--samples", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--weight")
    p.add_argument("--out", help="output directory for the report")
    p.set_defaults(func=_cmd_campaign)

    p = sub.add_parser("golden", help="run the self-contained golden checks")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_golden)

    p = sub.add_parser("export", help="plot-ready CSV export")
    p.add_argument("--kind", required=True,
                   choices=["diagram", "histogram", "ratios", "ndelta"])
    p.add_argument("--input", required=True, help="barcode or campaign JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
