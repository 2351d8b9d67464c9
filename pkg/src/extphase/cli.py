"""Command-line interface: ``extphase {run,table,verify,convergence}``.

Experiment parameters come from :data:`extphase.harness.TABLE_ONE_CONFIG`,
optionally replaced by an INI file (``--config``) and then by individual
flags. With ``--strict`` every subcommand exits with status 1 when one of
its checks disagrees with the expected outcome.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness, verify
from .errors import ExtPhaseError
from .integrators import METHODS, get_method

_OVERRIDES = (
    ("n", int),
    ("epsilon", float),
    ("alpha", float),
    ("q0", str),
    ("p0", str),
    ("t0", float),
    ("h", float),
    ("t_end", float),
    ("methods", str),
    ("reference_method", str),
    ("reference_h", float),
    ("block_size", int),
)


def _add_config_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("experiment parameters")
    g.add_argument("--config", type=Path, help="INI file with an [experiment] section")
    for name, typ in _OVERRIDES:
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)


def build_config(args: argparse.Namespace) -> harness.ExperimentConfig:
    overrides = {name: getattr(args, name, None) for name, _ in _OVERRIDES}
    overrides["method_ids"] = overrides.pop("methods")
    if args.config is not None:
        return harness.load_config(args.config, overrides)
    return harness.parse_config_values(overrides)


def _cmd_run(args) -> int:
    config = build_config(args)
    series = harness.run_trajectory(config, args.method)
    if not args.no_reference:
        series.H_reference = harness.run_reference(config)
    out = args.output or Path(f"{args.method}.csv")
    harness.write_series_csv(series, out)
    print(f"wrote {len(series)} samples to {out}")
    if series.H_reference is None:
        return 0
    sm = harness.smooth_max_error(series, config.block_size)
    print(f"{args.method}: max smoothed energy error {sm.max_error:.3e}")
    target = harness.EXPECTED_MAX_ERRORS.get(args.method)
    if args.strict and target is not None and config == harness.TABLE_ONE_CONFIG:
        if not target / 3 <= sm.max_error <= 3 * target:
            print(f"FAIL: expected about {target:.3g}", file=sys.stderr)
            return 1
    return 0


def _cmd_table(args) -> int:
    config = build_config(args)
    result = harness.table_one(config, keep_series=args.outdir is not None)
    text = harness.table_text(result)
    print(text)
    if args.outdir is not None:
        args.outdir.mkdir(parents=True, exist_ok=True)
        (args.outdir / "table.csv").write_text(harness.table_csv(result))
        (args.outdir / "table.txt").write_text(text + "\n")
        for row in result.rows:
            if row.series is not None:
                harness.write_series_csv(row.series, args.outdir / f"{row.method_id}.csv")
        print(f"wrote results to {args.outdir}")
    if args.strict:
        bad = harness.tier_mismatches(result)
        for line in bad:
            print("FAIL: " + line, file=sys.stderr)
        return 1 if bad else 0
    return 0


def _survey_points(config: harness.ExperimentConfig, count: int):
    prob = config.problem()
    steps = min(config.num_steps, 10000)
    return prob, verify.trajectory_points("lie_gauss", prob, config.initial_point(), config.h, steps, count)


def _cmd_verify(args) -> int:
    config = build_config(args)
    ids = _method_list(args.only)
    prob, points = _survey_points(config, args.points)
    rng = np.random.default_rng(args.seed)
    matrices = [verify.random_sp(config.n, rng) for _ in range(10)]
    y = config.initial_point().y
    failures = 0
    for mid in ids:
        checks = (
            verify.canonicity_check(mid, prob, points, args.step),
            verify.symmetry_check(mid, prob, points, args.step),
            verify.exactness_check(mid, matrices, y, args.step),
        )
        for c in checks:
            print(c.line)
            failures += not c.passed
    print(f"{failures} mismatch(es)")
    return 1 if args.strict and failures else 0


def _cmd_convergence(args) -> int:
    failures = 0
    for mid in _method_list(args.only):
        try:
            est, ok = verify.order_check(mid)
        except ExtPhaseError as exc:
            print(f"{mid:<18} error: {exc}")
            failures += 1
            continue
        claimed = get_method(mid).descriptor.order
        errs = " ".join(f"{e:.3e}" for e in est.errors)
        print(f"{mid:<18} order {claimed}  measured {est.measured_order:6.3f}  errors {errs}  {'ok' if ok else 'MISMATCH'}")
        failures += not ok
    print(f"{failures} mismatch(es)")
    return 1 if args.strict and failures else 0


def _method_list(raw) -> list:
    if not raw:
        return list(METHODS)
    ids = [tok for tok in raw.replace(",", " ").split() if tok]
    for mid in ids:
        get_method(mid)
    return ids


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extphase", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one method and write its energy series")
    p.add_argument("method", choices=sorted(METHODS))
    p.add_argument("-o", "--output", type=Path, help="CSV path (default: METHOD.csv)")
    p.add_argument("--no-reference", action="store_true", help="skip the reference solution")
    p.add_argument("--strict", action="store_true")
    _add_config_options(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("table", help="reproduce the long-time energy-error table")
    p.add_argument("--outdir", type=Path, help="write table.csv, table.txt and one CSV per method")
    p.add_argument("--strict", action="store_true")
    _add_config_options(p)
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("verify", help="check canonicity, symmetry and exponential exactness")
    p.add_argument("--only", help="comma-separated method ids (default: all)")
    p.add_argument("--points", type=int, default=20, help="trajectory points per check")
    p.add_argument("--step", type=float, default=verify.SURVEY_H, help="step size of the checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true")
    _add_config_options(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("convergence", help="estimate convergence orders")
    p.add_argument("--only", help="comma-separated method ids (default: all)")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=_cmd_convergence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ExtPhaseError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
