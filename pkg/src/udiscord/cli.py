"""Command-line front end.

Exit codes: 0 success, 2 unparseable input, 3 invalid state, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import sys
from fractions import Fraction

import numpy as np

from . import invariant as inv
from .errors import InvalidArgument, NotADensityMatrix, ResourceLimit
from .geometric import geometric_measure
from .linalg import OrderedSpectrum, load_density_matrix, ordered_spectrum
from .measures import OptimizerConfig
from .thermal import KINDS, HamiltonianSpec, thermal_sweep

log = logging.getLogger("udiscord")

EXIT_OK, EXIT_PARSE, EXIT_PHYSICS, EXIT_IO = 0, 2, 3, 4

SWEEP_MODES = {"two-eig": 2, "three-eig": 3, "four-eig": 4}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(multistarts=args.multistarts, tolerance=args.tol)


def _parse_spectrum(text: str) -> OrderedSpectrum:
    try:
        values = [float(Fraction(v.strip())) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(f"cannot parse spectrum {text!r}: {exc}", EXIT_PARSE) from exc
    if not values:
        raise CliError("empty spectrum", EXIT_PARSE)
    total = sum(values)
    if abs(total - 1.0) > 1e-6:
        raise CliError(f"spectrum sums to {total}, expected 1", EXIT_PHYSICS)
    values = [v / total for v in values]
    try:
        return OrderedSpectrum.from_values(values, tol=1e-9)
    except InvalidArgument as exc:
        raise CliError(str(exc), EXIT_PHYSICS) from exc


def _load_density(path: str) -> OrderedSpectrum:
    try:
        rho = load_density_matrix(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    except (json.JSONDecodeError, InvalidArgument) as exc:
        raise CliError(f"cannot parse {path}: {exc}", EXIT_PARSE) from exc
    try:
        return ordered_spectrum(rho)
    except (NotADensityMatrix, InvalidArgument) as exc:
        raise CliError(f"{path}: {exc}", EXIT_PHYSICS) from exc


def _plain_constants(args, samples: int, cfg: OptimizerConfig) -> inv.McEstimate:
    """Pure-state optimized average: cached if the cache matches, else fresh."""
    try:
        cached = inv.load_constants()
    except (OSError, ValueError, TypeError):
        cached = None
    if cached and cached.seed == args.seed and cached.samples == samples:
        log.info("using cached normalization constants")
        return cached.plain
    return inv.averaged_discord(OrderedSpectrum.pure(2), samples, args.seed, cfg, workers=args.workers)


def cmd_measure(args) -> dict:
    spec = _load_density(args.density) if args.density else _parse_spectrum(args.spectrum)
    n = spec.n_qubits
    if n < 2:
        raise CliError("need at least two qubits", EXIT_PHYSICS)
    report = {"n_qubits": n, "spectrum": list(spec.lambdas)}
    g = geometric_measure(spec)
    report["Q_G"] = g.normalized
    report["q_G"] = g.raw

    try:
        if n == 2 and not args.haar:
            mod = inv.modified_averaged_discord(spec, args.samples, args.seed, workers=args.workers)
            den = inv.modified_averaged_discord(OrderedSpectrum.pure(2), args.samples, args.seed, workers=args.workers)
            calq = mod.ratio(den)
        else:
            calq, split = inv.min_over_bipartitions(
                spec, args.samples, args.seed, variant="modified", haar=True, workers=args.workers
            )
            report["calQ_split"] = str(split)
        report["calQ"] = calq

        if args.with_optimized:
            cfg = _optimizer(args)
            m = min(args.samples, args.optimized_samples)
            if n == 2 and not args.haar:
                est = inv.averaged_discord(spec, m, args.seed, cfg, workers=args.workers)
                q = est.ratio(_plain_constants(args, m, cfg))
            else:
                q, split = inv.min_over_bipartitions(
                    spec, m, args.seed, cfg, variant="plain", haar=True, workers=args.workers
                )
                report["Q_split"] = str(split)
            report["Q"] = q
    except ResourceLimit as exc:
        raise CliError(str(exc), EXIT_PHYSICS) from exc
    return report


def _report_to_json(report: dict) -> dict:
    out = {}
    for key, val in report.items():
        if isinstance(val, inv.McEstimate):
            out[key] = {"value": val.mean, "std_error": val.std_error, "samples": val.samples}
            if val.nonconverged:
                out[key]["nonconverged_starts"] = val.nonconverged
        else:
            out[key] = val
    return out


def _report_to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "value", "std_error"])
    w.writerow(["n_qubits", report["n_qubits"], ""])
    for i, lam in enumerate(report["spectrum"], 1):
        w.writerow([f"lambda{i}", fmt(lam), ""])
    for key in ("Q_G", "q_G", "calQ", "Q"):
        if key not in report:
            continue
        val = report[key]
        if isinstance(val, inv.McEstimate):
            w.writerow([key, fmt(val.mean), fmt(val.std_error)])
        else:
            w.writerow([key, fmt(val), ""])
    return buf.getvalue()


def ordered_simplex_grid(n_nonzero: int, grid: int) -> list[tuple[float, ...]]:
    """Lattice on the set of descending 4-vectors with at most ``n_nonzero``
    nonzero entries.

    That set is the convex hull of the flat vectors (1/k, ..., 1/k, 0, ...),
    k = 1..n_nonzero; points are lattice combinations of those vertices with
    spacing 1/(grid-1), so every vertex (including the uniform one) is on it.
    """
    if grid < 2:
        raise InvalidArgument("grid must be at least 2")
    verts = np.array([[1.0 / k if i < k else 0.0 for i in range(4)] for k in range(1, n_nonzero + 1)])
    steps = grid - 1
    points = []
    for combo in itertools.product(range(steps + 1), repeat=n_nonzero - 1):
        if sum(combo) > steps:
            continue
        w = np.array([steps - sum(combo), *combo], dtype=float) / steps
        lam = w @ verts
        points.append(tuple(float(x) for x in lam))
    points.sort(key=lambda p: tuple(-x for x in p))
    return points


def cmd_sweep(args) -> list[dict]:
    points = ordered_simplex_grid(SWEEP_MODES[args.mode], args.grid)
    pure = inv.modified_averaged_discord(OrderedSpectrum.pure(2), args.samples, args.seed, workers=args.workers)
    rows = []
    for lam in points:
        spec = OrderedSpectrum.from_values(lam, tol=1e-12)
        est = inv.modified_averaged_discord(spec, args.samples, args.seed, workers=args.workers).ratio(pure)
        rows.append(
            {
                "lambda1": spec.lambdas[0],
                "lambda2": spec.lambdas[1],
                "lambda3": spec.lambdas[2],
                "lambda4": spec.lambdas[3],
                "q_modified": est.mean,
                "q_modified_stderr": est.std_error,
                "qg": geometric_measure(spec).normalized,
            }
        )
    return rows


def cmd_thermal(args) -> list[dict]:
    sign = 1.0 if args.sign == "+" else -1.0
    ham = HamiltonianSpec(args.kind, sign)
    if args.steps < 2:
        raise CliError("steps must be at least 2", EXIT_PARSE)
    magnitudes = np.linspace(args.beta_min, args.beta_max, args.steps)
    rows = thermal_sweep(ham, [sign * b for b in magnitudes], args.samples, args.seed, workers=args.workers)
    # the beta column is |D|/kT so that both coupling signs share one axis
    return [
        {
            "beta": float(m),
            "qg_analytic": r.qg_analytic,
            "qg_numeric": r.qg_numeric,
            "q_modified": r.q_modified,
            "q_modified_stderr": r.q_modified_stderr,
        }
        for m, r in zip(magnitudes, rows)
    ]


def cmd_constants(args) -> dict:
    cfg = _optimizer(args)
    samples_up = args.samples_up if args.samples_up is not None else inv.DEFAULT_SAMPLES_MODIFIED
    consts = inv.compute_normalization_constants(args.samples, args.seed, cfg, samples_up, workers=args.workers)
    path = args.cache or inv.default_cache_path()
    try:
        written = inv.save_constants(consts, path)
    except OSError as exc:
        raise CliError(f"cannot write cache {path}: {exc}", EXIT_IO) from exc
    return {
        "cache": str(written),
        "qbar_pure": {"value": consts.qbar_pure, "std_error": consts.qbar_pure_stderr, "samples": consts.samples},
        "qbar_up_pure": {"value": consts.qbar_up_pure, "std_error": consts.qbar_up_pure_stderr, "samples": consts.samples_up},
        "seed": consts.seed,
    }


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([fmt(v) for v in r.values()])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo samples")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--multistarts", type=int, default=8)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--haar", action="store_true", help="Haar sampling instead of the parameter box")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="udiscord", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", parents=[common], help="measures of one state")
    src = m.add_mutually_exclusive_group(required=True)
    src.add_argument("--spectrum", help="comma-separated eigenvalues, e.g. 0.5,0.5,0,0")
    src.add_argument("--density", help="density-matrix JSON file")
    m.add_argument("--with-optimized", action="store_true", help="also compute the optimized discord Q")
    m.add_argument("--optimized-samples", type=int, default=inv.DEFAULT_SAMPLES)

    s = sub.add_parser("sweep", parents=[common], help="eigenvalue sweep of the modified discord")
    s.add_argument("--mode", choices=sorted(SWEEP_MODES), default="two-eig")
    s.add_argument("--grid", type=int, default=21)

    t = sub.add_parser("thermal", parents=[common], help="Gibbs-state sweep")
    t.add_argument("--kind", choices=KINDS, required=True)
    t.add_argument("--sign", choices=("+", "-"), required=True, help="sign of the coupling D")
    t.add_argument("--beta-min", type=float, default=0.0, help="smallest |D|/kT")
    t.add_argument("--beta-max", type=float, default=10.0, help="largest |D|/kT")
    t.add_argument("--steps", type=int, default=21)

    c = sub.add_parser("constants", parents=[common], help="compute and cache normalization constants")
    c.add_argument("--samples-up", type=int, default=None, help="samples for the modified constant")
    c.add_argument("--cache", default=None, help="cache path (default $UDISCORD_CACHE)")
    return p


_DEFAULT_SAMPLES = {
    "measure": inv.DEFAULT_SAMPLES_MODIFIED,
    "sweep": 20_000,
    "thermal": 20_000,
    "constants": inv.DEFAULT_SAMPLES,
}
_DEFAULT_FORMAT = {"measure": "json", "sweep": "csv", "thermal": "csv", "constants": "json"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.samples is None:
        args.samples = _DEFAULT_SAMPLES[args.command]
    fmt_kind = args.format or _DEFAULT_FORMAT[args.command]
    try:
        if args.samples < 1:
            raise CliError("--samples must be >= 1", EXIT_PARSE)
        if args.multistarts < 1 or not args.tol > 0:
            raise CliError("--multistarts must be >= 1 and --tol positive", EXIT_PARSE)
        if args.command == "measure":
            report = cmd_measure(args)
            text = (
                json.dumps(_report_to_json(report), indent=2) + "\n"
                if fmt_kind == "json"
                else _report_to_csv(report)
            )
        elif args.command == "constants":
            text = json.dumps(cmd_constants(args), indent=2) + "\n"
        else:
            rows = cmd_sweep(args) if args.command == "sweep" else cmd_thermal(args)
            text = json.dumps(rows, indent=2) + "\n" if fmt_kind == "json" else _rows_to_csv(rows)
        _emit(text, args.out)
    except CliError as exc:
        print(f"udiscord: {exc}", file=sys.stderr)
        return exc.code
    except (NotADensityMatrix,) as exc:
        print(f"udiscord: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except InvalidArgument as exc:
        print(f"udiscord: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
