"""Command-line surface: estimation from data files, influence-curve
emission, and contamination simulation studies.

stdout carries only the machine-readable payload (JSON or CSV); stderr
carries diagnostics.  Exit codes: 0 success, 1 input/usage error, 2
estimator did not converge.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .errors import ToolkitError
from .estimators import EstimatorSpec, estimate
from .families import get_family
from .influence import influence_curve
from .measures import empirical, read_sample
from .simulation import CONTAMINANTS, ContaminationModel, report, run_study

_ESTIMATORS = ("mle", "subdivergence", "superdivergence", "power-pseudo", "renyi")


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be min:max:count, got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    count = int(parts[2])
    if not lo < hi:
        raise ValueError(f"grid minimum must be below maximum, got {text!r}")
    if count < 2:
        raise ValueError(f"grid needs at least 2 points, got {count}")
    return np.linspace(lo, hi, count)


def _build_parser() -> _Parser:
    parser = _Parser(prog="mindiv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="fit an estimator to a data file")
    est.add_argument("--family", required=True, help="normal | normal-loc | normal-scale | pareto")
    est.add_argument("--estimator", required=True, choices=_ESTIMATORS)
    est.add_argument("--alpha", type=float, default=0.0, help="divergence order (default 0)")
    est.add_argument("--data", required=True, help="text file, one observation per line")
    est.add_argument("--escort", type=_floats, help="escort parameter (subdivergence only)")
    est.add_argument("--tol", type=float, default=1e-6)
    est.add_argument("--max-iter", type=int, default=500)

    inf = sub.add_parser("influence", help="emit an influence curve as CSV")
    inf.add_argument("--family", required=True)
    inf.add_argument("--estimator", required=True, choices=_ESTIMATORS)
    inf.add_argument("--alpha", type=float, default=0.0)
    inf.add_argument("--theta", type=_floats, required=True, help="evaluation parameter, comma-separated")
    inf.add_argument("--escort", type=_floats)
    inf.add_argument("--grid", required=True, help="min:max:count")
    inf.add_argument("--numeric", action="store_true", help="use the contamination oracle")

    sim = sub.add_parser("simulate", help="run a contaminated scale study")
    sim.add_argument("--epsilon", type=float, required=True, help="contamination fraction in (0, 0.5)")
    sim.add_argument("--contaminant", required=True, choices=CONTAMINANTS)
    sim.add_argument("--n", type=int, default=100)
    sim.add_argument("--reps", type=int, default=1000)
    sim.add_argument("--sigma", type=float, default=1.0, help="base scale (default 1)")
    sim.add_argument("--alphas", type=_floats, default=(0.25, 0.5, 1.0))
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _make_spec(args) -> EstimatorSpec:
    kwargs = {"kind": args.estimator, "alpha": args.alpha}
    if args.estimator == "subdivergence":
        if args.escort is None:
            raise ToolkitError("--escort is required for the subdivergence estimator")
        kwargs["escort"] = args.escort
    elif getattr(args, "escort", None) is not None:
        raise ToolkitError(f"--escort is not accepted by the {args.estimator} estimator")
    if hasattr(args, "tol"):
        kwargs["tol"] = args.tol
        kwargs["max_iter"] = args.max_iter
    return EstimatorSpec(**kwargs)


def _cmd_estimate(args) -> int:
    family = get_family(args.family)
    spec = _make_spec(args)
    sample = read_sample(args.data)
    result = estimate(family, spec, empirical(sample))
    payload = {
        "theta_hat": [float(v) for v in result.theta_hat],
        "criterion_value": result.criterion_value,
        "iterations": result.iterations,
        "converged": result.converged,
    }
    print(json.dumps(payload))
    if not result.converged:
        print("warning: estimator did not converge within the iteration budget", file=sys.stderr)
        return 2
    return 0


def _cmd_influence(args) -> int:
    family = get_family(args.family)
    spec = _make_spec(args)
    grid = _parse_grid(args.grid)
    curve = influence_curve(family, spec, np.asarray(args.theta), grid, numeric=args.numeric)
    sys.stdout.write(curve.to_csv())
    return 0


def _cmd_simulate(args) -> int:
    model = ContaminationModel(
        base_sigma=args.sigma, epsilon=args.epsilon, contaminant=args.contaminant
    )
    seed = args.seed
    if seed is None:
        seed = time.time_ns() & ((1 << 63) - 1)
        print(f"seed: {seed}", file=sys.stderr)
    specs = [EstimatorSpec(kind="mle")]
    for alpha in args.alphas:
        specs.append(EstimatorSpec(kind="power-pseudo", alpha=alpha))
    for alpha in args.alphas:
        specs.append(EstimatorSpec(kind="renyi", alpha=alpha))
    result = run_study(model, args.n, args.reps, specs, seed)
    sys.stdout.write(report(result, format=args.format))
    return 0


_COMMANDS = {"estimate": _cmd_estimate, "influence": _cmd_influence, "simulate": _cmd_simulate}

# Flags whose values may start with '-' (negative numbers, grid specs);
# fused into --flag=value so argparse does not read them as options.
_VALUE_FLAGS = ("--grid", "--theta", "--escort", "--alphas")


def _fuse_values(argv: list[str]) -> list[str]:
    out = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
        else:
            out.append(token)
            i += 1
    return out


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    argv = _fuse_values(list(argv))
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return 0 if code in (0, None) else int(code)
    try:
        return _COMMANDS[args.command](args)
    except (ToolkitError, OSError, ValueError) as exc:
        print(f"mindiv: error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
