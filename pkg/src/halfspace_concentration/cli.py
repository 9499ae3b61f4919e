"""Command-line driver: ``estimate``, ``converge``, ``synth`` and ``analytic``.

Exit codes: 0 success, 2 bad flags, 3 data problems, 4 unsupported analytic case.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import Diagonal, Full, GaussianSpec, Spherical, gii_lower_bound, optimal_halfspace
from .core import (ConcentrationProblem, Dataset, DomainError, LpMetric, UnsupportedStructureError,
                   lp_norm)
from .data import (DataFormatError, load_cifar10, load_csv, load_gauss_bin, load_idx, sample_gaussian,
                   save_gauss_bin)
from .evaluation import convergence_sweep, required_sample_size, run_trials, split, train_count
from .search import DEFAULT_EXPONENTS, SearchConfig

log = logging.getLogger("halfspace_concentration")

TOOL = "halfspace-concentration"
EXIT_FLAGS, EXIT_DATA, EXIT_UNSUPPORTED = 2, 3, 4


class DataError(Exception):
    pass


# ---------------------------------------------------------------- flag parsing

def exact_number(text: str) -> Fraction:
    """Decimal or fraction literal such as ``0.3`` or ``8/255``, parsed exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}")


def metric_flag(text: str) -> LpMetric:
    try:
        return LpMetric.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def int_list(text: str) -> list:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty integer list")
    return vals


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _read_vector(path: Path) -> np.ndarray:
    if path.suffix == ".npy":
        return np.load(path).astype(float).ravel()
    return np.loadtxt(path, delimiter=",", ndmin=1).astype(float).ravel()


def parse_cov(text: str, dim: int | None):
    """``spherical:<var>``, ``diag:<csv values or file>``, ``full:<csv or .npy file>``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if not arg:
        raise ValueError(f"covariance argument {text!r} needs a value after ':'")
    if kind == "spherical":
        return Spherical(float(Fraction(arg)))
    if kind == "diag":
        path = Path(arg)
        vals = _read_vector(path) if path.exists() else np.array([float(Fraction(t)) for t in arg.split(",")])
        return Diagonal(vals)
    if kind == "full":
        path = Path(arg)
        if not path.exists():
            raise ValueError(f"covariance file {arg} not found")
        mat = np.load(path) if path.suffix == ".npy" else np.loadtxt(path, delimiter=",", ndmin=2)
        return Full(mat)
    raise ValueError(f"unknown covariance kind {kind!r} (spherical, diag or full)")


def cov_dim(cov) -> int | None:
    if isinstance(cov, Diagonal):
        return cov.variances.size
    if isinstance(cov, Full):
        return cov.matrix.shape[0]
    return None


def build_spec(cov_text: str, mean_text: str, dim: int | None) -> GaussianSpec:
    cov = parse_cov(cov_text, dim)
    n = cov_dim(cov)
    if n is not None and dim is not None and n != dim:
        raise ValueError(f"covariance has dimension {n} but --dim is {dim}")
    n = n or dim
    if mean_text in ("zero", "0", None):
        if n is None:
            raise ValueError("dimension unknown: pass --dim")
        theta = np.zeros(n)
    else:
        path = Path(mean_text)
        theta = _read_vector(path) if path.exists() else np.array(
            [float(Fraction(t)) for t in mean_text.split(",")])
        if n is not None and theta.size != n:
            raise ValueError(f"mean has length {theta.size}, expected {n}")
    return GaussianSpec(theta, cov)


# ---------------------------------------------------------------- data

LOADERS = {
    "idx": lambda paths, args: _single(load_idx, paths),
    "cifar": lambda paths, args: load_cifar10(paths),
    "csv": lambda paths, args: _single(load_csv, paths, args.csv_header),
    "gauss-bin": lambda paths, args: _single(load_gauss_bin, paths),
}


def _single(loader, paths, *extra):
    if len(paths) != 1:
        raise DataError("this format takes exactly one --data file")
    return loader(paths[0], *extra)


def load_data(args) -> Dataset:
    try:
        return LOADERS[args.format](args.data, args)
    except (OSError, DataFormatError, ValueError) as exc:
        raise DataError(str(exc)) from exc


# ---------------------------------------------------------------- commands

def _problem(args) -> ConcentrationProblem:
    return ConcentrationProblem(float(args.alpha), float(args.eps), args.metric)


def _config(args) -> SearchConfig:
    return SearchConfig(_problem(args), tuple(args.exponents), not args.no_axis_limit)


def _flags(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        if isinstance(v, (Fraction, LpMetric)):
            v = str(v)
        elif isinstance(v, Path):
            v = str(v)
        out[k] = v
    return out


def _report_paths(out: Path):
    if out.suffix == ".json":
        return out.with_suffix(".txt"), out
    return out, out.with_suffix(".json")


def _fmt_pm(mean, std):
    return f"{100 * mean:.2f} ± {100 * std:.2f}"


def cmd_estimate(args) -> int:
    data = load_data(args)
    cfg = _config(args)
    metric = cfg.problem.metric
    log.info("estimating on %d x %d samples", data.m, data.n)
    report = run_trials(data, cfg, args.trials, args.seed, args.split)

    trials = []
    for t, e in enumerate(report.estimates):
        w = e.half_space.w
        trials.append({
            "trial": t,
            "seed": e.seed,
            "train_risk": e.train_risk,
            "train_adv_risk": e.train_adv_risk,
            "test_risk": e.test_risk,
            "test_adv_risk": e.test_adv_risk,
            "b": e.half_space.b,
            "component": e.component,
            "exponent": e.exponent,
            "sign": e.sign,
            "w_nnz": int(np.count_nonzero(np.abs(w) > 1e-12)),
            "w_l1": float(lp_norm(w, 1)),
            "w_linf": float(lp_norm(w, "inf")),
            "w_dual_norm": float(metric.dual_norm(w)),
            "w_argmax": int(np.argmax(np.abs(w))),
            "w": w.tolist(),
        })
    n_train = train_count(data.m, args.split)
    advisory = required_sample_size(max(data.n, 2), args.delta, args.c1)
    summary = {
        "mean_test_risk": report.mean_test_risk,
        "std_test_risk": report.std_test_risk,
        "mean_test_adv_risk": report.mean_test_adv_risk,
        "std_test_adv_risk": report.std_test_adv_risk,
        "intrinsic_robustness_lower_bound": 1.0 - report.mean_test_adv_risk,
    }
    doc = {
        "tool": TOOL,
        "version": __version__,
        "command": "estimate",
        "flags": _flags(args),
        "problem": {"alpha": cfg.problem.alpha, "epsilon": cfg.problem.epsilon,
                    "epsilon_literal": str(args.eps), "metric": metric.name},
        "dataset": {"source": data.source, "m": data.m, "n": data.n},
        "advisory": {"delta": args.delta, "c1": args.c1, "required_samples": advisory,
                     "train_samples": n_train, "sufficient": n_train >= advisory},
        "trials": trials,
        "summary": summary,
    }

    text_path, json_path = _report_paths(Path(args.out))
    lines = [f"tool = {TOOL} {__version__}", "command = estimate"]
    lines += [f"flag.{k} = {v}" for k, v in doc["flags"].items()]
    lines += [f"dataset.m = {data.m}", f"dataset.n = {data.n}",
              f"problem = alpha={cfg.problem.alpha} eps={args.eps} metric={metric.name}"]
    for tr in trials:
        fields = " ".join(f"{k}={tr[k]}" for k in tr if k not in ("trial", "w"))
        lines.append(f"trial.{tr['trial']} = {fields}")
    lines += [
        f"test_risk_pct = {_fmt_pm(report.mean_test_risk, report.std_test_risk)}",
        f"test_adv_risk_pct = {_fmt_pm(report.mean_test_adv_risk, report.std_test_adv_risk)}",
        f"intrinsic_robustness_pct = {100 * summary['intrinsic_robustness_lower_bound']:.2f}",
        f"advisory.required_samples = {advisory} (delta={args.delta}, c1={args.c1}, train={n_train})",
    ]
    text_path.write_text("\n".join(lines) + "\n")
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

    if not args.no_figures:
        from .plotting import plot_margins
        e = report.estimates[0]
        _, test = split(data, args.split, e.seed)
        margins = e.half_space.margin(test.samples) / metric.dual_norm(e.half_space.w)
        plot_margins(margins, cfg.problem.epsilon, text_path.with_suffix(".png"),
                     title=f"alpha={cfg.problem.alpha:g} eps={args.eps} {metric.name}")
    print(f"test risk {_fmt_pm(report.mean_test_risk, report.std_test_risk)}%  "
          f"test adv risk {_fmt_pm(report.mean_test_adv_risk, report.std_test_adv_risk)}%  -> {text_path}")
    return 0


def _analytic_for(args, data: Dataset, problem: ConcentrationProblem):
    spec = None
    try:
        if args.cov:
            spec = build_spec(args.cov, args.mean, data.n)
        elif args.format == "gauss-bin":
            side = Path(str(args.data[0]) + ".json")
            if side.exists():
                meta = json.loads(side.read_text())
                spec = build_spec(meta["cov"], meta["mean"], meta["dim"])
        if spec is None:
            return None
        return gii_lower_bound(spec, problem.alpha, problem.epsilon, problem.metric)
    except (UnsupportedStructureError, DomainError):
        return None
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot build the analytic reference: {exc}") from exc


def cmd_converge(args) -> int:
    data = load_data(args)
    cfg = _config(args)
    sizes = sorted(set(args.sizes))
    if sizes[-1] + args.test_size > data.m:
        raise DataError(f"train size {sizes[-1]} + test size {args.test_size} exceeds the "
                        f"{data.m} available samples")
    analytic = _analytic_for(args, data, cfg.problem)
    points = convergence_sweep(data, cfg, sizes, args.test_size, args.trials, args.seed)
    out = Path(args.out)
    header = ["train_size", "mean_adv_risk", "std_adv_risk", "trials"]
    if analytic is not None:
        header.append("analytic")
    with open(out, "w", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(header)
        for p in points:
            row = [p.train_size, repr(p.mean_test_adv_risk), repr(p.std_test_adv_risk), p.trials]
            if analytic is not None:
                row.append(repr(analytic))
            wr.writerow(row)
    if not args.no_figures:
        from .plotting import plot_convergence
        plot_convergence(points, out.with_suffix(".png"), alpha=cfg.problem.alpha, analytic=analytic,
                         title=f"alpha={cfg.problem.alpha:g} eps={args.eps} {cfg.problem.metric.name}")
    print(f"{len(points)} points -> {out}")
    return 0


def cmd_synth(args) -> int:
    try:
        spec = build_spec(args.cov, args.mean, args.dim)
    except ValueError as exc:
        args.parser.error(f"invalid covariance/mean: {exc}")
    if spec.n != args.dim:
        args.parser.error(f"covariance dimension {spec.n} does not match --dim {args.dim}")
    data = sample_gaussian(spec, args.n, args.seed)
    out = Path(args.out)
    save_gauss_bin(out, data)
    meta = {"tool": TOOL, "version": __version__, "dim": args.dim, "n": args.n,
            "cov": args.cov, "mean": args.mean, "seed": args.seed}
    Path(str(out) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"{args.n} x {args.dim} samples -> {out}")
    return 0


def cmd_analytic(args) -> int:
    try:
        spec = build_spec(args.cov, args.mean, args.dim)
    except ValueError as exc:
        args.parser.error(f"invalid covariance/mean: {exc}")
    alpha, eps, metric = float(args.alpha), float(args.eps), args.metric
    try:
        bound = gii_lower_bound(spec, alpha, eps, metric)
    except UnsupportedStructureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED if metric.p < 2 else EXIT_FLAGS
    fields = [f"lower_bound={bound:.6f}", f"alpha={alpha:g}", f"eps={args.eps}", f"metric={metric.name}"]
    try:
        h = optimal_halfspace(spec, alpha, metric)
    except UnsupportedStructureError:
        h = None
    if h is not None:
        nz = np.flatnonzero(h.w)
        if nz.size == 1:
            fields.append(f"optimal_w=e{nz[0]}" if h.w[nz[0]] > 0 else f"optimal_w=-e{nz[0]}")
        else:
            fields.append("optimal_w=" + ",".join(f"{v:.6g}" for v in h.w))
        fields.append(f"optimal_b={h.b:.6f}")
    print(" ".join(fields))
    return 0


# ---------------------------------------------------------------- parser

def _add_problem_flags(p):
    p.add_argument("--data", nargs="+", required=True, help="input file(s); cifar accepts several")
    p.add_argument("--format", choices=sorted(LOADERS), required=True)
    p.add_argument("--csv-header", action="store_true", help="skip the first CSV line")
    p.add_argument("--metric", type=metric_flag, default=LpMetric("inf"), help="l1, l2, l4, linf, ...")
    p.add_argument("--alpha", type=exact_number, required=True)
    p.add_argument("--eps", type=exact_number, required=True, help="e.g. 0.1 or 8/255")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exponents", type=int_list, default=list(DEFAULT_EXPONENTS))
    p.add_argument("--no-axis-limit", action="store_true", help="drop the signed-axis candidate")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsconc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="repeated train/test concentration estimate")
    _add_problem_flags(p)
    p.add_argument("--trials", type=positive_int, default=5)
    p.add_argument("--split", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.05, help="sample-size advisory tolerance")
    p.add_argument("--c1", type=float, default=1.0, help="sample-size advisory constant")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("converge", help="test adversarial risk against training size (CSV)")
    _add_problem_flags(p)
    p.add_argument("--sizes", type=int_list, required=True)
    p.add_argument("--test-size", type=positive_int, default=30000)
    p.add_argument("--trials", type=positive_int, default=5)
    p.add_argument("--cov", default=None, help="known Gaussian covariance for the analytic column")
    p.add_argument("--mean", default="zero")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("synth", help="sample a Gaussian dataset in gauss-bin format")
    p.add_argument("--dim", type=positive_int, required=True)
    p.add_argument("--n", type=positive_int, required=True)
    p.add_argument("--cov", default="spherical:1.0")
    p.add_argument("--mean", default="zero")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth, parser=p)

    p = sub.add_parser("analytic", help="Gaussian isoperimetric lower bound")
    p.add_argument("--alpha", type=exact_number, required=True)
    p.add_argument("--eps", type=exact_number, required=True)
    p.add_argument("--metric", type=metric_flag, default=LpMetric("inf"))
    p.add_argument("--cov", default="spherical:1.0")
    p.add_argument("--mean", default="zero")
    p.add_argument("--dim", type=positive_int, default=None)
    p.set_defaults(func=cmd_analytic, parser=p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if (args.command == "analytic" and args.dim is None and args.cov.startswith("spherical")
            and args.mean in ("zero", "0")):
        args.dim = 1
    if args.command in ("estimate", "converge"):
        try:
            _problem(args)
            _config(args)
        except (DomainError, ValueError) as exc:
            parser.error(str(exc))
        if args.command == "estimate" and not 0 < args.split < 1:
            parser.error("--split must lie in (0, 1)")
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
