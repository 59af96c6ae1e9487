"""Command-line front end: fitting, exact inference, and simulation studies.

Exit codes: 0 ok, 2 input parse error, 3 degenerate design, 4 exact mode
infeasible (without --fallback-normal), 5 bad flags. All numeric JSON output
is full round-trip precision; CSV uses 9 significant digits. Study commands
are deterministic under --seed, independent of UNIFORM_LSE_THREADS.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .design import Dataset, fit as fit_dataset, read_dataset_csv, summarize
from .errors import (
    CollinearDesign,
    DatasetFormatError,
    DegenerateSum,
    DomainError,
    ExactModeTooLarge,
    GridTooCoarse,
    MismatchedDesign,
    TooFewPoints,
)
from .law import (
    EXACT_UNIFORM,
    GAUSSIAN_ASYMPTOTIC,
    clt_diagnostics,
    estimator_law,
    exact_confidence_interval,
    exact_test,
    gaussian_confidence_interval,
    gaussian_test,
    normal_approx_law,
)
from .simulate import (
    Equispaced,
    FixedDesign,
    GaussianNoise,
    IidUniform,
    SimConfig,
    UniformNoise,
    convergence_study,
    coverage_study,
    ks_against_exact,
    run_replicates,
)
from .uniform_sum import DEFAULT_EXACT_LIMIT, WeightedUniformSum

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DEGENERATE = 3
EXIT_EXACT_MODE = 4
EXIT_BAD_FLAGS = 5


class _Parser(argparse.ArgumentParser):
    """argparse that exits with the documented bad-flags code."""

    def error(self, message):
        self.exit(EXIT_BAD_FLAGS, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# flag parsing helpers
# ---------------------------------------------------------------------------
def _parse_x_spec(text: str):
    parts = text.split(":")
    try:
        if parts[0] == "equispaced" and len(parts) == 3:
            return Equispaced(float(parts[1]), float(parts[2]))
        if parts[0] == "iid" and len(parts) == 3:
            return IidUniform(float(parts[1]), float(parts[2]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(
        f"bad x spec {text!r}: expected equispaced:A:B or iid:A:B"
    )


def _parse_noise(text: str):
    parts = text.split(":")
    try:
        if parts[0] == "uniform" and len(parts) == 2:
            return UniformNoise(float(parts[1]))
        if parts[0] == "gaussian" and len(parts) == 2:
            return GaussianNoise(float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(
        f"bad noise spec {text!r}: expected uniform:THETA or gaussian:SIGMA_SQ"
    )


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad comma-separated number list {text!r}")


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad comma-separated integer list {text!r}")


def _method_internal(name: str) -> str:
    return {"exact-uniform": EXACT_UNIFORM, "gaussian": GAUSSIAN_ASYMPTOTIC}[name]


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------
def _fmt9(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".9g")
    return str(v)


def _emit(payload: dict, table: tuple[list[str], list[list]] | None,
          fmt: str, out_path: str | None) -> None:
    """Write JSON (payload) or CSV (table) to stdout or a file."""
    if fmt == "json":
        text = json.dumps(payload, indent=2, allow_nan=True) + "\n"
    else:
        if table is None:
            header = list(payload.keys())
            rows = [[payload[k] for k in header]]
        else:
            header, rows = table
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt9(v) for v in row])
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _plot_lines(path: str, x, series: dict[str, np.ndarray], xlabel: str,
                ylabel: str, title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, ys in series.items():
        style = "--" if "normal" in label else "-"
        ax.plot(x, ys, style, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _fit_fields(dataset: Dataset) -> tuple[dict, object, object]:
    design = summarize(dataset.x)
    result = fit_dataset(dataset)
    fields = {
        "n": dataset.n,
        "s1": design.S1,
        "s2": design.S2,
        "d": design.d,
        "beta0_hat": result.beta0_hat,
        "beta1_hat": result.beta1_hat,
        "theta_sq_hat": result.theta_sq_hat,
        "sigma_sq_hat": result.sigma_sq_hat,
    }
    return fields, design, result


def _resolve_theta(args, result) -> tuple[float, str]:
    if args.theta is not None:
        if getattr(args, "estimate_theta", False):
            raise DomainError("--theta and --estimate-theta are mutually exclusive")
        return args.theta, "known"
    return math.sqrt(result.theta_sq_hat), "plugin_theta_hat"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------
def _cmd_fit(args) -> int:
    dataset = read_dataset_csv(args.csv)
    fields, _, _ = _fit_fields(dataset)
    payload = {"schema_version": SCHEMA_VERSION, "command": "fit", **fields}
    _emit(payload, None, args.format, args.output)
    return EXIT_OK


def _cmd_density(args) -> int:
    if (args.weights is None) == (args.csv is None):
        raise DomainError("density needs exactly one of --weights or --csv")
    if args.weights is not None:
        theta = args.theta if args.theta is not None else 1.0
        core = WeightedUniformSum(args.weights, theta, limit=args.exact_limit)
        center, scale = 0.0, 1.0
        mean, variance = 0.0, core.variance()
        meta = {"mode": "weights", "theta": theta, "m": core.m,
                "half_support": core.half_support}
    else:
        dataset = read_dataset_csv(args.csv)
        fields, design, result = _fit_fields(dataset)
        theta, theta_source = _resolve_theta(args, result)
        center = args.center
        if center is None:
            center = result.beta0_hat if args.coefficient == "beta0" else result.beta1_hat
        try:
            law = estimator_law(design, theta, args.coefficient, center=center,
                                limit=args.exact_limit)
        except ExactModeTooLarge:
            if not args.fallback_normal:
                raise
            law = None
        mean, variance = normal_approx_law(design, theta, args.coefficient, center)
        if law is None:
            core, scale = None, None
            half = 4.0 * math.sqrt(variance)
            meta = {"mode": "normal_fallback", "coefficient": args.coefficient,
                    "theta": theta, "theta_source": theta_source, **fields}
        else:
            core, scale = law.core, law.scale
            meta = {"mode": "estimator", "coefficient": args.coefficient,
                    "theta": theta, "theta_source": theta_source,
                    "m": core.m, **fields}

    if core is not None:
        half = scale * core.half_support
    lo = args.t_min if args.t_min is not None else center - 1.02 * half
    hi = args.t_max if args.t_max is not None else center + 1.02 * half
    grid = np.linspace(lo, hi, args.points)
    if core is not None:
        d = 1.0 / scale
        pdf = d * core.pdf(d * (grid - center))
    else:
        pdf = np.exp(-0.5 * (grid - mean) ** 2 / variance) / math.sqrt(2 * math.pi * variance)
    columns = ["t", "pdf"]
    cols = [grid, pdf]
    if args.overlay_normal:
        normal = np.exp(-0.5 * (grid - mean) ** 2 / variance) / math.sqrt(2 * math.pi * variance)
        columns.append("normal_pdf")
        cols.append(normal)
    rows = [list(map(float, r)) for r in zip(*cols)]
    payload = {"schema_version": SCHEMA_VERSION, "command": "density", **meta,
               "columns": columns, "rows": rows}
    if args.plot:
        series = {"exact" if core is not None else "normal": pdf}
        if args.overlay_normal:
            series["normal approximation"] = cols[-1]
        _plot_lines(args.plot, grid, series, "value", "density", "density")
    _emit(payload, (columns, rows), args.format, args.output)
    return EXIT_OK


def _cmd_ci_or_test(args, want_test: bool) -> int:
    if args.theta is not None and args.sigma_sq is not None:
        raise DomainError("--theta and --sigma-sq are mutually exclusive")
    dataset = read_dataset_csv(args.csv)
    fields, design, result = _fit_fields(dataset)
    theta, theta_source = _resolve_theta(args, result)
    method = _method_internal(args.method)
    sigma_sq = args.sigma_sq
    if sigma_sq is None:
        sigma_sq = theta ** 2 / 3.0
    coefficients = ["beta0", "beta1"] if args.coefficient == "both" else [args.coefficient]
    entries = []
    for coefficient in coefficients:
        if want_test:
            if method == EXACT_UNIFORM:
                r = exact_test(result, design, theta, coefficient, args.alpha,
                               limit=args.exact_limit)
            else:
                r = gaussian_test(result, design, sigma_sq, coefficient, args.alpha)
            entries.append({
                "coefficient": coefficient, "statistic": r.statistic,
                "critical_value": r.critical_value, "p_value": r.p_value,
                "reject": r.reject,
            })
        else:
            if method == EXACT_UNIFORM:
                r = exact_confidence_interval(result, design, theta, coefficient,
                                              args.level, limit=args.exact_limit)
            else:
                r = gaussian_confidence_interval(result, design, sigma_sq,
                                                 coefficient, args.level)
            entries.append({
                "coefficient": coefficient, "lo": r.lo, "hi": r.hi,
                "half_width": r.half_width,
            })
    key = "tests" if want_test else "intervals"
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "test" if want_test else "ci",
        **fields,
        "method": method,
        "theta_source": theta_source,
        ("alpha" if want_test else "level"): args.alpha if want_test else args.level,
        key: entries,
    }
    header = ["coefficient"] + [k for k in entries[0] if k != "coefficient"]
    table_rows = [[e[k] for k in header] for e in entries]
    _emit(payload, (header, table_rows), args.format, args.output)
    return EXIT_OK


def _build_config(args) -> SimConfig:
    if args.x_csv is not None:
        x = read_dataset_csv(args.x_csv).x
        spec = FixedDesign(tuple(float(v) for v in x))
        n = len(x)
    else:
        spec = args.x_spec
        n = args.n
    return SimConfig(n=n, x_spec=spec, beta0=args.beta0, beta1=args.beta1,
                     noise=args.noise, replicates=args.replicates, seed=args.seed,
                     resample_x_each_replicate=args.resample_x)


def _cmd_simulate(args) -> int:
    config = _build_config(args)
    run = run_replicates(config, level=args.level, ci_method=args.ci_method)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "seed": config.seed,
        "n": config.n,
        "replicates": config.replicates,
        "level": args.level,
        "method": args.ci_method,
        "regenerated": run.regenerated,
        "mean_beta0_hat": float(np.mean(run.beta0_hat)),
        "mean_beta1_hat": float(np.mean(run.beta1_hat)),
        "var_beta0_hat": float(np.var(run.beta0_hat)),
        "var_beta1_hat": float(np.var(run.beta1_hat)),
        "mean_theta_sq_hat": float(np.mean(run.theta_sq_hat)),
        "mean_sigma_sq_hat": float(np.mean(run.sigma_sq_hat)),
        "coverage_beta0": float(np.mean(run.ci_covered_beta0)),
        "coverage_beta1": float(np.mean(run.ci_covered_beta1)),
        "corr_beta0_beta1": float(np.corrcoef(run.beta0_hat, run.beta1_hat)[0, 1]),
    }
    if run.x is not None and isinstance(config.noise, UniformNoise):
        design = summarize(run.x)
        if design.n <= args.exact_limit:
            for coefficient, center in (("beta0", config.beta0), ("beta1", config.beta1)):
                law = estimator_law(design, config.noise.theta, coefficient,
                                    center=center, limit=args.exact_limit)
                ks = ks_against_exact(run, law, coefficient)
                summary[f"ks_{coefficient}"] = ks.statistic
                summary["ks_reference_95"] = ks.reference_95
    header = ["replicate", "beta0_hat", "beta1_hat", "theta_sq_hat",
              "sigma_sq_hat", "ci_covered_beta0", "ci_covered_beta1"]
    rows = [
        [i, run.beta0_hat[i], run.beta1_hat[i], run.theta_sq_hat[i],
         run.sigma_sq_hat[i], bool(run.ci_covered_beta0[i]), bool(run.ci_covered_beta1[i])]
        for i in range(len(run))
    ]
    if args.plot:
        est = run.beta1_hat
        hist, edges = np.histogram(est, bins=50, density=True)
        centers = 0.5 * (edges[1:] + edges[:-1])
        series = {"simulated beta1_hat": hist}
        if run.x is not None and isinstance(config.noise, UniformNoise) and config.n <= args.exact_limit:
            law = estimator_law(summarize(run.x), config.noise.theta, "beta1",
                                center=config.beta1, limit=args.exact_limit)
            series["exact law"] = law.pdf(centers)
        _plot_lines(args.plot, centers, series, "beta1_hat", "density",
                    "sampling distribution")
    _emit(summary, (header, rows), args.format, args.output)
    return EXIT_OK


def _cmd_coverage(args) -> int:
    config = _build_config(args)
    report = coverage_study(config, args.n_list, args.level, args.methods)
    header = ["n", "method", "coefficient", "level", "coverage",
              "mean_half_width", "replicates"]
    rows = [[r.n, r.method, r.coefficient, r.level, r.coverage,
             r.mean_half_width, r.replicates] for r in report.rows]
    payload = {"schema_version": SCHEMA_VERSION, "command": "coverage",
               "seed": config.seed, "level": args.level,
               "replicates": config.replicates,
               "rows": [dict(zip(header, row)) for row in rows]}
    if args.plot:
        ns = sorted({r.n for r in report.rows})
        series = {}
        for method in args.methods:
            for coefficient in ("beta0", "beta1"):
                ys = [next(r.coverage for r in report.rows
                           if r.n == n and r.method == method and r.coefficient == coefficient)
                      for n in ns]
                series[f"{method} {coefficient}"] = np.array(ys)
        _plot_lines(args.plot, np.array(ns, dtype=float), series, "n",
                    "empirical coverage", f"CI coverage at level {args.level}")
    _emit(payload, (header, rows), args.format, args.output)
    return EXIT_OK


def _cmd_convergence(args) -> int:
    rows = convergence_study(args.x_spec, args.n_list, args.theta, seed=args.seed)
    header = ["n", "sup_dist_beta0", "sup_dist_beta1", "cond_beta0",
              "cond_beta1", "cond_joint"]
    table = [[r.n, r.sup_dist_beta0, r.sup_dist_beta1, r.cond_beta0,
              r.cond_beta1, r.cond_joint] for r in rows]
    payload = {"schema_version": SCHEMA_VERSION, "command": "convergence",
               "theta": args.theta,
               "rows": [dict(zip(header, row)) for row in table]}
    if args.plot:
        ns = np.array([r.n for r in rows], dtype=float)
        _plot_lines(args.plot, ns,
                    {"sup distance beta0": np.array([r.sup_dist_beta0 for r in rows]),
                     "sup distance beta1": np.array([r.sup_dist_beta1 for r in rows]),
                     "cond beta0": np.array([r.cond_beta0 for r in rows]),
                     "cond beta1": np.array([r.cond_beta1 for r in rows])},
                    "n", "distance / condition", "normal-approximation quality")
    _emit(payload, (header, table), args.format, args.output)
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    dataset = read_dataset_csv(args.csv)
    fields, design, _ = _fit_fields(dataset)
    diag = clt_diagnostics(design)
    m0 = int(np.count_nonzero(design.p))
    m1 = int(np.count_nonzero(design.p_prime))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "diagnose",
        **fields,
        "cond_beta0": diag.cond_beta0,
        "cond_beta1": diag.cond_beta1,
        "cond_joint": diag.cond_joint,
        "m_beta0": m0,
        "m_beta1": m1,
        "exact_mode_feasible": max(m0, m1) <= args.exact_limit,
        "exact_limit": args.exact_limit,
    }
    _emit(payload, None, args.format, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser construction
# ---------------------------------------------------------------------------
def _add_common(p: _Parser, plot: bool = True) -> None:
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", default=None, help="write to file instead of stdout")
    p.add_argument("--exact-limit", type=int, default=DEFAULT_EXACT_LIMIT)
    if plot:
        p.add_argument("--plot", default=None,
                       help="write a vector-graphics plot (svg/pdf) as a side channel")


def _add_sim_flags(p: _Parser) -> None:
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--x-spec", type=_parse_x_spec, default=IidUniform(-10.0, 10.0),
                   metavar="SPEC", help="equispaced:A:B or iid:A:B")
    p.add_argument("--x-csv", default=None, help="fixed design from a CSV x column")
    p.add_argument("--beta0", type=float, default=7.0)
    p.add_argument("--beta1", type=float, default=4.0)
    p.add_argument("--noise", type=_parse_noise, default=UniformNoise(3.0),
                   metavar="SPEC", help="uniform:THETA or gaussian:SIGMA_SQ")
    p.add_argument("--replicates", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resample-x", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="uniform-lse",
                     description="Exact inference for simple linear regression "
                                 "with uniform errors")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("fit", help="least-squares fit plus theta^2 estimate")
    p.add_argument("csv")
    _add_common(p, plot=False)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("density", help="exact density of a coefficient or raw weighted sum")
    p.add_argument("--csv", default=None)
    p.add_argument("--coefficient", choices=["beta0", "beta1"], default="beta1")
    p.add_argument("--weights", type=_parse_floats, default=None, metavar="W1,W2,...")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--estimate-theta", action="store_true")
    p.add_argument("--center", type=float, default=None)
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--overlay-normal", action="store_true")
    p.add_argument("--fallback-normal", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_density)

    for name, want_test in (("ci", False), ("test", True)):
        p = sub.add_parser(name, help="confidence intervals" if name == "ci"
                           else "two-sided coefficient tests")
        p.add_argument("csv")
        p.add_argument("--coefficient", choices=["beta0", "beta1", "both"],
                       default="both")
        p.add_argument("--method", choices=["exact-uniform", "gaussian"],
                       default="exact-uniform")
        p.add_argument("--theta", type=float, default=None)
        p.add_argument("--estimate-theta", action="store_true")
        p.add_argument("--sigma-sq", type=float, default=None)
        if want_test:
            p.add_argument("--alpha", type=float, default=0.05)
        else:
            p.add_argument("--level", type=float, default=0.95)
        _add_common(p, plot=False)
        p.set_defaults(func=lambda a, w=want_test: _cmd_ci_or_test(a, w))

    p = sub.add_parser("simulate", help="replicate study of the estimators")
    _add_sim_flags(p)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--ci-method", default="exact_uniform",
                   help="exact_uniform | exact_uniform_plugin | gaussian:S2 | gaussian_plugin")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("coverage", help="CI coverage across sample sizes and methods")
    _add_sim_flags(p)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--n-list", type=_parse_ints, default=[5, 10, 20], metavar="N1,N2,...")
    p.add_argument("--methods", type=lambda s: s.split(","),
                   default=["exact_uniform", "gaussian_plugin"],
                   metavar="M1,M2,...")
    _add_common(p)
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("convergence", help="normal-approximation quality across n")
    p.add_argument("--x-spec", type=_parse_x_spec, default=Equispaced(-10.0, 10.0))
    p.add_argument("--n-list", type=_parse_ints, default=[5, 8, 12, 16, 20])
    p.add_argument("--theta", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=_cmd_convergence)

    p = sub.add_parser("diagnose", help="design summaries and CLT condition quantities")
    p.add_argument("csv")
    _add_common(p, plot=False)
    p.set_defaults(func=_cmd_diagnose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DatasetFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CollinearDesign, TooFewPoints, DegenerateSum) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ExactModeTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXACT_MODE
    except (DomainError, MismatchedDesign, GridTooCoarse, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_FLAGS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
