"""Seeded Monte Carlo studies of the regression estimators.

Reproducibility contract: every replicate draws from its own Philox stream,
keyed by (seed, replicate index) through the counter words of the generator.
Results are therefore bitwise identical for a given config regardless of
execution order, chunking, or thread count. Replicates whose resampled design
is collinear are regenerated from a fresh substream (attempt counter) and the
event is counted, never silently dropped.

The env var UNIFORM_LSE_THREADS caps worker threads for replicate blocks;
when unset a small default is chosen. Thread count never changes results.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from .design import COLLINEAR_RTOL, Dataset, summarize
from .errors import CollinearDesign, MismatchedDesign
from .law import Coefficient, EstimatorLaw
from .uniform_sum import WeightedUniformSum

_BLOCK = 4096
_MAX_REGEN_ATTEMPTS = 64

# Philox counter-word domains: replicate streams vs one-off design draws.
_DOMAIN_REPLICATE = 0
_DOMAIN_DESIGN = 1


# ---------------------------------------------------------------------------
# experiment description
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Equispaced:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")

    def generate(self, n: int, rng: np.random.Generator | None) -> np.ndarray:
        k = np.arange(n, dtype=float)
        return (self.b - self.a) * k / (n - 1) + self.a


@dataclass(frozen=True)
class IidUniform:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")

    def generate(self, n: int, rng: np.random.Generator | None) -> np.ndarray:
        if rng is None:
            raise ValueError("IidUniform needs a random generator")
        return rng.uniform(self.a, self.b, n)


@dataclass(frozen=True)
class FixedDesign:
    values: tuple[float, ...]

    def generate(self, n: int, rng: np.random.Generator | None) -> np.ndarray:
        if len(self.values) != n:
            raise ValueError(f"fixed design has {len(self.values)} points, config says n={n}")
        return np.asarray(self.values, dtype=float)


XSpec = Equispaced | IidUniform | FixedDesign


@dataclass(frozen=True)
class UniformNoise:
    theta: float

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(-self.theta, self.theta, n)

    def variance(self) -> float:
        return self.theta ** 2 / 3.0


@dataclass(frozen=True)
class GaussianNoise:
    sigma_sq: float

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(0.0, math.sqrt(self.sigma_sq), n)

    def variance(self) -> float:
        return self.sigma_sq


Noise = UniformNoise | GaussianNoise


@dataclass(frozen=True)
class SimConfig:
    """One reproducible Monte Carlo experiment."""

    n: int
    x_spec: XSpec
    beta0: float
    beta1: float
    noise: Noise
    replicates: int
    seed: int
    resample_x_each_replicate: bool = False

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.n < 3:
            raise ValueError("n must be >= 3")
        var = self.noise.variance()
        if not var > 0.0:
            raise ValueError("noise variance must be positive")


@dataclass(frozen=True)
class ReplicateRecord:
    beta0_hat: float
    beta1_hat: float
    theta_sq_hat: float
    sigma_sq_hat: float
    ci_covered_beta0: bool
    ci_covered_beta1: bool


@dataclass
class ReplicateRun:
    """Column-oriented replicate results plus run provenance."""

    config: SimConfig
    level: float
    ci_method: str
    beta0_hat: np.ndarray
    beta1_hat: np.ndarray
    theta_sq_hat: np.ndarray
    sigma_sq_hat: np.ndarray
    ci_covered_beta0: np.ndarray
    ci_covered_beta1: np.ndarray
    regenerated: int
    x: np.ndarray | None  # the shared design when x is fixed across replicates

    def __len__(self) -> int:
        return self.beta0_hat.size

    def __getitem__(self, i: int) -> ReplicateRecord:
        return ReplicateRecord(
            beta0_hat=float(self.beta0_hat[i]),
            beta1_hat=float(self.beta1_hat[i]),
            theta_sq_hat=float(self.theta_sq_hat[i]),
            sigma_sq_hat=float(self.sigma_sq_hat[i]),
            ci_covered_beta0=bool(self.ci_covered_beta0[i]),
            ci_covered_beta1=bool(self.ci_covered_beta1[i]),
        )

    @property
    def records(self) -> list[ReplicateRecord]:
        return [self[i] for i in range(len(self))]


@dataclass(frozen=True)
class KsReport:
    statistic: float
    sample_size: int
    comparison: str
    reference_95: float  # the asymptotic 1.36/sqrt(N) line, for context


@dataclass(frozen=True)
class CoverageRow:
    n: int
    method: str
    coefficient: Coefficient
    level: float
    coverage: float
    mean_half_width: float
    replicates: int


@dataclass(frozen=True)
class CoverageReport:
    rows: list[CoverageRow] = field(default_factory=list)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    sup_dist_beta0: float
    sup_dist_beta1: float
    cond_beta0: float
    cond_beta1: float
    cond_joint: float


# ---------------------------------------------------------------------------
# RNG plumbing
# ---------------------------------------------------------------------------
def _master_key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(2, np.uint64)


def replicate_rng(seed: int, index: int, attempt: int = 0,
                  domain: int = _DOMAIN_REPLICATE) -> np.random.Generator:
    """Independent, reproducible stream for one replicate.

    Counter-based: the Philox counter encodes (attempt, index, domain), so
    any replicate can be regenerated in isolation and streams never overlap.
    """
    bitgen = np.random.Philox(key=_master_key(seed),
                              counter=[0, attempt, index, domain])
    return np.random.Generator(bitgen)


def _design_rng(seed: int, index: int = 0) -> np.random.Generator:
    return replicate_rng(seed, index, domain=_DOMAIN_DESIGN)


def design_x(config: SimConfig) -> np.ndarray:
    """The shared covariate vector of a fixed-x config (seed-deterministic)."""
    return config.x_spec.generate(config.n, _design_rng(config.seed))


def _resolve_threads() -> int:
    env = os.environ.get("UNIFORM_LSE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# dataset generation and vectorized fitting
# ---------------------------------------------------------------------------
def _draw_replicate(config: SimConfig, replicate_index: int):
    """(x, noise, regen_count) for one replicate, from its own stream.

    A collinear resampled design is regenerated from a fresh substream
    (attempt counter in the Philox counter words) up to a hard cap.
    """
    rng = replicate_rng(config.seed, replicate_index)
    if config.resample_x_each_replicate:
        x = config.x_spec.generate(config.n, rng)
        attempt = 0
        while _is_collinear(x):
            attempt += 1
            if attempt > _MAX_REGEN_ATTEMPTS:
                raise CollinearDesign(
                    f"replicate {replicate_index}: resampled design stayed "
                    f"collinear after {_MAX_REGEN_ATTEMPTS} regenerations"
                )
            rng = replicate_rng(config.seed, replicate_index, attempt=attempt)
            x = config.x_spec.generate(config.n, rng)
    else:
        x = design_x(config)
        attempt = 0
    eps = config.noise.draw(rng, config.n)
    return x, eps, attempt


def generate_dataset(config: SimConfig, replicate_index: int) -> Dataset:
    """Dataset of one replicate; bitwise-deterministic in (seed, index)."""
    x, eps, _ = _draw_replicate(config, replicate_index)
    y = config.beta0 + config.beta1 * x + eps
    return Dataset(x=x, y=y)


def _is_collinear(x: np.ndarray) -> bool:
    xbar = x.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    s2 = float(np.sum(x * x))
    return sxx * len(x) <= COLLINEAR_RTOL * len(x) * s2 or sxx == 0.0


def _fit_block(x_rows: np.ndarray, y_rows: np.ndarray):
    """Row-wise closed-form fits; returns (beta0, beta1, theta_sq) arrays."""
    n = x_rows.shape[1]
    xbar = x_rows.mean(axis=1, keepdims=True)
    xc = x_rows - xbar
    sxx = np.sum(xc * xc, axis=1)
    ybar = y_rows.mean(axis=1)
    beta1 = np.einsum("ri,ri->r", xc, y_rows) / sxx
    beta0 = ybar - beta1 * xbar[:, 0]
    resid = y_rows - beta0[:, None] - beta1[:, None] * x_rows
    theta_sq = 3.0 * np.sum(resid * resid, axis=1) / (n - 2)
    return beta0, beta1, theta_sq


# ---------------------------------------------------------------------------
# replicate engine
# ---------------------------------------------------------------------------
def run_replicates(config: SimConfig, level: float = 0.95,
                   ci_method: str = "exact_uniform") -> ReplicateRun:
    """Run all replicates of a config and score CI coverage along the way.

    ci_method is one of 'exact_uniform', 'exact_uniform_plugin',
    'gaussian:<sigma_sq>' or 'gaussian_plugin'; coverage flags refer to the
    true (config) coefficients at the given level.
    """
    R, n = config.replicates, config.n
    beta0 = np.empty(R)
    beta1 = np.empty(R)
    theta_sq = np.empty(R)
    regenerated = 0

    fixed_x = None if config.resample_x_each_replicate else design_x(config)

    def fill_block(r0: int, r1: int) -> int:
        regen = 0
        if fixed_x is None:
            x_rows = np.empty((r1 - r0, n))
        else:
            x_rows = np.broadcast_to(fixed_x, (r1 - r0, n))
        e_rows = np.empty((r1 - r0, n))
        for i, ridx in enumerate(range(r0, r1)):
            if fixed_x is None:
                x, eps, attempts = _draw_replicate(config, ridx)
                x_rows[i] = x
                regen += attempts
            else:
                rng = replicate_rng(config.seed, ridx)
                eps = config.noise.draw(rng, n)
            e_rows[i] = eps
        y_rows = config.beta0 + config.beta1 * x_rows + e_rows
        b0, b1, th = _fit_block(np.asarray(x_rows), y_rows)
        beta0[r0:r1] = b0
        beta1[r0:r1] = b1
        theta_sq[r0:r1] = th
        return regen

    blocks = [(r0, min(r0 + _BLOCK, R)) for r0 in range(0, R, _BLOCK)]
    threads = _resolve_threads()
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            regenerated = sum(ex.map(lambda b: fill_block(*b), blocks))
    else:
        regenerated = sum(fill_block(*b) for b in blocks)

    sigma_sq = theta_sq / 3.0
    cov0, cov1 = _coverage_flags(config, fixed_x, beta0, beta1, sigma_sq,
                                 level, ci_method)
    return ReplicateRun(
        config=config, level=level, ci_method=ci_method,
        beta0_hat=beta0, beta1_hat=beta1,
        theta_sq_hat=theta_sq, sigma_sq_hat=sigma_sq,
        ci_covered_beta0=cov0, ci_covered_beta1=cov1,
        regenerated=regenerated, x=fixed_x,
    )


def parse_ci_method(method: str) -> tuple[str, float | None]:
    """Split a method string into (kind, fixed sigma_sq or None)."""
    if method in ("exact_uniform", "exact_uniform_plugin", "gaussian_plugin"):
        return method, None
    if method.startswith("gaussian:"):
        return "gaussian", float(method.split(":", 1)[1])
    raise ValueError(f"unknown CI method {method!r}")


def _model_theta(config: SimConfig) -> float:
    """Known theta for the exact method; variance-matched under Gaussian noise."""
    if isinstance(config.noise, UniformNoise):
        return config.noise.theta
    return math.sqrt(3.0 * config.noise.variance())


def _half_widths(config: SimConfig, x: np.ndarray, sigma_sq_hat: np.ndarray,
                 level: float, method: str, coefficient: Coefficient) -> np.ndarray:
    design = summarize(x)
    kind, sigma_fixed = parse_ci_method(method)
    q_up = 0.5 * (1.0 + level)
    factor = design.S2 if coefficient == "beta0" else float(design.n)
    if kind == "exact_uniform":
        core = WeightedUniformSum(
            design.p if coefficient == "beta0" else design.p_prime,
            _model_theta(config))
        return np.full(sigma_sq_hat.shape, core.ppf(q_up) / design.d)
    if kind == "exact_uniform_plugin":
        # The exact law scales linearly in theta: one unit-theta quantile
        # serves every replicate's plug-in theta_hat.
        core = WeightedUniformSum(
            design.p if coefficient == "beta0" else design.p_prime, 1.0)
        unit_q = core.ppf(q_up) / design.d
        return np.sqrt(3.0 * sigma_sq_hat) * unit_q
    z = float(ndtri(q_up))
    if kind == "gaussian":
        return np.full(sigma_sq_hat.shape,
                       z * math.sqrt(sigma_fixed * factor / design.d))
    # gaussian_plugin
    return z * np.sqrt(sigma_sq_hat * factor / design.d)


def _coverage_flags(config, fixed_x, beta0, beta1, sigma_sq_hat, level, method):
    if fixed_x is not None:
        h0 = _half_widths(config, fixed_x, sigma_sq_hat, level, method, "beta0")
        h1 = _half_widths(config, fixed_x, sigma_sq_hat, level, method, "beta1")
        return (np.abs(beta0 - config.beta0) <= h0,
                np.abs(beta1 - config.beta1) <= h1)
    # Resampled designs need per-replicate interval widths; kept simple and
    # honest (slow for the exact method at large replicate counts).
    cov0 = np.empty(beta0.size, dtype=bool)
    cov1 = np.empty(beta1.size, dtype=bool)
    for r in range(beta0.size):
        ds = generate_dataset(config, r)
        s_hat = np.atleast_1d(sigma_sq_hat[r])
        h0 = _half_widths(config, ds.x, s_hat, level, method, "beta0")[0]
        h1 = _half_widths(config, ds.x, s_hat, level, method, "beta1")[0]
        cov0[r] = abs(beta0[r] - config.beta0) <= h0
        cov1[r] = abs(beta1[r] - config.beta1) <= h1
    return cov0, cov1


# ---------------------------------------------------------------------------
# studies
# ---------------------------------------------------------------------------
def ks_statistic(sample: np.ndarray, cdf_values: np.ndarray) -> float:
    """One-sample Kolmogorov-Smirnov statistic at the (sorted) sample points."""
    n = sample.size
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(i / n - cdf_values, cdf_values - (i - 1) / n)))


def ks_against_exact(run: ReplicateRun, law: EstimatorLaw,
                     coefficient: Coefficient) -> KsReport:
    """KS distance between simulated estimates and an exact coefficient law."""
    if run.config.resample_x_each_replicate:
        raise MismatchedDesign(
            "replicates were generated with resampled x; the exact law "
            "conditions on a fixed design"
        )
    values = run.beta0_hat if coefficient == "beta0" else run.beta1_hat
    s = np.sort(values)
    stat = ks_statistic(s, law.cdf(s))
    return KsReport(
        statistic=stat,
        sample_size=s.size,
        comparison=f"exact {coefficient} law (center={law.center:g}, n={run.config.n})",
        reference_95=1.36 / math.sqrt(s.size),
    )


def coverage_study(base_config: SimConfig, n_list: Sequence[int], level: float,
                   methods: Sequence[str]) -> CoverageReport:
    """Empirical CI coverage and mean half-width per (n, method, coefficient)."""
    rows: list[CoverageRow] = []
    for n in n_list:
        cfg = SimConfig(
            n=int(n), x_spec=base_config.x_spec, beta0=base_config.beta0,
            beta1=base_config.beta1, noise=base_config.noise,
            replicates=base_config.replicates, seed=base_config.seed,
            resample_x_each_replicate=base_config.resample_x_each_replicate,
        )
        base_run = run_replicates(cfg, level=level, ci_method=methods[0])
        for method in methods:
            if method == methods[0]:
                run = base_run
            else:
                run = _rescore(base_run, level, method)
            for coefficient in ("beta0", "beta1"):
                covered = run.ci_covered_beta0 if coefficient == "beta0" else run.ci_covered_beta1
                x = run.x if run.x is not None else None
                if x is not None:
                    h = _half_widths(cfg, x, run.sigma_sq_hat, level, method, coefficient)
                    mean_h = float(np.mean(h))
                else:
                    mean_h = float("nan")
                rows.append(CoverageRow(
                    n=int(n), method=method, coefficient=coefficient,
                    level=level, coverage=float(np.mean(covered)),
                    mean_half_width=mean_h, replicates=cfg.replicates,
                ))
    return CoverageReport(rows=rows)


def _rescore(run: ReplicateRun, level: float, method: str) -> ReplicateRun:
    """Re-derive coverage flags for another CI method on the same replicates."""
    cov0, cov1 = _coverage_flags(run.config, run.x, run.beta0_hat,
                                 run.beta1_hat, run.sigma_sq_hat, level, method)
    return ReplicateRun(
        config=run.config, level=level, ci_method=method,
        beta0_hat=run.beta0_hat, beta1_hat=run.beta1_hat,
        theta_sq_hat=run.theta_sq_hat, sigma_sq_hat=run.sigma_sq_hat,
        ci_covered_beta0=cov0, ci_covered_beta1=cov1,
        regenerated=run.regenerated, x=run.x,
    )


def convergence_study(x_family: XSpec, n_list: Sequence[int], theta: float,
                      grid_points: int = 1000, seed: int = 0) -> list[ConvergenceRow]:
    """Normal-approximation quality of both coefficient laws across n."""
    from .law import clt_diagnostics, standardized_sup_distance

    rows: list[ConvergenceRow] = []
    for idx, n in enumerate(n_list):
        if isinstance(x_family, IidUniform):
            x = x_family.generate(int(n), _design_rng(seed, index=idx))
        else:
            x = x_family.generate(int(n), None)
        design = summarize(x)
        diag = clt_diagnostics(design)
        rows.append(ConvergenceRow(
            n=int(n),
            sup_dist_beta0=standardized_sup_distance(design, theta, "beta0", grid_points),
            sup_dist_beta1=standardized_sup_distance(design, theta, "beta1", grid_points),
            cond_beta0=diag.cond_beta0,
            cond_beta1=diag.cond_beta1,
            cond_joint=diag.cond_joint,
        ))
    return rows
