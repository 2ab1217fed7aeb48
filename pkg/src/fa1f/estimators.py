"""Front-statistics estimators: velocity, CLT, invariant measure, tails.

All estimators are plain folds over ensembles of independent runs; the
per-run quantities are i.i.d., so standard errors cluster by run.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .dynamics import FrontEnsemble, ModelParams, RecordingPlan, WindowPolicy, \
    clocks_for, evolve_finite_volume
from .lattice import SpinConfig, distance_to_zero


# ---------------------------------------------------------------------------
# pattern measures


@dataclass
class EmpiricalPatternMeasure:
    """Counts of front-anchored patterns on sites 0..width behind the front."""

    width: int
    counts: np.ndarray
    n_samples: int

    @classmethod
    def from_patterns(cls, rows) -> "EmpiricalPatternMeasure":
        rows = np.asarray(rows, dtype=np.uint8)
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise ValueError("need a non-empty (n, width+1) pattern array")
        if np.any(rows[:, 0] != 0):
            raise ValueError("front-anchored patterns must have an empty site 0")
        width = rows.shape[1] - 1
        weights = (1 << np.arange(rows.shape[1], dtype=np.int64))
        codes = rows.astype(np.int64) @ weights
        counts = np.bincount(codes, minlength=1 << (width + 1))
        return cls(width=width, counts=counts, n_samples=rows.shape[0])

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n_samples

    def bit_zero_frequency(self, k: int) -> float:
        """Empirical probability that site k behind the front is empty."""
        if not 0 <= k <= self.width:
            raise ValueError("site offset outside the pattern window")
        codes = np.flatnonzero(self.counts)
        occupied = ((codes >> k) & 1).astype(bool)
        return float(self.counts[codes[~occupied]].sum() / self.n_samples)


def pool_patterns(ensemble: FrontEnsemble, width: int, times=None) -> EmpiricalPatternMeasure:
    """Pool one pattern per run per selected probe time (i.i.d. across runs)."""
    if ensemble.probe_times.size == 0:
        raise ValueError("ensemble carries no probe snapshots")
    if times is None:
        sel = np.arange(ensemble.probe_times.size)
    else:
        sel = np.flatnonzero(np.isin(ensemble.probe_times, np.asarray(times, dtype=float)))
        if sel.size != np.asarray(times).size:
            raise ValueError("some requested probe times were not recorded")
    if width + 1 > ensemble.probe_patterns.shape[2]:
        raise ValueError("snapshots are narrower than the requested width")
    rows = ensemble.probe_patterns[:, sel, :width + 1].reshape(-1, width + 1)
    return EmpiricalPatternMeasure.from_patterns(rows)


def tv_distance(m1: EmpiricalPatternMeasure, m2: EmpiricalPatternMeasure) -> float:
    """Total variation distance between two empirical pattern measures."""
    if m1.width != m2.width:
        raise ValueError("pattern widths differ")
    return 0.5 * float(np.abs(m1.frequencies - m2.frequencies).sum())


def tv_sampling_error(m1: EmpiricalPatternMeasure, m2: EmpiricalPatternMeasure) -> float:
    """Expected TV between the two empirical measures if the true laws agreed.

    Gaussian approximation: each cell difference has standard deviation
    sqrt(f (1-f) (1/n1 + 1/n2)) under the pooled frequency f, and the
    expected absolute value of a centered normal is sqrt(2/pi) sigma.
    """
    if m1.width != m2.width:
        raise ValueError("pattern widths differ")
    pooled = (m1.counts + m2.counts) / (m1.n_samples + m2.n_samples)
    scale = 1.0 / m1.n_samples + 1.0 / m2.n_samples
    sigmas = np.sqrt(pooled * (1.0 - pooled) * scale)
    return 0.5 * math.sqrt(2.0 / math.pi) * float(sigmas.sum())


def zero_density(patterns: EmpiricalPatternMeasure, k: int) -> float:
    """Estimate of the invariant probability that site k behind the front is empty."""
    return patterns.bit_zero_frequency(k)


# ---------------------------------------------------------------------------
# velocity and CLT


def velocity_estimate(final_positions, t: float):
    """Sample mean and standard error of X(t)/t across paths."""
    xs = np.asarray(final_positions, dtype=np.float64)
    if xs.size < 2:
        raise ValueError("need at least two paths for a velocity standard error")
    v = xs / t
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


@dataclass
class VelocityFormulaCheck:
    v_hat: float
    v_stderr: float
    nu1_hat: float
    formula_value: float
    residual: float
    residual_stderr: float

    @property
    def within(self) -> float:
        """Residual size in combined standard errors."""
        return abs(self.residual) / self.residual_stderr


def velocity_formula_check(ensemble: FrontEnsemble, params: ModelParams,
                           burn_in: float = None) -> VelocityFormulaCheck:
    """Consistency of X(t)/t with p * nu[site 1 empty] - q.

    Per-run residuals keep the correlation between the two estimates, so
    the combined standard error is the plain across-run one.
    """
    t = ensemble.t_end
    if burn_in is None:
        burn_in = t / 2
    sel = np.flatnonzero(ensemble.probe_times >= burn_in)
    if sel.size == 0:
        raise ValueError("no probe times past the burn-in")
    v_r = ensemble.final_positions / t
    nu_r = (ensemble.probe_patterns[:, sel, 1] == 0).mean(axis=1)
    residual_r = v_r - (params.p * nu_r - params.q)
    n = residual_r.size
    return VelocityFormulaCheck(
        v_hat=float(v_r.mean()),
        v_stderr=float(v_r.std(ddof=1) / math.sqrt(n)),
        nu1_hat=float(nu_r.mean()),
        formula_value=float(params.p * nu_r.mean() - params.q),
        residual=float(residual_r.mean()),
        residual_stderr=float(residual_r.std(ddof=1) / math.sqrt(n)))


def clt_check(final_positions, t: float, v_hat: float, s2_hat: float):
    """Kolmogorov-Smirnov statistic of standardized front positions vs N(0,1)."""
    if s2_hat <= 0:
        raise ValueError("variance estimate must be positive")
    xs = np.asarray(final_positions, dtype=np.float64)
    z = (xs - v_hat * t) / math.sqrt(s2_hat * t)
    res = stats.kstest(z, "norm")
    return float(res.statistic), float(res.pvalue)


# ---------------------------------------------------------------------------
# increments: covariances and the variance series


def covariance_lag(increments, j: int, k: int):
    """Across-run sample covariance of the j-th and (j+k)-th increments.

    Increments are 1-indexed along integer times.  Returns (covariance,
    standard error).
    """
    inc = np.asarray(increments, dtype=np.float64)
    if inc.ndim != 2 or inc.shape[0] < 2:
        raise ValueError("need a (runs, steps) array with at least two runs")
    if j < 1 or j + k > inc.shape[1]:
        raise ValueError("lagged index outside the recorded range")
    x = inc[:, j - 1]
    y = inc[:, j + k - 1]
    w = (x - x.mean()) * (y - y.mean())
    n = w.size
    cov = w.mean() * n / (n - 1)
    stderr = w.std(ddof=1) / math.sqrt(n) * n / (n - 1)
    return float(cov), float(stderr)


@dataclass
class VarianceSeries:
    variance: float
    lags: np.ndarray
    covariances: np.ndarray
    stderrs: np.ndarray
    truncated_at: int
    s2: float


def variance_series(increments, burn_in_index: int, max_lag: int = 100,
                    noise_factor: float = 2.0, stop_after: int = 3) -> VarianceSeries:
    """Asymptotic variance from the increment autocovariance series.

    s^2 = Var + 2 * sum_k Cov(lag k), with the per-lag covariances
    averaged over post-burn-in base indices and the sum truncated once
    `stop_after` consecutive lags fall below `noise_factor` standard
    errors.  Stderrs cluster by run.
    """
    inc = np.asarray(increments, dtype=np.float64)
    n_runs, n_steps = inc.shape
    if n_runs < 2:
        raise ValueError("need at least two runs")
    dem = inc - inc.mean(axis=0, keepdims=True)
    bessel = n_runs / (n_runs - 1)

    def lag_stat(k):
        cols = np.arange(burn_in_index, n_steps - k)
        per_run = (dem[:, cols] * dem[:, cols + k]).mean(axis=1) * bessel
        return per_run.mean(), per_run.std(ddof=1) / math.sqrt(n_runs)

    var0, _ = lag_stat(0)
    lags, covs, errs = [], [], []
    quiet = 0
    for k in range(1, max_lag + 1):
        c, e = lag_stat(k)
        lags.append(k)
        covs.append(c)
        errs.append(e)
        quiet = quiet + 1 if abs(c) < noise_factor * e else 0
        if quiet >= stop_after:
            break
    covs = np.array(covs)
    return VarianceSeries(variance=float(var0), lags=np.array(lags, dtype=int),
                          covariances=covs, stderrs=np.array(errs),
                          truncated_at=int(lags[-1]) if lags else 0,
                          s2=float(var0 + 2.0 * covs.sum()))


def s2_direct(final_positions, t: float):
    """Var(X(t) - X(0)) / t with its large-sample standard error."""
    xs = np.asarray(final_positions, dtype=np.float64)
    if xs.size < 2:
        raise ValueError("need at least two paths")
    s2 = xs.var(ddof=1) / t
    stderr = s2 * math.sqrt(2.0 / (xs.size - 1))
    return float(s2), float(stderr)


# ---------------------------------------------------------------------------
# tails


@dataclass
class TailFit:
    rate: float
    r_squared: float
    n_samples: int
    n_points: int


def tail_fit(samples, min_samples: int = 50) -> TailFit:
    """Least-squares slope of the log empirical survival function.

    Fits log P(S > x) against x over the observed support (the largest
    observation, where the empirical survival vanishes, is excluded).
    """
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    if xs.size < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {xs.size}")
    values = np.unique(xs)
    if values.size < 2:
        raise ValueError("degenerate sample: all observations equal")
    surv = np.array([(xs > v).mean() for v in values])
    keep = surv > 0
    v = values[keep]
    logs = np.log(surv[keep])
    if v.size < 2:
        raise ValueError("not enough distinct values for a tail fit")
    slope, intercept = np.polyfit(v, logs, 1)
    fitted = slope * v + intercept
    ss_res = float(((logs - fitted) ** 2).sum())
    ss_tot = float(((logs - logs.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return TailFit(rate=float(-slope), r_squared=r2, n_samples=int(xs.size),
                   n_points=int(v.size))


# ---------------------------------------------------------------------------
# gap events behind the front


def gap_violation_rows(rows, a: int, b: int, l: int) -> np.ndarray:
    """Per-row indicator that [a, b] (front-relative columns) holds l consecutive ones."""
    rows = np.asarray(rows, dtype=np.uint8)
    if b >= rows.shape[1]:
        raise ValueError("snapshots do not cover the requested box")
    box = rows[:, a:b + 1].astype(np.int64)
    run = np.zeros(rows.shape[0], dtype=np.int64)
    longest = np.zeros(rows.shape[0], dtype=np.int64)
    for c in range(box.shape[1]):
        run = (run + 1) * box[:, c]
        np.maximum(longest, run, out=longest)
    return longest >= l


def gap_frequency(ensemble: FrontEnsemble, a: int, b: int, l: int, times=None) -> float:
    """Frequency of a length-l all-ones run in [a, b] behind the front."""
    if times is None:
        sel = np.arange(ensemble.probe_times.size)
    else:
        sel = np.flatnonzero(np.isin(ensemble.probe_times, np.asarray(times, dtype=float)))
    rows = ensemble.probe_patterns[:, sel, :].reshape(-1, ensemble.probe_patterns.shape[2])
    return float(gap_violation_rows(rows, a, b, l).mean())


# ---------------------------------------------------------------------------
# drift of the distance-to-zero observable (finite volume)


def drift_bound_constants(theta: float, q: float):
    """Decay rate and asymptote of the supermartingale bound on theta^distance."""
    if theta <= 1.0:
        raise ValueError("theta must exceed 1")
    if theta / (theta + 1.0) >= q:
        raise ValueError("q must exceed theta / (theta + 1)")
    lam = (theta * theta - 1.0) / theta * (q - theta / (theta + 1.0))
    asymptote = q / (q * (theta + 1.0) - theta)
    return lam, asymptote


@dataclass
class DriftDiagnostic:
    times: np.ndarray
    means: np.ndarray
    stderrs: np.ndarray
    bounds: np.ndarray
    lam: float
    asymptote: float
    start_exponent: int
    holds: bool


def drift_diagnostic(params: ModelParams, boundary, x: int, theta: float,
                     probe_times, n_runs: int, seed: int, *,
                     slack_stderrs: float = 3.0) -> DriftDiagnostic:
    """Empirical E[theta^distance-to-zero] against its exponential bound.

    Runs the finite-volume dynamics from all-ones on `boundary`, probes
    the distance from `x` to the nearest empty site (box edges count as
    empty), and checks mean(theta^dist) <= theta^dist0 e^(-lam t) +
    asymptote + slack at every probe time.
    """
    lam, asym = drift_bound_constants(theta, params.q)
    lo, hi = int(boundary[0]), int(boundary[1])
    times = np.sort(np.asarray(probe_times, dtype=np.float64))
    plan = RecordingPlan(times=times, absolute_window=(lo, hi))
    start = SpinConfig(lo, np.ones(hi - lo + 1, dtype=np.uint8))
    dist0 = distance_to_zero(start, x, (lo, hi))
    vals = np.zeros((n_runs, times.size))
    for r in range(n_runs):
        cfg = SpinConfig(lo, np.ones(hi - lo + 1, dtype=np.uint8))
        res = evolve_finite_volume(cfg, params, (lo, hi),
                                   clocks_for(params, seed, r), 0.0,
                                   float(times[-1]), plan)
        for k in range(times.size):
            snap = SpinConfig(lo, res.probes.snapshots[k])
            vals[r, k] = theta ** distance_to_zero(snap, x, (lo, hi))
    means = vals.mean(axis=0)
    stderrs = vals.std(axis=0, ddof=1) / math.sqrt(n_runs)
    bounds = theta ** dist0 * np.exp(-lam * times) + asym
    holds = bool(np.all(means <= bounds + slack_stderrs * stderrs))
    return DriftDiagnostic(times=times, means=means, stderrs=stderrs,
                           bounds=bounds, lam=lam, asymptote=asym,
                           start_exponent=dist0, holds=holds)


# ---------------------------------------------------------------------------
# ensemble summary


@dataclass
class EnsembleSummary:
    n_runs: int
    t_end: float
    v_hat: float
    v_stderr: float
    s2_direct: float
    s2_direct_stderr: float
    s2_series: float
    ks_statistic: float
    ks_pvalue: float
    covariance_lags: np.ndarray
    zero_density: np.ndarray


def summarize_ensemble(ensemble: FrontEnsemble, params: ModelParams,
                       pattern_width: int = 9) -> EnsembleSummary:
    t = ensemble.t_end
    v_hat, v_se = velocity_estimate(ensemble.final_positions, t)
    s2d, s2d_se = s2_direct(ensemble.final_positions, t)
    series = variance_series(ensemble.increments,
                             burn_in_index=ensemble.increments.shape[1] // 2)
    ks_stat, ks_p = clt_check(ensemble.final_positions, t, v_hat, s2d)
    if ensemble.probe_times.size:
        measure = pool_patterns(ensemble, pattern_width,
                                times=ensemble.probe_times[ensemble.probe_times >= t / 2])
        dens = np.array([zero_density(measure, k) for k in range(pattern_width + 1)])
    else:
        dens = np.zeros(0)
    return EnsembleSummary(n_runs=ensemble.n_runs, t_end=t, v_hat=v_hat,
                           v_stderr=v_se, s2_direct=s2d, s2_direct_stderr=s2d_se,
                           s2_series=series.s2, ks_statistic=ks_stat,
                           ks_pvalue=ks_p, covariance_lags=series.covariances,
                           zero_density=dens)
