"""Statistical comparison engine: analytic law vs sample set, with verdicts.

Every check produces a ValidationReport that carries its statistic, its
threshold, the sample size and enough metadata to re-run it; fixed default
thresholds are TV < 5e-3 at 1e6 samples, |z| < 3, and chi-square p > 0.01.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2 as chi2_dist
from scipy.stats import chi2_contingency

from . import distributions as dist
from . import hitting as hit
from . import sampling
from .errors import BinningError, CancellationError, DomainError, InfiniteMomentError
from .families import DIRAC, GAMMA, STABLE, TEMPERED, ProcessParams, eval_f
from .distributions import DistTable

DEFAULT_THRESHOLDS = {
    "tv": 5e-3,
    "z": 3.0,
    "pvalue": 0.01,
    "route_ode": 1e-6,
    "route_series": 1e-8,
}


@dataclass(frozen=True)
class ValidationReport:
    """Self-contained outcome of one analytic-vs-sample comparison."""

    name: str
    statistic_kind: str  # tv | chi-square | moment-z | two-sample-chi-square | exact
    statistic: float
    threshold: float
    passes_when: str  # "below" or "above"
    sample_size: int
    passed: bool
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic_kind": self.statistic_kind,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "passes_when": self.passes_when,
            "sample_size": self.sample_size,
            "passed": self.passed,
            "metadata": self.metadata,
        }


def _report(name, kind, statistic, threshold, passes_when, n, metadata) -> ValidationReport:
    if passes_when == "below":
        ok = statistic < threshold
    elif passes_when == "above":
        ok = statistic > threshold
    else:
        raise DomainError(f"passes_when must be 'below' or 'above', got {passes_when!r}")
    return ValidationReport(name, kind, float(statistic), float(threshold), passes_when, int(n), bool(ok), metadata)


# ---------------------------------------------------------------------------
# Statistics.
# ---------------------------------------------------------------------------


def tv_distance(table: DistTable, empirical) -> float:
    """Total variation between a tabulated law and an empirical sample.

    ``empirical`` is either an integer sample array or another DistTable.
    Mass beyond the tabulated support is compared as a single tail cell.
    """
    k_max = table.support_max
    if isinstance(empirical, DistTable):
        k = max(k_max, empirical.support_max)
        p = np.zeros(k + 2)
        q = np.zeros(k + 2)
        p[: k_max + 1] = table.probs
        p[-1] = table.tail_bound
        q[: empirical.support_max + 1] = empirical.probs
        q[-1] = empirical.tail_bound
        return 0.5 * float(np.abs(p - q).sum())
    samples = np.asarray(empirical)
    if samples.size == 0:
        raise DomainError("empirical sample is empty")
    clipped = np.clip(samples, 0, k_max + 1).astype(np.int64)
    emp = np.bincount(clipped, minlength=k_max + 2) / samples.size
    diff = np.abs(table.probs - emp[: k_max + 1]).sum()
    diff += abs(table.tail_bound - emp[k_max + 1])
    return 0.5 * float(diff)


def _invert_cdf(cdf, target: float, hi_start: float = 1.0) -> float:
    lo, hi = 0.0, hi_start
    while cdf(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise BinningError("CDF inversion ran away; target quantile unreachable")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chi_square_density(samples, cdf, bins: int = 20, horizon: float | None = None):
    """Equiprobable-bin chi-square of samples against an analytic CDF.

    Bin edges come from numerically inverting the CDF.  When a horizon is
    given, censored mass (samples beyond it, including inf) forms an explicit
    final bin.  Returns (statistic, dof, p_value).
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n == 0:
        raise DomainError("empirical sample is empty")
    total_mass = cdf(horizon) if horizon is not None else 1.0
    edges = np.array([_invert_cdf(cdf, total_mass * i / bins) for i in range(1, bins)])
    expected = np.full(bins, n * total_mass / bins)

    finite = samples[np.isfinite(samples)] if horizon is None else samples[samples <= horizon]
    observed = np.bincount(np.searchsorted(edges, finite, side="left"), minlength=bins).astype(float)
    if horizon is not None:
        exp_cens = n * (1.0 - total_mass)
        obs_cens = float(n - finite.size)
        if exp_cens >= 5.0:
            expected = np.append(expected, exp_cens)
            observed = np.append(observed, obs_cens)
        else:
            # a near-empty censored cell folds into the last bin
            expected[-1] += exp_cens
            observed[-1] += obs_cens
    if np.any(expected < 5.0):
        raise BinningError(
            f"expected bin count below 5 (min {expected.min():.2f}); use fewer bins or more samples"
        )
    stat = float(((observed - expected) ** 2 / expected).sum())
    dof = len(expected) - 1
    p = float(chi2_dist.sf(stat, dof))
    return stat, dof, p


def moment_z(samples, analytic_mean: float, analytic_variance: float | None = None) -> float:
    """z-score of the sample mean against an analytic mean.

    The standard error uses the analytic variance when supplied (it must be
    finite), otherwise the sample variance.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n == 0:
        raise DomainError("empirical sample is empty")
    if analytic_variance is not None:
        if not math.isfinite(analytic_variance):
            raise InfiniteMomentError("analytic variance is not finite; refusing the z-test")
        se = math.sqrt(analytic_variance / n)
    else:
        se = float(samples.std(ddof=1)) / math.sqrt(n)
    return float((samples.mean() - analytic_mean) / se)


def two_sample_chisquare(a, b, k_max: int = 64, min_expected: float = 5.0):
    """Two-sample chi-square on count histograms; returns (stat, dof, p).

    Counts above k_max pool into one tail cell, and sparse adjacent cells are
    merged until every expected count reaches min_expected.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise DomainError("empirical sample is empty")
    ha = np.bincount(np.clip(a, 0, k_max + 1).astype(np.int64), minlength=k_max + 2).astype(float)
    hb = np.bincount(np.clip(b, 0, k_max + 1).astype(np.int64), minlength=k_max + 2).astype(float)
    total = ha + hb
    # merge right-to-left so every pooled cell has enough mass
    cells_a, cells_b = [], []
    acc_a = acc_b = acc = 0.0
    share = min(a.size, b.size) / (a.size + b.size)
    for i in range(len(total)):
        acc_a += ha[i]
        acc_b += hb[i]
        acc += total[i]
        if acc * share >= min_expected:
            cells_a.append(acc_a)
            cells_b.append(acc_b)
            acc_a = acc_b = acc = 0.0
    if acc > 0.0:
        if cells_a:
            cells_a[-1] += acc_a
            cells_b[-1] += acc_b
        else:
            cells_a, cells_b = [acc_a], [acc_b]
    table = np.array([cells_a, cells_b])
    if table.shape[1] < 2:
        raise BinningError("fewer than two usable cells after pooling")
    stat, p, dof, _ = chi2_contingency(table)
    return float(stat), int(dof), float(p)


# ---------------------------------------------------------------------------
# Suites.
# ---------------------------------------------------------------------------

SUITES = ("pmf", "hitting", "moments", "conditional", "ctrw", "skellam")


def family_series_pmf(params: ProcessParams, t: float, k: int) -> float:
    """The per-family closed-form or series pmf route, independent of the
    Bell recurrence."""
    spec = params.spec
    if spec.family == STABLE:
        return dist.pmf_series_spacefractional(spec.alpha, params.lam, t, k)
    if spec.family == TEMPERED:
        return dist.pmf_series_tempered(spec.alpha, spec.theta, params.lam, t, k)
    if spec.family == GAMMA:
        return dist.pmf_negative_binomial(params.lam, t, k)
    if spec.family == DIRAC:
        return dist.pmf_series_dirac(spec.rate2, params.lam, t, k)
    return math.exp(-params.lam * t) * (params.lam * t) ** k / math.factorial(k)


def _meta(params: ProcessParams, **extra) -> dict:
    spec = params.spec
    meta = {"family": spec.family, "lambda": params.lam}
    for name in ("alpha", "theta", "rate2"):
        value = getattr(spec, name)
        if value is not None:
            meta[name] = value
    meta.update(extra)
    return meta


def _suite_pmf(params, t, samples, seed, thr, workers) -> list[ValidationReport]:
    reports = []
    kmax = 30
    table = dist.pmf_table(params, t, kmax=kmax)
    ode = dist.ode_pmf(params, t, kmax)
    reports.append(
        _report(
            "pmf bell-vs-ode sup difference",
            "exact",
            float(np.max(np.abs(table.probs - ode.probs))),
            thr["route_ode"],
            "below",
            0,
            _meta(params, t=t, kmax=kmax),
        )
    )
    series_checked = 0
    worst = 0.0
    spec = params.spec
    for k in range(kmax + 1):
        try:
            s = family_series_pmf(params, t, k)
        except CancellationError:
            continue
        series_checked += 1
        worst = max(worst, abs(s - table.probs[k]))
    if series_checked:
        reports.append(
            _report(
                "pmf bell-vs-series sup difference",
                "exact",
                worst,
                thr["route_series"],
                "below",
                0,
                _meta(params, t=t, kmax=kmax, series_points=series_checked),
            )
        )
    counts = sampling.batch_counts(params, t, seed, samples, "path", workers)
    wide = dist.pmf_table(params, t, kmax=200)
    reports.append(
        _report(
            "pmf monte-carlo total variation",
            "tv",
            tv_distance(wide, counts),
            thr["tv"],
            "below",
            samples,
            _meta(params, t=t, seed=seed, method="path"),
        )
    )
    return reports


def _suite_hitting(params, t, samples, seed, thr, workers) -> list[ValidationReport]:
    reports = []
    worst_norm = max(
        abs(hit.hitting_density_form(params, k).integral_zero_inf() - 1.0) for k in range(1, 21)
    )
    reports.append(
        _report("hitting normalization sup |int q_k - 1|, k <= 20", "exact", worst_norm, 1e-12, "below", 0, _meta(params))
    )
    worst_res = max(
        max(hit.hitting_equation_residual(params, k, s) for s in (0.1, 1.0, 5.0))
        for k in range(1, 8)
    )
    reports.append(
        _report("hitting governing-equation residual", "exact", worst_res, 1e-10, "below", 0, _meta(params))
    )
    worst_rec = max(
        max(hit.hitting_recurrence_check(params, k, s) for s in (0.1, 1.0, 5.0))
        for k in range(2, 8)
    )
    reports.append(
        _report("hitting recurrence residual", "exact", worst_rec, 1e-10, "below", 0, _meta(params))
    )
    worst_gf = max(
        abs(hit.hitting_gf(params, u, s) - hit.hitting_gf_partial_sum(params, u, s))
        for u in (0.1, 0.5, 0.9)
        for s in (0.5, 2.0)
    )
    reports.append(
        _report("hitting generating-function partial sums", "exact", worst_gf, 1e-8, "below", 0, _meta(params))
    )
    n = min(samples, 10**5)
    k = 2
    horizon = _hitting_horizon(params, k)
    times, frac = sampling.sample_hitting_times(params, k, horizon, sampling.RngStream(seed, 0).generator(), n)
    form = hit.hitting_density_form(params, k)

    def cdf(s):
        return 1.0 - hit.hitting_survival(params, k, s)

    _, _, p = chi_square_density(times, cdf, bins=20, horizon=horizon)
    reports.append(
        _report(
            "hitting T2 chi-square vs closed form",
            "chi-square",
            p,
            thr["pvalue"],
            "above",
            n,
            _meta(params, k=k, horizon=horizon, seed=seed, censored_fraction=frac, decay=form.decay),
        )
    )
    return reports


def _hitting_horizon(params: ProcessParams, k: int) -> float:
    # wide enough that the censored cell stays a small explicit bin
    f = eval_f(params.spec, params.lam)
    return 12.0 * k / f


def _suite_moments(params, t, samples, seed, thr, workers) -> list[ValidationReport]:
    reports = []
    spec = params.spec
    if spec.family == STABLE:
        try:
            dist.factorial_moment(params, t, 1)
            refused = False
        except InfiniteMomentError:
            refused = True
        return [
            _report(
                "stable infinite-moment refusal",
                "moment-z",
                0.0 if refused else 1.0,
                0.5,
                "below",
                0,
                _meta(params, note="pass-by-design: divergent mean documented"),
            )
        ]
    s = t / 2.0
    rng = sampling.RngStream(seed, 0).generator()
    counts = sampling.simulate_counts_at(params, [s, t], t, rng, samples)
    n_s, n_t = counts[:, 0].astype(float), counts[:, 1].astype(float)

    mean = dist.raw_moment(params, t, 1)
    variance = dist.central_moment(params, t, 2)
    mean_s = dist.raw_moment(params, s, 1)
    if spec.family == TEMPERED:
        closed = dist.tempered_moments(spec.alpha, spec.theta, params.lam, t, s)
        mean, variance, covariance = closed.mean, closed.variance, closed.covariance
    elif spec.family == GAMMA:
        closed = dist.gamma_moments(params.lam, t, s)
        mean, variance, covariance = closed.mean, closed.variance, closed.covariance
    else:
        covariance = dist.central_moment(params, s, 2)  # Cov(N(s), N(t)) = Var N(s)

    z_mean = moment_z(n_t, mean, variance)
    reports.append(
        _report("mean z-score", "moment-z", abs(z_mean), thr["z"], "below", samples, _meta(params, t=t, seed=seed))
    )
    mu4 = dist.central_moment(params, t, 4)
    z_var = moment_z((n_t - mean) ** 2, variance, mu4 - variance**2)
    reports.append(
        _report("variance z-score", "moment-z", abs(z_var), thr["z"], "below", samples, _meta(params, t=t, seed=seed))
    )
    cross = (n_s - mean_s) * (n_t - mean)
    z_cov = moment_z(cross, covariance)  # SE from the sample spread of the products
    reports.append(
        _report(
            "covariance z-score",
            "moment-z",
            abs(z_cov),
            thr["z"],
            "below",
            samples,
            _meta(params, t=t, s=s, seed=seed),
        )
    )
    return reports


def _suite_conditional(params, t, samples, seed, thr, workers) -> list[ValidationReport]:
    reports = []
    spec = params.spec
    k = 2
    s = t / 2.0
    if spec.family == GAMMA:
        row = [dist.conditional_pmf_gamma(s, t, r, k) for r in range(k + 1)]
    elif spec.family == STABLE:
        row = [dist.conditional_pmf_spacefractional(spec.alpha, params.lam, s, t, r, k) for r in range(k + 1)]
    else:
        row = [
            dist.pmf(params, s, r) * dist.pmf(params, t - s, k - r) / dist.pmf(params, t, k)
            for r in range(k + 1)
        ]
    reports.append(
        _report("conditional row sum", "exact", abs(sum(row) - 1.0), 1e-10, "below", 0, _meta(params, t=t, s=s, k=k))
    )
    n_accept = max(2000, min(samples // 10, 10**5))
    rng = sampling.RngStream(seed, 1).generator()
    paths = sampling.conditional_bridge_paths(params, t, k, rng, n_accept)
    emp = np.bincount([p.count_at(s) for p in paths], minlength=k + 1) / n_accept
    tv = 0.5 * float(np.abs(emp[: k + 1] - np.array(row)).sum())
    reports.append(
        _report(
            "conditional bridge total variation",
            "tv",
            tv,
            1e-2,
            "below",
            n_accept,
            _meta(params, t=t, s=s, k=k, seed=seed),
        )
    )
    return reports


def _suite_ctrw(params, t, samples, seed, thr, workers) -> list[ValidationReport]:
    reports = []
    a = sampling.batch_counts(params, t, seed, samples, "path", workers)
    b = sampling.batch_counts(params, t, seed + 1, samples, "ctrw", workers, ctrw_n=1)
    _, _, p = two_sample_chisquare(a, b)
    reports.append(
        _report(
            "ctrw n=1 two-sample chi-square vs jump chain",
            "two-sample-chi-square",
            p,
            thr["pvalue"],
            "above",
            samples,
            _meta(params, t=t, seed=seed, cutoff=1),
        )
    )
    table = dist.pmf_table(params, t, kmax=200)
    tvs = []
    for n_cut in (1, 2, 3):
        c = sampling.batch_counts(params, t, seed + n_cut, samples, "ctrw", workers, ctrw_n=n_cut)
        tvs.append(tv_distance(table, c))
    # n = 1 is exact; larger cutoffs drift further (allowing MC noise between
    # n = 2 and n = 3, which coincide for the degenerate linear family)
    slack = 10.0 / math.sqrt(samples)
    ordered = tvs[0] < min(tvs[1], tvs[2]) and tvs[1] <= tvs[2] + slack
    reports.append(
        _report(
            "ctrw closeness improves as the cutoff shrinks",
            "tv",
            0.0 if ordered else 1.0,
            0.5,
            "below",
            samples,
            _meta(params, t=t, seed=seed, tv_by_cutoff=tvs),
        )
    )
    return reports


def _suite_skellam(params, t, samples, seed, thr, workers) -> list[ValidationReport]:
    if params.spec.family != GAMMA:
        raise DomainError("the skellam suite is defined for the gamma family")
    lam = params.lam
    reports = []
    big_r = 80
    total = sum(dist.skellam_gamma_pmf(lam, t, r) for r in range(-big_r, big_r + 1))
    tail = 2.0 * dist.negative_binomial_tail_bound(lam, t, big_r)
    reports.append(
        _report("skellam normalization with certified tail", "exact", abs(total + tail - 1.0), 1e-8, "below", 0, _meta(params, t=t, r_max=big_r))
    )
    sym = max(
        abs(dist.skellam_gamma_pmf(lam, t, r) - dist.skellam_gamma_pmf(lam, t, -r)) for r in range(1, 6)
    )
    reports.append(_report("skellam symmetry", "exact", sym, 1e-15, "below", 0, _meta(params, t=t)))
    n = samples
    c1 = sampling.batch_counts(params, t, seed, n, "timechange", workers)
    c2 = sampling.batch_counts(params, t, seed + 10**6, n, "timechange", workers)
    diff = c1 - c2
    worst_z = 0.0
    for r in (0, 1, 2):
        p = dist.skellam_gamma_pmf(lam, t, r)
        z = moment_z((diff == r).astype(float), p, p * (1.0 - p))
        worst_z = max(worst_z, abs(z))
    reports.append(
        _report("skellam monte-carlo frequency z", "moment-z", worst_z, thr["z"], "below", n, _meta(params, t=t, seed=seed))
    )
    return reports


_SUITE_RUNNERS = {
    "pmf": _suite_pmf,
    "hitting": _suite_hitting,
    "moments": _suite_moments,
    "conditional": _suite_conditional,
    "ctrw": _suite_ctrw,
    "skellam": _suite_skellam,
}


def run_suite(
    suite: str,
    params: ProcessParams,
    t: float = 1.0,
    samples: int = 10**6,
    seed: int = 0,
    thresholds: dict | None = None,
    workers: int = 1,
) -> list[ValidationReport]:
    """Run one named suite (or 'all') and return its reports."""
    thr = dict(DEFAULT_THRESHOLDS)
    if thresholds:
        unknown = set(thresholds) - set(thr)
        if unknown:
            raise DomainError(f"unknown threshold overrides: {sorted(unknown)}")
        thr.update(thresholds)
    if suite == "all":
        names = [s for s in SUITES if s != "skellam" or params.spec.family == GAMMA]
    elif suite in _SUITE_RUNNERS:
        names = [suite]
    else:
        raise DomainError(f"unknown suite {suite!r}; expected one of {('all',) + SUITES}")
    reports = []
    for name in names:
        reports.extend(_SUITE_RUNNERS[name](params, t, samples, seed, thr, workers))
    return reports
