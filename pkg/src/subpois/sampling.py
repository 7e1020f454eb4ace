"""Stochastic samplers: jump chain, subordinator time change, CTRW cutoff.

All samplers are array-first (a scalar draw is a size-1 array) and consume a
``numpy.random.Generator``.  Reproducibility contract: the same
(seed, stream) pair yields bit-identical output, and batch runs are chunked
onto fixed per-chunk streams so results do not depend on the worker count.

Heavy-tailed jump sizes (stable family with small alpha) can exceed the
int64 range with tiny probability; such draws are clamped to 2**62.  Every
statistic in this package bins counts far below that, so the clamp only
relabels points inside the top tail cell.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import distributions
from .errors import BudgetError, DomainError
from .families import (
    DIRAC,
    GAMMA,
    LINEAR,
    STABLE,
    ProcessParams,
    BernsteinSpec,
    eval_f,
    jump_size_pmf,
)

_SIZE_CLAMP = 2**62
_SIBUYA_SEQUENTIAL_CAP = 16
_CHUNK = 1 << 15


@dataclass(frozen=True)
class RngStream:
    """A reproducible generator identified by (seed, stream id)."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.stream])


@dataclass(frozen=True)
class PathRecord:
    """One simulated trajectory: ordered (time, jump size) events on (0, horizon]."""

    horizon: float
    events: tuple[tuple[float, int], ...]
    seed: tuple[int, int]
    method: str

    def __post_init__(self):
        prev = 0.0
        for time, size in self.events:
            if not prev < time <= self.horizon:
                raise DomainError("event times must be strictly increasing in (0, horizon]")
            if size < 1:
                raise DomainError("jump sizes must be >= 1")
            prev = time

    @property
    def total(self) -> int:
        return sum(size for _, size in self.events)

    def count_at(self, s: float) -> int:
        return sum(size for time, size in self.events if time <= s)

    def first_passage(self, k: int) -> float:
        """First event time at which the cumulative count reaches k, else inf."""
        acc = 0
        for time, size in self.events:
            acc += size
            if acc >= k:
                return time
        return math.inf

    def to_json_dict(self) -> dict:
        return {
            "t": self.horizon,
            "events": [[time, int(size)] for time, size in self.events],
            "seed": list(self.seed),
            "method": self.method,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PathRecord":
        return cls(
            horizon=d["t"],
            events=tuple((time, int(size)) for time, size in d["events"]),
            seed=tuple(int(x) for x in d["seed"]),
            method=d["method"],
        )


# ---------------------------------------------------------------------------
# Jump-size samplers.
# ---------------------------------------------------------------------------


def _log_sibuya_survival(alpha: float, k) -> np.ndarray:
    """log P(K > k) = log [Gamma(k+1-alpha) / (Gamma(1-alpha) Gamma(k+1))].

    The gammaln difference cancels catastrophically for huge k (the two
    arguments even collapse to one float past 2**52), so beyond 1e6 the
    ratio switches to its asymptotic expansion, accurate there to ~1e-13.
    """
    k = np.atleast_1d(np.asarray(k, dtype=np.float64))
    out = np.empty(k.shape)
    small = k <= 1e6
    ks = k[small]
    out[small] = gammaln(ks + 1.0 - alpha) - gammaln(1.0 - alpha) - gammaln(ks + 1.0)
    kb = k[~small]
    out[~small] = (
        -alpha * np.log(kb) - alpha * (1.0 - alpha) / (2.0 * kb) - gammaln(1.0 - alpha)
    )
    return out


def _sibuya_tail_invert(alpha: float, log_v: np.ndarray, start: float) -> np.ndarray:
    """Smallest k > start with log P(K > k) <= log_v, by doubling + bisection.

    Targets below the survival at 2 * _SIZE_CLAMP (including log 0 from a
    uniform that landed exactly on 0.0) are clamped so the search always
    terminates; callers clip the result to the cap anyway.
    """
    log_v = np.maximum(log_v, _log_sibuya_survival(alpha, 2.0 * _SIZE_CLAMP))
    lo = np.full(log_v.shape, float(start))
    hi = lo * 2.0
    while True:
        too_small = _log_sibuya_survival(alpha, hi) > log_v
        if not too_small.any():
            break
        lo[too_small] = hi[too_small]
        hi[too_small] *= 2.0
    while True:
        active = (hi - lo) > 1.0
        if not active.any():
            break
        mid = np.floor((lo + hi) / 2.0)
        # past ~2**53 consecutive floats differ by more than 1, so the
        # midpoint stops making progress; such lanes land on hi
        stuck = active & ((mid <= lo) | (mid >= hi))
        lo = np.where(stuck, hi, lo)
        active &= ~stuck
        le = _log_sibuya_survival(alpha, mid) <= log_v
        hi = np.where(active & le, mid, hi)
        lo = np.where(active & ~le, mid, lo)
    return hi


def _sample_sibuya(alpha: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Exact inverse-CDF Sibuya(alpha) draws.

    The survival walk uses the ratio recurrence G(k) = G(k-1)(k-alpha)/k;
    draws not resolved within the first 16 states continue with doubling and
    integer bisection on the closed-form log survival, which inverts the same
    CDF (a purely sequential walk has infinite expected cost here).
    """
    v = rng.random(size)
    out = np.zeros(size, dtype=np.float64)
    g = np.ones(size)
    active = np.ones(size, dtype=bool)
    for k in range(1, _SIBUYA_SEQUENTIAL_CAP + 1):
        g *= (k - alpha) / k
        hit = active & (g <= v)
        out[hit] = k
        active &= ~hit
        if not active.any():
            break
    if active.any():
        idx = np.flatnonzero(active)
        out[idx] = _sibuya_tail_invert(alpha, np.log(v[idx]), _SIBUYA_SEQUENTIAL_CAP)
    return np.clip(out, 1, _SIZE_CLAMP).astype(np.int64)


def _sample_logarithmic(lam: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Logarithmic(q) draws, q = lam/(1+lam), by sequential inversion."""
    q = lam / (1.0 + lam)
    v = rng.random(size)
    p = np.full(size, q / math.log1p(lam))
    cum = p.copy()
    out = np.ones(size, dtype=np.int64)
    active = v > cum
    k = 1
    while active.any():
        k += 1
        if k > 100000:
            raise BudgetError("logarithmic inversion failed to terminate")
        p *= q * (k - 1) / k
        cum += p
        hit = active & (v <= cum)
        out[hit] = k
        active &= ~hit
    return out


def _sample_zero_truncated_poisson(lam: float, rng: np.random.Generator, size: int) -> np.ndarray:
    draws = rng.poisson(lam, size)
    zero = draws == 0
    while zero.any():
        draws[zero] = rng.poisson(lam, int(zero.sum()))
        zero = draws == 0
    return draws.astype(np.int64)


def sample_jump_sizes(
    params: ProcessParams,
    rng: np.random.Generator,
    size: int,
    method: str = "auto",
) -> np.ndarray:
    """iid jump sizes distributed per jump_size_pmf.

    method="auto" dispatches to the specialized per-family sampler;
    method="generic" inverts a cached cumulative pmf table with a tail
    fallback.
    """
    if method == "generic":
        return _sample_generic(params, rng, size)
    if method != "auto":
        raise DomainError(f"unknown jump sampler method {method!r}")
    spec, lam = params.spec, params.lam
    if spec.family == LINEAR:
        return np.ones(size, dtype=np.int64)
    if spec.family == STABLE:
        return _sample_sibuya(spec.alpha, rng, size)
    if spec.family == GAMMA:
        return _sample_logarithmic(lam, rng, size)
    if spec.family == DIRAC:
        return _sample_zero_truncated_poisson(lam, rng, size)
    # tempered: rejection against Sibuya with acceptance weight rho**K
    rho = lam / (lam + spec.theta)
    log_rho = math.log(rho)
    out = np.zeros(size, dtype=np.int64)
    pending = np.ones(size, dtype=bool)
    while pending.any():
        n = int(pending.sum())
        proposal = _sample_sibuya(spec.alpha, rng, n)
        accept = np.log(rng.random(n)) < proposal * log_rho
        idx = np.flatnonzero(pending)
        out[idx[accept]] = proposal[accept]
        pending[idx[accept]] = False
    return out


def sample_jump_size(params: ProcessParams, rng: np.random.Generator, method: str = "auto") -> int:
    return int(sample_jump_sizes(params, rng, 1, method)[0])


_GENERIC_TABLE_CAP = 8192
_generic_tables: dict[ProcessParams, np.ndarray] = {}


def _generic_cumulative(params: ProcessParams) -> np.ndarray:
    table = _generic_tables.get(params)
    if table is not None:
        return table
    k = 64
    while True:
        pk = np.array([jump_size_pmf(params.spec, params.lam, j) for j in range(1, k + 1)])
        cum = np.cumsum(pk)
        if 1.0 - cum[-1] < 1e-15 or k >= _GENERIC_TABLE_CAP:
            _generic_tables[params] = cum
            return cum
        k *= 2


def _sample_generic(params: ProcessParams, rng: np.random.Generator, size: int) -> np.ndarray:
    spec = params.spec
    if spec.family == LINEAR:
        return np.ones(size, dtype=np.int64)
    cum = _generic_cumulative(params)
    u = rng.random(size)
    out = (np.searchsorted(cum, u, side="left") + 1).astype(np.int64)
    beyond = u > cum[-1]
    if beyond.any():
        if spec.family != STABLE:
            # light-tailed families certify < 1e-15 tail inside the table
            raise BudgetError("generic jump table exhausted for a light-tailed family")
        tail = _sibuya_tail_invert(
            spec.alpha, np.log1p(-u[beyond]), float(len(cum))
        )
        out[beyond] = np.clip(tail, 1, _SIZE_CLAMP).astype(np.int64)
    return out


# ---------------------------------------------------------------------------
# Subordinator marginals H(t).
# ---------------------------------------------------------------------------


def _sample_positive_stable(alpha: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard positively skewed stable with E exp(-mu X) = exp(-mu**alpha),
    by the Kanter trigonometric construction."""
    u = rng.random(size) * math.pi
    e = rng.standard_exponential(size)
    a = (
        np.sin(alpha * u) ** (alpha / (1.0 - alpha))
        * np.sin((1.0 - alpha) * u)
        / np.sin(u) ** (1.0 / (1.0 - alpha))
    )
    return (a / e) ** ((1.0 - alpha) / alpha)


def sample_subordinator(
    spec: BernsteinSpec,
    t: float,
    rng: np.random.Generator,
    size: int = 1,
    budget: float = 1e6,
) -> np.ndarray:
    """Marginal H(t) of the subordinator with E exp(-mu H(t)) = exp(-t f(mu)).

    * gamma:    gamma(shape=t, scale=1)
    * stable:   t**(1/alpha) times a standard Kanter draw
    * tempered: exponential-tilting rejection from the stable draw, with
      acceptance exp(-theta * X); expected trials exp(theta**alpha * t)
    * dirac:    unit jumps at rate rate2, so H(t) = Poisson(rate2 * t)
    * linear:   deterministic drift, H(t) = t
    """
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    if spec.family == LINEAR:
        return np.full(size, float(t))
    if spec.family == GAMMA:
        return rng.standard_gamma(t, size)
    if spec.family == DIRAC:
        return rng.poisson(spec.rate2 * t, size).astype(np.float64)
    if spec.family == STABLE:
        return t ** (1.0 / spec.alpha) * _sample_positive_stable(spec.alpha, rng, size)
    # tempered
    alpha, theta = spec.alpha, spec.theta
    expected_trials = theta**alpha * t
    if expected_trials > math.log(budget):
        raise BudgetError(
            f"tempered rejection needs about exp({expected_trials:.3g}) trials per draw, "
            f"beyond the budget {budget:.3g}"
        )
    scale = t ** (1.0 / alpha)
    out = np.zeros(size)
    pending = np.ones(size, dtype=bool)
    trials = 0
    while pending.any():
        n = int(pending.sum())
        trials += n
        if trials > budget * max(size, 1):
            raise BudgetError("tempered rejection exhausted its trial budget")
        proposal = scale * _sample_positive_stable(alpha, rng, n)
        accept = np.log(rng.random(n)) < -theta * proposal
        idx = np.flatnonzero(pending)
        out[idx[accept]] = proposal[accept]
        pending[idx[accept]] = False
    return out


# ---------------------------------------------------------------------------
# Count and path simulation.
# ---------------------------------------------------------------------------


def _poisson_large_safe(rng: np.random.Generator, lam: np.ndarray) -> np.ndarray:
    """Poisson draws tolerating astronomically large means.

    numpy rejects lam beyond ~2**63; such draws land many orders of magnitude
    above any tabulated support, so a rounded normal stand-in only relabels
    points inside the top tail cell.
    """
    lam = np.asarray(lam, dtype=np.float64)
    out = np.zeros(lam.shape, dtype=np.float64)
    big = lam > 1e15
    if big.any():
        out[big] = np.rint(lam[big] + np.sqrt(lam[big]) * rng.standard_normal(int(big.sum())))
        small = ~big
        out[small] = rng.poisson(lam[small])
    else:
        out = rng.poisson(lam).astype(np.float64)
    return np.clip(out, 0, _SIZE_CLAMP).astype(np.int64)


def simulate_counts(
    params: ProcessParams, t: float, rng: np.random.Generator, size: int
) -> np.ndarray:
    """N(t) for ``size`` independent paths of the compound-Poisson jump chain."""
    rate = eval_f(params.spec, params.lam)
    n_events = rng.poisson(rate * t, size)
    total = int(n_events.sum())
    sizes = sample_jump_sizes(params, rng, total)
    idx = np.repeat(np.arange(size), n_events)
    totals = np.bincount(idx, weights=sizes.astype(np.float64), minlength=size)
    return np.clip(totals, 0, _SIZE_CLAMP).astype(np.int64)


def simulate_time_changed_counts(
    params: ProcessParams, t: float, rng: np.random.Generator, size: int
) -> np.ndarray:
    """N(t) via the time change: Poisson(lambda * H(t))."""
    h = sample_subordinator(params.spec, t, rng, size)
    return _poisson_large_safe(rng, params.lam * h)


def simulate_time_changed(params: ProcessParams, t: float, rng: np.random.Generator) -> int:
    return int(simulate_time_changed_counts(params, t, rng, 1)[0])


def ctrw_rate(params: ProcessParams, n: int) -> float:
    """Event rate u(n) of the cutoff walk: f(lambda) * P(jump >= n)."""
    if n < 1:
        raise DomainError(f"cutoff n must be >= 1, got {n}")
    f = eval_f(params.spec, params.lam)
    if n == 1:
        return f
    if params.spec.family == STABLE:
        return f * math.exp(float(_log_sibuya_survival(params.spec.alpha, n - 1)[0]))
    head = sum(jump_size_pmf(params.spec, params.lam, j) for j in range(1, n))
    return f * max(0.0, 1.0 - head)


def _conditional_jump_sizes(
    params: ProcessParams, n: int, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Jump sizes conditioned on being >= n, by rejection from the family law."""
    out = np.zeros(size, dtype=np.int64)
    pending = np.ones(size, dtype=bool)
    while pending.any():
        m = int(pending.sum())
        draw = sample_jump_sizes(params, rng, m)
        accept = draw >= n
        idx = np.flatnonzero(pending)
        out[idx[accept]] = draw[accept]
        pending[idx[accept]] = False
    return out


def simulate_ctrw_counts(
    params: ProcessParams, t: float, n: int, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Counts of the cutoff walk: rate u(n), steps distributed as the jump law
    conditioned on sizes >= n.  n = 1 reproduces the plain jump chain law."""
    if n < 1:
        raise DomainError(f"cutoff n must be >= 1, got {n}")
    rate = ctrw_rate(params, n)
    n_events = rng.poisson(rate * t, size)
    total = int(n_events.sum())
    if n == 1:
        sizes = sample_jump_sizes(params, rng, total)
    else:
        sizes = _conditional_jump_sizes(params, n, rng, total)
    idx = np.repeat(np.arange(size), n_events)
    totals = np.bincount(idx, weights=sizes.astype(np.float64), minlength=size)
    return np.clip(totals, 0, _SIZE_CLAMP).astype(np.int64)


def simulate_ctrw(params: ProcessParams, t: float, n: int, rng: np.random.Generator) -> int:
    return int(simulate_ctrw_counts(params, t, n, rng, 1)[0])


def simulate_path(
    params: ProcessParams,
    t: float,
    rng: np.random.Generator,
    seed_label: tuple[int, int] = (0, 0),
    method: str = "path",
) -> PathRecord:
    """One trajectory: exponential(f(lambda)) inter-arrivals, iid jump sizes."""
    if t <= 0.0:
        raise DomainError(f"horizon must be positive, got {t}")
    rate = eval_f(params.spec, params.lam)
    events = []
    clock = rng.exponential(1.0 / rate)
    while clock <= t:
        size = sample_jump_size(params, rng)
        events.append((clock, size))
        clock += rng.exponential(1.0 / rate)
    return PathRecord(t, tuple(events), seed_label, method)


def simulate_event_batch(
    params: ProcessParams, t: float, rng: np.random.Generator, size: int
):
    """Vectorized batch of paths on [0, t].

    Conditionally on the driving event count, event times are order statistics
    of uniforms; sizes are iid.  Returns (offsets, times_flat, sizes_flat):
    path i owns the half-open slice offsets[i]:offsets[i+1], times sorted.
    """
    rate = eval_f(params.spec, params.lam)
    counts = rng.poisson(rate * t, size)
    offsets = np.zeros(size + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    total = int(offsets[-1])
    times = rng.random(total) * t
    path_ids = np.repeat(np.arange(size), counts)
    order = np.lexsort((times, path_ids))
    times = times[order]
    sizes = sample_jump_sizes(params, rng, total)
    return offsets, times, sizes


def simulate_counts_at(
    params: ProcessParams,
    checkpoints,
    horizon: float,
    rng: np.random.Generator,
    size: int,
) -> np.ndarray:
    """N(s) at several checkpoints s <= horizon for ``size`` paths.

    Returns an array of shape (size, len(checkpoints)); column j holds the
    counts at checkpoints[j], all measured on the same trajectories.
    """
    checkpoints = np.asarray(checkpoints, dtype=float)
    if np.any(checkpoints < 0) or np.any(checkpoints > horizon):
        raise DomainError("checkpoints must lie in [0, horizon]")
    offsets, times, sizes = simulate_event_batch(params, horizon, rng, size)
    path_ids = np.repeat(np.arange(size), np.diff(offsets))
    out = np.empty((size, len(checkpoints)), dtype=np.int64)
    weights = sizes.astype(np.float64)
    for j, s in enumerate(checkpoints):
        mask = times <= s
        col = np.bincount(path_ids[mask], weights=weights[mask], minlength=size)
        out[:, j] = np.clip(col, 0, _SIZE_CLAMP).astype(np.int64)
    return out


def paths_from_batch(
    params: ProcessParams,
    t: float,
    stream: RngStream,
    size: int,
    method: str = "path",
) -> list[PathRecord]:
    """PathRecords for a chunk, labeled with the stream that produced them."""
    rng = stream.generator()
    offsets, times, sizes = simulate_event_batch(params, t, rng, size)
    records = []
    label = (stream.seed, stream.stream)
    for i in range(size):
        lo, hi = offsets[i], offsets[i + 1]
        events = tuple(
            (float(times[j]), int(sizes[j])) for j in range(lo, hi)
        )
        records.append(PathRecord(t, events, label, method))
    return records


def empirical_hitting_time(params: ProcessParams, k: int, paths) -> tuple[np.ndarray, float]:
    """First-passage samples of T_k from simulated paths.

    Censored paths (never reaching k by the horizon) contribute inf; the
    censoring fraction is returned alongside and never silently dropped.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    samples = np.array([p.first_passage(k) for p in paths])
    frac = float(np.mean(np.isinf(samples))) if len(samples) else 0.0
    return samples, frac


def sample_hitting_times(
    params: ProcessParams, k: int, horizon: float, rng: np.random.Generator, size: int
) -> tuple[np.ndarray, float]:
    """Vectorized T_k samples censored at the horizon; returns (times, censored fraction)."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    offsets, times, sizes = simulate_event_batch(params, horizon, rng, size)
    cum = np.cumsum(sizes.astype(np.float64))
    base = np.concatenate([[0.0], cum])[offsets[:-1]]
    first_idx = np.searchsorted(cum, base + k - 0.5, side="left")
    reached = first_idx < offsets[1:]
    out = np.full(size, np.inf)
    out[reached] = times[first_idx[reached]]
    return out, float(np.mean(~reached))


def conditional_bridge_paths(
    params: ProcessParams,
    t: float,
    k: int,
    rng: np.random.Generator,
    n_paths: int,
    budget: int = 10**8,
) -> list[PathRecord]:
    """Paths conditioned on N(t) = k, by rejection of unconditioned paths.

    Raises BudgetError with the analytic acceptance probability when the
    proposal budget runs out.
    """
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    accept_prob = distributions.pmf(params, t, k)
    kept: list[PathRecord] = []
    proposed = 0
    batch = max(1024, int(2.0 * n_paths / max(accept_prob, 1e-12)) // 8)
    while len(kept) < n_paths:
        if proposed >= budget:
            raise BudgetError(
                f"bridge rejection exhausted {budget} proposals; analytic acceptance "
                f"probability p_{k}({t}) = {accept_prob:.3g}"
            )
        m = min(batch, budget - proposed)
        proposed += m
        offsets, times, sizes = simulate_event_batch(params, t, rng, m)
        totals = np.bincount(
            np.repeat(np.arange(m), np.diff(offsets)),
            weights=sizes.astype(np.float64),
            minlength=m,
        )
        for i in np.flatnonzero(totals == k):
            lo, hi = offsets[i], offsets[i + 1]
            events = tuple((float(times[j]), int(sizes[j])) for j in range(lo, hi))
            kept.append(PathRecord(t, events, (0, 0), "bridge"))
            if len(kept) == n_paths:
                break
    return kept


def conditional_bridge_sample(
    params: ProcessParams,
    t: float,
    k: int,
    rng: np.random.Generator,
    budget: int = 10**6,
) -> PathRecord:
    return conditional_bridge_paths(params, t, k, rng, 1, budget)[0]


# ---------------------------------------------------------------------------
# Chunked, worker-count-independent batch driver.
# ---------------------------------------------------------------------------

_METHODS = ("path", "timechange", "ctrw")


def _chunk_counts(args) -> np.ndarray:
    params, t, method, n, stream, size = args
    rng = stream.generator()
    if method == "path":
        return simulate_counts(params, t, rng, size)
    if method == "timechange":
        return simulate_time_changed_counts(params, t, rng, size)
    if method == "ctrw":
        return simulate_ctrw_counts(params, t, n, rng, size)
    raise DomainError(f"unknown simulation method {method!r}")


def batch_counts(
    params: ProcessParams,
    t: float,
    seed: int,
    size: int,
    method: str = "path",
    workers: int = 1,
    ctrw_n: int = 1,
) -> np.ndarray:
    """N(t) samples, chunked onto fixed streams (seed, chunk index).

    The result is bit-identical for any worker count because chunk streams
    and chunk sizes depend only on (seed, size).
    """
    if method not in _METHODS:
        raise DomainError(f"method must be one of {_METHODS}, got {method!r}")
    tasks = []
    start = 0
    chunk_id = 0
    while start < size:
        n = min(_CHUNK, size - start)
        tasks.append((params, t, method, ctrw_n, RngStream(seed, chunk_id), n))
        start += n
        chunk_id += 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_counts, tasks))
    else:
        parts = [_chunk_counts(task) for task in tasks]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
