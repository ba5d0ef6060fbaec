"""Monte Carlo checks of the limit theorems behind the scaling law.

Each checker is a pure function of its arguments and seed. Replications
draw from child streams spawned off one ``SeedSequence``, and every
verdict is taken on 99% confidence intervals, never on bare point
estimates.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from scipy.optimize import brentq

from dipolenet.channel import sample_direct_gain, sample_interference_gain, tail_probability
from dipolenet.errors import ParameterError
from dipolenet.params import DEFAULT_BANDWIDTH_HZ, DEFAULT_R_MIN

CONFIDENCE = 0.99
SLLN_DROP_FACTOR = 0.1
RATIO_BAND = (0.8, 1.25)
MAX_TAIL_MASS = 0.05

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass
class LimitTestReport:
    """Outcome of one checker run.

    ``sample_sizes`` is the grid the statistic was evaluated on: sample
    sizes for the SLLN checks, thresholds ``x`` for the big-jump check and
    intensities ``n`` for the feasibility-event check.
    """

    test_name: str
    sample_sizes: list
    statistic_per_size: list
    replications: int
    passed: bool
    threshold_used: float
    seed: int
    intervals: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out

    def csv_rows(self):
        yield ("size", "statistic")
        for size, value in zip(self.sample_sizes, self.statistic_per_size):
            yield (size, value)


def wilson_interval(successes: int, trials: int, level: float = CONFIDENCE) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(level, method="wilson")
    return float(ci.low), float(ci.high)


def median_interval(values, level: float = CONFIDENCE) -> tuple[float, float]:
    """Distribution-free (order-statistic) interval for the median."""
    values = np.asarray(values, dtype=float)
    if np.all(values == values[0]):
        return float(values[0]), float(values[0])
    ci = stats.quantile_test(values, q=np.median(values), p=0.5).confidence_interval(level)
    lo, hi = float(ci.low), float(ci.high)
    # quantile_test returns nan when too few samples support the level
    lo = float(values.min()) if math.isnan(lo) else lo
    hi = float(values.max()) if math.isnan(hi) else hi
    return lo, hi


def _interference_sampler(alpha: float) -> Sampler:
    return lambda rng, size: sample_interference_gain(alpha, rng, size)


def _check_moment(p, alpha):
    if not 0 < p < 2.0 / alpha:
        raise ParameterError(
            f"p={p} violates 0 < p < 2/alpha={2.0 / alpha:.6g}: "
            "the p-th moment of the interference gain is infinite")


def _check_sizes(sizes):
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 0 for s in sizes) or sizes != sorted(sizes):
        raise ParameterError("sizes must be a nonempty ascending list of nonnegative integers")
    return sizes


def _prefix_sums(rng, sampler, cut_points, chunk=1 << 20):
    """Partial sums of one sample path evaluated at the (ascending) cut points."""
    out = np.zeros(len(cut_points))
    total, done, k = 0.0, 0, 0
    end = max(cut_points, default=0)
    while k < len(cut_points) and cut_points[k] == 0:
        k += 1
    while done < end:
        size = min(chunk, end - done)
        block = np.cumsum(sampler(rng, size)) + total
        while k < len(cut_points) and cut_points[k] <= done + size:
            out[k] = block[cut_points[k] - done - 1]
            k += 1
        total = block[-1]
        done += size
    return out


def _decreasing_rule(medians, intervals):
    """Last median's upper bound below 10% of the first's lower bound, and the
    medians nonincreasing apart from at most one inversion."""
    inversions = sum(b > a for a, b in zip(medians, medians[1:]))
    drop = intervals[-1][1] <= SLLN_DROP_FACTOR * intervals[0][0]
    return bool(drop and inversions <= 1)


def mz_slln_check(p: float, alpha: float, sizes: Sequence[int], reps: int, seed: int,
                  sampler: Sampler | None = None) -> LimitTestReport:
    """Median of ``n**(-1/p) * S_n`` across replications, per sample size.

    Each replication is a single sample path; partial sums are read off at
    every size, so the sizes probe one trajectory as the strong law does.
    """
    _check_moment(p, alpha)
    sizes = _check_sizes(sizes)
    sampler = sampler or _interference_sampler(alpha)
    children = np.random.SeedSequence(seed).spawn(reps)
    table = np.empty((reps, len(sizes)))
    scale = np.array([s ** (-1.0 / p) if s > 0 else 0.0 for s in sizes])
    for r, child in enumerate(children):
        table[r] = _prefix_sums(np.random.default_rng(child), sampler, sizes) * scale
    return _slln_report("mz_slln", sizes, table, reps, seed, p)


def poisson_slln_check(p: float, alpha: float, mean_sizes: Sequence[int], reps: int, seed: int,
                       sampler: Sampler | None = None,
                       count_sampler: Callable[[np.random.Generator, float], int] | None = None
                       ) -> LimitTestReport:
    """As :func:`mz_slln_check` with the index replaced by ``N_n ~ Poisson(n)``.

    The counts come from a stream separate from the summands. An empty sum
    gives statistic 0.
    """
    _check_moment(p, alpha)
    sizes = _check_sizes(mean_sizes)
    sampler = sampler or _interference_sampler(alpha)
    count_sampler = count_sampler or (lambda rng, mean: int(rng.poisson(mean)))
    children = np.random.SeedSequence(seed).spawn(reps)
    table = np.empty((reps, len(sizes)))
    counts_table = np.empty((reps, len(sizes)), dtype=np.int64)
    for r, child in enumerate(children):
        path_seq, count_seq = child.spawn(2)
        count_rng = np.random.default_rng(count_seq)
        counts = np.array([count_sampler(count_rng, s) for s in sizes], dtype=np.int64)
        order = np.argsort(counts, kind="stable")
        sums = np.empty(len(sizes))
        sums[order] = _prefix_sums(np.random.default_rng(path_seq), sampler, counts[order].tolist())
        with np.errstate(divide="ignore"):
            scale = np.where(counts > 0, counts.astype(float) ** (-1.0 / p), 0.0)
        table[r] = sums * scale
        counts_table[r] = counts
    report = _slln_report("poisson_slln", sizes, table, reps, seed, p)
    report.details["mean_index"] = counts_table.mean(axis=0).tolist()
    return report


def _slln_report(name, sizes, table, reps, seed, p):
    medians = np.median(table, axis=0).tolist()
    intervals = [median_interval(table[:, k]) for k in range(len(sizes))]
    return LimitTestReport(
        test_name=name, sample_sizes=list(sizes), statistic_per_size=medians,
        replications=reps, passed=_decreasing_rule(medians, intervals),
        threshold_used=SLLN_DROP_FACTOR, seed=seed, intervals=intervals,
        details={"p": p, "normalisation": f"n^(-1/{p:g})"})


def _chunks(total, chunk):
    while total > 0:
        yield min(chunk, total)
        total -= chunk


def big_jump_check(m: int, alpha: float, x_grid: Sequence[float], reps: int, seed: int,
                   chunk_cells: int = 4_000_000) -> LimitTestReport:
    """Ratio ``P(S_m > x) / (m P(X > x))`` with Wilson intervals per threshold.

    Passes when every ratio interval meets ``[0.8, 1.25]``. Also records
    ``P(max > x) / P(S_m > x)`` in ``details``.
    """
    if m < 1:
        raise ParameterError("m must be a positive integer")
    xs = [float(x) for x in x_grid]
    if not xs:
        raise ParameterError("x_grid must not be empty")
    single = np.array([tail_probability(x, alpha) for x in xs])
    too_small = [x for x, t in zip(xs, single) if m * t > MAX_TAIL_MASS]
    if too_small:
        raise ParameterError(
            f"x values {too_small} are not in the tail: need m*P(X>x) <= {MAX_TAIL_MASS}; "
            "increase x (see threshold_for_tail_mass)")
    over_sum = np.zeros(len(xs), dtype=np.int64)
    over_max = np.zeros(len(xs), dtype=np.int64)
    rows_per_chunk = max(1, chunk_cells // m)
    n_chunks = -(-reps // rows_per_chunk)
    x_arr = np.asarray(xs)
    for child, rows in zip(np.random.SeedSequence(seed).spawn(n_chunks), _chunks(reps, rows_per_chunk)):
        draws = sample_interference_gain(alpha, np.random.default_rng(child), (rows, m))
        s = draws.sum(axis=1)
        mx = draws.max(axis=1)
        over_sum += (s[:, None] > x_arr[None, :]).sum(axis=0)
        over_max += (mx[:, None] > x_arr[None, :]).sum(axis=0)
    ratios, intervals, max_ratio = [], [], []
    lo_band, hi_band = RATIO_BAND
    passed = True
    for k, x in enumerate(xs):
        denom = m * single[k]
        lo, hi = wilson_interval(over_sum[k], reps)
        ratios.append(float(over_sum[k] / reps / denom))
        intervals.append((float(lo / denom), float(hi / denom)))
        passed &= hi / denom >= lo_band and lo / denom <= hi_band
        max_ratio.append(float(over_max[k] / over_sum[k]) if over_sum[k] else math.nan)
    return LimitTestReport(
        test_name="big_jump", sample_sizes=xs, statistic_per_size=ratios, replications=reps,
        passed=bool(passed), threshold_used=MAX_TAIL_MASS, seed=seed, intervals=intervals,
        details={"m": m, "ratio_band": list(RATIO_BAND), "max_over_sum": max_ratio,
                 "exceed_sum": over_sum.tolist(), "exceed_max": over_max.tolist(),
                 "m_tail": (m * single).tolist(), "x_grid": xs})


def threshold_for_tail_mass(m: int, alpha: float, mass: float) -> float:
    """Solve ``m * P(X > x) = mass`` for ``x``."""
    if not 0 < mass < m:
        raise ParameterError("mass must lie in (0, m)")
    f = lambda lx: math.log(m * tail_probability(math.exp(lx), alpha)) - math.log(mass)
    hi = 1.0
    while f(hi) > 0:
        hi *= 2
    return math.exp(brentq(f, -50.0, hi, xtol=1e-13))


def feasibility_event_probability(m: int, eps: float, h0: float, p: float, alpha: float,
                                  reps: int, rng: np.random.Generator,
                                  chunk_cells: int = 4_000_000) -> tuple[int, int]:
    """Count replications with ``m**(-1/p) * sum_j h_j 1[direct_j > h0] > eps``.

    Returns ``(hits, reps)``. With ``m = 0`` the sum is empty and never exceeds ``eps``.
    """
    if m == 0:
        return 0, reps
    hits = 0
    threshold = eps * m ** (1.0 / p)
    for rows in _chunks(reps, max(1, chunk_cells // m)):
        cross = sample_interference_gain(alpha, rng, (rows, m))
        direct = sample_direct_gain(rng, (rows, m))
        hits += int(np.count_nonzero((cross * (direct > h0)).sum(axis=1) > threshold))
    return hits, reps


def feasibility_event_decay(delta: float, gamma_exp: float, p: float, alpha: float,
                            n_grid: Sequence[float], reps: int, seed: int,
                            r_min: float = DEFAULT_R_MIN / DEFAULT_BANDWIDTH_HZ) -> LimitTestReport:
    """Probability that the thinned interference sum leaves its SLLN window.

    For each ``n``: ``m = ceil(n**delta)``, ``h0 = gamma ln n`` and
    ``eps = gamma * exp(-r_min) * n**(-delta/p) * ln n`` with ``r_min`` in
    nats (rate divided by bandwidth). Passes when the estimates over the
    upper half of the grid decrease strictly, interval against interval.
    """
    if not 0 < delta < gamma_exp < 0.5:
        raise ParameterError(f"need 0 < delta < gamma_exp < 1/2, got delta={delta}, gamma_exp={gamma_exp}")
    _check_moment(p, alpha)
    ns = [float(n) for n in n_grid]
    if not ns or any(n <= 1 for n in ns) or ns != sorted(ns):
        raise ParameterError("n_grid must be ascending with every n > 1")
    c1 = (2.0 / alpha) * math.gamma(2.0 / alpha)
    estimates, intervals, ms, epsilons, approx = [], [], [], [], []
    for n, child in zip(ns, np.random.SeedSequence(seed).spawn(len(ns))):
        m = math.ceil(n ** delta - 1e-9)
        eps = gamma_exp * math.exp(-r_min) * n ** (-delta / p) * math.log(n)
        h0 = gamma_exp * math.log(n)
        hits, total = feasibility_event_probability(m, eps, h0, p, alpha, reps,
                                                    np.random.default_rng(child))
        estimates.append(hits / total)
        intervals.append(wilson_interval(hits, total))
        ms.append(m)
        epsilons.append(eps)
        approx.append(c1 * m ** (1 - 2.0 / (p * alpha)) * eps ** (-2.0 / alpha) * n ** -gamma_exp)
    top = intervals[len(intervals) // 2:]
    passed = len(top) >= 2 and all(b[1] < a[0] for a, b in zip(top, top[1:]))
    return LimitTestReport(
        test_name="feasibility_event", sample_sizes=ns, statistic_per_size=estimates,
        replications=reps, passed=bool(passed), threshold_used=CONFIDENCE, seed=seed,
        intervals=intervals,
        details={"m": ms, "eps": epsilons, "single_jump_approx": approx,
                 "reference_rate": [n ** -gamma_exp * math.log(n) ** (-2.0 / alpha) for n in ns],
                 "delta": delta, "gamma_exp": gamma_exp, "p": p, "r_min_nats": r_min})
