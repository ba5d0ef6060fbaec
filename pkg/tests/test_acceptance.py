"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a single PASS/FAIL line (shown in the terminal summary)
before asserting, so a failing criterion still reports its measured values.
"""

import itertools
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import stats

from dipolenet.activation import is_feasible, max_active_exact, max_active_greedy, tblas_good_set
from dipolenet.asymptotics import big_jump_check, mz_slln_check, threshold_for_tail_mass
from dipolenet.channel import (
    ChannelRealization,
    interference_cdf,
    realize_channel,
    sample_interference_gain,
    tail_exponent_plateau,
    tail_probability,
)
from dipolenet.field import sample_field
from dipolenet.harness import fit_scaling, replication_seed, run_sweep
from dipolenet.params import NetworkParams

from tests.oracles import brute_force_max

pytestmark = pytest.mark.acceptance

# fixed before any acceptance run
ACCEPTANCE_SEED = 20261018
PLATEAU_3 = (2.0 / 3.0) * math.gamma(2.0 / 3.0)


def _record(log, number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    log.append((number, line))
    print(line)
    return ok


def test_c01_tail_law_ks(acceptance_log):
    start = time.perf_counter()
    x = sample_interference_gain(3.0, np.random.default_rng(ACCEPTANCE_SEED), 1_000_000)
    ks = stats.kstest(x, lambda z: interference_cdf(z, 3.0)).statistic
    elapsed = time.perf_counter() - start
    ok = ks < 0.01 and elapsed < 30
    _record(acceptance_log, 1, ok, f"KS={ks:.5f} (< 0.01) on 10^6 draws in {elapsed:.1f}s (< 30s)")
    assert ok


def test_c02_heavy_tail_exponent(acceptance_log):
    z = np.logspace(2, 6, 161)
    slope = np.polyfit(np.log(z), np.log(tail_probability(z, 3.0)), 1)[0]
    (plateau,) = tail_exponent_plateau(3.0, [1e6])
    ok = abs(slope + 2 / 3) <= 0.02 and abs(plateau - PLATEAU_3) <= 1e-3
    _record(acceptance_log, 2, ok,
            f"slope={slope:.6f} (-2/3 +- 0.02); z^(2/3) P(h>z) at 1e6 = {plateau:.6f} vs {PLATEAU_3:.6f} (+- 1e-3)")
    assert ok


def test_c03_mz_slln(acceptance_log):
    start = time.perf_counter()
    report = mz_slln_check(0.5, 3.0, [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6], 100, ACCEPTANCE_SEED)
    elapsed = time.perf_counter() - start
    med = report.statistic_per_size
    drop = med[0] / med[-1]
    ok = drop >= 10 and report.passed and elapsed < 120
    _record(acceptance_log, 3, ok,
            f"median n^-2 S_n {med[0]:.4g} -> {med[-1]:.4g}, drop x{drop:.1f} (>= 10); "
            f"99% CI rule {'met' if report.passed else 'not met'}; {elapsed:.1f}s (< 120s)")
    assert ok


def test_c04_single_big_jump(acceptance_log):
    x = threshold_for_tail_mass(50, 3.0, 0.01)
    report = big_jump_check(50, 3.0, [x], 1_000_000, ACCEPTANCE_SEED)
    lo, hi = report.intervals[0]
    ok = report.passed and hi >= 0.8 and lo <= 1.25
    _record(acceptance_log, 4, ok,
            f"x={x:.6g}, ratio={report.statistic_per_size[0]:.4f}, 99% CI [{lo:.4f}, {hi:.4f}] meets [0.8, 1.25]; "
            f"P(max>x)/P(S>x)={report.details['max_over_sum'][0]:.4f}")
    assert ok


def test_c05_good_count_concentration(acceptance_log):
    n, gamma, reps = 1e4, 0.3, 500
    # M_n counts good links among the pairs of one unit area
    params = NetworkParams(n=n, gamma_exp=gamma, window_area=1.0)
    target = n ** (1 - gamma)
    ratios = []
    for rep in range(reps):
        seed = replication_seed(ACCEPTANCE_SEED, n, rep)
        field_seed, channel_seed = np.random.SeedSequence(seed).generate_state(2, np.uint64)
        field = sample_field(params, int(field_seed))
        ch = realize_channel(field, params, int(channel_seed))
        ratios.append(len(tblas_good_set(ch, params).indices) / target)
    ratios = np.array(ratios)
    inside = np.mean((ratios >= 0.9) & (ratios <= 1.1))
    ok = inside >= 0.99
    _record(acceptance_log, 5, ok,
            f"M_n/n^0.7 in [0.9, 1.1] for {inside:.1%} of {reps} runs (>= 99%); "
            f"mean ratio {ratios.mean():.4f}, range [{ratios.min():.3f}, {ratios.max():.3f}]")
    assert ok


@pytest.fixture(scope="module")
def scaling_sweep():
    grid = list(range(100, 1001, 100))
    start = time.perf_counter()
    records = run_sweep(NetworkParams(), grid, 100, "tblas", "pathloss", ACCEPTANCE_SEED)
    return records, time.perf_counter() - start


def test_c06_scaling_law(acceptance_log, scaling_sweep):
    records, elapsed = scaling_sweep
    free = fit_scaling(records)
    fixed = fit_scaling(records, fix_exponent=0.25)
    pinned = fit_scaling(records, fix_exponent=0.25, fix_amplitude=1.0)
    means = [np.mean([r.eta_n for r in records if r.n == n]) for n in range(100, 1001, 100)]
    spread = max(means) - min(means)
    rms_share = fixed.residual_rms / spread
    high_rate = run_sweep(NetworkParams(r_min=1.5e5), list(range(100, 1001, 100)), 100,
                          "tblas", "pathloss", ACCEPTANCE_SEED)
    pinned_150 = fit_scaling(high_rate, fix_exponent=0.25, fix_amplitude=1.0)
    ok_a = 0.15 <= free.exponent <= 0.35
    ok_b = rms_share <= 0.15
    c1_note = (f"C1 (amplitude 1) = {pinned.c1:.1f} vs 192 [{'within' if abs(pinned.c1 - 192) <= 96 else 'outside'} 50%], "
               f"{pinned_150.c1:.1f} vs 145 [{'within' if abs(pinned_150.c1 - 145) <= 72.5 else 'outside'} 50%] (informational)")
    _record(acceptance_log, 6, ok_a and ok_b,
            f"(a) free b={free.exponent:.4g} ({'ok' if ok_a else 'not in'} [0.15, 0.35]); "
            f"(b) fixed-b RMS={fixed.residual_rms:.3f} = {rms_share:.1%} of mean range {spread:.2f} (<= 15%); "
            f"means {means[0]:.1f} .. {means[-1]:.1f}; {c1_note}; sweep {elapsed:.1f}s")
    assert ok_a and ok_b


def _small_instances(count, max_size, seed):
    """Field-backed instances under the default physical parameters plus unit-parameter explicit ones."""
    rng = np.random.default_rng(seed)
    out = []
    field_params = NetworkParams(n=2.0)
    k = 0
    while len(out) < count // 2:
        field = sample_field(field_params, replication_seed(seed, 2.0, k))
        k += 1
        if len(field) > max_size:
            continue
        out.append((realize_channel(field, field_params, int(rng.integers(2 ** 63))), field_params))
    unit = NetworkParams(n=100.0, power=1.0, noise_var=1.0, bandwidth=1.0, r_min=0.3)
    while len(out) < count:
        size = int(rng.integers(0, max_size + 1))
        direct = rng.exponential(2.0, size)
        mask = rng.random((size, size)) < 0.6
        gains = np.where(mask, rng.pareto(1.5, (size, size)), 0.0)
        np.fill_diagonal(gains, 0.0)
        cross = {(i, j): float(gains[i, j]) for i in range(size) for j in range(size) if gains[i, j] > 0}
        out.append((ChannelRealization(direct, 3.0, cross), unit))
    return out


def test_c07_solver_oracle_equivalence(acceptance_log):
    instances = _small_instances(200, 10, ACCEPTANCE_SEED)
    mismatches = greedy_over = infeasible = 0
    sizes = []
    for ch, p in instances:
        n = len(ch)
        gains = ch.gain_matrix(np.arange(n)).tolist()
        expected = brute_force_max(ch.direct.tolist(), gains, p.power, p.noise_var, p.bandwidth, p.r_min)
        exact = max_active_exact(ch, p)
        greedy = max_active_greedy(ch, p)
        mismatches += exact.active_set != expected
        greedy_over += greedy.eta_n > exact.eta_n
        infeasible += not (is_feasible(exact.active_set, ch, p) and is_feasible(greedy.active_set, ch, p))
        sizes.append(exact.eta_n)
    ok = mismatches == 0 and greedy_over == 0 and infeasible == 0
    _record(acceptance_log, 7, ok,
            f"{len(instances)} instances (<= 10 dipoles): exact != enumeration {mismatches}, "
            f"greedy > exact {greedy_over}, infeasible outputs {infeasible}; mean |A| {np.mean(sizes):.2f}")
    assert ok


def test_c08_downward_closed(acceptance_log):
    rng = np.random.default_rng(ACCEPTANCE_SEED + 8)
    instances = _small_instances(1000, 12, ACCEPTANCE_SEED + 8)
    checked = counterexamples = 0
    for ch, p in instances:
        feasible = sorted(max_active_greedy(ch, p).active_set)
        subsets = [c for r in range(len(feasible) + 1) for c in itertools.combinations(feasible, r)]
        pick = rng.choice(len(subsets), size=min(len(subsets), 16), replace=False)
        for idx in pick:
            checked += 1
            counterexamples += not is_feasible(subsets[idx], ch, p)
    ok = counterexamples == 0
    _record(acceptance_log, 8, ok,
            f"{len(instances)} instances, {checked} random subsets of feasible sets: {counterexamples} infeasible")
    assert ok


def test_c09_cli_determinism(acceptance_log, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_grid": [100, 300, 500, 700], "reps": 10}))
    outputs = []
    for run, extra in (("a", []), ("b", []), ("c", ["--workers", "2"])):
        out = tmp_path / run
        proc = subprocess.run([sys.executable, "-m", "dipolenet", "simulate", "--config", str(cfg),
                               "--seed", str(ACCEPTANCE_SEED), "--out", str(out), *extra],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0, proc.stderr
        outputs.append((out / "records.csv").read_bytes())
    same = outputs[0] == outputs[1]
    _record(acceptance_log, 9, same,
            f"two simulate runs: CSV byte-identical={same} ({len(outputs[0])} bytes); "
            f"with --workers 2 identical={outputs[0] == outputs[2]}")
    assert same


def test_c10_remark_comparison(acceptance_log):
    grid = [100, 200, 500, 1000, 2000, 5000, 10000]
    reps = 20
    flat = run_sweep(NetworkParams(), grid, reps, "tblas", "no_pathloss", ACCEPTANCE_SEED)
    geo = run_sweep(NetworkParams(), [10000], reps, "tblas", "pathloss", ACCEPTANCE_SEED)
    flat_means = np.array([np.mean([r.eta_n for r in flat if r.n == n]) for n in grid])
    geo_mean = np.mean([r.eta_n for r in geo])
    ns = np.array(grid, dtype=float)

    def rms(feature):
        design = np.column_stack((np.ones_like(feature), feature))
        coef, *_ = np.linalg.lstsq(design, flat_means, rcond=None)
        return float(np.sqrt(np.mean((design @ coef - flat_means) ** 2)))

    rms_log2, rms_quarter = rms(np.log(ns) ** 2), rms(ns ** 0.25)
    ok_counts = flat_means[-1] < geo_mean
    ok_fit = rms_log2 < rms_quarter
    _record(acceptance_log, 10, ok_counts and ok_fit,
            f"n=1e4 mean counts no_pathloss={flat_means[-1]:.1f} vs pathloss={geo_mean:.1f} "
            f"({'smaller' if ok_counts else 'not smaller'}); no_pathloss RMS vs (ln n)^2={rms_log2:.2f}, "
            f"vs n^(1/4)={rms_quarter:.2f} ({'better' if ok_fit else 'not better'})")
    assert ok_counts and ok_fit
