"""Tests for Brownian sampling, the positive multiplier, and the random clock."""
from __future__ import annotations

import math

import numpy as np
import pytest

from spmelab import (
    CoefficientPair,
    InvalidInputError,
    NoisePath,
    OutOfRangeError,
    TimeGrid,
    UnsupportedInputError,
    hitting_time,
    interp_H,
    interp_h,
    inverse_clock,
    limit_distribution,
    mix_seed,
    multiplier_moment,
    multiplier_path,
    refine_brownian,
    sample_brownian,
    still_path,
)

MASTER = 20260815


def test_time_grid_validation():
    with pytest.raises(InvalidInputError):
        TimeGrid(np.array([0.0]))
    with pytest.raises(InvalidInputError):
        TimeGrid(np.array([0.5, 1.0]))
    with pytest.raises(InvalidInputError):
        TimeGrid(np.array([0.0, 1.0, 1.0]))
    with pytest.raises(InvalidInputError):
        TimeGrid(np.array([0.0, np.inf]))
    with pytest.raises(InvalidInputError):
        TimeGrid.uniform(0.0, 10)
    with pytest.raises(InvalidInputError):
        TimeGrid.uniform(1.0, 0)
    grid = TimeGrid.uniform(2.0, 8)
    assert grid.horizon == 2.0
    assert grid.steps == 8
    assert grid.same_nodes(TimeGrid.uniform(2.0, 8))
    assert not grid.same_nodes(TimeGrid.uniform(2.0, 16))


def test_noise_path_validation():
    grid = TimeGrid.uniform(1.0, 4)
    with pytest.raises(InvalidInputError):
        NoisePath(grid=grid, w=np.array([0.1, 0.0, 0.0, 0.0, 0.0]), seed=1)
    with pytest.raises(InvalidInputError):
        NoisePath(grid=grid, w=np.zeros(4), seed=1)


def test_brownian_starts_at_zero_and_is_deterministic():
    grid = TimeGrid.uniform(1.0, 100)
    a = sample_brownian(grid, MASTER)
    b = sample_brownian(grid, MASTER)
    c = sample_brownian(grid, MASTER + 1)
    assert a.w[0] == 0.0
    assert np.array_equal(a.w, b.w)
    assert not np.array_equal(a.w, c.w)


def test_brownian_terminal_variance_over_many_seeds():
    grid = TimeGrid.uniform(1.0, 10_000)
    finals = np.array([sample_brownian(grid, seed).w[-1] for seed in range(10_000)])
    sample_var = float(np.var(finals, ddof=1))
    assert 0.95 <= sample_var <= 1.05


def test_multiplier_trivial_coefficients_give_identity_clock():
    grid = TimeGrid.uniform(1.0, 64)
    clock = multiplier_path(sample_brownian(grid, MASTER), CoefficientPair.constant(0.0, 0.0), gamma=2.0)
    assert np.all(clock.h == 1.0)
    assert np.max(np.abs(clock.H - grid.nodes)) <= 1e-15
    assert clock.h[0] == 1.0 and clock.H[0] == 0.0
    assert interp_h(clock, 0.0) == 1.0
    assert interp_H(clock, 0.0) == 0.0


def test_multiplier_constant_drift_matches_closed_form():
    g0, m = 0.3, 2.0
    grid = TimeGrid.uniform(1.0, 2048)
    clock = multiplier_path(still_path(grid), CoefficientPair.constant(0.0, g0), gamma=m)
    assert np.max(np.abs(clock.logh - g0 * grid.nodes)) <= 1e-12
    exact_H = (np.exp((m - 1.0) * g0 * grid.nodes) - 1.0) / ((m - 1.0) * g0)
    assert np.max(np.abs(clock.H - exact_H)) <= 1e-3


def test_multiplier_invariants_over_seed_sweep():
    grid = TimeGrid.uniform(1.5, 128)
    coeffs = CoefficientPair.constant(0.8, -0.2)
    for seed in range(50):
        clock = multiplier_path(sample_brownian(grid, seed), coeffs, gamma=2.0)
        assert np.all(clock.h > 0.0)
        assert clock.h[0] == 1.0
        assert clock.H[0] == 0.0
        assert np.all(np.diff(clock.H) > 0.0)
        assert np.max(np.abs(clock.h - np.exp(clock.logh))) == 0.0


def test_coefficient_breakpoints_must_lie_on_the_grid():
    grid = TimeGrid.uniform(1.0, 7)
    coeffs = CoefficientPair(np.array([0.0, 0.3]), np.array([1.0, 0.0]), np.array([0.0, 0.0]))
    with pytest.raises(InvalidInputError):
        multiplier_path(sample_brownian(grid, 1), coeffs, gamma=2.0)
    aligned = TimeGrid.uniform(1.0, 10)
    clock = multiplier_path(sample_brownian(aligned, 1), coeffs, gamma=2.0)
    assert clock.h[-1] > 0.0


def test_coefficient_pair_validation():
    with pytest.raises(InvalidInputError):
        CoefficientPair(np.array([0.5]), np.array([1.0]), np.array([0.0]))
    with pytest.raises(InvalidInputError):
        CoefficientPair(np.array([0.0, 0.0]), np.array([1.0, 1.0]), np.array([0.0, 0.0]))
    with pytest.raises(InvalidInputError):
        CoefficientPair(np.array([0.0, 1.0]), np.array([1.0]), np.array([0.0, 0.0]))
    with pytest.raises(InvalidInputError):
        CoefficientPair(np.array([0.0]), np.array([np.nan]), np.array([0.0]))
    with pytest.raises(InvalidInputError):
        CoefficientPair.from_pieces([(0.5, 1.0)], [(0.5, 0.0)])


def test_coefficient_integrals_are_exact():
    coeffs = CoefficientPair.from_pieces([(0.0, 1.0), (0.5, 2.0)], [(0.0, -0.4), (0.5, 0.1)])
    assert coeffs.integral_f2(2.0) == pytest.approx(0.5 * 1.0 + 1.5 * 4.0, abs=1e-14)
    assert coeffs.integral_f2(0.25) == pytest.approx(0.25, abs=1e-14)
    assert coeffs.integral_f2(0.75) == pytest.approx(0.5 + 0.25 * 4.0, abs=1e-14)
    assert coeffs.integral_g(0.75) == pytest.approx(0.5 * -0.4 + 0.25 * 0.1, abs=1e-14)
    with pytest.raises(InvalidInputError):
        coeffs.integral_g(-0.1)


def test_inverse_clock_identity_and_round_trip():
    grid = TimeGrid.uniform(1.0, 64)
    identity = multiplier_path(still_path(grid), CoefficientPair.constant(0.0, 0.0), gamma=2.0)
    for s in (0.0, 0.25, 0.77, 1.0):
        assert inverse_clock(identity, s) == pytest.approx(s, abs=1e-12)
    clock = multiplier_path(sample_brownian(grid, MASTER), CoefficientPair.constant(1.0, 0.0), gamma=2.0)
    top = float(clock.H[-1])
    for s in np.linspace(0.0, top, 23):
        assert abs(interp_H(clock, inverse_clock(clock, s)) - s) <= 1e-12 * max(1.0, top)
    with pytest.raises(OutOfRangeError):
        inverse_clock(clock, top * 1.01)
    with pytest.raises(OutOfRangeError):
        inverse_clock(clock, -0.01)


def test_inverse_clock_constant_drift_closed_form():
    g0, m = 0.4, 3.0
    grid = TimeGrid.uniform(1.0, 4096)
    clock = multiplier_path(still_path(grid), CoefficientPair.constant(0.0, g0), gamma=m)
    k = (m - 1.0) * g0
    for s in (0.1, 0.5, 1.0):
        exact_t = math.log1p(k * s) / k
        assert inverse_clock(clock, s) == pytest.approx(exact_t, abs=1e-3)


def test_hitting_time_conventions():
    grid = TimeGrid.uniform(1.0, 64)
    identity = multiplier_path(still_path(grid), CoefficientPair.constant(0.0, 0.0), gamma=2.0)
    assert hitting_time(identity, 0.0) == 0.0
    assert hitting_time(identity, 0.5) == pytest.approx(0.5, abs=1e-12)
    assert hitting_time(identity, 2.0) is None
    with pytest.raises(InvalidInputError):
        hitting_time(identity, -1.0)


def test_strong_drift_keeps_the_clock_below_the_target_level():
    alpha, m, level = 13.0, 2.0, 1.0 / 12.0
    grid = TimeGrid.uniform(40.0, 8000)
    dt = grid.horizon / grid.steps
    clock = multiplier_path(still_path(grid), CoefficientPair.constant(0.0, -alpha), gamma=m)
    # Left-endpoint sums of a decreasing integrand overshoot the continuous
    # clock by at most dt/2; the plateau must still sit below the level.
    continuous_sup = 1.0 / ((m - 1.0) * alpha)
    assert continuous_sup <= float(clock.H[-1]) <= continuous_sup + dt
    assert float(clock.H[-1]) < level
    assert hitting_time(clock, level) is None


def test_multiplier_moment_closed_forms():
    assert multiplier_moment(CoefficientPair.constant(0.7, 0.0), 1.0, 2.0) == 1.0
    assert multiplier_moment(CoefficientPair.constant(1.0, 0.5), 2.0, 0.0) == 1.0
    assert multiplier_moment(CoefficientPair.constant(1.0, 0.0), 2.0, 1.0) == pytest.approx(math.e, rel=1e-15)
    with pytest.raises(InvalidInputError):
        multiplier_moment(CoefficientPair.constant(1.0, 0.0), 2.0, -1.0)


def test_multiplier_moment_matches_monte_carlo():
    grid = TimeGrid.uniform(1.0, 512)
    coeffs = CoefficientPair.constant(1.0, 0.0)
    n = 10_000
    hs = np.empty((n, 2))
    k_half = grid.steps // 2
    for i in range(n):
        clock = multiplier_path(sample_brownian(grid, mix_seed(MASTER, i)), coeffs, gamma=2.0)
        hs[i, 0] = clock.h[k_half]
        hs[i, 1] = clock.h[-1]
    for j, t in enumerate((0.5, 1.0)):
        for p in (1.0, 2.0):
            values = hs[:, j] ** p
            mean = float(np.mean(values))
            se = float(np.std(values, ddof=1)) / math.sqrt(n)
            target = multiplier_moment(coeffs, p, t)
            assert abs(mean - target) <= 3.0 * se


def test_limit_distribution_parameters():
    drift_only = CoefficientPair.from_pieces([(0.0, 0.0)], [(0.0, 0.7), (1.0, 0.0)])
    assert limit_distribution(drift_only) == (pytest.approx(0.7), 0.0)
    unit_noise = CoefficientPair.from_pieces([(0.0, 1.0), (2.0, 0.0)], [(0.0, 0.0)])
    mean, var = limit_distribution(unit_noise)
    assert mean == pytest.approx(-1.0, abs=1e-14)
    assert var == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(UnsupportedInputError):
        limit_distribution(CoefficientPair.constant(1.0, 0.0))


def test_terminal_log_multiplier_statistics():
    # With unit noise on [0, 2] and nothing after, log h(T) = w(2) - 1 exactly:
    # mean -1, variance = accumulated squared noise = 2.
    coeffs = CoefficientPair.from_pieces([(0.0, 1.0), (2.0, 0.0)], [(0.0, 0.0)])
    grid = TimeGrid.uniform(3.0, 768)
    n = 10_000
    xis = np.empty(n)
    for i in range(n):
        clock = multiplier_path(sample_brownian(grid, mix_seed(MASTER, i)), coeffs, gamma=2.0)
        xis[i] = clock.logh[-1]
    mean = float(np.mean(xis))
    se = float(np.std(xis, ddof=1)) / math.sqrt(n)
    assert abs(mean - (-1.0)) <= 3.0 * se
    sample_var = float(np.var(xis, ddof=1))
    true_var = coeffs.integral_f2(3.0)
    assert true_var == 2.0
    band_half = 3.0 * true_var * math.sqrt(2.0 / (n - 1))
    assert true_var - band_half <= sample_var <= true_var + band_half


def test_refine_brownian_keeps_original_nodes_bitwise():
    grid = TimeGrid.uniform(1.0, 32)
    path = sample_brownian(grid, MASTER)
    fine = refine_brownian(path)
    assert fine.grid.nodes.size == 2 * grid.nodes.size - 1
    assert np.array_equal(fine.grid.nodes[0::2], grid.nodes)
    assert np.array_equal(fine.w[0::2], path.w)
    again = refine_brownian(path)
    assert np.array_equal(fine.w, again.w)


def test_log_multiplier_is_refinement_exact_and_clock_converges_linearly():
    coeffs = CoefficientPair.constant(1.0, 0.0)
    levels = 5
    seeds = range(8)
    terminal_H = np.empty((len(list(seeds)), levels))
    for row, seed in enumerate(range(8)):
        path = sample_brownian(TimeGrid.uniform(1.0, 64), seed)
        base_logh = None
        for level in range(levels):
            clock = multiplier_path(path, coeffs, gamma=2.0)
            if base_logh is None:
                base_logh = float(clock.logh[-1])
            # The left-endpoint sum for log h telescopes through inserted
            # midpoints, so refinement never changes it.
            assert abs(float(clock.logh[-1]) - base_logh) <= 1e-12
            terminal_H[row, level] = clock.H[-1]
            path = refine_brownian(path)
    errors = np.sqrt(np.mean((terminal_H[:, :-1] - terminal_H[:, -1:]) ** 2, axis=0))
    dts = 1.0 / 64 / 2 ** np.arange(levels - 1)
    slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
    assert 0.8 <= slope <= 1.2


def test_mix_seed_is_a_dispersing_bijection_prefix():
    seeds = {mix_seed(MASTER, i) for i in range(10_000)}
    assert len(seeds) == 10_000
    assert mix_seed(MASTER, 7) == mix_seed(MASTER, 7)
    assert 0 <= mix_seed(2**70, 3) < 2**64


def test_multiplier_underflow_raises():
    grid = TimeGrid.uniform(1.0, 16)
    with pytest.raises(InvalidInputError):
        multiplier_path(still_path(grid), CoefficientPair.constant(0.0, -5000.0), gamma=2.0)


def test_clock_exponent_below_one_rejected():
    grid = TimeGrid.uniform(1.0, 16)
    with pytest.raises(InvalidInputError):
        multiplier_path(still_path(grid), CoefficientPair.constant(0.0, 0.0), gamma=0.5)


def test_interp_guards_outside_horizon():
    grid = TimeGrid.uniform(1.0, 16)
    clock = multiplier_path(still_path(grid), CoefficientPair.constant(0.0, 0.0), gamma=2.0)
    with pytest.raises(OutOfRangeError):
        interp_h(clock, 1.5)
    with pytest.raises(OutOfRangeError):
        interp_H(clock, -0.5)
