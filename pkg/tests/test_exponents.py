import math

import numpy as np
import pytest

from fracle.exponents import (
    ExponentParams,
    check_pq0,
    check_pq1,
    corollary_region,
    critical_exponent,
    sample_region,
    theta_window,
)


def test_critical_exponent_values():
    assert critical_exponent(3, 1.0) == pytest.approx(6.0)
    assert critical_exponent(1, 0.5) == math.inf
    assert critical_exponent(5, 0.5) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        critical_exponent(3, 0.0)


def test_pq0_examples():
    assert check_pq0(ExponentParams(5, 0.5, 2.2, 2.2)) is True
    assert check_pq0(ExponentParams(5, 0.5, 2.5, 2.5)) is False  # hits the left bound
    assert check_pq0(ExponentParams(5, 0.5, 2.0, 2.0)) is False  # hits the right bound


def test_pq1_examples():
    assert check_pq1(ExponentParams(1, 0.25, 7.0, 9.0)) is True  # n = 4s, vacuous
    assert check_pq1(ExponentParams(5, 0.5, 2.2, 2.2)) is True
    assert check_pq1(ExponentParams(5, 0.5, 4.0, 2.2)) is False


def test_theta_window_examples():
    w = theta_window(ExponentParams(5, 0.5, 2.2, 2.2))
    assert not w.empty
    assert w.lo == pytest.approx(5.0 * (1 - 2 / 2.2), rel=1e-12)
    assert w.hi == pytest.approx(2.0 - 5.0 * (1 - 2 / 2.2), rel=1e-12)
    assert w.midpoint() == pytest.approx(1.0, rel=1e-12)

    w2 = theta_window(ExponentParams(1, 0.25, 3.0, 3.0))
    assert w2.lo == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert w2.hi == pytest.approx(4.0 / 3.0, rel=1e-12)


def test_theta_window_symmetry_under_swap():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = float(rng.uniform(1.5, 5.0))
        q = float(rng.uniform(1.5, 5.0))
        params = ExponentParams(5, 0.5, p, q)
        w = theta_window(params)
        ws = theta_window(params.swapped())
        assert ws.empty == w.empty
        assert ws.lo == pytest.approx(2.0 - w.hi, abs=1e-12)
        assert ws.hi == pytest.approx(2.0 - w.lo, abs=1e-12)
        if p == q and not w.empty:
            assert w.midpoint() == pytest.approx(1.0)


def test_theta_window_midpoint_strictly_inside():
    rng = np.random.default_rng(1)
    found = 0
    while found < 100:
        n = int(rng.choice([1, 3, 5]))
        s = float(rng.uniform(0.1, 0.9))
        p = float(rng.uniform(1.05, 6.0))
        q = float(rng.uniform(1.05, 6.0))
        params = ExponentParams(n, s, p, q)
        if not (check_pq0(params) and check_pq1(params)):
            continue
        w = theta_window(params)
        assert not w.empty
        theta = w.midpoint()
        margin = 1e-12
        assert p < 2 * n / (n - 2 * s * theta) - margin if n > 2 * s * theta else True
        two_minus = 2.0 - theta
        assert (
            q < 2 * n / (n - 2 * s * two_minus) - margin if n > 2 * s * two_minus else True
        )
        found += 1


def test_window_equivalence_on_grid():
    # zero mismatches between the window flag and the direct inequalities
    for n, s in ((5, 0.5), (3, 0.75), (1, 0.25)):
        ps = np.linspace(1.05, 6.0, 50)
        for p in ps:
            for q in ps:
                params = ExponentParams(n, s, float(p), float(q))
                assert (not theta_window(params).empty) == (
                    check_pq0(params) and check_pq1(params)
                )


def test_monotone_in_s():
    # enlarging s never shrinks the (pq0)-admissible set
    rng = np.random.default_rng(2)
    for _ in range(200):
        p = float(rng.uniform(1.05, 6.0))
        q = float(rng.uniform(1.05, 6.0))
        small = check_pq0(ExponentParams(5, 0.3, p, q))
        large = check_pq0(ExponentParams(5, 0.6, p, q))
        if small:
            assert large or 1.0 / p + 1.0 / q >= 1.0
            # the left bound only moves down with s; failures can only come
            # from the s-independent right bound
            assert large == (1.0 / p + 1.0 / q < 1.0)


def test_corollary_examples():
    assert corollary_region(ExponentParams(5, 0.5, 2.2, 2.2)) is True
    # direct-arithmetic oracle evaluated ahead of time:
    # 1/2.1 + 1/3.2 = 0.788690 < 0.8 fails the left (pq0) bound
    assert corollary_region(ExponentParams(5, 0.5, 2.1, 3.2)) is False


def test_corollary_symmetric_case_reduces():
    rng = np.random.default_rng(3)
    n, s = 5, 0.5
    rhs = 2.0 * (n - 2 * s) / (n + 2 * s)
    for _ in range(100):
        p = float(rng.uniform(1.8, 3.5))
        params = ExponentParams(n, s, p, p)
        expected = (
            check_pq0(params) and check_pq1(params) and (2.0 / (p - 1.0) >= rhs)
        )
        assert corollary_region(params) == expected


def test_corollary_sufficient_bound():
    # membership holds whenever p, q <= 2n/(n-2s) and (pq0), (pq1) hold
    n, s = 5, 0.5
    cap = 2.0 * n / (n - 2 * s)
    ps = np.linspace(1.6, cap, 25)
    for p in ps:
        for q in ps:
            params = ExponentParams(n, s, float(p), float(q))
            if check_pq0(params) and check_pq1(params):
                assert corollary_region(params)


def test_sample_region_matches_cellwise_oracle():
    region = sample_region(5, 0.5, (1.0, 6.0), (1.0, 6.0), 40)
    for p, q, f0, f1, cor, win in region.rows():
        params = ExponentParams(5, 0.5, p, q)
        assert f0 == check_pq0(params)
        assert f1 == check_pq1(params)
        assert cor == corollary_region(params)
        assert win == (not theta_window(params).empty)


def test_sample_region_deterministic_and_parallel_invariant():
    a = sample_region(5, 0.5, (1.0, 6.0), (1.0, 6.0), 30, max_workers=1)
    b = sample_region(5, 0.5, (1.0, 6.0), (1.0, 6.0), 30, max_workers=4)
    assert np.array_equal(a.pq0, b.pq0)
    assert np.array_equal(a.corollary, b.corollary)
    assert np.array_equal(a.window_nonempty, b.window_nonempty)


def test_sample_region_validation():
    with pytest.raises(ValueError):
        sample_region(5, 0.5, (1.0, 6.0), (1.0, 6.0), 1)
    with pytest.raises(ValueError):
        sample_region(5, 0.5, (6.0, 1.0), (1.0, 6.0), 10)


def test_params_validation():
    with pytest.raises(ValueError):
        ExponentParams(0, 0.5, 2.0, 2.0)
    with pytest.raises(ValueError):
        ExponentParams(3, 1.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        ExponentParams(3, 0.5, 1.0, 2.0)
