import math

import numpy as np
import pytest
from mpmath import mpf

import selbounds as sb
from helpers import batch_entropy, feasible_batch, mp_entropy, mp_log2, mp_max_entropy


def mp_pi_lower(n, m, h) -> float:
    return float((mpf(h) - 1 - mp_log2(m)) / mp_log2(mpf(n) / m - 1))


def mp_invert_max_entropy(n, m, h, iters=200) -> float:
    """Bisection of the closed-form maximum entropy in 50-digit arithmetic."""
    lo, hi = mpf(0), mpf(n - m) / n
    for _ in range(iters):
        mid = (lo + hi) / 2
        if mp_max_entropy(n, m, float(mid)) < h:
            lo = mid
        else:
            hi = mid
    return float(lo)


class TestEntropyLowerBound:
    def test_reference_shape_under_minimum(self):
        shape = sb.SystemShape(15, 5, 0.4)
        assert sb.entropy_lower_bound(shape) <= sb.min_entropy(shape).min_entropy_bits

    def test_boundary(self):
        assert sb.entropy_lower_bound(sb.SystemShape(4, 2, 0.5)) <= 2.0

    def test_vanishes_with_pi(self):
        assert sb.entropy_lower_bound(sb.SystemShape(12, 4, 1e-7)) <= 1e-4
        assert sb.entropy_lower_bound(sb.SystemShape(12, 4, 0.0)) == 0.0

    def test_under_exact_minimum_everywhere(self, rng):
        for n in range(2, 9):
            for m in range(1, n + 1):
                top = (n - m) / n
                for pi in np.linspace(0.0, top, 25):
                    shape = sb.SystemShape(n, m, float(pi))
                    floor = sb.entropy_lower_bound(shape)
                    exact = sb.min_entropy(shape).min_entropy_bits
                    assert floor <= exact + 1e-9


class TestPiLowerBound:
    def test_narrow_selection_formula(self):
        assert sb.pi_lower_bound(20, 6, 4.0) == pytest.approx(
            mp_pi_lower(20, 6, 4.0), abs=1e-12
        )

    def test_wide_selection_zero(self):
        assert sb.pi_lower_bound(30, 20, 4.5) == 0.0

    def test_negative_formula_clamped(self):
        assert sb.pi_lower_bound(20, 6, 1.0) == 0.0

    def test_bad_entropy(self):
        with pytest.raises(sb.BadEntropyError):
            sb.pi_lower_bound(20, 6, math.log2(20) + 1e-3)
        with pytest.raises(sb.BadEntropyError):
            sb.pi_lower_bound(20, 6, -0.5)

    def test_monotone_in_entropy(self):
        n, m = 50, 12
        hs = np.linspace(0.0, math.log2(n), 200)
        vals = [sb.pi_lower_bound(n, m, float(h)) for h in hs]
        assert (np.diff(vals) >= -1e-12).all()


class TestPiUpperBound:
    def test_zero_entropy(self):
        # the 1 - h/log2(m) entry saturates, so only the feasibility clamp
        # remains for m >= 2; m = 1 has no such entry and collapses to 0
        assert sb.pi_upper_bound(12, 4, 0.0) == pytest.approx(8 / 12, abs=1e-12)
        assert sb.pi_upper_bound(12, 1, 0.0) == 0.0

    def test_two_state_boundary(self):
        assert sb.pi_upper_bound(2, 1, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_reference_interval(self):
        ub = sb.pi_upper_bound(20, 6, 4.0)
        assert sb.pi_lower_bound(20, 6, 4.0) <= ub <= 0.7 + 1e-12

    def test_never_below_lower(self, rng):
        for _ in range(300):
            n = int(rng.integers(2, 80))
            m = int(rng.integers(1, n + 1))
            h = float(rng.uniform(0, math.log2(n)))
            assert sb.pi_upper_bound(n, m, h) >= sb.pi_lower_bound(n, m, h) - 1e-12


class TestFlawedBound:
    def test_wide_selection_blows_up(self):
        # for m >= n/2 the uncorrected formula can exceed the feasible
        # ceiling, which is exactly why it is comparison-only
        flawed = sb.flawed_pi_lower_bound(30, 20, 4.5)
        assert flawed > (30 - 20) / 30
        assert sb.pi_lower_bound(30, 20, 4.5) == 0.0

    def test_undefined_at_half(self):
        assert math.isnan(sb.flawed_pi_lower_bound(10, 5, 2.0))

    def test_matches_corrected_when_narrow(self):
        assert sb.flawed_pi_lower_bound(20, 6, 4.0) == pytest.approx(
            sb.pi_lower_bound(20, 6, 4.0), abs=1e-12
        )


class TestTightBounds:
    def test_uniform_boundary_collapse(self):
        assert sb.pi_bounds_tight(4, 2, 2.0) == (0.5, 0.5)

    def test_zero_entropy_point(self):
        assert sb.pi_bounds_tight(9, 4, 0.0) == (0.0, 0.0)

    def test_binary_entropy_point(self):
        h = mp_entropy([0.7, 0.3])
        lo, hi = sb.pi_bounds_tight(3, 1, h)
        assert lo == pytest.approx(mp_invert_max_entropy(3, 1, h), abs=1e-9)
        # [0.7, 0.3, 0] attains this entropy with tail mass 0.3, and no
        # feasible tail above 0.3 can reach an entropy this low
        assert hi == pytest.approx(0.3, abs=1e-9)

    def test_degenerate_full_entropy(self):
        for n, m in [(6, 2), (9, 5), (30, 17)]:
            lo, hi = sb.pi_bounds_tight(n, m, math.log2(n))
            assert lo == pytest.approx((n - m) / n, abs=1e-12)
            assert hi == pytest.approx((n - m) / n, abs=1e-12)

    def test_lower_matches_high_precision_inversion(self, rng):
        for _ in range(25):
            n = int(rng.integers(3, 40))
            m = int(rng.integers(1, n))
            h = float(rng.uniform(math.log2(m) + 0.05, math.log2(n) - 0.05))
            if h <= 0:
                continue
            got, _ = sb.pi_bounds_tight(n, m, h)
            assert got == pytest.approx(mp_invert_max_entropy(n, m, h), abs=1e-8)


class TestMeritBounds:
    def test_complement_of_reference(self):
        lb, ub = sb.merit_bounds_k1(20, 6, 4.0)
        assert ub == pytest.approx(1.0 - sb.pi_lower_bound(20, 6, 4.0), abs=1e-12)
        assert lb == pytest.approx(1.0 - sb.pi_upper_bound(20, 6, 4.0), abs=1e-12)

    def test_uniform_boundary(self):
        # at full entropy the lower error bound is the wide-selection 0, so
        # the merit ceiling is the vacuous 1.0; only the floor is informative
        lb, ub = sb.merit_bounds_k1(4, 2, 2.0)
        assert lb == pytest.approx(0.5, abs=1e-12)
        assert ub == pytest.approx(1.0, abs=1e-12)

    def test_full_selection(self):
        lb, ub = sb.merit_bounds_k1(7, 7, 1.3)
        assert lb == 1.0 and ub == 1.0

    def test_closed_form_upper_when_narrow(self, rng):
        for _ in range(100):
            n = int(rng.integers(5, 60))
            m = int(rng.integers(1, max(2, (n - 1) // 2)))
            if 2 * m >= n:
                continue
            h = float(rng.uniform(1.0 + math.log2(m), math.log2(n)))
            _, ub = sb.merit_bounds_k1(n, m, h)
            closed = (math.log2(n - m) - h + 1.0) / math.log2(n / m - 1.0)
            assert ub == pytest.approx(min(max(closed, m / n), 1.0), abs=1e-9)


class TestSandwichAndNesting:
    def test_random_distributions_respect_all_bounds(self, rng):
        # analytic encloses tight encloses every observed tail mass at the
        # observed entropy
        for _ in range(40):
            n = int(rng.integers(2, 50))
            m = int(rng.integers(1, n + 1))
            pi = float(rng.uniform(0, (n - m) / n)) if m < n else 0.0
            inverter = sb.TightInverter(n, m, grid=1024)
            rows = feasible_batch(n, m, pi, 25, rng)
            for row in rows:
                h = float(batch_entropy(row[None, :])[0])
                h = min(max(h, 0.0), math.log2(n))
                pi_obs = float(row[m:].sum())
                lb = sb.pi_lower_bound(n, m, h)
                ub = sb.pi_upper_bound(n, m, h)
                lt, ut = sb.pi_bounds_tight(n, m, h, inverter=inverter)
                assert lb - 1e-9 <= lt <= pi_obs + 1e-9
                assert pi_obs - 1e-9 <= ut <= ub + 1e-9


class TestBoundReport:
    def test_json_schema_keys(self):
        report = sb.build_report(20, 6, 4.0, include_flawed=True)
        d = report.to_dict()
        assert set(d) == {"n", "m", "k", "mode", "entropy_bits", "pi", "psi", "clamped"}
        assert set(d["pi"]) == {
            "lb_analytic", "ub_analytic", "lb_tight", "ub_tight",
            "lb_raw", "ub_raw", "lb_flawed",
        }
        assert set(d["psi"]) == {"lb", "ub"}

    def test_nesting_invariant(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 40))
            m = int(rng.integers(1, n + 1))
            h = float(rng.uniform(0, math.log2(n)))
            r = sb.build_report(n, m, h, tight_grid=512)
            assert r.pi_lb_analytic - 1e-9 <= r.pi_lb_tight
            assert r.pi_lb_tight <= r.pi_ub_tight + 1e-9
            assert r.pi_ub_tight <= r.pi_ub_analytic + 1e-9
            assert 0.0 <= r.pi_lb_analytic <= r.pi_ub_analytic <= (n - m) / n + 1e-12

    def test_psi_complements(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 40))
            m = int(rng.integers(1, n + 1))
            h = float(rng.uniform(0, math.log2(n)))
            r = sb.build_report(n, m, h, tight_grid=64)
            assert r.psi_lb == pytest.approx(1.0 - r.pi_ub_analytic, abs=1e-12)
            assert r.psi_ub == pytest.approx(1.0 - r.pi_lb_analytic, abs=1e-12)
            assert m / n - 1e-12 <= r.psi_lb <= r.psi_ub <= 1.0 + 1e-12

    def test_clamp_flags_recorded(self):
        r = sb.build_report(12, 4, 0.0, tight_grid=64)
        assert "pi_ub_analytic_at_ceiling" in r.clamped
        assert r.pi_ub_raw == pytest.approx(1.0)
        assert r.pi_ub_analytic == pytest.approx(8 / 12)


class TestBoundsForK:
    def test_k1_identity_both_modes(self):
        d = sb.make_distribution([0.4, 0.3, 0.2, 0.1])
        h = sb.entropy(d)
        direct = sb.build_report(4, 2, h, tight_grid=256)
        for mode in ("unique", "repeated"):
            r = sb.bounds_for_k(d, 2, 1, mode, tight_grid=256)
            assert r.n == 4 and r.m == 2
            assert r.entropy_bits == pytest.approx(h, abs=1e-12)
            assert r.pi_lb_analytic == pytest.approx(direct.pi_lb_analytic, abs=1e-12)
            assert r.pi_ub_analytic == pytest.approx(direct.pi_ub_analytic, abs=1e-12)

    def test_uniform_unique(self):
        d = sb.make_distribution(np.ones(5))
        r = sb.bounds_for_k(d, 3, 2, "unique", tight_grid=256)
        assert (r.n, r.m) == (10, 3)
        assert r.entropy_bits == pytest.approx(math.log2(10), abs=1e-12)
        assert r.pi_observed == pytest.approx(0.7, abs=1e-12)

    def test_uniform_repeated(self):
        d = sb.make_distribution(np.ones(3))
        r = sb.bounds_for_k(d, 2, 2, "repeated", tight_grid=256)
        assert (r.n, r.m) == (6, 3)
        expected_h = mp_entropy([2 / 9, 2 / 9, 2 / 9, 1 / 9, 1 / 9, 1 / 9])
        assert r.entropy_bits == pytest.approx(expected_h, abs=1e-12)

    def test_bad_mode(self):
        d = sb.make_distribution([1, 1])
        with pytest.raises(sb.BadKError):
            sb.bounds_for_k(d, 2, 2, "both")
