"""Signal model: evaluation, re-centering, jump quantities, two-point pairs."""

import math

import numpy as np
import pytest

import polyseg as ps
from polyseg.errors import InputError


class TestEvaluateMean:
    def test_constant_signal(self):
        sig = ps.PiecewiseSignal(5, 0, (), ((2.5,),))
        assert np.array_equal(ps.evaluate_mean(sig), np.full(5, 2.5))

    def test_step_right_continuous(self):
        sig = ps.PiecewiseSignal(4, 0, (3,), ((0.0,), (5.0,)))
        assert ps.evaluate_mean(sig).tolist() == [0.0, 0.0, 5.0, 5.0]

    def test_segments_fit_exactly(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            n = int(rng.integers(30, 200))
            k = int(rng.integers(0, 4))
            cps = tuple(
                sorted(rng.choice(np.arange(2, n + 1), size=k, replace=False).tolist())
            )
            degree = int(rng.integers(0, 4))
            rows = []
            for j in range(k + 1):
                row = rng.uniform(-3, 3, degree + 1)
                row[0] += 5.0 * j  # keep neighbors distinct
                rows.append(tuple(row))
            sig = ps.PiecewiseSignal(n, degree, cps, tuple(rows))
            theta = ps.evaluate_mean(sig)
            edges = [1, *cps, n + 1]
            for a, b in zip(edges[:-1], edges[1:]):
                assert ps.segment_rss_exact(theta, ps.Interval(a, b), degree) <= 1e-10


class TestReparameterize:
    def test_zero_shift_is_identity(self):
        c = np.array([1.0, -2.0, 0.5])
        assert np.array_equal(ps.taylor_shift(c, 0.0), c)

    def test_square_shift_algebraic(self):
        # x^2 = c^2 + 2c (x-c) + (x-c)^2
        for c in (0.3, 0.77):
            got = ps.taylor_shift([0.0, 0.0, 1.0], c)
            assert got == pytest.approx([c**2, 2 * c, 1.0])

    def test_shifted_form_reevaluates(self):
        rng = np.random.default_rng(3)
        coeffs = rng.uniform(-2, 2, 4)
        center = float(rng.uniform(0.1, 0.9))
        shifted = ps.taylor_shift(coeffs, center)
        xs = rng.uniform(0, 1, 100)
        direct = np.polynomial.polynomial.polyval(xs, coeffs)
        recentered = np.polynomial.polynomial.polyval(xs - center, shifted)
        assert np.allclose(direct, recentered, rtol=1e-10, atol=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(4)
        coeffs = rng.uniform(-2, 2, 4)
        c = 0.625
        back = ps.taylor_shift(ps.taylor_shift(coeffs, c), -c)
        assert np.allclose(back, coeffs, rtol=1e-12)

    def test_signal_reparameterization_consistent(self):
        sig = ps.make_scenario("linearKink", 64, {"kappa": 2.0})
        left, right = ps.reparameterize_at(sig, 1)
        x0 = sig.change_points[0] / sig.n
        xs = np.array([10, 20, 50]) / 64
        vals_left = np.polynomial.polynomial.polyval(xs - x0, left)
        direct = np.polynomial.polynomial.polyval(xs, sig.coefficients[0])
        assert np.allclose(vals_left, direct, rtol=1e-10)

    def test_bad_index_rejected(self):
        sig = ps.PiecewiseSignal(4, 0, (3,), ((0.0,), (5.0,)))
        with pytest.raises(InputError):
            ps.reparameterize_at(sig, 2)


class TestJumpProfile:
    def test_step_quantities_by_definition(self):
        # spacing min(2, 2) = 2; jump 5 at order 0: rho = 25 * 2 = 50
        sig = ps.PiecewiseSignal(4, 0, (3,), ((0.0,), (5.0,)))
        prof = ps.jump_profile(sig, 1)
        assert prof.delta == 2
        assert prof.kappa == (5.0,)
        assert prof.rho == pytest.approx(50.0)
        assert prof.l_k == 0

    def test_continuous_kink_leading_order_one(self):
        n, kappa = 256, 3.0
        sig = ps.make_scenario("linearKink", n, {"kappa": kappa})
        prof = ps.jump_profile(sig, 1)
        assert prof.kappa[0] == 0.0  # continuity: no level jump
        assert prof.kappa[1] == pytest.approx(kappa, rel=1e-9)
        assert prof.l_k == 1
        assert prof.rho == pytest.approx(kappa**2 * prof.delta**3 / n**2, rel=1e-9)

    def test_identical_neighbors_rejected(self):
        with pytest.raises(InputError, match="same"):
            ps.PiecewiseSignal(6, 1, (3,), ((1.0, 2.0), (1.0, 2.0)))

    def test_smoothness_order_all_zero_below_jump(self):
        sig = ps.make_scenario(
            "mixedOrder", 120, {"degree": 3, "orders": [2], "sizes": [4.0]}
        )
        prof = ps.jump_profile(sig, 1)
        assert prof.kappa[0] == 0.0 and prof.kappa[1] == 0.0
        assert prof.kappa[2] == pytest.approx(4.0, rel=1e-9)


class TestActiveOrder:
    def test_single_active_order_is_leading(self):
        sig = ps.make_scenario("linearKink", 512, {"kappa": 4.0})
        prof = ps.jump_profile(sig, 1)
        lam = prof.rho / 2.0
        order = ps.active_order(prof, lam, 1.0)
        assert order.active == (1,)
        assert order.r_k == prof.l_k == 1

    def test_two_active_orders_pick_smaller_rate(self):
        # discontinuous kink: both orders strong; the winner must match a
        # numeric comparison of the two rate expressions
        n = 1024
        sig = ps.PiecewiseSignal(
            n, 1, (n // 2 + 1,), ((0.0, 0.0), (2.0, 3.0))
        )
        prof = ps.jump_profile(sig, 1)
        sigma = 1.0
        lam = min(r for r in prof.rho_by_order if r > 0) / 10.0
        order = ps.active_order(prof, lam, 1.0, sigma=sigma)
        assert set(order.active) == {0, 1}
        expr = [
            (sigma**2 * math.log(n) / prof.rho_by_order[l]) ** (1 / (2 * l + 1))
            for l in (0, 1)
        ]
        assert order.r_k == int(np.argmin(expr))

    def test_empty_active_set(self):
        sig = ps.make_scenario("linearKink", 128, {"kappa": 0.5})
        prof = ps.jump_profile(sig, 1)
        order = ps.active_order(prof, prof.rho * 10, 1.0)
        assert order.active == ()
        assert order.r_k is None and order.kappa_k is None

    def test_snr_condition_implies_membership(self):
        # when rho_k >= c_signal * lam, both the leading order and the
        # selected order belong to the active set
        rng = np.random.default_rng(6)
        for _ in range(20):
            n = int(rng.integers(64, 2048))
            sig = ps.PiecewiseSignal(
                n,
                2,
                (n // 2,),
                (
                    tuple(rng.uniform(-2, 2, 3)),
                    tuple(rng.uniform(-2, 2, 3) + np.array([3.0, 0, 0])),
                ),
            )
            prof = ps.jump_profile(sig, 1)
            lam = prof.rho / float(rng.uniform(1.5, 20.0))
            order = ps.active_order(prof, lam, 1.0)
            assert prof.l_k in order.active
            assert order.r_k in order.active


class TestLowerBoundInstances:
    def test_zero_shift_identical(self):
        inst = ps.lower_bound_instance(
            "lemma1", kappa=1.0, sigma=1.0, degree=1, n=32, spacing=6, shift=0
        )
        assert inst.p0 == inst.p1
        assert inst.kl == 0.0

    def test_step_kl_closed_form(self):
        # means differ by kappa on exactly `shift` points
        inst = ps.lower_bound_instance(
            "lemma1", kappa=1.0, sigma=1.0, degree=0, n=16, spacing=4, shift=2
        )
        assert inst.kl == pytest.approx(1.0, abs=1e-14)

    def test_lemma1_kl_matches_power_sum(self):
        kappa, sigma, degree, n, spacing, shift = 2.0, 1.5, 2, 64, 10, 7
        inst = ps.lower_bound_instance(
            "lemma1", kappa=kappa, sigma=sigma, degree=degree, n=n,
            spacing=spacing, shift=shift,
        )
        expect = kappa**2 / (2 * sigma**2) * sum(
            (j / n) ** (2 * degree) for j in range(1, shift + 1)
        )
        assert inst.kl == pytest.approx(expect, rel=1e-12)
        assert inst.kl <= inst.bound

    def test_lemma2_bound_holds(self):
        # kappa and xi chosen so the derived spacing is >= 1 at every degree
        for degree in (0, 1, 2):
            inst = ps.lower_bound_instance(
                "lemma2", kappa=0.5, sigma=1.0, degree=degree, n=300, xi=0.5
            )
            assert inst.p0.change_points[0] < inst.p1.change_points[0]
            assert 0 < inst.kl <= inst.bound

    def test_lemma2_spacing_derivation(self):
        kappa, sigma, n, xi, degree = 0.8, 1.2, 256, 0.3, 1
        inst = ps.lower_bound_instance(
            "lemma2", kappa=kappa, sigma=sigma, degree=degree, n=n, xi=xi
        )
        import math as _math

        derived = _math.floor(
            (xi * n ** (2 * degree) * sigma**2 / kappa**2) ** (1 / (2 * degree + 1))
        )
        assert inst.spacing == min(derived, n // 3)

    def test_lemma3_smooth_below_top_order(self):
        inst = ps.lower_bound_instance(
            "lemma3", kappa=2.0, sigma=1.0, degree=3, n=128, spacing=20, shift=9
        )
        for sig in (inst.p0, inst.p1):
            prof = ps.jump_profile(sig, 1)
            assert all(prof.kappa[l] == 0.0 for l in range(3))
            assert prof.kappa[3] == pytest.approx(2.0, rel=1e-9)
        assert 0 < inst.kl <= inst.bound

    def test_kl_symmetry_and_scaling(self):
        a = ps.lower_bound_instance(
            "lemma1", kappa=1.0, sigma=1.0, degree=1, n=64, spacing=12, shift=5
        )
        assert ps.exact_kl(a.p1, a.p0, 1.0) == pytest.approx(a.kl, rel=1e-15)
        b = ps.lower_bound_instance(
            "lemma1", kappa=3.0, sigma=2.0, degree=1, n=64, spacing=12, shift=5
        )
        assert b.kl == pytest.approx(a.kl * 9.0 / 4.0, rel=1e-12)

    def test_infeasible_parameters_named(self):
        with pytest.raises(InputError, match="spacing <= n/4"):
            ps.lower_bound_instance(
                "lemma1", kappa=1.0, sigma=1.0, degree=0, n=16, spacing=8, shift=1
            )
        with pytest.raises(InputError, match="shift"):
            ps.lower_bound_instance(
                "lemma1", kappa=1.0, sigma=1.0, degree=0, n=16, spacing=4, shift=5
            )
        with pytest.raises(InputError, match="xi"):
            ps.lower_bound_instance("lemma2", kappa=1.0, sigma=1.0, degree=0, n=16)


class TestScenarios:
    def test_step_ladder_orders(self):
        sig = ps.make_scenario("stepLadder", 120, {"K": 3, "jump": 2.0})
        assert sig.k == 3
        for k in range(1, 4):
            assert ps.jump_profile(sig, k).l_k == 0

    def test_linear_jump_keeps_slope(self):
        sig = ps.make_scenario("linearJump", 100, {"kappa0": 3.0, "slope": 1.5})
        prof = ps.jump_profile(sig, 1)
        assert prof.kappa[0] == pytest.approx(3.0)
        assert prof.kappa[1] == 0.0

    def test_mixed_order_profiles(self):
        sig = ps.make_scenario(
            "mixedOrder", 200, {"degree": 2, "orders": [0, 2], "sizes": [3.0, 5.0]}
        )
        p1, p2 = ps.jump_profile(sig, 1), ps.jump_profile(sig, 2)
        assert p1.l_k == 0 and p1.kappa[0] == pytest.approx(3.0, rel=1e-9)
        assert p2.kappa[0] == 0.0 and p2.kappa[1] == 0.0
        assert p2.kappa[2] == pytest.approx(5.0, rel=1e-9)

    def test_unknown_template_and_params(self):
        with pytest.raises(InputError):
            ps.make_scenario("nope", 50, {})
        with pytest.raises(InputError, match="unknown"):
            ps.make_scenario("linearKink", 50, {"kappa": 1.0, "bogus": 2})

    def test_lower_bound_template(self):
        sig = ps.make_scenario(
            "lowerBound",
            64,
            {"kind": "lemma1", "which": "P1", "kappa": 1.0, "degree": 1,
             "spacing": 10, "shift": 3},
        )
        assert sig.change_points == (14,)


class TestJsonSchema:
    def test_round_trip_and_field_names(self):
        sig = ps.make_scenario("stepLadder", 40, {"K": 2, "jump": 1.0})
        doc = ps.signal_to_json(sig)
        assert set(doc) == {"n", "r", "changePoints", "segments"}
        back = ps.signal_from_json(doc)
        assert back == sig

    def test_missing_field_named(self):
        with pytest.raises(InputError, match="changePoints"):
            ps.signal_from_json({"n": 4, "r": 0, "segments": [[0.0]]})
