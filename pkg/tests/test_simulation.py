"""Monte Carlo harness: noise, trials, sweeps, baseline, noise events."""

import numpy as np
import pytest

import polyseg as ps
from polyseg.errors import InputError
from polyseg.simulate import MEDIAN_FLOOR, Scenario, TrialRow, run_sweep, trials_csv_text


class TestGenerateNoise:
    def test_zero_sigma_all_zero(self):
        for kind in ("gaussian", "rademacher", "uniform"):
            eps = ps.generate_noise(ps.NoiseSpec(kind=kind, sigma=0.0, seed=1), 50)
            assert not eps.any()

    def test_same_seed_same_sequence(self):
        spec = ps.NoiseSpec(kind="gaussian", sigma=2.0, seed=99)
        a = ps.generate_noise(spec, 1000)
        b = ps.generate_noise(spec, 1000)
        assert np.array_equal(a, b)

    def test_gaussian_variance_lln(self):
        eps = ps.generate_noise(ps.NoiseSpec(sigma=1.5, seed=7), 100_000)
        assert float(np.var(eps)) == pytest.approx(2.25, rel=0.05)
        assert abs(float(np.mean(eps))) < 0.05

    def test_rademacher_support(self):
        eps = ps.generate_noise(ps.NoiseSpec(kind="rademacher", sigma=0.5, seed=3), 500)
        assert set(np.unique(eps)) == {-0.5, 0.5}

    def test_uniform_bounds_and_variance(self):
        sigma = 1.2
        eps = ps.generate_noise(
            ps.NoiseSpec(kind="uniform", sigma=sigma, seed=11), 100_000
        )
        assert np.abs(eps).max() <= sigma * np.sqrt(3)
        assert float(np.var(eps)) == pytest.approx(sigma**2, rel=0.05)

    def test_unknown_kind_rejected(self):
        with pytest.raises(InputError):
            ps.NoiseSpec(kind="cauchy")


class TestMatching:
    def test_identity_when_errors_small(self):
        truth = [10, 30, 50]
        est = [11, 29, 52]
        assert ps.match_estimates(truth, est) == [(0, 0), (1, 1), (2, 2)]

    def test_greedy_nearest(self):
        # single estimate grabs the closest truth point
        assert ps.match_estimates([10, 20], [19]) == [(1, 0)]

    def test_unbalanced_counts(self):
        pairs = ps.match_estimates([10], [2, 9, 40])
        assert pairs == [(0, 1)]


class TestRunTrial:
    def test_noiseless_ladder_exact(self):
        sig = ps.make_scenario("stepLadder", 80, {"K": 3, "jump": 4.0})
        report = ps.run_trial(
            sig,
            ps.NoiseSpec(sigma=0.0, seed=0),
            ps.SolverConfig(penalty=0.5, degree=0),
        )
        assert report.k_correct
        assert report.max_initial_error == 0
        assert report.max_final_error == 0

    def test_overwhelming_penalty_detects_nothing(self):
        sig = ps.make_scenario("stepLadder", 40, {"K": 1, "jump": 2.0})
        y_energy = float(np.sum(ps.evaluate_mean(sig) ** 2)) + 40.0
        report = ps.run_trial(
            sig,
            ps.NoiseSpec(sigma=1.0, seed=5),
            ps.SolverConfig(penalty=y_energy * 2, degree=0),
        )
        assert report.k_hat == 0
        assert not report.k_correct
        assert report.max_final_error is None

    def test_fixed_seed_reports_identical(self):
        sig = ps.make_scenario("linearKink", 128, {"kappa": 6.0})
        spec = ps.NoiseSpec(sigma=1.0, seed=42)
        cfg = ps.SolverConfig(penalty=10.0, degree=1)
        assert ps.run_trial(sig, spec, cfg) == ps.run_trial(sig, spec, cfg)


class TestHomogeneity:
    def test_scaling_leaves_partition_unchanged(self):
        # y and sigma scaled by 2 with lam scaled by 4: identical argmin
        sig = ps.make_scenario("stepLadder", 60, {"K": 2, "jump": 3.0})
        theta = ps.evaluate_mean(sig)
        eps = ps.generate_noise(ps.NoiseSpec(sigma=1.0, seed=13), 60)
        y = theta + eps
        lam = 8.0
        base = ps.solve_min_partition(y, ps.SolverConfig(penalty=lam, degree=0))
        scaled = ps.solve_min_partition(
            2.0 * y, ps.SolverConfig(penalty=4.0 * lam, degree=0)
        )
        assert base.change_points == scaled.change_points


class TestSweep:
    def make_scenario(self, **kw):
        base = dict(
            template="stepLadder",
            params={"K": 1, "jump": 5.0},
            sigma=1.0,
            seed=31,
            degree=0,
            c=2.5,
            n_grid=(64, 128, 256),
            reps=10,
        )
        base.update(kw)
        return Scenario(**base)

    def test_deterministic_across_threads_and_runs(self):
        sc = self.make_scenario()
        a = trials_csv_text(run_sweep(sc, threads=1).rows)
        b = trials_csv_text(run_sweep(sc, threads=4).rows)
        c = trials_csv_text(run_sweep(sc, threads=1).rows)
        assert a == b == c

    def test_csv_column_order(self):
        sc = self.make_scenario(n_grid=(32,), reps=2)
        text = trials_csv_text(run_sweep(sc).rows)
        assert text.splitlines()[0] == "n,rep,kHat,kCorrect,maxInitialErr,maxFinalErr,runtimeMs"

    def test_runtime_column_zero_without_timing(self):
        sc = self.make_scenario(n_grid=(32,), reps=2)
        rows = run_sweep(sc).rows
        assert all(r.runtime_ms == 0.0 for r in rows)

    def test_undetected_trials_leave_error_blank(self):
        row = TrialRow(
            n=8, rep=0, k_hat=0, k_correct=False,
            max_initial_error=None, max_final_error=None, runtime_ms=0.0,
        )
        assert row.as_csv() == "8,0,0,0,,,0"

    def test_penalty_rule_uses_log_n(self):
        sc = self.make_scenario(c=2.0)
        assert sc.penalty_for(100) == pytest.approx(2.0 * np.log(100))
        explicit = self.make_scenario(c=None, penalty=7.0)
        assert explicit.penalty_for(12345) == 7.0

    def test_exactly_one_penalty_setting(self):
        with pytest.raises(InputError):
            self.make_scenario(penalty=1.0)  # c is also set by default

    def test_median_floor_constant(self):
        assert MEDIAN_FLOOR == 0.5

    def test_slope_near_zero_for_strong_steps(self):
        sc = self.make_scenario()
        report = run_sweep(sc, threads=2)
        assert report.slope is not None
        assert abs(report.slope) <= 0.2
        assert report.theoretical_exponent == 0.0


class TestDifferencingBaseline:
    def test_degree_zero_is_direct_detection(self):
        rng = np.random.default_rng(8)
        y = np.concatenate([rng.normal(0, 0.5, 30), rng.normal(5, 0.5, 30)])
        cfg = ps.SolverConfig(penalty=4.0, degree=0)
        direct = ps.detect(y, cfg)
        base = ps.differencing_baseline(y, 0, cfg)
        assert base.final == direct.final
        assert base.objective == direct.objective

    def test_noiseless_slope_change_recovered_within_one(self):
        # differencing a piecewise-linear kink yields a clean level shift
        n, eta = 200, 101
        sig = ps.make_scenario("linearKink", n, {"kappa": 4.0})
        y = ps.evaluate_mean(sig)
        base = ps.differencing_baseline(y, 1, ps.SolverConfig(penalty=1e-4, degree=1))
        assert base.k_hat == 1
        assert abs(base.final[0] - sig.change_points[0]) <= 1

    def test_too_short_rejected(self):
        with pytest.raises(InputError):
            ps.differencing_baseline([1.0, 2.0], 2, ps.SolverConfig(penalty=1, degree=2))

    def test_localization_degrades_versus_direct(self):
        # side-by-side report on a moderate kink sweep; no threshold
        # asserted, direction printed for inspection
        sc = Scenario(
            template="linearKink", params={"kappa": 6.0}, sigma=0.3, seed=17,
            degree=1, c=3.0, n_grid=(256,), reps=6,
        )
        sig = ps.make_scenario(sc.template, 256, sc.params)
        theta = ps.evaluate_mean(sig)
        direct_err, diff_err = [], []
        for rep in range(sc.reps):
            eps = ps.generate_noise(
                ps.NoiseSpec(sigma=sc.sigma, seed=ps.derive_trial_seed(sc.seed, 256, rep)),
                256,
            )
            y = theta + eps
            cfg = sc.solver_config(256)
            direct = ps.detect(y, cfg)
            sigma_diff2 = sc.sigma**2 * 2  # variance inflation of one difference
            base = ps.differencing_baseline(
                y, 1, ps.SolverConfig(penalty=3.0 * sigma_diff2 * np.log(256), degree=1)
            )
            truth = sig.change_points[0]
            if direct.k_hat == 1:
                direct_err.append(abs(direct.final[0] - truth))
            if base.k_hat >= 1:
                diff_err.append(min(abs(f - truth) for f in base.final))
        print(f"direct errors: {direct_err}; differenced errors: {diff_err}")
        assert direct_err  # the direct method must at least detect


class TestNoiseEventCheck:
    def test_zero_sigma(self):
        report = ps.noise_event_check(ps.NoiseSpec(sigma=0.0, seed=1), 100, 1, 3)
        assert report.quantiles[99] == 0.0

    def test_quadratic_homogeneity_exact(self):
        a = ps.noise_event_check(ps.NoiseSpec(sigma=1.0, seed=21), 150, 1, 4)
        b = ps.noise_event_check(ps.NoiseSpec(sigma=2.0, seed=21), 150, 1, 4)
        assert np.allclose(np.array(b.stats), 4.0 * np.array(a.stats), rtol=1e-12)
        assert b.ratio_quantiles[90] == pytest.approx(a.ratio_quantiles[90], rel=1e-12)

    def test_ratio_reported_finite(self):
        report = ps.noise_event_check(ps.NoiseSpec(sigma=1.0, seed=5), 400, 1, 5)
        assert 0 < report.ratio_quantiles[99] < 50
        print(f"projected-noise sup / (sigma^2 log n) quantiles: {report.ratio_quantiles}")

    def test_size_cap(self):
        with pytest.raises(InputError):
            ps.noise_event_check(ps.NoiseSpec(seed=1), 4000, 1, 2)


class TestStructureDiagnosticsMonteCarlo:
    def test_violation_rate_under_adequate_snr(self):
        # strong steps: solved partitions should rarely breach the
        # two-per-segment / one-per-pair structure
        rng_seed = 10
        sig = ps.make_scenario("stepLadder", 300, {"K": 3, "jump": 6.0})
        violations = 0
        trials = 200
        for rep in range(trials):
            spec = ps.NoiseSpec(
                sigma=1.0, seed=ps.derive_trial_seed(rng_seed, 300, rep)
            )
            y = ps.evaluate_mean(sig) + ps.generate_noise(spec, 300)
            part = ps.solve_min_partition(
                y, ps.SolverConfig(penalty=3.0 * np.log(300), degree=0)
            )
            report = ps.diagnose_structure(list(sig.change_points), part)
            violations += 0 if report.ok else 1
        assert violations / trials <= 0.05
