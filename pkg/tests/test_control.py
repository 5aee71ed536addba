import math

import numpy as np
import pytest

from atbat.control import (AimTable, ControlRegressor, DegenerateCloud,
                           GaussianControl, InsufficientData,
                           InsufficientTrainingSet, NoControlModel,
                           aim_distribution, fit_control_for_pitcher,
                           fit_gaussian, prune_refit, train_control_regressor)
from atbat.zones import FAR, PITCH_TYPES, default_grid, zone_centroid, zones_of

GRID = default_grid()


def mc_zone_masses(g: GaussianControl, aim: int, n: int, seed: int) -> np.ndarray:
    """Monte Carlo oracle for aim_distribution: sample the recentered
    Gaussian and bin landing zones."""
    rng = np.random.default_rng(seed)
    mean = np.asarray(zone_centroid(GRID, aim))
    L = np.linalg.cholesky(g.covariance)
    pts = rng.standard_normal((n, 2)) @ L.T + mean
    zones = zones_of(GRID, pts[:, 0], pts[:, 1])
    return np.bincount(zones, minlength=18) / n


def random_pd_gaussian(rng) -> GaussianControl:
    vx = rng.uniform(0.005, 1.0)
    vy = rng.uniform(0.005, 1.0)
    rho = rng.uniform(-0.9, 0.9)
    return GaussianControl(0.0, 0.0, vx, vy, rho * math.sqrt(vx * vy))


class TestFitGaussian:
    def test_symmetric_cross(self):
        pts = [(1, 0), (-1, 0), (0, 1), (0, -1)] * 3
        g = fit_gaussian(np.array(pts, dtype=float))
        assert g.mu_x == pytest.approx(0.0)
        assert g.mu_y == pytest.approx(0.0)
        assert g.var_x == pytest.approx(0.5)
        assert g.var_y == pytest.approx(0.5)
        assert g.cov_xy == pytest.approx(0.0)

    def test_identical_points_degenerate(self):
        with pytest.raises(DegenerateCloud):
            fit_gaussian(np.full((11, 2), 3.0))

    def test_collinear_points_degenerate(self):
        t = np.linspace(0, 1, 15)
        with pytest.raises(DegenerateCloud):
            fit_gaussian(np.stack([t, 2 * t], axis=1))

    def test_too_few_points(self):
        with pytest.raises(InsufficientData):
            fit_gaussian(np.random.default_rng(0).normal(size=(10, 2)))

    def test_recovers_known_gaussian(self):
        rng = np.random.default_rng(42)
        cov = np.array([[0.25, 0.08], [0.08, 0.49]])
        pts = rng.multivariate_normal([0.3, -0.2], cov, size=10_000)
        g = fit_gaussian(pts)
        assert g.mu_x == pytest.approx(0.3, abs=0.05)
        assert g.mu_y == pytest.approx(-0.2, abs=0.05)
        assert g.var_x == pytest.approx(0.25, rel=0.05)
        assert g.var_y == pytest.approx(0.49, rel=0.05)
        assert g.cov_xy == pytest.approx(0.08, rel=0.05 * 0.35 / 0.08)

    def test_mle_normalization_is_1_over_n(self):
        # small sample where 1/n vs 1/(n-1) differ measurably
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(12, 2))
        g = fit_gaussian(pts)
        d = pts - pts.mean(axis=0)
        assert g.var_x == pytest.approx(float((d[:, 0] ** 2).mean()))


class TestPruneRefit:
    def test_keep_all_is_identity(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(40, 2))
        assert prune_refit(pts, 1.0) == fit_gaussian(pts)

    def test_outliers_are_exactly_the_pruned_set(self):
        rng = np.random.default_rng(9)
        inliers = rng.standard_normal((95, 2))
        outliers = np.full((5, 2), 10.0)
        pts = np.vstack([inliers, outliers])
        refit = prune_refit(pts, 0.95)
        assert refit == fit_gaussian(inliers)
        assert 0.6 <= refit.var_x <= 1.5
        assert 0.6 <= refit.var_y <= 1.5

    def test_tie_break_is_deterministic_and_drops_one_of_the_tied(self):
        # two identical far points have bitwise-equal density; exactly one
        # (the earliest) is dropped at floor(0.05 * 20) = 1
        rng = np.random.default_rng(3)
        cloud = rng.normal(scale=0.5, size=(18, 2))
        far = np.array([[8.0, 8.0], [8.0, 8.0]])
        pts = np.vstack([far[:1], cloud, far[1:]])
        refit = prune_refit(pts, 0.95)
        assert refit == prune_refit(pts, 0.95)  # deterministic
        assert refit == fit_gaussian(np.vstack([cloud, far[1:]]))

    def test_pruning_never_increases_generalized_variance(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            pts = rng.multivariate_normal(
                [0, 0], [[1.0, 0.3], [0.3, 2.0]], size=rng.integers(30, 300))
            full = fit_gaussian(pts)
            pruned = prune_refit(pts, 0.9)
            assert pruned.det <= full.det + 1e-12


class TestAimDistribution:
    def test_vanishing_variance_hits_the_aim(self):
        g = GaussianControl(0, 0, 1e-6, 1e-6, 0)
        vec = aim_distribution(g, GRID, 4)
        assert vec[4] >= 0.999

    def test_mass_conservation_random_gaussians(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            g = random_pd_gaussian(rng)
            aim = int(rng.integers(17))
            vec = aim_distribution(g, GRID, aim)
            assert vec.min() >= 0.0
            assert vec[FAR] >= 0.0
            assert vec.sum() == pytest.approx(1.0, abs=1e-6)

    def test_huge_variance_goes_far(self):
        g = GaussianControl(0, 0, 100.0, 100.0, 0.0)
        vec = aim_distribution(g, GRID, 4)
        assert vec[FAR] >= 0.95
        oracle = mc_zone_masses(g, 4, 1_000_000, 77)
        assert np.abs(vec - oracle).max() <= 0.005

    def test_matches_monte_carlo_oracle(self):
        rng = np.random.default_rng(2024)
        for trial in range(20):
            g = random_pd_gaussian(rng)
            aim = int(rng.integers(17))
            vec = aim_distribution(g, GRID, aim)
            oracle = mc_zone_masses(g, aim, 1_000_000, 9000 + trial)
            assert np.abs(vec - oracle).max() <= 0.005

    def test_small_variance_argmax_is_aim(self):
        g = GaussianControl(0, 0, 0.01, 0.01, 0.002)
        for aim in range(17):
            vec = aim_distribution(g, GRID, aim)
            assert int(np.argmax(vec[:17])) == aim

    def test_fitted_mean_is_dropped(self):
        # a large fitted mean offset must not shift the recentered aim
        g_offset = GaussianControl(5.0, -3.0, 0.01, 0.01, 0.0)
        g_center = GaussianControl(0.0, 0.0, 0.01, 0.01, 0.0)
        a = aim_distribution(g_offset, GRID, 7)
        b = aim_distribution(g_center, GRID, 7)
        assert np.abs(a - b).max() < 1e-12

    def test_cannot_aim_far(self):
        with pytest.raises(ValueError):
            aim_distribution(GaussianControl(0, 0, 0.1, 0.1, 0), GRID, FAR)

    def test_quality_ordering_preserved(self):
        # smaller true variance must fit (and discretize) tighter
        rng = np.random.default_rng(31)
        tiers = [0.05, 0.15, 0.4]
        fitted = []
        for var in tiers:
            pts = rng.multivariate_normal([0.0, 2.5], np.eye(2) * var, size=3000)
            fitted.append(fit_gaussian(pts))
        assert fitted[0].var_x < fitted[1].var_x < fitted[2].var_x
        assert fitted[0].var_y < fitted[1].var_y < fitted[2].var_y


def _linear_world(rng, n_pitchers, noise=0.0):
    """Pitcher tensors in an 8-dim subspace; targets exactly linear in the
    tensor entries and always positive definite."""
    A = rng.normal(size=(8, 300)) / math.sqrt(300)
    W = rng.uniform(-1, 1, size=(8, 5))
    W /= np.abs(W).sum(axis=0, keepdims=True)  # |t| <= 1 per target
    pairs = []
    for _ in range(n_pitchers):
        u = rng.uniform(-1, 1, 8)
        x = u @ A
        t = u @ W
        params = [0.1 * t[0], 0.1 * t[1],
                  0.4 + 0.1 * t[2], 0.4 + 0.1 * t[3], 0.05 * t[4]]
        params = [p + noise * rng.normal() for p in params]
        pairs.append((x.reshape(5, 5, 12), GaussianControl(*params)))
    return pairs


class TestControlRegressor:
    def test_exact_linear_targets_interpolated(self):
        rng = np.random.default_rng(0)
        pairs = _linear_world(rng, 25)
        reg = train_control_regressor({"FF": pairs}, lam=0.0)
        mse = 0.0
        for tensor, g in pairs:
            pred = reg.predict("FF", tensor)
            mse += np.mean((np.asarray(pred.to_list()) - np.asarray(g.to_list())) ** 2)
        assert mse / len(pairs) <= 1e-8

    def test_infinite_ridge_predicts_target_mean(self):
        rng = np.random.default_rng(1)
        pairs = _linear_world(rng, 30)
        reg = train_control_regressor({"SL": pairs}, lam=1e12)
        mean = np.mean([g.to_list() for _, g in pairs], axis=0)
        pred = reg.predict("SL", rng.uniform(-1, 1, (5, 5, 12)))
        assert np.asarray(pred.to_list()) == pytest.approx(mean, abs=1e-4)

    def test_heldout_mse_with_noise(self):
        rng = np.random.default_rng(2)
        pairs = _linear_world(rng, 250, noise=0.01)
        train, test = pairs[:200], pairs[200:]
        reg = train_control_regressor({"CU": train}, lam=1e-4)
        per_param = np.zeros(5)
        for tensor, g in test:
            err = np.asarray(reg.predict("CU", tensor).to_list()) - g.to_list()
            per_param += err ** 2
        assert (per_param / len(test) <= 0.01).all()

    def test_too_few_pitchers(self):
        rng = np.random.default_rng(3)
        with pytest.raises(InsufficientTrainingSet):
            train_control_regressor({"FF": _linear_world(rng, 19)}, lam=1.0)

    def test_variance_floor_and_cov_clamp(self):
        reg = ControlRegressor(weights={"FF": np.zeros((301, 5))}, lam=0.0)
        # zero weights predict all-zero params: floored to a valid Gaussian
        g = reg.predict("FF", np.zeros((5, 5, 12)))
        assert g.var_x == g.var_y == reg.var_floor
        assert abs(g.cov_xy) < math.sqrt(g.var_x * g.var_y)


class TestFitControlForPitcher:
    def test_branch_rule(self):
        rng = np.random.default_rng(4)
        pts = rng.multivariate_normal([0, 2.5], np.eye(2) * 0.2, size=50)
        reg = train_control_regressor(
            {p: _linear_world(rng, 20) for p in PITCH_TYPES}, lam=1.0)
        out = fit_control_for_pitcher({"FF": pts}, np.zeros((5, 5, 12)), reg)
        assert out["FF"][1] == "empirical"
        assert all(out[p][1] == "regressed" for p in PITCH_TYPES if p != "FF")

    def test_no_data_no_regressor(self):
        with pytest.raises(NoControlModel):
            fit_control_for_pitcher({}, None, None)

    def test_recovery_from_generated_pitches(self):
        rng = np.random.default_rng(6)
        truth = {p: random_pd_gaussian(rng) for p in PITCH_TYPES}
        points = {}
        for p, g in truth.items():
            L = np.linalg.cholesky(g.covariance)
            points[p] = rng.standard_normal((2000, 2)) @ L.T + [0.0, 2.5]
        out = fit_control_for_pitcher(points, None, None, keep_fraction=1.0)
        for p, g in truth.items():
            fitted = out[p][0]
            assert fitted.var_x == pytest.approx(g.var_x, rel=0.10)
            assert fitted.var_y == pytest.approx(g.var_y, rel=0.10)


class TestAimTable:
    def test_vectors_are_distributions(self):
        rng = np.random.default_rng(8)
        models = {p: random_pd_gaussian(rng) for p in PITCH_TYPES[:2]}
        table = AimTable(models, GRID, PITCH_TYPES[:2])
        for p in PITCH_TYPES[:2]:
            for aim in range(17):
                vec = table.vector(p, aim)
                assert vec.shape == (18,)
                assert vec.sum() == pytest.approx(1.0, abs=1e-9)
