"""Pitcher control: the Gaussian aiming-error model and its discretization.

Control is identified from 3-0 counts, where a pitcher all but always aims
for the zone: per pitch type we fit a maximum-likelihood bivariate Gaussian
to the landing points, prune the least likely 5% as non-representative
pitches (intentional balls and the like), and refit.  Pitchers without
enough 3-0 pitches for a type fall back to a ridge regression from their
5x5x12 tensor to the five Gaussian parameters.

To turn a fitted error model into a landing distribution for an arbitrary
intended zone, the Gaussian is re-centered on the zone's centroid with the
fitted mean dropped (it is an artifact of the habitual 3-0 target) and
integrated over every grid cell; whatever mass falls outside the grid is FAR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .zones import (FAR, N_LOCATIONS, N_ZONES, PITCH_TYPES, ZoneGrid,
                    cell_zone, zone_centroid)


class InsufficientData(ValueError):
    """Fewer than the 11 points needed to fit a control Gaussian."""


class DegenerateCloud(ValueError):
    """Point cloud has a singular covariance (identical or collinear points)."""


class QuadratureError(RuntimeError):
    """Cell integration failed to reach the requested tolerance."""


class NoControlModel(ValueError):
    """No 3-0 data and no trained regressor for a pitch type."""


class InsufficientTrainingSet(ValueError):
    """Too few pitchers to train the parameter regressor."""


MIN_FIT_POINTS = 11          # fit only if n_pitches > 10
DEFAULT_KEEP_FRACTION = 0.95
VAR_FLOOR = 0.05             # ft^2, floor for regressed variances
_DET_EPS = 1e-15


@dataclass(frozen=True)
class GaussianControl:
    """Five-parameter bivariate Gaussian error model for one pitch type."""

    mu_x: float
    mu_y: float
    var_x: float
    var_y: float
    cov_xy: float

    def __post_init__(self):
        if not (self.var_x > 0 and self.var_y > 0
                and self.var_x * self.var_y - self.cov_xy ** 2 > 0):
            raise ValueError("covariance must be positive definite")

    @property
    def covariance(self) -> np.ndarray:
        return np.array([[self.var_x, self.cov_xy], [self.cov_xy, self.var_y]])

    @property
    def det(self) -> float:
        return self.var_x * self.var_y - self.cov_xy ** 2

    def scaled(self, factor: float) -> "GaussianControl":
        """Covariance scaled by ``factor`` (a what-if knob; > 0)."""
        if factor <= 0:
            raise ValueError("variance scale factor must be > 0")
        return GaussianControl(self.mu_x, self.mu_y, self.var_x * factor,
                               self.var_y * factor, self.cov_xy * factor)

    def to_list(self) -> list[float]:
        return [float(self.mu_x), float(self.mu_y), float(self.var_x),
                float(self.var_y), float(self.cov_xy)]

    @classmethod
    def from_list(cls, params) -> "GaussianControl":
        return cls(*(float(p) for p in params))


def fit_gaussian(points) -> GaussianControl:
    """Maximum-likelihood fit: sample mean and 1/n covariance."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (n, 2)")
    n = pts.shape[0]
    if n < MIN_FIT_POINTS:
        raise InsufficientData(f"need at least {MIN_FIT_POINTS} points, got {n}")
    mu = pts.mean(axis=0)
    d = pts - mu
    cov = d.T @ d / n
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] ** 2
    if det <= _DET_EPS or cov[0, 0] <= 0 or cov[1, 1] <= 0:
        raise DegenerateCloud(f"singular covariance (det = {det!r})")
    return GaussianControl(float(mu[0]), float(mu[1]), float(cov[0, 0]),
                           float(cov[1, 1]), float(cov[0, 1]))


def prune_refit(points, keep_fraction: float = DEFAULT_KEEP_FRACTION) -> GaussianControl:
    """Fit, drop the floor((1 - keep_fraction) * n) least likely points under
    that fit, and refit on the remainder.

    Density ties are broken by input order: among equally unlikely points the
    earliest is dropped first.
    """
    if not 0 < keep_fraction <= 1:
        raise ValueError("keep_fraction must be in (0, 1]")
    pts = np.asarray(points, dtype=float)
    first = fit_gaussian(pts)
    n = pts.shape[0]
    n_drop = math.floor((1.0 - keep_fraction) * n)
    if n_drop == 0:
        return first
    inv = np.linalg.inv(first.covariance)
    d = pts - [first.mu_x, first.mu_y]
    maha = np.einsum("ni,ij,nj->n", d, inv, d)
    # descending Mahalanobis = ascending density; stable sort keeps input
    # order among ties so the earliest of equals is dropped first
    order = np.argsort(-maha, kind="stable")
    keep = np.ones(n, dtype=bool)
    keep[order[:n_drop]] = False
    return fit_gaussian(pts[keep])


@lru_cache(maxsize=None)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _panel_nodes(lo: float, hi: float, sigma: float, order: int):
    """Gauss-Legendre nodes/weights on [lo, hi] split into panels no wider
    than 3 sigma, so a narrow Gaussian is always resolved."""
    n_panels = max(1, min(16, int(math.ceil((hi - lo) / (3.0 * sigma)))))
    edges = np.linspace(lo, hi, n_panels + 1)
    x, w = _leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _cell_mass(mean, cov, bounds, tol: float = 1e-7) -> float:
    """Integral of the bivariate normal density over one rectangular cell,
    by adaptive tensor-product Gauss-Legendre (orders doubled until two
    successive estimates agree to ``tol``)."""
    x0, x1, z0, z1 = bounds
    sx = math.sqrt(cov[0, 0])
    sy = math.sqrt(cov[1, 1])
    lox, hix = max(x0, mean[0] - 9 * sx), min(x1, mean[0] + 9 * sx)
    loy, hiy = max(z0, mean[1] - 9 * sy), min(z1, mean[1] + 9 * sy)
    if lox >= hix or loy >= hiy:
        return 0.0
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] ** 2
    i00 = cov[1, 1] / det
    i11 = cov[0, 0] / det
    i01 = -cov[0, 1] / det
    norm = 1.0 / (2.0 * math.pi * math.sqrt(det))
    prev = None
    for order in (8, 16, 32, 64):
        xs, wx = _panel_nodes(lox, hix, sx, order)
        ys, wy = _panel_nodes(loy, hiy, sy, order)
        dx = xs - mean[0]
        dy = ys - mean[1]
        q = (i00 * dx[:, None] ** 2 + 2.0 * i01 * dx[:, None] * dy[None, :]
             + i11 * dy[None, :] ** 2)
        val = norm * float((wx[:, None] * wy[None, :] * np.exp(-0.5 * q)).sum())
        if prev is not None and abs(val - prev) <= tol:
            return val
        prev = val
    raise QuadratureError(f"cell {bounds} did not converge to {tol}")


def aim_distribution(g: GaussianControl, grid: ZoneGrid, aim: int,
                     tol: float = 1e-7) -> np.ndarray:
    """Landing distribution over the 17 zones plus FAR for a pitch aimed at
    ``aim``: the error Gaussian centered on the zone centroid (fitted mean
    dropped), integrated cell by cell; FAR takes the remaining mass."""
    if aim == FAR:
        raise ValueError("cannot aim at FAR")
    mean = np.asarray(zone_centroid(grid, aim))
    cov = g.covariance
    vec = np.zeros(N_LOCATIONS)
    for r in range(5):
        for c in range(5):
            vec[cell_zone(r, c)] += _cell_mass(mean, cov, grid.cell_bounds(r, c), tol)
    vec[FAR] = max(0.0, 1.0 - vec[:N_ZONES].sum())
    return vec / vec.sum()


class AimTable:
    """Precomputed landing distributions for every (pitch type, aim zone).

    Satisfies the control interface consumed by kernel construction:
    ``vector(pitch, aim)`` returns a length-18 probability vector.
    """

    def __init__(self, models: dict[str, GaussianControl], grid: ZoneGrid,
                 pitch_types: tuple[str, ...] = PITCH_TYPES, tol: float = 1e-7):
        self.pitch_types = tuple(pitch_types)
        self._table = {}
        for pitch in self.pitch_types:
            g = models[pitch]
            for aim in range(N_ZONES):
                self._table[(pitch, aim)] = aim_distribution(g, grid, aim, tol)

    def vector(self, pitch: str, aim: int) -> np.ndarray:
        return self._table[(pitch, aim)]


@dataclass
class ControlRegressor:
    """Per-pitch-type ridge map from the flattened 300-entry pitcher tensor
    to the five Gaussian parameters.

    The intercept is unpenalized, so the infinite-ridge limit is the per-type
    target mean.  Predicted variances are floored and the covariance clamped
    to keep the model positive definite.
    """

    weights: dict[str, np.ndarray]   # (301, 5) per pitch type, intercept last
    lam: float
    var_floor: float = VAR_FLOOR

    def predict(self, pitch: str, pitcher_tensor: np.ndarray) -> GaussianControl:
        if pitch not in self.weights:
            raise NoControlModel(f"regressor not trained for {pitch}")
        x = np.append(np.asarray(pitcher_tensor, dtype=float).ravel(), 1.0)
        mu_x, mu_y, var_x, var_y, cov = x @ self.weights[pitch]
        var_x = max(var_x, self.var_floor)
        var_y = max(var_y, self.var_floor)
        cap = 0.99 * math.sqrt(var_x * var_y)
        cov = min(max(cov, -cap), cap)
        return GaussianControl(mu_x, mu_y, var_x, var_y, cov)

    def to_json(self) -> dict:
        return {"lam": self.lam, "var_floor": self.var_floor,
                "weights": {p: w.tolist() for p, w in self.weights.items()}}

    @classmethod
    def from_json(cls, doc: dict) -> "ControlRegressor":
        return cls(weights={p: np.asarray(w) for p, w in doc["weights"].items()},
                   lam=doc["lam"], var_floor=doc["var_floor"])


MIN_REGRESSOR_PITCHERS = 20


def train_control_regressor(pairs_by_pitch: dict[str, list], lam: float) -> ControlRegressor:
    """Fit the ridge regressor from (pitcher tensor, GaussianControl) pairs.

    Ridge is solved as an augmented least-squares problem, so ``lam = 0``
    degenerates to the minimum-norm exact fit (the usual n < p regime here).
    """
    weights = {}
    for pitch, pairs in pairs_by_pitch.items():
        if len(pairs) < MIN_REGRESSOR_PITCHERS:
            raise InsufficientTrainingSet(
                f"{pitch}: {len(pairs)} training pitchers < {MIN_REGRESSOR_PITCHERS}")
        X = np.stack([np.append(np.asarray(t, dtype=float).ravel(), 1.0)
                      for t, _ in pairs])
        Y = np.stack([np.asarray(g.to_list()) for _, g in pairs])
        p = X.shape[1]
        if lam > 0:
            penalty = math.sqrt(lam) * np.eye(p)
            penalty[-1, -1] = 0.0  # intercept unpenalized
            X_aug = np.vstack([X, penalty])
            Y_aug = np.vstack([Y, np.zeros((p, Y.shape[1]))])
        else:
            X_aug, Y_aug = X, Y
        weights[pitch], *_ = np.linalg.lstsq(X_aug, Y_aug, rcond=None)
    return ControlRegressor(weights=weights, lam=lam)


def fit_control_for_pitcher(points_by_pitch: dict[str, np.ndarray],
                            pitcher_tensor: np.ndarray | None,
                            regressor: ControlRegressor | None,
                            keep_fraction: float = DEFAULT_KEEP_FRACTION,
                            pitch_types: tuple[str, ...] = PITCH_TYPES,
                            ) -> dict[str, tuple[GaussianControl, str]]:
    """Per-pitch-type control for one pitcher: pruned empirical fit when the
    type has more than 10 observed 3-0 pitches, regressor prediction
    otherwise.  Returns {pitch: (model, "empirical" | "regressed")}."""
    out = {}
    for pitch in pitch_types:
        pts = np.asarray(points_by_pitch.get(pitch, np.empty((0, 2))), dtype=float)
        if pts.shape[0] >= MIN_FIT_POINTS:
            out[pitch] = (prune_refit(pts, keep_fraction), "empirical")
        elif regressor is not None and pitcher_tensor is not None:
            out[pitch] = (regressor.predict(pitch, pitcher_tensor), "regressed")
        else:
            raise NoControlModel(
                f"{pitch}: {pts.shape[0]} 3-0 pitches and no trained regressor")
    return out
