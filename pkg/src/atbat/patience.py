"""Batter patience: swing probability at borderline ball zones and the
obvious-take override.

Each of the 48 (pitch type, ball zone) cells with at least 30 training
records gets its own logistic model over the flattened batter tensor plus
the (balls, strikes) pair; sparse cells fall back to a single global model
that also sees a one-hot of the zone.  An override for a fixed batter and
count forces the take wherever the predicted take probability reaches the
threshold (default 0.8); FAR is always forced - nobody swings at those.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import Count
from .zones import FAR, PITCH_TYPES, is_strike_zone

BALL_ZONES = tuple(range(9, 17))
DEFAULT_THRESHOLD = 0.8
MIN_CELL_RECORDS = 30


class NotBorderline(ValueError):
    """Queried zone is in the strike zone or FAR."""


class EmptyTrainingSet(ValueError):
    """No out-of-zone records at all."""


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _fit_logistic(X: np.ndarray, y: np.ndarray, lr: float, iters: int,
                  l2: float) -> np.ndarray:
    """Full-batch gradient descent on cross-entropy from zero weights."""
    w = np.zeros(X.shape[1])
    for _ in range(iters):
        p = _sigmoid(X @ w)
        grad = X.T @ (p - y) / len(y)
        if l2 > 0:
            grad = grad + l2 * w
        w -= lr * grad
    return w


def logistic_loss_and_grad(w: np.ndarray, X: np.ndarray, y: np.ndarray,
                           l2: float = 0.0):
    """Mean cross-entropy and its gradient (exposed for gradient checks)."""
    p = _sigmoid(X @ w)
    eps = 1e-12
    loss = float(-(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)).mean())
    grad = X.T @ (p - y) / len(y)
    if l2 > 0:
        loss += 0.5 * l2 * float(w @ w)
        grad = grad + l2 * w
    return loss, grad


@dataclass
class PatienceRecord:
    """One out-of-zone pitch: who saw it, what and where, and whether they swung."""
    batter_id: str
    pitch: str
    zone: int
    count: Count
    swung: bool


def _cell_features(xb: np.ndarray, count: Count) -> np.ndarray:
    return np.concatenate([xb, [count.balls, count.strikes, 1.0]])


def _global_features(xb: np.ndarray, count: Count, zone: int) -> np.ndarray:
    one_hot = np.zeros(len(BALL_ZONES))
    one_hot[zone - 9] = 1.0
    return np.concatenate([xb, [count.balls, count.strikes], one_hot, [1.0]])


@dataclass
class PatienceClassifier:
    """Per-cell logistic weights plus the global fallback."""

    cell_weights: dict = field(default_factory=dict)   # (pitch, zone) -> (303,)
    global_weights: np.ndarray | None = None           # (311,)
    seed: int = 0

    def swing_probability(self, batter_tensor, pitch: str, zone: int,
                          count: Count) -> float:
        if zone == FAR or is_strike_zone(zone):
            raise NotBorderline(f"zone {zone} is not a borderline ball zone")
        xb = np.asarray(batter_tensor, dtype=float).ravel()
        w = self.cell_weights.get((pitch, zone))
        if w is not None:
            p = float(_sigmoid(w @ _cell_features(xb, count)))
        else:
            p = float(_sigmoid(self.global_weights @ _global_features(xb, count, zone)))
        # keep strictly inside (0, 1): saturation is a float artifact
        return min(max(p, 1e-12), 1.0 - 1e-12)

    def to_json(self) -> dict:
        return {"seed": self.seed,
                "cells": {f"{p}|{z}": w.tolist()
                          for (p, z), w in self.cell_weights.items()},
                "global": None if self.global_weights is None
                else self.global_weights.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "PatienceClassifier":
        cells = {}
        for key, w in doc["cells"].items():
            p, z = key.split("|")
            cells[(p, int(z))] = np.asarray(w, dtype=float)
        g = doc["global"]
        return cls(cell_weights=cells, seed=doc.get("seed", 0),
                   global_weights=None if g is None else np.asarray(g, dtype=float))


def train_patience(records: list[PatienceRecord], batter_tensors: dict,
                   seed: int = 0, lr: float = 0.5, iters: int = 800,
                   l2: float = 1e-4) -> PatienceClassifier:
    """Train per-cell models where at least 30 records exist, and the global
    fallback on everything.  Deterministic: full-batch descent, zero init."""
    records = [r for r in records if r.zone in BALL_ZONES]
    if not records:
        raise EmptyTrainingSet("no out-of-zone records")
    clf = PatienceClassifier(seed=seed)

    Xg = np.stack([_global_features(np.asarray(batter_tensors[r.batter_id]).ravel(),
                                    r.count, r.zone) for r in records])
    yg = np.array([float(r.swung) for r in records])
    clf.global_weights = _fit_logistic(Xg, yg, lr, iters, l2)

    by_cell: dict = {}
    for r in records:
        by_cell.setdefault((r.pitch, r.zone), []).append(r)
    for key in sorted(by_cell):
        cell = by_cell[key]
        if len(cell) < MIN_CELL_RECORDS:
            continue
        X = np.stack([_cell_features(np.asarray(batter_tensors[r.batter_id]).ravel(),
                                     r.count) for r in cell])
        y = np.array([float(r.swung) for r in cell])
        clf.cell_weights[key] = _fit_logistic(X, y, lr, iters, l2)
    return clf


def swing_probability(clf: PatienceClassifier, batter_tensor, pitch: str,
                      zone: int, count: Count) -> float:
    return clf.swing_probability(batter_tensor, pitch, zone, count)


@dataclass(frozen=True)
class PatienceOverride:
    """Forced-take flags for one batter at one count.

    ``forced[(pitch, zone)]`` is True where take probability >= threshold;
    FAR is always forced regardless of the model.
    """

    forced: dict
    threshold: float

    def forced_take(self, pitch: str, zone: int) -> bool:
        if zone == FAR:
            return True
        if is_strike_zone(zone):
            raise NotBorderline("override applies to ball zones only")
        return self.forced.get((pitch, zone), False)


def build_override(clf: PatienceClassifier, batter_tensor, count: Count,
                   threshold: float = DEFAULT_THRESHOLD,
                   pitch_types: tuple[str, ...] = PITCH_TYPES) -> PatienceOverride:
    """Threshold the classifier: take is forced where 1 - P(swing) >= threshold."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    forced = {}
    for pitch in pitch_types:
        for zone in BALL_ZONES:
            take_prob = 1.0 - clf.swing_probability(batter_tensor, pitch, zone, count)
            forced[(pitch, zone)] = take_prob >= threshold
    return PatienceOverride(forced=forced, threshold=threshold)
