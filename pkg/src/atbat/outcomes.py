"""Swing-outcome prediction: P(strike, foul, hit, out | swing, pitch, location, count).

Two interchangeable predictors ship:

* :class:`EmpiricalOutcomeTable` - hierarchically smoothed frequencies keyed
  by (pitch type, zone, count), backing off to (pitch type, zone), then zone,
  then a global distribution, with Dirichlet strength ``alpha`` at each step.
  Transparent, fast, and the reference model for calibration tests.
* :class:`LateFusionSoftmax` - linear embeddings of the pitcher, batter, and
  pitch tensors concatenated with the raw (balls, strikes) pair, one affine
  head, softmax.  Trained by seeded mini-batch gradient descent on
  cross-entropy; zero-initialized, so an untrained model predicts uniformly.

Both expose ``predict(pitcher_tensor, batter_tensor, pitch_tensor, count)``
returning a 4-vector over OUTCOMES, and a direct ``distribution(pitch, zone,
count)`` used during kernel construction (the softmax assembles the pitch
tensor itself; the matchup tensors are bound at construction time).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import OUTCOMES, Count
from .zones import ZoneGrid, build_pitch_tensor, decode_pitch_tensor, default_grid

OUTCOME_INDEX = {w: i for i, w in enumerate(OUTCOMES)}
UNIFORM = np.full(4, 0.25)


class EmptyTrainingSet(ValueError):
    """No swing records to train on."""


class DivergedTraining(RuntimeError):
    """Loss became non-finite; lower the learning rate."""


class ShapeError(ValueError):
    """Input tensor has the wrong shape."""


def dirichlet_smooth(counts: np.ndarray, alpha: float, backoff: np.ndarray) -> np.ndarray:
    """(n_w + alpha * backoff_w) / (n + alpha); returns the backoff itself
    when the level is empty (including the alpha = 0 case)."""
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n + alpha == 0.0:
        return np.asarray(backoff, dtype=float)
    return (counts + alpha * np.asarray(backoff, dtype=float)) / (n + alpha)


@dataclass
class SwingExample:
    """One observed swing: what was thrown, where it landed, the count, and
    which of the four outcomes occurred."""
    pitch: str
    zone: int
    count: Count
    outcome: str


class EmpiricalOutcomeTable:
    """Backoff chain: (pitch, zone, count) -> (pitch, zone) -> zone -> global
    -> uniform, each level Dirichlet-smoothed toward its parent."""

    def __init__(self, alpha: float):
        self.alpha = alpha
        self.fine: dict = {}
        self.mid: dict = {}
        self.by_zone: dict = {}
        self.global_counts = np.zeros(4)

    def add(self, pitch: str, zone: int, count: Count, outcome: str) -> None:
        w = OUTCOME_INDEX[outcome]
        key_f = (pitch, zone, count.balls, count.strikes)
        key_m = (pitch, zone)
        for table, key in ((self.fine, key_f), (self.mid, key_m),
                           (self.by_zone, zone)):
            if key not in table:
                table[key] = np.zeros(4)
            table[key][w] += 1.0
        self.global_counts[w] += 1.0

    def distribution(self, pitch: str, zone: int, count: Count) -> np.ndarray:
        zero = np.zeros(4)
        p = dirichlet_smooth(self.global_counts, self.alpha, UNIFORM)
        p = dirichlet_smooth(self.by_zone.get(zone, zero), self.alpha, p)
        p = dirichlet_smooth(self.mid.get((pitch, zone), zero), self.alpha, p)
        key = (pitch, zone, count.balls, count.strikes)
        return dirichlet_smooth(self.fine.get(key, zero), self.alpha, p)

    def predict(self, pitcher_tensor, batter_tensor, pitch_tensor, count: Count
                ) -> np.ndarray:
        pitch, zone = decode_pitch_tensor(pitch_tensor)
        return self.distribution(pitch, zone, count)

    def to_json(self) -> dict:
        def enc(table):
            return {"|".join(str(k) for k in (key if isinstance(key, tuple) else (key,))):
                    v.tolist() for key, v in table.items()}
        return {"alpha": self.alpha, "fine": enc(self.fine), "mid": enc(self.mid),
                "zone": enc(self.by_zone), "global": self.global_counts.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "EmpiricalOutcomeTable":
        table = cls(alpha=doc["alpha"])
        for key, v in doc["fine"].items():
            p, z, u, s = key.split("|")
            table.fine[(p, int(z), int(u), int(s))] = np.asarray(v, dtype=float)
        for key, v in doc["mid"].items():
            p, z = key.split("|")
            table.mid[(p, int(z))] = np.asarray(v, dtype=float)
        for key, v in doc["zone"].items():
            table.by_zone[int(key)] = np.asarray(v, dtype=float)
        table.global_counts = np.asarray(doc["global"], dtype=float)
        return table


def train_empirical(examples: list[SwingExample], alpha: float) -> EmpiricalOutcomeTable:
    if not examples:
        raise EmptyTrainingSet("no swing records")
    table = EmpiricalOutcomeTable(alpha)
    for ex in examples:
        table.add(ex.pitch, ex.zone, ex.count, ex.outcome)
    return table


@dataclass
class SoftmaxHyper:
    embed_dim: int = 16
    learning_rate: float = 0.05
    epochs: int = 60
    batch_size: int = 64
    l2: float = 0.0
    seed: int = 0


class LateFusionSoftmax:
    """Linear pitcher/batter/pitch embeddings fused with the count pair.

    Parameters: ``Wp`` (d, 300), ``Wb`` (d, 300), ``Wz`` (d, 150), head
    ``Wh`` (4, 3d + 2) and bias ``bh`` (4,).  Logits are
    ``Wh @ concat(Wp xp, Wb xb, Wz xz, s) + bh``.
    """

    def __init__(self, hyper: SoftmaxHyper, grid: ZoneGrid | None = None):
        self.hyper = hyper
        self.grid = grid or default_grid()
        d = hyper.embed_dim
        # head zero (so the untrained model predicts uniformly), embeddings
        # small seeded noise: with every weight zero the bilinear paths sit
        # at a saddle the gradient can never leave
        rng = np.random.default_rng(hyper.seed)
        self.Wp = rng.normal(size=(d, 300)) / np.sqrt(300)
        self.Wb = rng.normal(size=(d, 300)) / np.sqrt(300)
        self.Wz = rng.normal(size=(d, 150)) / np.sqrt(150)
        self.Wh = np.zeros((4, 3 * d + 2))
        self.bh = np.zeros(4)
        self.loss_trace: list[float] = []

    # -- forward / backward -------------------------------------------------

    def _fused(self, Xp, Xb, Xz, S):
        return np.concatenate([Xp @ self.Wp.T, Xb @ self.Wb.T, Xz @ self.Wz.T, S],
                              axis=1)

    def _probs(self, fused):
        logits = fused @ self.Wh.T + self.bh
        logits = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=1, keepdims=True)

    def predict_batch(self, Xp, Xb, Xz, S) -> np.ndarray:
        return self._probs(self._fused(Xp, Xb, Xz, S))

    def predict(self, pitcher_tensor, batter_tensor, pitch_tensor, count: Count
                ) -> np.ndarray:
        xp = np.asarray(pitcher_tensor, dtype=float).ravel()
        xb = np.asarray(batter_tensor, dtype=float).ravel()
        xz = np.asarray(pitch_tensor, dtype=float).ravel()
        if xp.size != 300 or xb.size != 300 or xz.size != 150:
            raise ShapeError("tensor sizes must be 300/300/150")
        s = np.array([count.balls, count.strikes], dtype=float)
        return self.predict_batch(xp[None], xb[None], xz[None], s[None])[0]

    def _loss_and_grads(self, Xp, Xb, Xz, S, y):
        n = Xp.shape[0]
        fused = self._fused(Xp, Xb, Xz, S)
        probs = self._probs(fused)
        # unclamped log: a saturated (exactly zero) probability on a realized
        # label is a genuine blow-up and must surface as DivergedTraining
        with np.errstate(divide="ignore"):
            loss = float(-np.log(probs[np.arange(n), y]).mean())
        delta = probs.copy()
        delta[np.arange(n), y] -= 1.0
        delta /= n
        d = self.hyper.embed_dim
        gWh = delta.T @ fused
        gbh = delta.sum(axis=0)
        back = delta @ self.Wh  # (n, 3d + 2)
        gWp = back[:, :d].T @ Xp
        gWb = back[:, d:2 * d].T @ Xb
        gWz = back[:, 2 * d:3 * d].T @ Xz
        if self.hyper.l2 > 0:
            lam = self.hyper.l2
            loss = loss + 0.5 * lam * sum(float((w ** 2).sum()) for w in
                                          (self.Wp, self.Wb, self.Wz, self.Wh))
            gWp += lam * self.Wp
            gWb += lam * self.Wb
            gWz += lam * self.Wz
            gWh += lam * self.Wh
        return loss, (gWp, gWb, gWz, gWh, gbh)

    def _apply(self, grads, lr):
        gWp, gWb, gWz, gWh, gbh = grads
        self.Wp -= lr * gWp
        self.Wb -= lr * gWb
        self.Wz -= lr * gWz
        self.Wh -= lr * gWh
        self.bh -= lr * gbh

    def fit(self, Xp, Xb, Xz, S, y) -> "LateFusionSoftmax":
        """Seeded mini-batch gradient descent; the mean per-epoch mini-batch
        loss is appended to ``loss_trace``."""
        rng = np.random.default_rng(self.hyper.seed)
        n = Xp.shape[0]
        lr = self.hyper.learning_rate
        for _ in range(self.hyper.epochs):
            perm = rng.permutation(n)
            losses = []
            for lo in range(0, n, self.hyper.batch_size):
                idx = perm[lo:lo + self.hyper.batch_size]
                loss, grads = self._loss_and_grads(Xp[idx], Xb[idx], Xz[idx],
                                                   S[idx], y[idx])
                if not np.isfinite(loss):
                    raise DivergedTraining(
                        f"loss {loss!r}; lower the learning rate")
                self._apply(grads, lr)
                losses.append(loss)
            epoch_loss = float(np.mean(losses))
            if not np.isfinite(epoch_loss):
                raise DivergedTraining("non-finite epoch loss")
            self.loss_trace.append(epoch_loss)
        if any(not np.isfinite(w).all() for w in
               (self.Wp, self.Wb, self.Wz, self.Wh, self.bh)):
            raise DivergedTraining("non-finite weights after training")
        return self

    # -- matchup binding for kernel construction ----------------------------

    def bound(self, pitcher_tensor, batter_tensor) -> "BoundSoftmax":
        return BoundSoftmax(self, np.asarray(pitcher_tensor, dtype=float).ravel(),
                            np.asarray(batter_tensor, dtype=float).ravel())

    def to_json(self) -> dict:
        return {"hyper": vars(self.hyper),
                "weights": {"Wp": self.Wp.tolist(), "Wb": self.Wb.tolist(),
                            "Wz": self.Wz.tolist(), "Wh": self.Wh.tolist(),
                            "bh": self.bh.tolist()},
                "loss_trace": self.loss_trace}

    @classmethod
    def from_json(cls, doc: dict) -> "LateFusionSoftmax":
        model = cls(SoftmaxHyper(**doc["hyper"]))
        w = doc["weights"]
        model.Wp = np.asarray(w["Wp"], dtype=float)
        model.Wb = np.asarray(w["Wb"], dtype=float)
        model.Wz = np.asarray(w["Wz"], dtype=float)
        model.Wh = np.asarray(w["Wh"], dtype=float)
        model.bh = np.asarray(w["bh"], dtype=float)
        model.loss_trace = list(doc.get("loss_trace", []))
        return model


class BoundSoftmax:
    """A softmax model with the matchup tensors fixed, exposing the
    (pitch, zone, count) query used by kernel construction."""

    def __init__(self, model: LateFusionSoftmax, xp: np.ndarray, xb: np.ndarray):
        self.model = model
        self.xp = xp
        self.xb = xb
        self._cache: dict = {}

    def distribution(self, pitch: str, zone: int, count: Count) -> np.ndarray:
        key = (pitch, zone, count.balls, count.strikes)
        if key not in self._cache:
            xz = build_pitch_tensor(self.model.grid, pitch, zone).ravel()
            s = np.array([count.balls, count.strikes], dtype=float)
            self._cache[key] = self.model.predict_batch(
                self.xp[None], self.xb[None], xz[None], s[None])[0]
        return self._cache[key]


def assemble_arrays(examples: list[SwingExample], pitcher_tensors: dict,
                    batter_tensors: dict, matchups: list[tuple[str, str]],
                    grid: ZoneGrid):
    """Stack per-example feature arrays for softmax training.

    ``matchups[i]`` names the (pitcher_id, batter_id) behind ``examples[i]``.
    """
    Xp = np.stack([np.asarray(pitcher_tensors[m[0]]).ravel() for m in matchups])
    Xb = np.stack([np.asarray(batter_tensors[m[1]]).ravel() for m in matchups])
    Xz = np.stack([build_pitch_tensor(grid, ex.pitch, ex.zone).ravel()
                   for ex in examples])
    S = np.array([[ex.count.balls, ex.count.strikes] for ex in examples],
                 dtype=float)
    y = np.array([OUTCOME_INDEX[ex.outcome] for ex in examples], dtype=int)
    return Xp, Xb, Xz, S, y


def train_softmax(Xp, Xb, Xz, S, y, hyper: SoftmaxHyper) -> LateFusionSoftmax:
    if Xp.shape[0] < 100:
        raise EmptyTrainingSet(f"{Xp.shape[0]} records < 100")
    return LateFusionSoftmax(hyper).fit(Xp, Xb, Xz, S, y)


def log_loss(probs: np.ndarray, y: np.ndarray) -> float:
    eps = 1e-12
    return float(-np.log(probs[np.arange(len(y)), y] + eps).mean())


def evaluate(model, examples: list[SwingExample], pitcher_tensors: dict,
             batter_tensors: dict, matchups: list[tuple[str, str]],
             grid: ZoneGrid) -> dict:
    """Held-out metrics: mean negative log-likelihood plus a calibration
    table of mean predicted vs empirical outcome frequencies, bucketed by
    count and by in-zone/out-of-zone."""
    if not examples:
        raise EmptyTrainingSet("no held-out records")
    preds = np.zeros((len(examples), 4))
    for i, (ex, (pid, bid)) in enumerate(zip(examples, matchups)):
        pt = build_pitch_tensor(grid, ex.pitch, ex.zone)
        preds[i] = model.predict(pitcher_tensors[pid], batter_tensors[bid],
                                 pt, ex.count)
    y = np.array([OUTCOME_INDEX[ex.outcome] for ex in examples])
    buckets: dict = {}
    for i, ex in enumerate(examples):
        for key in (f"count={ex.count}", "zone=in" if ex.zone <= 8 else "zone=out"):
            buckets.setdefault(key, []).append(i)
    table = {}
    for key, idx in sorted(buckets.items()):
        idx = np.asarray(idx)
        emp = np.bincount(y[idx], minlength=4) / idx.size
        table[key] = {"n": int(idx.size),
                      "predicted": preds[idx].mean(axis=0).tolist(),
                      "empirical": emp.tolist()}
    return {"log_loss": log_loss(preds, y), "calibration": table}
