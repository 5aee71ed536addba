"""Synthetic ground-truth worlds: the end-to-end oracle.

A world draws, from a seeded generator, true control Gaussians, swing
curves, and swing-outcome distributions for cohorts of strong / average /
weak pitchers and batters (strong pitchers get the small variances, strong
batters the patient eyes).  It can export a pitch-level CSV of behavioral
play that the ingestion pipeline consumes, so the whole
generate -> ingest -> fit -> solve -> compare loop runs against known truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .control import AimTable, GaussianControl
from .data import PitchRecord
from .game import COUNTS, Count, next_state_on_swing_outcome, next_state_on_take
from .patience import BALL_ZONES, PatienceOverride
from .simulate import MatchupModels
from .zones import (FAR, PITCH_TYPES, ZoneGrid, default_grid,
                    is_strike_zone, zone_centroid, zone_of)

TIERS = ("strong", "average", "weak")
TIER_QUALITY = {"strong": 1.0, "average": 0.0, "weak": -1.0}

#: True control variance ranges (ft^2) per pitcher tier; disjoint by design
#: so fitted variances must reproduce the quality ordering.
TIER_VARIANCE = {"strong": (0.04, 0.08), "average": (0.12, 0.20),
                 "weak": (0.30, 0.45)}


class SpecError(ValueError):
    """Malformed cohort specification."""


@dataclass(frozen=True)
class WorldSpec:
    """Cohort layout: players per tier and export sizes."""

    pitchers: dict = field(default_factory=lambda: {"strong": 1, "average": 1, "weak": 1})
    batters: dict = field(default_factory=lambda: {"strong": 1, "average": 1, "weak": 1})
    at_bats_per_matchup: int = 120
    three_oh_pitches: int = 250
    count_dependent: bool = True
    patience_threshold: float = 0.8

    def __post_init__(self):
        for name, cohort in (("pitchers", self.pitchers), ("batters", self.batters)):
            if not isinstance(cohort, dict) or not cohort:
                raise SpecError(f"{name} must map tiers to counts")
            for tier, count in cohort.items():
                if tier not in TIERS:
                    raise SpecError(f"unknown tier {tier!r}")
                if not isinstance(count, int) or count < 0:
                    raise SpecError(f"{name}[{tier}] must be a nonnegative int")
        if sum(self.pitchers.values()) < 1 or sum(self.batters.values()) < 1:
            raise SpecError("need at least one pitcher and one batter")
        if self.at_bats_per_matchup < 1:
            raise SpecError("at_bats_per_matchup must be >= 1")
        if self.three_oh_pitches < 0:
            raise SpecError("three_oh_pitches must be >= 0")
        if not 0 < self.patience_threshold < 1:
            raise SpecError("patience_threshold must be in (0, 1)")

    @classmethod
    def from_json(cls, doc: dict) -> "WorldSpec":
        try:
            return cls(**doc)
        except TypeError as exc:
            raise SpecError(str(exc)) from exc


def _sigmoid(z: float) -> float:
    return 1.0 / (1.0 + math.exp(-z))


_ZONE_SWING_BASE = {}
for _z in range(9):
    _ZONE_SWING_BASE[_z] = 1.2 if _z == 4 else 0.4
for _z in (9, 11, 14, 16):
    _ZONE_SWING_BASE[_z] = -0.4
for _z in (10, 12, 13, 15):
    _ZONE_SWING_BASE[_z] = -1.3

_BASE_LOGITS = {
    "heart": np.array([0.0, 0.85, 1.05, 0.75]),
    "edge": np.array([0.55, 0.8, 0.15, 0.75]),
    "border": np.array([1.15, 0.6, -0.25, 0.55]),
}


def _zone_group(zone: int) -> str:
    if zone == 4:
        return "heart"
    return "edge" if is_strike_zone(zone) else "border"


@dataclass
class SyntheticWorld:
    """Ground truth for a cohort of players; all randomness fixed by seed."""

    spec: WorldSpec
    seed: int
    grid: ZoneGrid = field(default_factory=default_grid)
    pitchers: dict = field(default_factory=dict)
    batters: dict = field(default_factory=dict)
    _aim_tables: dict = field(default_factory=dict, repr=False)

    # -- construction --------------------------------------------------------

    @classmethod
    def build(cls, spec: WorldSpec, seed: int) -> "SyntheticWorld":
        rng = np.random.default_rng(seed)
        world = cls(spec=spec, seed=seed)
        for tier in TIERS:
            for i in range(spec.pitchers.get(tier, 0)):
                pid = f"P_{tier}_{i}"
                world.pitchers[pid] = world._make_pitcher(tier, rng)
        for tier in TIERS:
            for i in range(spec.batters.get(tier, 0)):
                bid = f"B_{tier}_{i}"
                world.batters[bid] = world._make_batter(tier, rng)
        return world

    def _make_pitcher(self, tier: str, rng: np.random.Generator) -> dict:
        lo, hi = TIER_VARIANCE[tier]
        gauss, habit, velo = {}, {}, {}
        for pitch in PITCH_TYPES:
            vx = float(rng.uniform(lo, hi))
            vy = float(rng.uniform(lo, hi))
            rho = float(rng.uniform(-0.2, 0.2))
            cov = rho * math.sqrt(vx * vy)
            gauss[pitch] = GaussianControl(0.0, 0.0, vx, vy, cov)
            cx, cz = zone_centroid(self.grid, 4)
            habit[pitch] = (cx + float(rng.uniform(-0.15, 0.15)),
                            cz + float(rng.uniform(-0.2, 0.2)))
            velo[pitch] = float(rng.uniform(78, 88) + (8 if pitch in ("FF", "FT") else 0))
        arsenal = list(rng.choice(len(PITCH_TYPES), size=3, replace=False))
        return {"tier": tier, "gauss": gauss, "habit": habit, "velocity": velo,
                "arsenal": [PITCH_TYPES[int(i)] for i in arsenal]}

    def _make_batter(self, tier: str, rng: np.random.Generator) -> dict:
        # strong batters are more patient: lower out-of-zone swing propensity
        agg = {"strong": -0.6, "average": 0.0, "weak": 0.6}[tier]
        return {"tier": tier, "agg": agg + float(rng.uniform(-0.1, 0.1))}

    # -- ground truth ---------------------------------------------------------

    def true_swing_prob(self, batter_id: str, count: Count, pitch: str,
                        zone: int) -> float:
        if zone == FAR:
            return 0.0
        b = self.batters[batter_id]
        logit = _ZONE_SWING_BASE[zone] + 0.9 * b["agg"]
        if self.spec.count_dependent:
            logit += 0.5 * count.strikes - 0.45 * count.balls
        return _sigmoid(logit)

    def true_outcome(self, pitcher_id: str, batter_id: str, pitch: str,
                     zone: int, count: Count) -> np.ndarray:
        qp = TIER_QUALITY[self.pitchers[pitcher_id]["tier"]]
        qb = TIER_QUALITY[self.batters[batter_id]["tier"]]
        logits = _BASE_LOGITS[_zone_group(zone)].copy()
        logits[0] += 0.35 * qp - 0.25 * qb
        logits[2] += 0.30 * qb - 0.25 * qp
        if self.spec.count_dependent:
            logits[0] += 0.12 * (count.strikes - 0.5 * count.balls)
            logits[2] += 0.10 * count.balls - 0.12 * count.strikes
        e = np.exp(logits - logits.max())
        return e / e.sum()

    def aim_table(self, pitcher_id: str) -> AimTable:
        if pitcher_id not in self._aim_tables:
            self._aim_tables[pitcher_id] = AimTable(
                self.pitchers[pitcher_id]["gauss"], self.grid)
        return self._aim_tables[pitcher_id]

    def true_override(self, batter_id: str, count: Count,
                      threshold: float | None = None) -> PatienceOverride:
        theta = threshold if threshold is not None else self.spec.patience_threshold
        forced = {}
        for pitch in PITCH_TYPES:
            for zone in BALL_ZONES:
                take = 1.0 - self.true_swing_prob(batter_id, count, pitch, zone)
                forced[(pitch, zone)] = take >= theta
        return PatienceOverride(forced=forced, threshold=theta)

    def matchup_models(self, pitcher_id: str, batter_id: str,
                       threshold: float | None = None) -> MatchupModels:
        """True-component simulation substrate for one matchup."""
        world = self

        class _Outcome:
            def distribution(self, pitch, zone, count):
                return world.true_outcome(pitcher_id, batter_id, pitch, zone, count)

        overrides = {c: self.true_override(batter_id, c, threshold) for c in COUNTS}
        return MatchupModels(control=self.aim_table(pitcher_id),
                             outcome=_Outcome(), overrides_by_count=overrides)

    # -- behavioral play ------------------------------------------------------

    def behavioral_pitch_policy(self, pitcher_id: str, count: Count) -> dict:
        """What this pitcher habitually throws: a predictable, exploitable
        mix concentrated on the arsenal and middle-heavy when behind."""
        p = self.pitchers[pitcher_id]
        arsenal = p["arsenal"]
        policy: dict = {}
        if count.balls >= 2 and count.strikes < 2:
            aims = {4: 0.7, 1: 0.15, 7: 0.15}
        elif count.strikes == 2:
            aims = {4: 0.2, 0: 0.2, 8: 0.2, 16: 0.2, 9: 0.2}
        else:
            aims = {4: 0.34, 0: 0.22, 8: 0.22, 2: 0.11, 6: 0.11}
        weights = [0.5, 0.3, 0.2]
        for pitch, wp in zip(arsenal, weights):
            for aim, wa in aims.items():
                policy[(pitch, aim)] = policy.get((pitch, aim), 0.0) + wp * wa
        return policy

    # -- data export ----------------------------------------------------------

    def _sample_coords(self, rng, pitcher_id: str, pitch: str, target) -> tuple:
        g = self.pitchers[pitcher_id]["gauss"][pitch]
        L = np.linalg.cholesky(g.covariance)
        eps = L @ rng.standard_normal(2)
        return (target[0] + float(eps[0]), target[1] + float(eps[1]))

    def _velocity(self, rng, pitcher_id: str, pitch: str) -> float:
        return self.pitchers[pitcher_id]["velocity"][pitch] + float(rng.normal(0, 1))

    def _play_pitch(self, rng, pitcher_id: str, batter_id: str, count: Count
                    ) -> tuple[PitchRecord, object]:
        policy = self.behavioral_pitch_policy(pitcher_id, count)
        keys = sorted(policy)
        probs = np.array([policy[k] for k in keys])
        probs = probs / probs.sum()
        pitch, aim = keys[int(rng.choice(len(keys), p=probs))]
        if count == Count(3, 0):
            target = self.pitchers[pitcher_id]["habit"][pitch]
        else:
            target = zone_centroid(self.grid, aim)
        x, z = self._sample_coords(rng, pitcher_id, pitch, target)
        zone = zone_of(self.grid, x, z)
        swing = rng.random() < self.true_swing_prob(batter_id, count, pitch, zone)
        if not swing:
            in_zone = zone != FAR and is_strike_zone(zone)
            label = "called_strike" if in_zone else "ball"
            nxt = next_state_on_take(count, in_zone)
        else:
            dist = self.true_outcome(pitcher_id, batter_id, pitch, zone, count)
            from .game import OUTCOMES
            w = OUTCOMES[int(rng.choice(4, p=dist))]
            label = {"strike": "whiff", "foul": "foul", "hit": "hit",
                     "out": "out_in_play"}[w]
            nxt = next_state_on_swing_outcome(count, w)
        record = PitchRecord(
            pitcher_id=pitcher_id, batter_id=batter_id, pitch_type=pitch,
            x=x, z=z, balls=count.balls, strikes=count.strikes, swung=swing,
            label=label, velocity=self._velocity(rng, pitcher_id, pitch))
        return record, nxt

    def export_records(self) -> list[PitchRecord]:
        """Behavioral at-bats for every matchup plus a dedicated block of
        3-0 pitches per (pitcher, pitch type) aimed at the habitual target,
        so control is identifiable for every type."""
        rng = np.random.default_rng(self.seed + 1)
        records: list[PitchRecord] = []
        batter_ids = sorted(self.batters)
        for pitcher_id in sorted(self.pitchers):
            for batter_id in batter_ids:
                for _ in range(self.spec.at_bats_per_matchup):
                    state = Count(0, 0)
                    while isinstance(state, Count):
                        record, state = self._play_pitch(rng, pitcher_id,
                                                         batter_id, state)
                        records.append(record)
        three_oh = Count(3, 0)
        n_block = self.spec.three_oh_pitches
        # exactly the 5% that prune_refit drops, and far enough out in both
        # coordinates that they always rank as the least likely points
        n_miss = int(0.05 * n_block)
        for pitcher_id in sorted(self.pitchers):
            habit = self.pitchers[pitcher_id]["habit"]
            for pitch in PITCH_TYPES:
                misses = set(rng.choice(n_block, size=n_miss, replace=False)
                             .tolist()) if n_miss else set()
                for j in range(n_block):
                    batter_id = batter_ids[j % len(batter_ids)]
                    if j in misses:
                        # wild intentional miss (e.g. pitching around the
                        # batter): exactly what pruning should drop
                        sx = 1.0 if rng.random() < 0.5 else -1.0
                        sz = 1.0 if rng.random() < 0.5 else -1.0
                        x = habit[pitch][0] + sx * float(rng.uniform(3.5, 4.5))
                        z = habit[pitch][1] + sz * float(rng.uniform(3.5, 4.5))
                    else:
                        x, z = self._sample_coords(rng, pitcher_id, pitch,
                                                   habit[pitch])
                    zone = zone_of(self.grid, x, z)
                    swing = rng.random() < self.true_swing_prob(
                        batter_id, three_oh, pitch, zone)
                    if not swing:
                        in_zone = zone != FAR and is_strike_zone(zone)
                        label = "called_strike" if in_zone else "ball"
                    else:
                        dist = self.true_outcome(pitcher_id, batter_id, pitch,
                                                 zone, three_oh)
                        from .game import OUTCOMES
                        w = OUTCOMES[int(rng.choice(4, p=dist))]
                        label = {"strike": "whiff", "foul": "foul", "hit": "hit",
                                 "out": "out_in_play"}[w]
                    records.append(PitchRecord(
                        pitcher_id=pitcher_id, batter_id=batter_id,
                        pitch_type=pitch, x=x, z=z, balls=3, strikes=0,
                        swung=swing, label=label,
                        velocity=self._velocity(rng, pitcher_id, pitch)))
        return records

    # -- (de)serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "spec": {"pitchers": self.spec.pitchers, "batters": self.spec.batters,
                     "at_bats_per_matchup": self.spec.at_bats_per_matchup,
                     "three_oh_pitches": self.spec.three_oh_pitches,
                     "count_dependent": self.spec.count_dependent,
                     "patience_threshold": self.spec.patience_threshold},
            "seed": self.seed,
            "pitchers": {pid: {"tier": p["tier"],
                               "gauss": {k: g.to_list() for k, g in p["gauss"].items()},
                               "habit": {k: list(v) for k, v in p["habit"].items()},
                               "velocity": p["velocity"],
                               "arsenal": p["arsenal"]}
                         for pid, p in self.pitchers.items()},
            "batters": {bid: {"tier": b["tier"], "agg": b["agg"]}
                        for bid, b in self.batters.items()},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SyntheticWorld":
        world = cls(spec=WorldSpec(**doc["spec"]), seed=doc["seed"])
        for pid, p in doc["pitchers"].items():
            world.pitchers[pid] = {
                "tier": p["tier"],
                "gauss": {k: GaussianControl.from_list(v)
                          for k, v in p["gauss"].items()},
                "habit": {k: tuple(v) for k, v in p["habit"].items()},
                "velocity": dict(p["velocity"]), "arsenal": list(p["arsenal"])}
        for bid, b in doc["batters"].items():
            world.batters[bid] = {"tier": b["tier"], "agg": b["agg"]}
        return world


def generate_world(spec: WorldSpec, seed: int
                   ) -> tuple[SyntheticWorld, list[PitchRecord]]:
    """Deterministic world plus its exported pitch records (ready for
    :func:`atbat.data.export_csv` and re-ingestion)."""
    world = SyntheticWorld.build(spec, seed)
    return world, world.export_records()
