"""Monte Carlo at-bat simulation, behavioral-policy estimation, and the
equilibrium-vs-behavioral OBP comparison.

Every policy supported here is measurable with respect to (count, pitch,
aim, landing zone), so an at-bat under fixed policies is an absorbing Markov
chain over the 14 states.  Simulation therefore composes the exact per-count
next-state distribution once and samples the chain vectorized across
at-bats; the hierarchy (sample pitcher action, landing location, swing
decision, outcome) is marginalized analytically, which is distributionally
identical and orders of magnitude faster.  Parallel fan-out, if ever needed,
should derive worker streams by appending the worker index to the master
seed; results merge by summation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import (COUNTS, N_STATES, ON_BASE_IDX, Count, TransitionKernel,
                   build_kernel, next_state_on_swing_outcome,
                   next_state_on_take, state_index)
from .zones import FAR, N_ZONES, PITCH_TYPES, is_strike_zone

PITCH_CAP = 500


class EmptyTrainingSet(ValueError):
    """No records to estimate a behavioral policy from."""


@dataclass(frozen=True)
class SimulationResult:
    start: Count
    obp: float
    std_error: float
    n: int
    mean_pitches: float
    aborted: int = 0  # at-bats cut off at the pitch cap (counted as not on base)

    @property
    def flagged(self) -> bool:
        return self.aborted > 0

    def to_json(self) -> dict:
        return {"start": str(self.start), "obp": self.obp,
                "std_error": self.std_error, "n": self.n,
                "mean_pitches": self.mean_pitches, "aborted": self.aborted}


@dataclass(frozen=True)
class MatchupModels:
    """The simulation substrate for one pitcher-batter pair: fitted or true
    control, outcome, and per-count patience overrides."""

    control: object                  # .vector(pitch, aim) -> (18,)
    outcome: object                  # .distribution(pitch, zone, count) -> (4,)
    overrides_by_count: dict         # Count -> PatienceOverride
    pitch_types: tuple = PITCH_TYPES
    provenance: dict = field(default_factory=dict)

    def kernel(self) -> TransitionKernel:
        return build_kernel(self.control, self.outcome, self.overrides_by_count,
                            self.pitch_types)


def _take_vector(count: Count, in_zone: bool) -> np.ndarray:
    row = np.zeros(N_STATES)
    row[state_index(next_state_on_take(count, in_zone))] = 1.0
    return row


def _swing_vector(count: Count, dist: np.ndarray) -> np.ndarray:
    row = np.zeros(N_STATES)
    from .game import OUTCOMES
    for w, p in zip(OUTCOMES, dist):
        row[state_index(next_state_on_swing_outcome(count, w))] += p
    return row


def chain_from_kernel(kernel: TransitionKernel, pitcher_policy: dict,
                      batter_policy: dict) -> np.ndarray:
    """Per-count next-state distribution under count-level mixed policies."""
    k = kernel.n_actions
    P = np.zeros((12, N_STATES))
    for ci, c in enumerate(COUNTS):
        block = kernel.array[ci].reshape(k, 2, N_STATES)
        P[ci] = np.einsum("kbs,k,b->s", block, pitcher_policy[c], batter_policy[c])
    return P


def chain_from_components(models: MatchupModels, pitcher_dist, swing_prob
                          ) -> np.ndarray:
    """Per-count next-state distribution from raw components.

    ``pitcher_dist(count)`` maps to {(pitch, aim): prob}; ``swing_prob(count,
    pitch, landing_zone)`` gives the batter's swing chance conditional on the
    landing zone (FAR is never swung at, whatever the policy says).
    """
    P = np.zeros((12, N_STATES))
    for ci, c in enumerate(COUNTS):
        row = np.zeros(N_STATES)
        for (pitch, aim), p_act in pitcher_dist(c).items():
            if p_act <= 0.0:
                continue
            ctrl = np.asarray(models.control.vector(pitch, aim))
            for zone in range(N_ZONES + 1):
                mass = p_act * ctrl[zone]
                if mass == 0.0:
                    continue
                if zone == FAR:
                    row += mass * _take_vector(c, False)
                    continue
                sp = float(swing_prob(c, pitch, zone))
                if sp > 0.0:
                    dist = np.asarray(models.outcome.distribution(pitch, zone, c))
                    row += mass * sp * _swing_vector(c, dist)
                if sp < 1.0:
                    row += mass * (1.0 - sp) * _take_vector(c, is_strike_zone(zone))
        P[ci] = row / row.sum()
    return P


def equilibrium_swing_fn(solution, models: MatchupModels):
    """Swing probability implied by an equilibrium batter mix plus the
    forced-take override: the count-level swing weight applies only where
    the override permits a swing."""
    def swing_prob(count: Count, pitch: str, zone: int) -> float:
        if zone == FAR:
            return 0.0
        if not is_strike_zone(zone) and \
                models.overrides_by_count[count].forced_take(pitch, zone):
            return 0.0
        return float(solution.batter_policy[count][0])
    return swing_prob


def simulate_chain(P: np.ndarray, start: Count, n: int, seed: int,
                   pitch_cap: int = PITCH_CAP) -> SimulationResult:
    """Sample n at-bats of the absorbing chain, all trajectories advanced in
    lockstep; at-bats still alive after ``pitch_cap`` pitches are aborted and
    flagged."""
    if n < 1:
        raise ValueError("need at least one at-bat")
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    rng = np.random.default_rng(seed)
    state = np.full(n, state_index(start), dtype=np.int64)
    pitches = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    for _ in range(pitch_cap):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        u = rng.random(idx.size)
        current = state[idx]
        nxt = np.empty(idx.size, dtype=np.int64)
        for s in np.unique(current):
            m = current == s
            nxt[m] = np.searchsorted(cum[s], u[m], side="right")
        state[idx] = nxt
        pitches[idx] += 1
        active[idx] = nxt < 12
    aborted = int(active.sum())
    obp = float((state == ON_BASE_IDX).mean())
    return SimulationResult(
        start=start, obp=obp,
        std_error=float(np.sqrt(max(obp * (1.0 - obp), 1e-300) / n)),
        n=n, mean_pitches=float(pitches.mean()), aborted=aborted)


def simulate_kernel(kernel: TransitionKernel, pitcher_policy: dict,
                    batter_policy: dict, start: Count, n: int, seed: int
                    ) -> SimulationResult:
    """Monte Carlo OBP of count-level mixed policies played on a kernel."""
    return simulate_chain(chain_from_kernel(kernel, pitcher_policy, batter_policy),
                          start, n, seed)


@dataclass
class BehavioralPolicy:
    """Frequency-estimated play: the non-equilibrium baseline.

    The pitcher side treats the observed landing zone as the aim (intent is
    unobservable); the batter side is a smoothed swing rate per (count,
    pitch, zone) with backoff (pitch, zone) -> zone -> global -> 1/2.
    """

    alpha: float
    pitch_counts: dict = field(default_factory=dict)   # Count -> {(pitch, zone): n}
    pooled_counts: dict = field(default_factory=dict)  # (pitch, zone) -> n
    swing_fine: dict = field(default_factory=dict)     # (u, v, pitch, zone) -> [sw, n]
    swing_mid: dict = field(default_factory=dict)      # (pitch, zone) -> [sw, n]
    swing_zone: dict = field(default_factory=dict)     # zone -> [sw, n]
    swing_global: list = field(default_factory=lambda: [0.0, 0.0])

    def pitcher_distribution(self, count: Count) -> dict:
        pooled_total = sum(self.pooled_counts.values())
        if pooled_total == 0:
            raise EmptyTrainingSet("no gridded pitches observed")
        pooled = {key: n / pooled_total for key, n in self.pooled_counts.items()}
        local = self.pitch_counts.get(count)
        if not local:
            return pooled
        total = sum(local.values())
        return {key: (local.get(key, 0.0) + self.alpha * p) / (total + self.alpha)
                for key, p in pooled.items()}

    def swing_probability(self, count: Count, pitch: str, zone: int) -> float:
        def level(stats, backoff):
            if stats is None:
                return backoff
            sw, n = stats
            return (sw + self.alpha * backoff) / (n + self.alpha) if n + self.alpha \
                else backoff
        p = level(self.swing_global, 0.5)
        p = level(self.swing_zone.get(zone), p)
        p = level(self.swing_mid.get((pitch, zone)), p)
        return level(self.swing_fine.get((count.balls, count.strikes, pitch, zone)), p)

    def as_action_policy(self, pitch_types: tuple = PITCH_TYPES) -> dict:
        """Count -> probability vector over the (pitch, aim) action grid."""
        policy = {}
        for c in COUNTS:
            vec = np.zeros(len(pitch_types) * N_ZONES)
            for (pitch, zone), p in self.pitcher_distribution(c).items():
                vec[pitch_types.index(pitch) * N_ZONES + zone] = p
            policy[c] = vec / vec.sum()
        return policy


def estimate_behavioral(records, alpha: float) -> BehavioralPolicy:
    """Count frequencies from pitch records.  FAR landings contribute to the
    batter side (key FAR) but not the pitcher side, which needs an aimable
    zone."""
    from .zones import default_grid, zone_of
    grid = default_grid()
    pol = BehavioralPolicy(alpha=alpha)
    any_record = False
    for r in records:
        any_record = True
        zone = zone_of(grid, r.x, r.z)
        c = Count(r.balls, r.strikes)
        if zone != FAR:
            pol.pitch_counts.setdefault(c, {})
            key = (r.pitch_type, zone)
            pol.pitch_counts[c][key] = pol.pitch_counts[c].get(key, 0) + 1
            pol.pooled_counts[key] = pol.pooled_counts.get(key, 0) + 1
        swung = 1.0 if r.swung else 0.0
        for table, key in ((pol.swing_fine, (r.balls, r.strikes, r.pitch_type, zone)),
                           (pol.swing_mid, (r.pitch_type, zone)),
                           (pol.swing_zone, zone)):
            stats = table.setdefault(key, [0.0, 0.0])
            stats[0] += swung
            stats[1] += 1.0
        pol.swing_global[0] += swung
        pol.swing_global[1] += 1.0
    if not any_record:
        raise EmptyTrainingSet("no records")
    return pol


def behavioral_swing_fn(policy: BehavioralPolicy):
    """Swing function for chain composition; FAR forced take (nobody swings
    that far outside, whatever the smoothed estimate says)."""
    def swing_prob(count: Count, pitch: str, zone: int) -> float:
        if zone == FAR:
            return 0.0
        return policy.swing_probability(count, pitch, zone)
    return swing_prob


def compare_obp(models: MatchupModels, solution, behavioral: BehavioralPolicy,
                n: int, seed: int) -> dict:
    """Simulate the solved equilibrium and the behavioral baseline from every
    starting count under the same models; reduction = behavioral - sg."""
    sg_chain = chain_from_components(
        models, lambda c: _policy_as_dict(solution, c, models.pitch_types),
        equilibrium_swing_fn(solution, models))
    behav_chain = chain_from_components(
        models, behavioral.pitcher_distribution, behavioral_swing_fn(behavioral))
    table = {}
    for i, c in enumerate(COUNTS):
        sg = simulate_chain(sg_chain, c, n, seed + 2 * i)
        behav = simulate_chain(behav_chain, c, n, seed + 2 * i + 1)
        table[str(c)] = {
            "sg_obp": sg.obp, "sg_se": sg.std_error,
            "behavioral_obp": behav.obp, "behavioral_se": behav.std_error,
            "reduction": behav.obp - sg.obp, "n": n,
        }
    return table


def _policy_as_dict(solution, count: Count, pitch_types: tuple) -> dict:
    vec = solution.pitcher_policy[count]
    out = {}
    for i, p in enumerate(vec):
        if p > 0.0:
            out[(pitch_types[i // N_ZONES], i % N_ZONES)] = float(p)
    return out


def format_comparison(table: dict) -> str:
    """Plain-text per-count comparison table."""
    lines = [f"{'count':>5}  {'sg_obp':>8}  {'behavioral':>10}  {'reduction':>9}"]
    for key, row in table.items():
        lines.append(f"{key:>5}  {row['sg_obp']:8.4f}  "
                     f"{row['behavioral_obp']:10.4f}  {row['reduction']:9.4f}")
    return "\n".join(lines)
