"""Shared fakes and generators for the test suite."""

from __future__ import annotations

import numpy as np

from atbat.game import (COUNTS, N_STATES, TransitionKernel, build_kernel,
                        reachable_indices, state_index)
from atbat.zones import FAR, N_LOCATIONS, N_ZONES, PITCH_TYPES


class DictControl:
    """Control stub: explicit landing distribution per (pitch, aim);
    missing keys fall back to a default distribution."""

    def __init__(self, table=None, default=None):
        self.table = table or {}
        self.default = default

    def vector(self, pitch, aim):
        vec = np.zeros(N_LOCATIONS)
        dist = self.table.get((pitch, aim), self.default)
        for zone, p in dist.items():
            vec[zone] = p
        return vec


def point_control(zone):
    return DictControl(default={zone: 1.0})


class DictOutcome:
    """Outcome stub: one distribution per zone (or a single default),
    independent of pitch and count."""

    def __init__(self, by_zone=None, default=(0.25, 0.25, 0.25, 0.25)):
        self.by_zone = by_zone or {}
        self.default = np.asarray(default, dtype=float)

    def distribution(self, pitch, zone, count):
        return np.asarray(self.by_zone.get(zone, self.default), dtype=float)


class NoOverride:
    def forced_take(self, pitch, zone):
        return zone == FAR


class AllOverride:
    def forced_take(self, pitch, zone):
        return True


class SetOverride:
    def __init__(self, forced_zones):
        self.forced_zones = set(forced_zones)

    def forced_take(self, pitch, zone):
        return zone == FAR or zone in self.forced_zones


def overrides(patience):
    return {c: patience for c in COUNTS}


def random_raw_kernel(seed: int, max_self: float = 0.6) -> TransitionKernel:
    """Random rows over each count's reachable states; the two-strike foul
    self-loop is capped so value iteration converges briskly."""
    rng = np.random.default_rng(seed)
    a = np.zeros((12, len(PITCH_TYPES), N_ZONES, 2, N_STATES))
    for ci, c in enumerate(COUNTS):
        allowed = sorted(reachable_indices(c))
        for pi in range(len(PITCH_TYPES)):
            for aim in range(N_ZONES):
                for bi in range(2):
                    row = rng.dirichlet(np.ones(len(allowed)))
                    full = np.zeros(N_STATES)
                    full[allowed] = row
                    if c.strikes == 2 and full[ci] > max_self:
                        excess = full[ci] - max_self
                        full[ci] = max_self
                        others = [s for s in allowed if s != ci]
                        full[others] += excess / len(others)
                    a[ci, pi, aim, bi] = full
    return TransitionKernel(a)


def random_composed_kernel(seed: int, count_dependent: bool = False
                           ) -> TransitionKernel:
    """Kernel built through build_row from random count-independent
    components (control rows, outcome distributions, forced-take sets)."""
    rng = np.random.default_rng(seed)
    control_table = {}
    for pitch in PITCH_TYPES:
        for aim in range(N_ZONES):
            vec = rng.dirichlet(np.ones(N_LOCATIONS) * 0.5)
            control_table[(pitch, aim)] = {z: vec[z] for z in range(N_LOCATIONS)}
    control = DictControl(control_table)
    by_zone = {z: rng.dirichlet(np.ones(4)) for z in range(N_ZONES)}
    # keep foul mass away from 1 so two-strike states progress
    for z, dist in by_zone.items():
        if dist[1] > 0.7:
            dist[1] = 0.7
            by_zone[z] = dist / dist.sum()
    outcome = DictOutcome(by_zone=by_zone)
    forced = {z for z in range(9, 17) if rng.random() < 0.5}
    return build_kernel(control, outcome, overrides(SetOverride(forced)))


def brute_force_row(count, action, batter_action, control, outcome, patience):
    """Independent enumeration over (landing location, swing outcome) pairs;
    used as the oracle for build_row."""
    from atbat.game import (next_state_on_swing_outcome, next_state_on_take,
                            OUTCOMES, TAKE)
    from atbat.zones import is_strike_zone
    result = {}
    vec = control.vector(action.pitch, action.aim)
    for zone in range(N_LOCATIONS):
        mass = float(vec[zone])
        if mass == 0.0:
            continue
        if zone == FAR:
            state = next_state_on_take(count, False)
            result[state] = result.get(state, 0.0) + mass
            continue
        in_zone = is_strike_zone(zone)
        take = (batter_action == TAKE
                or (not in_zone and patience.forced_take(action.pitch, zone)))
        if take:
            state = next_state_on_take(count, in_zone)
            result[state] = result.get(state, 0.0) + mass
        else:
            dist = outcome.distribution(action.pitch, zone, count)
            for w, p in zip(OUTCOMES, dist):
                state = next_state_on_swing_outcome(count, w)
                result[state] = result.get(state, 0.0) + mass * float(p)
    return {state: p for state, p in result.items() if p > 0.0}


def row_to_dict(row):
    from atbat.game import STATES
    return {STATES[i]: float(row[i]) for i in range(N_STATES) if row[i] > 0}
