"""At-bat stochastic game: states, joint actions, and the transition kernel.

The state space is the 12 ball-strike counts plus the absorbing terminals
``ON_BASE`` and ``OUT``.  The pitcher picks a (pitch type, intended zone)
pair; the batter picks swing or take.  Transition rows compose a pitcher
control distribution over actual landing locations, a four-outcome swing
distribution, and forced-take overrides at obvious ball zones.

States are indexed 0..13 internally: count (balls, strikes) -> 3*balls +
strikes, then ON_BASE = 12, OUT = 13.  Batter utility is carried entirely by
the terminals: value 1 at ON_BASE, 0 at OUT.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .zones import FAR, N_ZONES, PITCH_TYPES, is_strike_zone


class Count(NamedTuple):
    balls: int
    strikes: int

    def __str__(self):
        return f"{self.balls}-{self.strikes}"


def parse_count(text: str) -> Count:
    balls, strikes = text.split("-")
    c = Count(int(balls), int(strikes))
    if not (0 <= c.balls <= 3 and 0 <= c.strikes <= 2):
        raise ValueError(f"invalid count {text!r}")
    return c


#: All 12 non-terminal counts in index order.
COUNTS = tuple(Count(u, v) for u in range(4) for v in range(3))

ON_BASE = "on_base"
OUT = "out"
N_STATES = 14
ON_BASE_IDX = 12
OUT_IDX = 13

#: All 14 states in index order.
STATES = COUNTS + (ON_BASE, OUT)

SWING = "swing"
TAKE = "take"
BATTER_ACTIONS = (SWING, TAKE)

#: Swing outcomes in distribution order: swinging strike, foul, hit, in-play out.
OUTCOMES = ("strike", "foul", "hit", "out")

#: Terminal values: the game's only utility.
TERMINAL_VALUES = {ON_BASE: 1.0, OUT: 0.0}


def state_index(state) -> int:
    if state == ON_BASE:
        return ON_BASE_IDX
    if state == OUT:
        return OUT_IDX
    u, v = state
    return 3 * u + v


class PitcherAction(NamedTuple):
    pitch: str
    aim: int  # intended zone, 0..16 (never FAR)


def pitcher_actions(pitch_types: tuple[str, ...] = PITCH_TYPES) -> tuple[PitcherAction, ...]:
    """Enumeration of the pitcher action space, |P| * 17 actions in
    (pitch, aim) lexicographic order."""
    return tuple(PitcherAction(p, a) for p in pitch_types for a in range(N_ZONES))


class MalformedControl(ValueError):
    """Control distribution over landing locations is not a probability vector."""


class MalformedOutcome(ValueError):
    """Swing-outcome distribution is not a 4-simplex."""


class DegenerateGame(ValueError):
    """A two-strike count can be trapped in the foul self-loop forever."""


def next_state_on_take(count: Count, in_strike_zone: bool):
    """Taken pitch: strike three is out, ball four is on base, otherwise
    the count increments."""
    u, v = count
    if in_strike_zone:
        return OUT if v == 2 else Count(u, v + 1)
    return ON_BASE if u == 3 else Count(u + 1, v)


def next_state_on_swing_outcome(count: Count, outcome: str):
    """Swing outcome: a whiff behaves as a taken strike, a foul at two strikes
    leaves the count unchanged, a hit is on base, an in-play out is out."""
    u, v = count
    if outcome == "strike":
        return next_state_on_take(count, True)
    if outcome == "foul":
        return Count(u, v) if v == 2 else Count(u, v + 1)
    if outcome == "hit":
        return ON_BASE
    if outcome == "out":
        return OUT
    raise ValueError(f"unknown swing outcome {outcome!r}")


def reachable_indices(count: Count) -> frozenset[int]:
    """States that may receive mass from this count: the two incremented
    counts, the terminals, and (at two strikes only) the count itself."""
    u, v = count
    allowed = {ON_BASE_IDX, OUT_IDX}
    if u < 3:
        allowed.add(state_index(Count(u + 1, v)))
    if v < 2:
        allowed.add(state_index(Count(u, v + 1)))
    else:
        allowed.add(state_index(count))
    return frozenset(allowed)


def _take_row(count: Count, in_zone: bool) -> np.ndarray:
    row = np.zeros(N_STATES)
    row[state_index(next_state_on_take(count, in_zone))] = 1.0
    return row


def build_row(count: Count, action: PitcherAction, batter_action: str,
              control, outcome, patience) -> np.ndarray:
    """One transition row as a length-14 probability vector over STATES.

    ``control.vector(pitch, aim)`` gives the landing distribution over the 17
    zones plus FAR (index 17); ``outcome.distribution(pitch, zone, count)``
    gives the 4-simplex over OUTCOMES conditional on a swing; ``patience
    .forced_take(pitch, zone)`` flags obvious-take ball zones.  A swing is
    carried out only when the pitch lands in the strike zone or in a ball
    zone the override does not force; FAR is always taken.
    """
    ctrl = np.asarray(control.vector(action.pitch, action.aim), dtype=float)
    if ctrl.shape != (N_ZONES + 1,) or ctrl.min() < -1e-9 or abs(ctrl.sum() - 1.0) > 1e-6:
        raise MalformedControl(
            f"control row for {action} has sum {ctrl.sum()!r}")
    ctrl = np.clip(ctrl, 0.0, None)
    ctrl = ctrl / ctrl.sum()

    row = np.zeros(N_STATES)
    for zone in range(N_ZONES + 1):
        mass = ctrl[zone]
        if mass == 0.0:
            continue
        if zone == FAR:
            row += mass * _take_row(count, False)
            continue
        in_zone = is_strike_zone(zone)
        takes = (batter_action == TAKE
                 or (not in_zone and patience.forced_take(action.pitch, zone)))
        if takes:
            row += mass * _take_row(count, in_zone)
            continue
        dist = np.asarray(outcome.distribution(action.pitch, zone, count), dtype=float)
        if dist.shape != (4,) or dist.min() < -1e-9 or abs(dist.sum() - 1.0) > 1e-9:
            raise MalformedOutcome(
                f"outcome distribution at ({action.pitch}, {zone}, {count}) "
                f"sums to {dist.sum()!r}")
        dist = np.clip(dist, 0.0, None)
        dist = dist / dist.sum()
        for w, p in zip(OUTCOMES, dist):
            row[state_index(next_state_on_swing_outcome(count, w))] += mass * p
    return row


@dataclass(frozen=True)
class TransitionKernel:
    """Dense transition kernel, shape (12, n_pitch_types, 17, 2, 14).

    Axis order: count index, pitch type, aim zone, batter action (0 swing,
    1 take), next state.  Immutable once validated; rows all sum to 1.
    """

    array: np.ndarray
    pitch_types: tuple[str, ...] = PITCH_TYPES

    def __post_init__(self):
        a = np.asarray(self.array, dtype=float)
        expected = (12, len(self.pitch_types), N_ZONES, 2, N_STATES)
        if a.shape != expected:
            raise ValueError(f"kernel shape {a.shape}, expected {expected}")
        sums = a.sum(axis=-1)
        if np.abs(sums - 1.0).max() > 1e-9 or a.min() < -1e-12:
            raise ValueError("kernel rows must be probability vectors")
        for ci, count in enumerate(COUNTS):
            allowed = reachable_indices(count)
            banned = [s for s in range(N_STATES) if s not in allowed]
            if np.abs(a[ci, ..., banned]).max() > 1e-12:
                raise ValueError(f"count {count} assigns mass to unreachable states")
        object.__setattr__(self, "array", a)
        self._check_degenerate()

    def _check_degenerate(self):
        # A two-strike state is degenerate when, whatever the pitcher throws,
        # some batter action keeps (nearly) all mass in the self-loop: no
        # tolerance-level progress is then guaranteed and value iteration
        # stalls at the residual.
        for ci, count in enumerate(COUNTS):
            if count.strikes != 2:
                continue
            self_mass = self.array[ci, :, :, :, ci]          # (P, 17, 2)
            per_action = self_mass.max(axis=-1)              # best batter action
            if per_action.min() >= 1.0 - 1e-9:
                raise DegenerateGame(
                    f"count {count}: foul self-loop inescapable for every pitch")

    @property
    def n_actions(self) -> int:
        return len(self.pitch_types) * N_ZONES

    def actions(self) -> tuple[PitcherAction, ...]:
        return pitcher_actions(self.pitch_types)

    def row(self, count: Count, pitch: str, aim: int, batter_action: str) -> np.ndarray:
        ci = state_index(count)
        pi = self.pitch_types.index(pitch)
        bi = BATTER_ACTIONS.index(batter_action)
        return self.array[ci, pi, aim, bi]

    def row_dict(self, count: Count, pitch: str, aim: int, batter_action: str) -> dict:
        r = self.row(count, pitch, aim, batter_action)
        return {STATES[i]: float(r[i]) for i in range(N_STATES) if r[i] != 0.0}

    def to_json(self) -> dict:
        """Nested mapping keyed by (count, pitch, aim, batter action)."""
        out = {}
        for ci, count in enumerate(COUNTS):
            by_pitch = {}
            for pi, pitch in enumerate(self.pitch_types):
                by_aim = {}
                for aim in range(N_ZONES):
                    by_act = {}
                    for bi, act in enumerate(BATTER_ACTIONS):
                        r = self.array[ci, pi, aim, bi]
                        by_act[act] = {str(STATES[s]): float(r[s])
                                       for s in range(N_STATES) if r[s] != 0.0}
                    by_aim[str(aim)] = by_act
                by_pitch[pitch] = by_aim
            out[str(count)] = by_pitch
        return out

    @classmethod
    def from_json(cls, doc: dict, pitch_types: tuple[str, ...] = PITCH_TYPES):
        state_by_key = {str(s): i for i, s in enumerate(STATES)}
        a = np.zeros((12, len(pitch_types), N_ZONES, 2, N_STATES))
        for ci, count in enumerate(COUNTS):
            for pi, pitch in enumerate(pitch_types):
                for aim in range(N_ZONES):
                    for bi, act in enumerate(BATTER_ACTIONS):
                        row = doc[str(count)][pitch][str(aim)][act]
                        for key, p in row.items():
                            a[ci, pi, aim, bi, state_by_key[key]] = p
        return cls(a, pitch_types)


def build_kernel(control, outcome, overrides_by_count,
                 pitch_types: tuple[str, ...] = PITCH_TYPES) -> TransitionKernel:
    """Compose fitted control, outcome, and patience models into the full
    kernel: one row per (count, pitcher action, batter action).

    ``overrides_by_count`` maps each Count to the patience override active in
    that count.
    """
    a = np.zeros((12, len(pitch_types), N_ZONES, 2, N_STATES))
    for ci, count in enumerate(COUNTS):
        patience = overrides_by_count[count]
        for pi, pitch in enumerate(pitch_types):
            for aim in range(N_ZONES):
                action = PitcherAction(pitch, aim)
                for bi, act in enumerate(BATTER_ACTIONS):
                    a[ci, pi, aim, bi] = build_row(
                        count, action, act, control, outcome, patience)
    return TransitionKernel(a, pitch_types)
