"""Player tensors: 5x5x12 aggregates of a player's observed pitches.

Twelve slices alternate per pitch type in canonical order: slice 2k carries
the rate statistic for pitch type k, slice 2k+1 the companion statistic.
For pitchers that is (throw frequency, mean velocity); for batters (swing
frequency, batting average on balls in play).  Cells of a multi-cell zone
share the zone's statistics: frequency is split evenly across the cells,
means are copied.  FAR pitches have no cell and are excluded.
"""

from __future__ import annotations

import numpy as np

from .zones import FAR, PITCH_INDEX, ZoneGrid, cells_of_zone, zone_of

TENSOR_SHAPE = (5, 5, 12)


class EmptyHistory(ValueError):
    """No usable (non-FAR) records for this player."""


def _zone_counts(history, grid: ZoneGrid):
    """Yield (record, zone) for non-FAR records."""
    for r in history:
        zone = zone_of(grid, r.x, r.z)
        if zone != FAR:
            yield r, zone


def build_pitcher_tensor(history, grid: ZoneGrid) -> np.ndarray:
    """Frequency slices sum to 1 over all cells and types; velocity slices
    hold the zone's mean velocity (0 where the type was never thrown there)."""
    counts = np.zeros((6, 17))
    vel_sum = np.zeros((6, 17))
    vel_n = np.zeros((6, 17))
    total = 0
    for r, zone in _zone_counts(history, grid):
        p = PITCH_INDEX[r.pitch_type]
        counts[p, zone] += 1
        total += 1
        if r.velocity is not None:
            vel_sum[p, zone] += r.velocity
            vel_n[p, zone] += 1
    if total == 0:
        raise EmptyHistory("no gridded pitches in history")
    tensor = np.zeros(TENSOR_SHAPE)
    for p in range(6):
        for zone in range(17):
            cells = cells_of_zone(zone)
            freq = counts[p, zone] / total / len(cells)
            vel = vel_sum[p, zone] / vel_n[p, zone] if vel_n[p, zone] else 0.0
            for row, col in cells:
                tensor[row, col, 2 * p] = freq
                tensor[row, col, 2 * p + 1] = vel
    return tensor


def build_batter_tensor(history, grid: ZoneGrid) -> np.ndarray:
    """Swing-frequency slices are swings / pitches seen per (zone, type);
    average slices are hits / balls in play among those swings (0 when no
    ball was put in play)."""
    seen = np.zeros((6, 17))
    swings = np.zeros((6, 17))
    hits = np.zeros((6, 17))
    in_play = np.zeros((6, 17))
    total = 0
    for r, zone in _zone_counts(history, grid):
        p = PITCH_INDEX[r.pitch_type]
        seen[p, zone] += 1
        total += 1
        if r.swung:
            swings[p, zone] += 1
            if r.label == "hit":
                hits[p, zone] += 1
                in_play[p, zone] += 1
            elif r.label == "out_in_play":
                in_play[p, zone] += 1
    if total == 0:
        raise EmptyHistory("no gridded pitches in history")
    tensor = np.zeros(TENSOR_SHAPE)
    for p in range(6):
        for zone in range(17):
            freq = swings[p, zone] / seen[p, zone] if seen[p, zone] else 0.0
            avg = hits[p, zone] / in_play[p, zone] if in_play[p, zone] else 0.0
            for row, col in cells_of_zone(zone):
                tensor[row, col, 2 * p] = freq
                tensor[row, col, 2 * p + 1] = avg
    return tensor
