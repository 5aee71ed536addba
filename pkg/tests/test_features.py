import numpy as np
import pytest

from atbat.data import PitchRecord
from atbat.features import (EmptyHistory, build_batter_tensor,
                            build_pitcher_tensor)
from atbat.zones import PITCH_TYPES, cells_of_zone, default_grid

GRID = default_grid()


def rec(pitch="FF", x=0.0, z=2.5, swung=False, label="ball", velocity=None):
    return PitchRecord("P", "B", pitch, x, z, 0, 0, swung, label, velocity)


def at_zone(zone, **kw):
    cx, cz = GRID.cell_center(*cells_of_zone(zone)[0])
    return rec(x=cx, z=cz, **kw)


class TestPitcherTensor:
    def test_single_record(self):
        t = build_pitcher_tensor([rec(velocity=95.0, label="called_strike")], GRID)
        ff = PITCH_TYPES.index("FF")
        assert t[2, 2, 2 * ff] == 1.0
        assert t[2, 2, 2 * ff + 1] == 95.0
        assert t[:, :, 2 * ff].sum() == 1.0

    def test_L_zone_splits_frequency_evenly(self):
        t = build_pitcher_tensor([at_zone(13, pitch="SL")], GRID)
        sl = PITCH_TYPES.index("SL")
        freq = t[:, :, 2 * sl]
        cells = cells_of_zone(13)
        assert all(freq[r, c] == pytest.approx(1 / 3) for r, c in cells)
        assert freq.sum() == pytest.approx(1.0)

    def test_total_frequency_mass_is_one(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            history = [rec(pitch=PITCH_TYPES[rng.integers(6)],
                           x=float(rng.uniform(-1.2, 1.2)),
                           z=float(rng.uniform(1.2, 3.8)),
                           velocity=float(rng.uniform(70, 100)))
                       for _ in range(rng.integers(1, 60))]
            try:
                t = build_pitcher_tensor(history, GRID)
            except EmptyHistory:
                continue
            freq = t[:, :, 0::2]
            assert freq.sum() == pytest.approx(1.0, abs=1e-9)
            assert freq.min() >= 0.0

    def test_far_pitches_excluded(self):
        history = [rec(velocity=90.0), rec(x=5.0, z=9.0, velocity=70.0)]
        t = build_pitcher_tensor(history, GRID)
        assert t[:, :, 0::2].sum() == pytest.approx(1.0)

    def test_all_far_raises(self):
        with pytest.raises(EmptyHistory):
            build_pitcher_tensor([rec(x=5.0, z=9.0)], GRID)

    def test_duplication_invariance(self):
        rng = np.random.default_rng(1)
        history = [rec(pitch=PITCH_TYPES[rng.integers(6)],
                       x=float(rng.uniform(-1, 1)), z=float(rng.uniform(1.5, 3.5)),
                       velocity=float(rng.uniform(70, 100))) for _ in range(30)]
        t1 = build_pitcher_tensor(history, GRID)
        t2 = build_pitcher_tensor(history * 2, GRID)
        assert np.abs(t1 - t2).max() < 1e-12


class TestBatterTensor:
    def test_swing_freq_and_average(self):
        history = ([at_zone(4, swung=True, label="hit")] * 4
                   + [at_zone(4, swung=True, label="out_in_play")] * 6)
        t = build_batter_tensor(history, GRID)
        ff = PITCH_TYPES.index("FF")
        assert t[2, 2, 2 * ff] == 1.0          # swung at all 10
        assert t[2, 2, 2 * ff + 1] == pytest.approx(0.4)

    def test_never_swings(self):
        history = [at_zone(4), at_zone(9), at_zone(0, label="called_strike")]
        t = build_batter_tensor(history, GRID)
        assert t[:, :, 0::2].sum() == 0.0
        assert t[:, :, 1::2].sum() == 0.0

    def test_unfaced_pitch_types_zero(self):
        t = build_batter_tensor([at_zone(4, swung=True, label="foul")], GRID)
        for p, code in enumerate(PITCH_TYPES):
            if code != "FF":
                assert t[:, :, 2 * p].sum() == 0.0
                assert t[:, :, 2 * p + 1].sum() == 0.0

    def test_fouls_and_whiffs_not_balls_in_play(self):
        history = ([at_zone(4, swung=True, label="foul")] * 5
                   + [at_zone(4, swung=True, label="whiff")] * 3
                   + [at_zone(4, swung=True, label="hit")] * 2)
        t = build_batter_tensor(history, GRID)
        ff = PITCH_TYPES.index("FF")
        assert t[2, 2, 2 * ff] == 1.0
        assert t[2, 2, 2 * ff + 1] == 1.0  # 2 hits / 2 balls in play

    def test_duplication_invariance(self):
        history = [at_zone(4, swung=True, label="hit"),
                   at_zone(9, swung=False, label="ball"),
                   at_zone(13, pitch="CU", swung=True, label="out_in_play")]
        t1 = build_batter_tensor(history, GRID)
        t2 = build_batter_tensor(history * 3, GRID)
        assert np.abs(t1 - t2).max() < 1e-12


class TestZoneSharing:
    def test_multi_cell_zones_carry_identical_values(self):
        rng = np.random.default_rng(2)
        history = []
        for _ in range(400):
            swung = bool(rng.random() < 0.5)
            label = (("hit", "foul", "whiff", "out_in_play")[rng.integers(4)]
                     if swung else ("ball", "called_strike")[rng.integers(2)])
            history.append(rec(pitch=PITCH_TYPES[rng.integers(6)],
                               x=float(rng.uniform(-1.2, 1.2)),
                               z=float(rng.uniform(1.2, 3.8)),
                               swung=swung, label=label,
                               velocity=float(rng.uniform(70, 100))))
        pt = build_pitcher_tensor(history, GRID)
        bt = build_batter_tensor(history, GRID)
        for tensor in (pt, bt):
            for zone in (10, 12, 13, 15):
                cells = cells_of_zone(zone)
                for s in range(12):
                    vals = {tensor[r, c, s] for r, c in cells}
                    assert len(vals) == 1
