#!/usr/bin/env python3
"""Outcome-model calibration on a player-disjoint split of synthetic data.

Generates a world, splits its pitches so no pitcher or batter crosses sides,
trains the empirical outcome table on the train side, and reports held-out
log-loss plus the mean-predicted vs empirical frequencies per count and per
in/out-of-zone bucket.

Usage: python scripts/calibration_report.py [--seed N] [--alpha A]
"""

import argparse

from atbat.data import split_players
from atbat.features import build_batter_tensor, build_pitcher_tensor
from atbat.outcomes import SwingExample, evaluate, train_empirical
from atbat.synth import WorldSpec, generate_world
from atbat.zones import FAR, default_grid, zone_of


def swing_examples(records, grid):
    examples, matchups = [], []
    for r in records:
        if not r.swung:
            continue
        zone = zone_of(grid, r.x, r.z)
        if zone == FAR:
            continue
        outcome = {"whiff": "strike", "foul": "foul", "hit": "hit",
                   "out_in_play": "out"}[r.label]
        examples.append(SwingExample(r.pitch_type, zone, r.count(), outcome))
        matchups.append((r.pitcher_id, r.batter_id))
    return examples, matchups


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=3)
    parser.add_argument("--alpha", type=float, default=2.0)
    args = parser.parse_args()

    spec = WorldSpec(pitchers={"strong": 2, "average": 2, "weak": 2},
                     batters={"strong": 2, "average": 2, "weak": 2},
                     at_bats_per_matchup=30, three_oh_pitches=100)
    world, records = generate_world(spec, args.seed)
    split = split_players(records, test_fraction=0.3, seed=args.seed)
    print(f"records: {len(records)}  train: {len(split.train)}  "
          f"test: {len(split.test)}  dropped (mixed sides): {split.dropped}")

    grid = default_grid()
    train_examples, _ = swing_examples(split.train, grid)
    test_examples, test_matchups = swing_examples(split.test, grid)
    table = train_empirical(train_examples, args.alpha)

    by_pitcher, by_batter = {}, {}
    for r in split.test:
        by_pitcher.setdefault(r.pitcher_id, []).append(r)
        by_batter.setdefault(r.batter_id, []).append(r)
    pitcher_tensors = {pid: build_pitcher_tensor(h, grid)
                       for pid, h in by_pitcher.items()}
    batter_tensors = {bid: build_batter_tensor(h, grid)
                      for bid, h in by_batter.items()}

    metrics = evaluate(table, test_examples, pitcher_tensors, batter_tensors,
                       test_matchups, grid)
    print(f"held-out log-loss: {metrics['log_loss']:.4f} (uniform = 1.3863)")
    print(f"\n{'bucket':>12}  {'n':>6}  predicted (s/f/h/o) vs empirical")
    for key, bucket in metrics["calibration"].items():
        pred = "/".join(f"{p:.2f}" for p in bucket["predicted"])
        emp = "/".join(f"{p:.2f}" for p in bucket["empirical"])
        print(f"{key:>12}  {bucket['n']:>6}  {pred}  vs  {emp}")


if __name__ == "__main__":
    main()
