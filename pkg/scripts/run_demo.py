#!/usr/bin/env python3
"""End-to-end demo on a synthetic world: generate, fit, solve, compare.

Prints the fitted control summary, the per-count equilibrium policy table
for one matchup (value plus mixed pitch policy, like a scouting card), and
the equilibrium-vs-behavioral OBP comparison.

Usage: python scripts/run_demo.py [--seed N] [--store DIR]
"""

import argparse
import tempfile

from atbat.config import AppConfig
from atbat.data import ModelStore, export_csv, ingest
from atbat.game import COUNTS
from atbat.pipeline import solve_matchup, train_store
from atbat.simulate import compare_obp, estimate_behavioral, format_comparison
from atbat.solver import EquilibriumSolution
from atbat.synth import WorldSpec, generate_world


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--store", default=None)
    args = parser.parse_args()

    store_dir = args.store or tempfile.mkdtemp(prefix="atbat_demo_")
    spec = WorldSpec(pitchers={"strong": 1, "weak": 1},
                     batters={"strong": 1, "weak": 1},
                     at_bats_per_matchup=60, three_oh_pitches=300)
    world, records = generate_world(spec, args.seed)
    print(f"world: {len(world.pitchers)} pitchers, {len(world.batters)} batters, "
          f"{len(records)} pitches")

    csv_path = f"{store_dir}/world.csv"
    export_csv(records, csv_path)
    parsed, report = ingest([csv_path])
    print(f"ingest: {report.accepted} accepted, rejects {report.rejected}")

    store = ModelStore(f"{store_dir}/store", create=True)
    config = AppConfig(store_path=f"{store_dir}/store").validate()
    summary = train_store(parsed, store, config)
    print(f"train: {summary}")

    pitcher, batter = "P_weak_0", "B_strong_0"
    response, ms = solve_matchup(store, config, pitcher, batter)
    print(f"\nequilibrium for {pitcher} vs {batter} (solved in {ms:.0f} ms):")
    print(f"{'count':>5}  {'OBP':>7}  policy")
    for count in COUNTS:
        entry = response["solution"]["counts"][str(count)]
        policy = ", ".join(
            f"{item['pitch']} z{item['zone']} {item['prob']:.3f}"
            for item in sorted(entry["pitcher_policy"],
                               key=lambda item: -item["prob"])[:4])
        print(f"{str(count):>5}  {entry['value']:7.4f}  {policy}")

    solution = EquilibriumSolution.from_json(response["solution"])
    behavioral = estimate_behavioral(
        [r for r in parsed if r.pitcher_id == pitcher], alpha=2.0)
    models = world.matchup_models(pitcher, batter)
    table = compare_obp(models, solution, behavioral, n=20_000, seed=args.seed)
    print("\nequilibrium vs behavioral baseline (true-world simulation):")
    print(format_comparison(table))
    print(f"\nstore: {store_dir}/store")


if __name__ == "__main__":
    main()
