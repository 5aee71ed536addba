"""Command-line driver: generate | ingest | train | solve | simulate | compare | serve.

Every subcommand writes its artifacts into the model store and prints a JSON
summary on stdout.  Exit codes: 0 success, 1 validation error, 2 internal
error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import data, pipeline, simulate, synth
from .config import load_config
from .data import ModelStore, canonical_json
from .game import parse_count


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atbat",
        description="At-bat equilibrium toolkit: fit pitch-level models and "
                    "solve the pitcher-batter stochastic game.")
    parser.add_argument("--config", help="JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a world and export its CSV")
    p.add_argument("--spec", help="world spec JSON file (defaults built in)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--truth", help="also write the world's ground truth JSON")

    p = sub.add_parser("ingest", help="parse CSVs into the store")
    p.add_argument("--csv", nargs="+", required=True)
    p.add_argument("--mapping", help="column-mapping JSON file")
    p.add_argument("--store", required=True)

    p = sub.add_parser("train", help="fit all models from ingested records")
    p.add_argument("--store", required=True)

    p = sub.add_parser("solve", help="solve one matchup to equilibrium")
    p.add_argument("--store", required=True)
    p.add_argument("--pitcher", required=True)
    p.add_argument("--batter", required=True)
    p.add_argument("--gamma-cap", type=float)
    p.add_argument("--theta", type=float, help="patience threshold override")
    p.add_argument("--exclude", nargs="*", default=[], help="pitch types to drop")
    p.add_argument("--variance-scale", type=float)

    p = sub.add_parser("simulate", help="Monte Carlo the solved equilibrium")
    p.add_argument("--store", required=True)
    p.add_argument("--pitcher", required=True)
    p.add_argument("--batter", required=True)
    p.add_argument("--count", default="0-0")
    p.add_argument("-n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("compare", help="equilibrium vs behavioral OBP per count")
    p.add_argument("--store", required=True)
    p.add_argument("--pitcher", required=True)
    p.add_argument("--batter", required=True)
    p.add_argument("--truth", help="simulate under this world truth JSON "
                                   "instead of the fitted models")
    p.add_argument("-n", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--store", required=True)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--ui", help="also serve this directory as the web UI")
    return parser


def _emit(doc: dict) -> None:
    print(canonical_json(doc))


def _records_from_store(store: ModelStore) -> list:
    return data.records_from_json(store.read("records/main")["records"])


def _run(args) -> int:
    config = load_config(args.config)

    if args.command == "generate":
        if args.spec:
            with open(args.spec, encoding="utf-8") as handle:
                spec = synth.WorldSpec.from_json(json.load(handle))
        else:
            spec = synth.WorldSpec()
        world, records = synth.generate_world(spec, args.seed)
        data.export_csv(records, args.out)
        if args.truth:
            with open(args.truth, "w", encoding="utf-8") as handle:
                handle.write(canonical_json(world.to_json()))
        _emit({"command": "generate", "csv": args.out, "pitches": len(records),
               "pitchers": len(world.pitchers), "batters": len(world.batters)})
        return 0

    if args.command == "ingest":
        mapping = None
        if args.mapping:
            with open(args.mapping, encoding="utf-8") as handle:
                mapping = data.ColumnMapping.from_json(json.load(handle))
        records, report = data.ingest(args.csv, mapping)
        store = ModelStore(args.store, create=True)
        store.write("records/main", {"records": data.records_to_json(records)})
        store.set_fingerprint(data.data_fingerprint(records))
        _emit({"command": "ingest", "accepted": report.accepted,
               "rejected": report.rejected})
        return 0

    if args.command == "train":
        store = ModelStore(args.store)
        summary = pipeline.train_store(_records_from_store(store), store, config)
        _emit({"command": "train", **summary})
        return 0

    if args.command == "solve":
        store = ModelStore(args.store)
        overrides = pipeline.SolveOverrides(
            exclude_pitch_types=tuple(args.exclude),
            patience_threshold=args.theta,
            gamma_cap=args.gamma_cap,
            variance_scale=args.variance_scale)
        response, _ = pipeline.solve_matchup(store, config, args.pitcher,
                                             args.batter, overrides)
        values = {key: entry["value"]
                  for key, entry in response["solution"]["counts"].items()}
        _emit({"command": "solve", "pitcher": args.pitcher, "batter": args.batter,
               "values": values})
        return 0

    if args.command == "simulate":
        store = ModelStore(args.store)
        start = parse_count(args.count)
        models = pipeline.load_matchup_models(store, config, args.pitcher,
                                              args.batter)
        kernel = models.kernel()
        from .solver import value_iterate
        solution = value_iterate(kernel, config.solver_config())
        result = simulate.simulate_kernel(kernel, solution.pitcher_policy,
                                          solution.batter_policy, start,
                                          args.n, args.seed)
        _emit({"command": "simulate", "result": result.to_json(),
               "equilibrium_value": solution.values[start]})
        return 0

    if args.command == "compare":
        store = ModelStore(args.store)
        records = _records_from_store(store)
        matchup_records = [r for r in records
                           if r.pitcher_id == args.pitcher or r.batter_id == args.batter]
        behavioral = simulate.estimate_behavioral(
            matchup_records or records, config.behavioral_alpha)
        if args.truth:
            with open(args.truth, encoding="utf-8") as handle:
                world = synth.SyntheticWorld.from_json(json.load(handle))
            models = world.matchup_models(args.pitcher, args.batter,
                                          config.patience_threshold)
        else:
            models = pipeline.load_matchup_models(store, config, args.pitcher,
                                                  args.batter)
        from .solver import value_iterate
        solution = value_iterate(models.kernel(), config.solver_config())
        table = simulate.compare_obp(models, solution, behavioral, args.n, args.seed)
        store.write(f"comparisons/{args.pitcher}_{args.batter}", table)
        print(simulate.format_comparison(table), file=sys.stderr)
        _emit({"command": "compare", "table": table})
        return 0

    if args.command == "serve":
        from .server import serve
        host = args.host or config.http.host
        port = args.port if args.port is not None else config.http.port
        serve(args.store, config, host, port, args.ui)
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return _run(args)
    except (ValueError, KeyError, OSError) as exc:
        print(json.dumps({"error": "validation", "message": str(exc)}),
              file=sys.stderr)
        return 1
    except Exception as exc:  # internal failure
        print(json.dumps({"error": "internal", "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
