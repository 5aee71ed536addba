"""Training and solving orchestration on top of the model store.

``train_store`` fits every artifact from ingested records and writes them
under the store's fingerprint; ``solve_matchup`` assembles a matchup's
kernel from stored artifacts (with optional what-if overrides) and solves
it.  These are the operations behind the CLI subcommands and the HTTP
service.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import control as ctl
from . import features, outcomes, patience
from .config import AppConfig
from .data import ModelStore, PitchRecord, data_fingerprint
from .game import COUNTS
from .simulate import MatchupModels
from .solver import value_iterate
from .zones import FAR, PITCH_TYPES, zone_of


class UnknownPlayer(ValueError):
    """Pitcher or batter id not present in the trained store."""


class InvalidRequest(ValueError):
    """What-if override violates its constraints."""


def train_store(records: list[PitchRecord], store: ModelStore, config: AppConfig
                ) -> dict:
    """Fit tensors, control, outcome, and patience models; returns a summary.

    Control preference order per (pitcher, pitch type): pruned empirical fit
    from 3-0 pitches when more than 10 exist, otherwise the ridge regressor
    (trained whenever at least 20 pitchers have an empirical fit for the
    type).  Types resolvable by neither are recorded as missing and will
    fail a solve for that pitcher.
    """
    grid = config.zone_grid()
    store.set_fingerprint(data_fingerprint(records))

    by_pitcher: dict = {}
    by_batter: dict = {}
    for r in records:
        by_pitcher.setdefault(r.pitcher_id, []).append(r)
        by_batter.setdefault(r.batter_id, []).append(r)

    pitcher_tensors = {pid: features.build_pitcher_tensor(h, grid)
                       for pid, h in sorted(by_pitcher.items())}
    batter_tensors = {bid: features.build_batter_tensor(h, grid)
                      for bid, h in sorted(by_batter.items())}
    for pid, tensor in pitcher_tensors.items():
        store.write(f"tensors/pitcher_{pid}",
                    {"shape": [5, 5, 12], "values": tensor.ravel().tolist()})
    for bid, tensor in batter_tensors.items():
        store.write(f"tensors/batter_{bid}",
                    {"shape": [5, 5, 12], "values": tensor.ravel().tolist()})

    # control: empirical 3-0 fits, then the regressor for the sparse types
    empirical: dict = {}
    for pid, history in sorted(by_pitcher.items()):
        pts_by_pitch: dict = {}
        for r in history:
            if r.balls == 3 and r.strikes == 0:
                pts_by_pitch.setdefault(r.pitch_type, []).append((r.x, r.z))
        fits = {}
        for pitch, pts in pts_by_pitch.items():
            if len(pts) >= ctl.MIN_FIT_POINTS:
                fits[pitch] = ctl.prune_refit(np.asarray(pts), config.keep_fraction)
        empirical[pid] = fits

    pairs_by_pitch: dict = {p: [] for p in PITCH_TYPES}
    for pid, fits in empirical.items():
        for pitch, g in fits.items():
            pairs_by_pitch[pitch].append((pitcher_tensors[pid], g))
    trainable = {p: pairs for p, pairs in pairs_by_pitch.items()
                 if len(pairs) >= ctl.MIN_REGRESSOR_PITCHERS}
    regressor = None
    if trainable:
        regressor = ctl.train_control_regressor(trainable, config.ridge_lambda)
        store.write("control/regressor", regressor.to_json())

    missing = []
    for pid in sorted(by_pitcher):
        doc = {}
        for pitch in PITCH_TYPES:
            if pitch in empirical[pid]:
                doc[pitch] = {"params": empirical[pid][pitch].to_list(),
                              "source": "empirical"}
            elif regressor is not None and pitch in regressor.weights:
                g = regressor.predict(pitch, pitcher_tensors[pid])
                doc[pitch] = {"params": g.to_list(), "source": "regressed"}
            else:
                missing.append((pid, pitch))
        store.write(f"control/{pid}", doc)

    # outcome model from swing records
    examples, matchups = [], []
    for r in records:
        if not r.swung:
            continue
        zone = zone_of(grid, r.x, r.z)
        if zone == FAR:
            continue
        outcome = {"whiff": "strike", "foul": "foul", "hit": "hit",
                   "out_in_play": "out"}[r.label]
        examples.append(outcomes.SwingExample(r.pitch_type, zone, r.count(), outcome))
        matchups.append((r.pitcher_id, r.batter_id))
    table = outcomes.train_empirical(examples, config.outcome_alpha)
    store.write("outcome/empirical", table.to_json())
    if config.outcome_model == "softmax":
        arrays = outcomes.assemble_arrays(examples, pitcher_tensors,
                                          batter_tensors, matchups, grid)
        hyper = outcomes.SoftmaxHyper(seed=config.seed)
        softmax = outcomes.train_softmax(*arrays, hyper)
        store.write("outcome/softmax", softmax.to_json())

    # patience from out-of-zone takes/swings
    precords = []
    for r in records:
        zone = zone_of(grid, r.x, r.z)
        if zone in patience.BALL_ZONES:
            precords.append(patience.PatienceRecord(
                r.batter_id, r.pitch_type, zone, r.count(), r.swung))
    clf = patience.train_patience(precords, batter_tensors, seed=config.seed)
    store.write("patience/classifier", clf.to_json())

    index = {"pitchers": sorted(by_pitcher), "batters": sorted(by_batter),
             "missing_control": [list(m) for m in missing],
             "outcome_model": config.outcome_model}
    store.write("players/index", index)
    return {"pitchers": len(by_pitcher), "batters": len(by_batter),
            "swing_examples": len(examples), "patience_records": len(precords),
            "missing_control": len(missing),
            "regressor_types": sorted(trainable)}


@dataclass(frozen=True)
class SolveOverrides:
    """What-if knobs: exclude pitch types, move the patience threshold,
    cap any single pitcher action, or scale control variance."""

    exclude_pitch_types: tuple = ()
    patience_threshold: float | None = None
    gamma_cap: float | None = None
    variance_scale: float | None = None

    def is_default(self) -> bool:
        return self == SolveOverrides()

    @classmethod
    def from_json(cls, doc: dict) -> "SolveOverrides":
        known = {"exclude_pitch_types", "patience_threshold", "gamma_cap",
                 "variance_scale"}
        unknown = set(doc) - known
        if unknown:
            raise InvalidRequest(f"unknown override keys {sorted(unknown)}")
        return cls(exclude_pitch_types=tuple(doc.get("exclude_pitch_types", ())),
                   patience_threshold=doc.get("patience_threshold"),
                   gamma_cap=doc.get("gamma_cap"),
                   variance_scale=doc.get("variance_scale"))

    def validate(self) -> "SolveOverrides":
        for p in self.exclude_pitch_types:
            if p not in PITCH_TYPES:
                raise InvalidRequest(f"unknown pitch type {p!r}")
        if len(set(self.exclude_pitch_types)) >= len(PITCH_TYPES):
            raise InvalidRequest("at least one pitch type must remain")
        if self.patience_threshold is not None and not 0 < self.patience_threshold < 1:
            raise InvalidRequest("patience_threshold must be in (0, 1)")
        if self.gamma_cap is not None and not 0 < self.gamma_cap <= 1:
            raise InvalidRequest("gamma_cap must be in (0, 1]")
        if self.variance_scale is not None and self.variance_scale <= 0:
            raise InvalidRequest("variance_scale must be > 0")
        return self

    def to_json(self) -> dict:
        return {"exclude_pitch_types": sorted(self.exclude_pitch_types),
                "patience_threshold": self.patience_threshold,
                "gamma_cap": self.gamma_cap,
                "variance_scale": self.variance_scale}


def _load_tensor(store: ModelStore, key: str) -> np.ndarray:
    doc = store.read(key)
    return np.asarray(doc["values"], dtype=float).reshape(doc["shape"])


def load_matchup_models(store: ModelStore, config: AppConfig, pitcher_id: str,
                        batter_id: str, overrides: SolveOverrides = SolveOverrides()
                        ) -> MatchupModels:
    """Assemble the fitted simulation substrate for one matchup."""
    overrides.validate()
    index = store.read("players/index")
    if pitcher_id not in index["pitchers"]:
        raise UnknownPlayer(f"unknown pitcher {pitcher_id!r}")
    if batter_id not in index["batters"]:
        raise UnknownPlayer(f"unknown batter {batter_id!r}")
    grid = config.zone_grid()
    pitch_types = tuple(p for p in PITCH_TYPES
                        if p not in overrides.exclude_pitch_types)

    control_doc = store.read(f"control/{pitcher_id}")
    gauss = {}
    provenance = {}
    for pitch in pitch_types:
        if pitch not in control_doc:
            raise ctl.NoControlModel(f"{pitcher_id}: no control model for {pitch}")
        g = ctl.GaussianControl.from_list(control_doc[pitch]["params"])
        if overrides.variance_scale is not None:
            g = g.scaled(overrides.variance_scale)
        gauss[pitch] = g
        provenance[pitch] = control_doc[pitch]["source"]
    aim_table = ctl.AimTable(gauss, grid, pitch_types)

    model_kind = index.get("outcome_model", "empirical")
    if model_kind == "softmax" and store.exists("outcome/softmax"):
        softmax = outcomes.LateFusionSoftmax.from_json(store.read("outcome/softmax"))
        outcome = softmax.bound(_load_tensor(store, f"tensors/pitcher_{pitcher_id}"),
                                _load_tensor(store, f"tensors/batter_{batter_id}"))
    else:
        outcome = outcomes.EmpiricalOutcomeTable.from_json(
            store.read("outcome/empirical"))

    clf = patience.PatienceClassifier.from_json(store.read("patience/classifier"))
    batter_tensor = _load_tensor(store, f"tensors/batter_{batter_id}")
    theta = overrides.patience_threshold or config.patience_threshold
    overrides_by_count = {
        c: patience.build_override(clf, batter_tensor, c, theta, pitch_types)
        for c in COUNTS}

    return MatchupModels(control=aim_table, outcome=outcome,
                         overrides_by_count=overrides_by_count,
                         pitch_types=pitch_types,
                         provenance={"control": provenance,
                                     "outcome_model": model_kind})


def solve_matchup(store: ModelStore, config: AppConfig, pitcher_id: str,
                  batter_id: str, overrides: SolveOverrides = SolveOverrides(),
                  write_named: bool = True) -> tuple[dict, float]:
    """Solve one matchup end to end.

    Returns the deterministic SolveResponse document (stored verbatim when
    the overrides are default) and the wall time in ms, kept out of the
    document so reruns of the same store are byte-identical.
    """
    started = time.perf_counter()
    models = load_matchup_models(store, config, pitcher_id, batter_id, overrides)
    kernel = models.kernel()
    solver_config = config.solver_config(gamma_cap=overrides.gamma_cap)
    solution = value_iterate(kernel, solver_config)
    response = {
        "pitcher_id": pitcher_id,
        "batter_id": batter_id,
        "overrides": overrides.to_json(),
        "solution": solution.to_json(),
        "provenance": models.provenance,
    }
    elapsed_ms = round((time.perf_counter() - started) * 1000.0, 3)
    if write_named and overrides.is_default():
        store.write(f"solutions/{pitcher_id}_{batter_id}", response)
    return response, elapsed_ms
