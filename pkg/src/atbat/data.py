"""Pitch-level CSV ingestion, player-disjoint splitting, and the JSON model store.

CSV files are RFC 4180 with a header row.  A :class:`ColumnMapping` names the
source column for every record field and translates raw label codes into the
six canonical ones, so any pitch-by-pitch export can be ingested.  The model
store is a directory of canonical-JSON documents (sorted keys, fixed float
formatting) under a manifest, written atomically via rename so readers never
observe partial documents.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .zones import PITCH_TYPES

#: Canonical outcome labels.  The first four imply a swing.
SWING_LABELS = ("whiff", "foul", "hit", "out_in_play")
TAKE_LABELS = ("called_strike", "ball")
ALL_LABELS = SWING_LABELS + TAKE_LABELS


class SchemaError(ValueError):
    """A mapped column is missing from the CSV header."""


class IoError(OSError):
    """Input file unreadable."""


class IncompatibleStore(ValueError):
    """Store manifest has an unsupported schema version."""


class NotFound(KeyError):
    """Requested store key does not exist."""


@dataclass(frozen=True)
class PitchRecord:
    pitcher_id: str
    batter_id: str
    pitch_type: str
    x: float
    z: float
    balls: int
    strikes: int
    swung: bool
    label: str
    velocity: float | None = None

    def count(self):
        from .game import Count
        return Count(self.balls, self.strikes)


@dataclass(frozen=True)
class ColumnMapping:
    """Source-column names per record field plus label/pitch translations."""

    pitcher_id: str = "pitcher_id"
    batter_id: str = "batter_id"
    pitch_type: str = "pitch_type"
    x: str = "px"
    z: str = "pz"
    balls: str = "balls"
    strikes: str = "strikes"
    swung: str = "swung"
    label: str = "label"
    velocity: str = "velocity"
    label_codes: dict = field(default_factory=lambda: {l: l for l in ALL_LABELS})
    pitch_aliases: dict = field(default_factory=dict)

    def required_columns(self) -> tuple[str, ...]:
        return (self.pitcher_id, self.batter_id, self.pitch_type, self.x,
                self.z, self.balls, self.strikes, self.swung, self.label)

    @classmethod
    def from_json(cls, doc: dict) -> "ColumnMapping":
        return cls(**doc)


class IngestReport(NamedTuple):
    accepted: int
    rejected: dict


def _parse_float(text: str) -> float | None:
    try:
        v = float(text)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) else None


_TRUTHY = {"1", "true", "t", "yes"}
_FALSY = {"0", "false", "f", "no"}


def ingest(paths: Iterable[str], mapping: ColumnMapping | None = None
           ) -> tuple[list[PitchRecord], IngestReport]:
    """Parse pitch records from CSV files in file order.

    Rows failing validation are dropped and tallied by reason: bad_coords,
    unknown_pitch_type, unknown_label, bad_count, bad_swing_flag,
    inconsistent_label (label's swing implication contradicts the flag).
    """
    mapping = mapping or ColumnMapping()
    records: list[PitchRecord] = []
    rejects = {"bad_coords": 0, "unknown_pitch_type": 0, "unknown_label": 0,
               "bad_count": 0, "bad_swing_flag": 0, "inconsistent_label": 0}
    for path in paths:
        try:
            handle = open(path, newline="", encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from exc
        with handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            missing = [c for c in mapping.required_columns() if c not in header]
            if missing:
                raise SchemaError(f"{path}: missing mapped columns {missing}")
            has_velocity = mapping.velocity in header
            for row in reader:
                x = _parse_float(row[mapping.x])
                z = _parse_float(row[mapping.z])
                if x is None or z is None:
                    rejects["bad_coords"] += 1
                    continue
                pitch = row[mapping.pitch_type]
                pitch = mapping.pitch_aliases.get(pitch, pitch)
                if pitch not in PITCH_TYPES:
                    rejects["unknown_pitch_type"] += 1
                    continue
                label = mapping.label_codes.get(row[mapping.label])
                if label is None:
                    rejects["unknown_label"] += 1
                    continue
                try:
                    balls = int(row[mapping.balls])
                    strikes = int(row[mapping.strikes])
                except ValueError:
                    rejects["bad_count"] += 1
                    continue
                if not (0 <= balls <= 3 and 0 <= strikes <= 2):
                    rejects["bad_count"] += 1
                    continue
                raw_swung = row[mapping.swung].strip().lower()
                if raw_swung in _TRUTHY:
                    swung = True
                elif raw_swung in _FALSY:
                    swung = False
                else:
                    rejects["bad_swing_flag"] += 1
                    continue
                if swung != (label in SWING_LABELS):
                    rejects["inconsistent_label"] += 1
                    continue
                velocity = _parse_float(row[mapping.velocity]) if has_velocity else None
                records.append(PitchRecord(
                    pitcher_id=row[mapping.pitcher_id],
                    batter_id=row[mapping.batter_id],
                    pitch_type=pitch, x=x, z=z, balls=balls, strikes=strikes,
                    swung=swung, label=label, velocity=velocity))
    return records, IngestReport(len(records), rejects)


CSV_COLUMNS = ("pitcher_id", "batter_id", "pitch_type", "px", "pz",
               "balls", "strikes", "swung", "label", "velocity")


def export_csv(records: Iterable[PitchRecord], path: str) -> None:
    """Write records in the default-mapping column layout with fixed float
    formatting, so identical record lists produce byte-identical files."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.pitcher_id, r.batter_id, r.pitch_type,
                f"{r.x:.6f}", f"{r.z:.6f}", r.balls, r.strikes,
                int(r.swung), r.label,
                "" if r.velocity is None else f"{r.velocity:.3f}"])


def _unit_hash(seed: int, role: str, player_id: str) -> float:
    digest = hashlib.sha256(f"{seed}:{role}:{player_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2.0 ** 64


class SplitResult(NamedTuple):
    train: list
    test: list
    dropped: int


def split_players(records: list[PitchRecord], test_fraction: float, seed: int
                  ) -> SplitResult:
    """Partition with no pitcher or batter shared between sides.

    Pitchers and batters are independently assigned to the test side by a
    seeded hash; a record is kept only when both its players fall on the same
    side, and mixed records are dropped (their count is returned).
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    train, test, dropped = [], [], 0
    for r in records:
        p_test = _unit_hash(seed, "pitcher", r.pitcher_id) < test_fraction
        b_test = _unit_hash(seed, "batter", r.batter_id) < test_fraction
        if p_test and b_test:
            test.append(r)
        elif not p_test and not b_test:
            train.append(r)
        else:
            dropped += 1
    return SplitResult(train, test, dropped)


def records_to_json(records: Iterable[PitchRecord]) -> list:
    return [[r.pitcher_id, r.batter_id, r.pitch_type, r.x, r.z, r.balls,
             r.strikes, int(r.swung), r.label,
             None if r.velocity is None else r.velocity] for r in records]


def records_from_json(rows: Iterable) -> list[PitchRecord]:
    return [PitchRecord(p, b, t, float(x), float(z), int(u), int(v),
                        bool(s), l, None if vel is None else float(vel))
            for p, b, t, x, z, u, v, s, l, vel in rows]


def canonical_json(doc) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits
    (lossless for IEEE doubles), no whitespace variation."""

    def emit(node) -> str:
        if node is None or node is True or node is False:
            return json.dumps(node)
        if isinstance(node, float):
            if not math.isfinite(node):
                raise ValueError("non-finite float in store document")
            return format(node, ".17g")
        if isinstance(node, int):
            return str(node)
        if isinstance(node, str):
            return json.dumps(node, ensure_ascii=False)
        if isinstance(node, dict):
            if any(not isinstance(k, str) for k in node):
                raise ValueError("store document keys must be strings")
            items = (f"{json.dumps(k, ensure_ascii=False)}:{emit(v)}"
                     for k, v in sorted(node.items()))
            return "{" + ",".join(items) + "}"
        if isinstance(node, (list, tuple)):
            return "[" + ",".join(emit(v) for v in node) + "]"
        raise TypeError(f"cannot serialize {type(node).__name__}")

    return emit(doc)


SCHEMA_VERSION = 1


class ModelStore:
    """Versioned directory of JSON documents for every fitted artifact.

    Layout: ``manifest.json`` beside one ``<key>.json`` per document, with
    keys like ``control/P1`` or ``solutions/P1_B1``.  Writes go through a
    temp file and rename, so concurrent readers see old-or-new only.
    """

    def __init__(self, root: str, create: bool = False, fingerprint: str = ""):
        self.root = root
        manifest_path = os.path.join(root, "manifest.json")
        if create:
            os.makedirs(root, exist_ok=True)
            self._manifest = {"schema_version": SCHEMA_VERSION,
                              "fingerprint": fingerprint}
            self._write_manifest()
        else:
            try:
                with open(manifest_path, encoding="utf-8") as handle:
                    self._manifest = json.load(handle)
            except OSError as exc:
                raise IoError(f"no store at {root}: {exc}") from exc
            if self._manifest.get("schema_version") != SCHEMA_VERSION:
                raise IncompatibleStore(
                    f"store schema {self._manifest.get('schema_version')!r}, "
                    f"expected {SCHEMA_VERSION}")

    @property
    def fingerprint(self) -> str:
        return self._manifest.get("fingerprint", "")

    def set_fingerprint(self, fingerprint: str) -> None:
        self._manifest["fingerprint"] = fingerprint
        self._write_manifest()

    def _write_manifest(self) -> None:
        self._atomic_write(os.path.join(self.root, "manifest.json"),
                           canonical_json(self._manifest))

    @staticmethod
    def _atomic_write(path: str, text: str) -> None:
        directory = os.path.dirname(path)
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def _path(self, key: str) -> str:
        if ".." in key or key.startswith("/"):
            raise ValueError(f"bad store key {key!r}")
        return os.path.join(self.root, key + ".json")

    def write(self, key: str, document) -> None:
        self._atomic_write(self._path(key), canonical_json(document))

    def read(self, key: str):
        try:
            with open(self._path(key), encoding="utf-8") as handle:
                return json.load(handle)
        except FileNotFoundError:
            raise NotFound(key) from None

    def exists(self, key: str) -> bool:
        return os.path.exists(self._path(key))

    def keys(self, prefix: str = "") -> list[str]:
        found = []
        for base, _, files in os.walk(self.root):
            for name in files:
                if not name.endswith(".json") or name == "manifest.json":
                    continue
                rel = os.path.relpath(os.path.join(base, name), self.root)
                key = rel[:-len(".json")].replace(os.sep, "/")
                if key.startswith(prefix):
                    found.append(key)
        return sorted(found)


def data_fingerprint(records: Iterable[PitchRecord]) -> str:
    return hashlib.sha256(
        canonical_json(records_to_json(records)).encode()).hexdigest()
