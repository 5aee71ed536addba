"""The checked-in golden tables the UI conforms to must match the game rules."""

import importlib.util
import json
import pathlib

from atbat.data import canonical_json
from atbat.game import parse_count

ROOT = pathlib.Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "frontend" / "src" / "golden" / "tables.json"


def load_export_module():
    spec = importlib.util.spec_from_file_location(
        "export_ui_tables", ROOT / "scripts" / "export_ui_tables.py")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def test_checked_in_tables_match_generator():
    module = load_export_module()
    assert GOLDEN.read_text().strip() == canonical_json(module.build_tables())


def test_transitions_cover_all_count_event_pairs():
    doc = json.loads(GOLDEN.read_text())
    assert len(doc["transitions"]) == 12
    for key, row in doc["transitions"].items():
        count = parse_count(key)
        assert set(row) == set(doc["events"])
        for event, target in row.items():
            if target not in ("on_base", "out"):
                nxt = parse_count(target)
                assert (nxt.balls, nxt.strikes) in {
                    (count.balls + 1, count.strikes),
                    (count.balls, count.strikes + 1),
                    (count.balls, count.strikes)}


def test_spot_checks():
    doc = json.loads(GOLDEN.read_text())
    t = doc["transitions"]
    assert t["3-2"]["foul"] == "3-2"
    assert t["0-2"]["whiff"] == "out"
    assert t["3-1"]["ball"] == "on_base"
    assert t["0-0"]["hit"] == "on_base"
    assert t["2-1"]["called_strike"] == "2-2"
    assert doc["zone_cells"]["13"] == [[3, 0], [4, 0], [4, 1]]
    assert len(doc["zone_cells"]) == 17
