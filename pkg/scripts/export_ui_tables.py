#!/usr/bin/env python3
"""Export the golden tables the browser UI conforms to.

The UI never computes game math; its count machine and zone layout are
validated against this file, so the two components cannot drift apart.

Usage: python scripts/export_ui_tables.py [frontend/src/golden/tables.json]
"""

import sys

from atbat.data import canonical_json
from atbat.game import (COUNTS, ON_BASE, OUT, next_state_on_swing_outcome,
                        next_state_on_take)
from atbat.zones import PITCH_TYPES, cells_of_zone

#: UI events and how each maps through the game rules.
EVENTS = ("ball", "called_strike", "whiff", "foul", "hit", "out_in_play")


def transition(count, event):
    if event == "ball":
        return next_state_on_take(count, False)
    if event == "called_strike":
        return next_state_on_take(count, True)
    outcome = {"whiff": "strike", "foul": "foul", "hit": "hit",
               "out_in_play": "out"}[event]
    return next_state_on_swing_outcome(count, outcome)


def build_tables() -> dict:
    transitions = {}
    for count in COUNTS:
        transitions[str(count)] = {
            event: str(transition(count, event)) for event in EVENTS}
    return {
        "counts": [str(c) for c in COUNTS],
        "terminals": [ON_BASE, OUT],
        "events": list(EVENTS),
        "transitions": transitions,
        "pitch_types": list(PITCH_TYPES),
        "zone_cells": {str(z): [list(cell) for cell in cells_of_zone(z)]
                       for z in range(17)},
    }


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "frontend/src/golden/tables.json"
    text = canonical_json(build_tables())
    with open(out_path, "w", encoding="utf-8") as handle:
        handle.write(text + "\n")
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
