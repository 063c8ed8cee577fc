#!/usr/bin/env python3
"""Freeze the golden protocol transcript fixture.

Runs a scripted reset + 12-step episode through the protocol session layer
and records the exact request/response line pairs. The test suite replays
the requests and requires byte-identical response lines.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

SRC = Path(__file__).resolve().parent.parent / "src"
sys.path.insert(0, str(SRC))

from dualhab.server import Session  # noqa: E402

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" \
    / "golden_transcript.json"

REQUESTS = [
    {"id": "1", "command": "reset", "scene": "kitchen_small", "robot": "x1",
     "difficulty": "easy", "seed": 42},
    {"id": "2", "command": "(tp, objectID=Kitchen_Knife_01)"},
    {"id": "3", "command": "(pick, arm=left, objectID=Kitchen_Knife_01)"},
    {"id": "4", "command": "(tp, objectID=Kitchen_Apple_01)"},
    {"id": "5", "command": "(slice, arm=left, objectID=Kitchen_Apple_01)"},
    {"id": "6", "command": "(loadstate)"},
    {"id": "7", "command": "(tp, objectID=Kitchen_CoffeeMachine_01)"},
    {"id": "8", "command": "(toggle, arm=right, objectID=Kitchen_CoffeeMachine_01)"},
    {"id": "9", "command": "(tp, objectID=Kitchen_Mug_01)"},
    {"id": "10", "command": "(pick, arm=right, objectID=Kitchen_Mug_01)"},
    {"id": "11", "command": "(tp, objectID=Kitchen_CoffeeMachine_01)"},
    {"id": "12", "command": "(fill, arm=right, objectID=Kitchen_Mug_01)"},
    {"id": "13", "command": "(undo)"},
]


def main():
    session = Session()
    pairs = []
    for request in REQUESTS:
        line = json.dumps(request, sort_keys=True)
        response, keep_open = session.handle_line(line)
        assert keep_open, request
        assert response["success"], (request, response["errorMessage"])
        pairs.append({
            "request": line,
            "response": json.dumps(response, sort_keys=True),
        })
    FIXTURE.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE.write_text(json.dumps({"transcript": pairs}, indent=1) + "\n")
    print(f"wrote {FIXTURE} ({len(pairs)} exchanges)")


if __name__ == "__main__":
    main()
