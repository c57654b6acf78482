#!/usr/bin/env python3
"""Regenerate tests/fixtures/demo from the declarative bundle.

Fixture keys hash essay contents, so the committed files must be rebuilt
whenever an essay or canned response changes.
"""

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from demo_bundle import write_demo_fixtures  # noqa: E402

if __name__ == "__main__":
    target = ROOT / "tests" / "fixtures" / "demo"
    write_demo_fixtures(target)
    print(f"demo fixtures written to {target}")
