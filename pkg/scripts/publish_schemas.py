#!/usr/bin/env python3
"""Regenerate the schemas/ directory from argumint.schemas."""

from pathlib import Path

from argumint.schemas import publish

if __name__ == "__main__":
    target = Path(__file__).resolve().parent.parent / "schemas"
    publish(target)
    print(f"schemas written to {target}")
