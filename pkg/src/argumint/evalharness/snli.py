"""Loader and conversion for premise/hypothesis inference pairs.

Input is line-delimited JSON with ``sentence1``/``sentence2``/``gold_label``
fields (``premise``/``hypothesis``/``label`` are accepted as aliases).  Pairs
without a consensus label (``-``) are skipped with a count.  For validity
checking, entailment maps to a ``valid`` gold verdict, contradiction to
``invalid``, and neutral pairs are excluded: the binary verdict cannot
express neutrality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..graph import INVALID, VALID

LABELS = ("entailment", "contradiction", "neutral")
NO_CONSENSUS = "-"


class SnliParseError(ValueError):
    def __init__(self, message: str, *, line_no: int = 0):
        super().__init__(f"line {line_no}: {message}" if line_no else message)
        self.line_no = line_no


@dataclass(frozen=True)
class NliPair:
    premise: str
    hypothesis: str
    gold_label: str


@dataclass(frozen=True)
class SnliLoadResult:
    pairs: tuple[NliPair, ...]
    skipped: int


def load_snli(path: str | Path) -> SnliLoadResult:
    """Load pairs, skipping no-consensus records with a count."""
    pairs: list[NliPair] = []
    skipped = 0
    content = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SnliParseError(f"invalid JSON: {exc}", line_no=line_no) from exc
        if not isinstance(record, dict):
            raise SnliParseError("record must be an object", line_no=line_no)
        premise = record.get("sentence1", record.get("premise"))
        hypothesis = record.get("sentence2", record.get("hypothesis"))
        label = record.get("gold_label", record.get("label"))
        if not isinstance(premise, str) or not isinstance(hypothesis, str) or not isinstance(label, str):
            raise SnliParseError("record needs premise, hypothesis and label fields", line_no=line_no)
        if label == NO_CONSENSUS:
            skipped += 1
            continue
        if label not in LABELS:
            raise SnliParseError(f"unknown label {label!r}", line_no=line_no)
        pairs.append(NliPair(premise=premise, hypothesis=hypothesis, gold_label=label))
    return SnliLoadResult(pairs=tuple(pairs), skipped=skipped)


@dataclass(frozen=True)
class ValidityItem:
    premise: str
    hypothesis: str
    gold_strength: str  # valid | invalid


def to_validity_gold(pairs: list[NliPair] | tuple[NliPair, ...]) -> tuple[list[ValidityItem], int]:
    """Convert labeled pairs to binary validity gold; returns the converted
    items and the count of excluded neutral pairs."""
    items: list[ValidityItem] = []
    excluded_neutral = 0
    for pair in pairs:
        if pair.gold_label == "entailment":
            items.append(ValidityItem(pair.premise, pair.hypothesis, VALID))
        elif pair.gold_label == "contradiction":
            items.append(ValidityItem(pair.premise, pair.hypothesis, INVALID))
        else:
            excluded_neutral += 1
    return items, excluded_neutral


def _sentence(text: str) -> str:
    return text.strip().rstrip(".")


def mini_essay(premise: str, hypothesis: str) -> tuple[str, str, str]:
    """Render a pair as a two-sentence essay; returns (essay, premise sentence,
    hypothesis sentence) with the sentences exactly as embedded."""
    premise_sentence = f"{_sentence(premise)}."
    hypothesis_sentence = f"{_sentence(hypothesis)}."
    essay = f"{premise_sentence} Therefore, {hypothesis_sentence}"
    return essay, premise_sentence, hypothesis_sentence
