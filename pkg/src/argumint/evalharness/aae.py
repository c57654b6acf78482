"""Loader for essay corpora in the brat standoff annotation format.

Each essay is a ``<id>.txt`` file paired with a ``<id>.ann`` file whose lines
describe components (``T``), relations (``R``) and attributes (``A``):

    T1\tMajorClaim 503 575\tsurface text of the component
    R1\tsupports Arg1:T10 Arg2:T11
    A1\tStance T6 For

Component spans are verified against the text file; stance attributes are
parsed and retained but unused by the metrics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

COMPONENT_KINDS = ("MajorClaim", "Claim", "Premise")
RELATION_KINDS = ("supports", "attacks")

_T_LINE = re.compile(r"^(T\d+)\t(\S+) (\d+) (\d+)\t(.*)$")
_R_LINE = re.compile(r"^(R\d+)\t(\S+) Arg1:(T\d+) Arg2:(T\d+)\s*$")
_A_LINE = re.compile(r"^(A\d+)\t(\S+) (T\d+) (\S+)\s*$")


class CorpusParseError(ValueError):
    """An annotation file line could not be parsed."""

    def __init__(self, message: str, *, file: str = "", line_no: int = 0):
        location = f"{file}:{line_no}: " if file else ""
        super().__init__(f"{location}{message}")
        self.file = file
        self.line_no = line_no


class SpanMismatchError(CorpusParseError):
    """Annotation offsets disagree with the essay text."""


@dataclass(frozen=True)
class Component:
    component_id: str
    kind: str
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class GoldRelation:
    source: str
    kind: str
    target: str


@dataclass(frozen=True)
class StanceAttribute:
    attribute_id: str
    name: str
    component_id: str
    value: str


@dataclass(frozen=True)
class GoldEssay:
    essay_id: str
    text: str
    components: dict[str, Component] = field(default_factory=dict)
    relations: tuple[GoldRelation, ...] = ()
    attributes: tuple[StanceAttribute, ...] = ()

    def supports_edges(self) -> set[tuple[str, str]]:
        return {(r.source, r.target) for r in self.relations if r.kind == "supports"}

    def major_claims(self) -> list[Component]:
        return [c for c in self.components.values() if c.kind == "MajorClaim"]


def parse_annotations(essay_id: str, text: str, ann_content: str, *, file: str = "") -> GoldEssay:
    """Parse one annotation file against its essay text."""
    components: dict[str, Component] = {}
    relations: list[GoldRelation] = []
    attributes: list[StanceAttribute] = []

    for line_no, line in enumerate(ann_content.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("T"):
            match = _T_LINE.match(line)
            if not match:
                raise CorpusParseError(f"malformed component line {line!r}", file=file, line_no=line_no)
            cid, kind, start_s, end_s, surface = match.groups()
            if kind not in COMPONENT_KINDS:
                raise CorpusParseError(f"unknown component kind {kind!r}", file=file, line_no=line_no)
            start, end = int(start_s), int(end_s)
            if cid in components:
                raise CorpusParseError(f"duplicate component id {cid}", file=file, line_no=line_no)
            if not 0 <= start < end <= len(text):
                raise SpanMismatchError(
                    f"component {cid} span [{start}, {end}) outside text of length {len(text)}",
                    file=file,
                    line_no=line_no,
                )
            if text[start:end] != surface:
                raise SpanMismatchError(
                    f"component {cid} surface text disagrees with essay at [{start}, {end})",
                    file=file,
                    line_no=line_no,
                )
            components[cid] = Component(cid, kind, start, end, surface)
        elif line.startswith("R"):
            match = _R_LINE.match(line)
            if not match:
                raise CorpusParseError(f"malformed relation line {line!r}", file=file, line_no=line_no)
            _, kind, source, target = match.groups()
            if kind not in RELATION_KINDS:
                raise CorpusParseError(f"unknown relation kind {kind!r}", file=file, line_no=line_no)
            relations.append(GoldRelation(source=source, kind=kind, target=target))
        elif line.startswith("A"):
            match = _A_LINE.match(line)
            if not match:
                raise CorpusParseError(f"malformed attribute line {line!r}", file=file, line_no=line_no)
            aid, name, cid, value = match.groups()
            attributes.append(StanceAttribute(aid, name, cid, value))
        else:
            raise CorpusParseError(f"unrecognized line {line!r}", file=file, line_no=line_no)

    for relation in relations:
        for cid in (relation.source, relation.target):
            if cid not in components:
                raise CorpusParseError(f"relation references unknown component {cid}", file=file)

    return GoldEssay(
        essay_id=essay_id,
        text=text,
        components=components,
        relations=tuple(relations),
        attributes=tuple(attributes),
    )


def load_aae_corpus(directory: str | Path) -> list[GoldEssay]:
    """Load every ``*.ann`` / ``*.txt`` pair under ``directory``."""
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    essays: list[GoldEssay] = []
    ann_files = sorted(root.glob("*.ann"))
    if not ann_files:
        raise CorpusParseError(f"no .ann files in {root}")
    for ann_path in ann_files:
        txt_path = ann_path.with_suffix(".txt")
        if not txt_path.is_file():
            raise CorpusParseError(f"missing text file for {ann_path.name}", file=str(ann_path))
        text = txt_path.read_text(encoding="utf-8")
        essays.append(
            parse_annotations(
                ann_path.stem,
                text,
                ann_path.read_text(encoding="utf-8"),
                file=str(ann_path),
            )
        )
    return essays
