"""Locate extracted quotes inside the essay as character-offset spans.

The extraction stage returns verbatim quotes rather than character indices,
and models occasionally mangle a character or two, so anchoring falls back to
fuzzy matching: candidate windows start at every character offset, their
lengths range within +/-25% of the quote length, and the winner maximizes
``1 - editDistance / max(len(quote), len(window))``.  Ties break by higher
similarity, then leftmost start, then shorter span.  One batched DP scores
all windows at once, so the exhaustive start set stays cheap at essay scale.
Offsets count Unicode scalar values (Python string indices), never bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .graph import MAIN_CLAIM_ID, ArgumentAnalysis

DEFAULT_THRESHOLD = 0.80

EXACT = "exact"
FUZZY = "fuzzy"


class AnchorError(ValueError):
    """No window reached the similarity threshold; the quote cannot be trusted."""

    def __init__(self, quote: str, threshold: float, best_similarity: float):
        super().__init__(
            f"no anchor for quote {quote[:60]!r}: best similarity "
            f"{best_similarity:.3f} below threshold {threshold:.3f}"
        )
        self.best_similarity = best_similarity


@dataclass(frozen=True)
class AnchoredSpan:
    """Character-offset location of a quote (start inclusive, end exclusive)."""

    quote_id: int
    start: int
    end: int
    match_kind: str
    similarity: float

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start

    def overlap(self, other: "AnchoredSpan") -> int:
        return max(0, min(self.end, other.end) - max(self.start, other.start))

    def to_dict(self) -> dict:
        return {
            "quote_id": self.quote_id,
            "start": self.start,
            "end": self.end,
            "match_kind": self.match_kind,
            "similarity": self.similarity,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnchoredSpan":
        return cls(
            quote_id=int(data["quote_id"]),
            start=int(data["start"]),
            end=int(data["end"]),
            match_kind=str(data["match_kind"]),
            similarity=float(data["similarity"]),
        )


def window_length_bounds(quote_len: int) -> tuple[int, int]:
    """Inclusive window-length band: +/-25% of the quote length."""
    low = max(1, (3 * quote_len + 3) // 4)
    high = (5 * quote_len) // 4
    return low, max(low, high)


def anchor_quote(
    essay: str,
    quote: str,
    threshold: float = DEFAULT_THRESHOLD,
    *,
    quote_id: int = MAIN_CLAIM_ID,
) -> AnchoredSpan:
    """Anchor one quote, exactly when possible, fuzzily otherwise.

    A verbatim occurrence wins outright (leftmost, similarity 1.0).  Raises
    :class:`AnchorError` when the best fuzzy window stays below ``threshold``.
    """
    if not quote:
        raise ValueError("quote must be non-empty")
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")

    pos = essay.find(quote)
    if pos >= 0:
        return AnchoredSpan(quote_id, pos, pos + len(quote), EXACT, 1.0)

    found = _best_fuzzy_window(essay, quote)
    if found is None:
        raise AnchorError(quote, threshold, 0.0)
    start, length, distance = found
    similarity = 1.0 - distance / max(len(quote), length)
    if similarity < threshold:
        raise AnchorError(quote, threshold, similarity)
    return AnchoredSpan(quote_id, start, start + length, FUZZY, similarity)


def _best_fuzzy_window(essay: str, quote: str) -> tuple[int, int, int] | None:
    """Best (start, length, edit distance) over the candidate window set.

    Runs one Levenshtein DP over all start offsets at once: rows iterate
    quote characters, columns are window prefixes, and the in-row dependency
    d[j] = min(d[j-1] + 1, ...) is resolved with a running minimum of
    (value - column index).
    """
    n = len(essay)
    if n == 0:
        return None
    starts = list(range(n))
    m = len(quote)
    low, high = window_length_bounds(m)

    codes = np.frombuffer(essay.encode("utf-32-le"), dtype="<u4").astype(np.int64)
    pattern = np.frombuffer(quote.encode("utf-32-le"), dtype="<u4").astype(np.int64)
    starts_arr = np.asarray(starts, dtype=np.int64)

    col_idx = starts_arr[:, None] + np.arange(high)[None, :]
    in_text = col_idx < n
    windows = np.where(in_text, codes[np.minimum(col_idx, n - 1)], np.int64(-1))

    cols = np.arange(high + 1, dtype=np.int64)
    dist = np.broadcast_to(cols, (len(starts), high + 1)).copy()
    work = np.empty_like(dist)
    for i in range(1, m + 1):
        cost = (windows != pattern[i - 1]).astype(np.int64)
        work[:, 0] = i
        np.minimum(dist[:, :-1] + cost, dist[:, 1:] + 1, out=work[:, 1:])
        np.subtract(work, cols, out=work)
        np.minimum.accumulate(work, axis=1, out=work)
        np.add(work, cols, out=work)
        dist, work = work, dist

    lengths = np.arange(low, high + 1, dtype=np.int64)
    band = dist[:, low : high + 1]
    valid = (starts_arr[:, None] + lengths[None, :]) <= n
    if not valid.any():
        return None
    denom = np.maximum(m, lengths)
    ratio = np.where(valid, band / denom, np.inf)

    best = ratio.min()
    if not np.isfinite(best):
        return None
    # Exact float equality is safe here: equal distance/denominator fractions
    # divide to identical doubles, distinct fractions stay far above 1 ulp.
    cand_s, cand_l = np.nonzero(ratio == best)
    order = np.lexsort((lengths[cand_l], starts_arr[cand_s]))
    pick = order[0]
    s = int(starts_arr[cand_s[pick]])
    length = int(lengths[cand_l[pick]])
    return s, length, int(band[cand_s[pick], cand_l[pick]])


def anchor_all(
    essay: str,
    analysis: ArgumentAnalysis,
    threshold: float = DEFAULT_THRESHOLD,
) -> tuple[dict[int, AnchoredSpan], list[int]]:
    """Anchor the main claim and every quote of an analysis.

    Returns the anchor map and the ids that could not be anchored (the caller
    prunes relations touching those).  Ids sharing identical quote text are
    assigned successive exact occurrences left to right in ascending id
    order; once occurrences run out, the leftmost is reused.
    """
    if analysis.empty:
        return {}, []

    texts: dict[int, str] = {MAIN_CLAIM_ID: analysis.claim_quote}
    texts.update(analysis.quotes)

    by_text: dict[str, list[int]] = {}
    for qid in sorted(texts):
        by_text.setdefault(texts[qid], []).append(qid)

    anchors: dict[int, AnchoredSpan] = {}
    dropped: list[int] = []
    for text, ids in by_text.items():
        if len(ids) == 1:
            _anchor_into(anchors, dropped, essay, text, ids[0], threshold)
            continue
        occurrences = _exact_occurrences(essay, text)
        if not occurrences:
            for qid in ids:
                _anchor_into(anchors, dropped, essay, text, qid, threshold)
            continue
        for i, qid in enumerate(ids):
            start = occurrences[i] if i < len(occurrences) else occurrences[0]
            anchors[qid] = AnchoredSpan(qid, start, start + len(text), EXACT, 1.0)
    return dict(sorted(anchors.items())), sorted(dropped)


def _anchor_into(
    anchors: dict[int, AnchoredSpan],
    dropped: list[int],
    essay: str,
    text: str,
    quote_id: int,
    threshold: float,
) -> None:
    try:
        anchors[quote_id] = anchor_quote(essay, text, threshold, quote_id=quote_id)
    except AnchorError:
        dropped.append(quote_id)


def _exact_occurrences(essay: str, text: str) -> list[int]:
    positions = []
    pos = essay.find(text)
    while pos >= 0:
        positions.append(pos)
        pos = essay.find(text, pos + len(text))
    return positions


def reassign(span: AnchoredSpan, quote_id: int) -> AnchoredSpan:
    return replace(span, quote_id=quote_id)
