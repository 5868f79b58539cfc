"""Span-based projection of BIO labels through a word alignment.

Labels travel as whole spans, not single tokens: each source span is mapped
to the contiguous cover of every target word aligned to any of its words.
The cover fills alignment gaps, which absorbs some alignment errors; spans
with no aligned target word are dropped.  Overlaps between projected spans
are resolved deterministically (see project_spans).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .embed_io import validate_tag


@dataclass
class LabeledSpan:
    """A labeled word range with inclusive bounds."""

    label: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("span label must be non-empty")
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"bad span bounds [{self.start}, {self.end}]")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def decode_spans(tags: list[str]) -> list[LabeledSpan]:
    """Decode BIO tags into maximal spans, left to right.

    A dangling I-<type> (no open span, or an open span of a different type)
    is repaired to B-<type>.  Unknown tag strings are rejected.
    """
    spans: list[LabeledSpan] = []
    open_label: str | None = None
    open_start = 0

    def close(upto: int) -> None:
        nonlocal open_label
        if open_label is not None:
            spans.append(LabeledSpan(open_label, open_start, upto))
            open_label = None

    for pos, tag in enumerate(tags):
        validate_tag(tag)
        if tag == "O":
            close(pos - 1)
            continue
        kind, label = tag[0], tag[2:]
        if kind == "B" or label != open_label:
            close(pos - 1)
            open_label = label
            open_start = pos
    close(len(tags) - 1)
    return spans


def encode_spans(spans: Iterable[LabeledSpan], length: int) -> list[str]:
    """Inverse of decode_spans: emit BIO tags, O outside every span."""
    tags = ["O"] * length
    previous_end = -1
    for span in sorted(spans, key=lambda s: (s.start, s.end)):
        if span.end >= length:
            raise ValueError(
                f"span [{span.start}, {span.end}] exceeds sentence length {length}"
            )
        if span.start <= previous_end:
            raise ValueError(f"overlapping span at word {span.start}")
        tags[span.start] = f"B-{span.label}"
        for pos in range(span.start + 1, span.end + 1):
            tags[pos] = f"I-{span.label}"
        previous_end = span.end
    return tags


def _longest_free_run(
    occupied: list[bool], lo: int, hi: int
) -> tuple[int, int] | None:
    """Longest run of free positions within [lo, hi]; leftmost wins ties."""
    best: tuple[int, int] | None = None
    run_start: int | None = None
    for pos in range(lo, hi + 2):
        free = pos <= hi and not occupied[pos]
        if free and run_start is None:
            run_start = pos
        elif not free and run_start is not None:
            if best is None or (pos - run_start) > (best[1] - best[0] + 1):
                best = (run_start, pos - 1)
            run_start = None
    return best


def project_spans(
    spans: Iterable[LabeledSpan],
    alignment: set[tuple[int, int]],
    target_length: int,
) -> list[LabeledSpan]:
    """Project source spans onto the target sentence through the alignment.

    Each span maps to the contiguous cover [min, max] of the target words
    aligned to any of its words; spans with no aligned word are dropped.
    When covers overlap, the span with the longer source (earlier source
    start on ties) keeps its cover; the other is truncated to its longest
    remaining free run and dropped if nothing remains.
    """
    for i, j in alignment:
        if i < 0:
            raise IndexError(f"negative source index {i} in alignment")
        if not 0 <= j < target_length:
            raise IndexError(
                f"alignment target index {j} out of range for length {target_length}"
            )
    covers: list[tuple[LabeledSpan, int, int]] = []
    for span in spans:
        hits = [j for i, j in alignment if span.start <= i <= span.end]
        if hits:
            covers.append((span, min(hits), max(hits)))
    order = sorted(
        range(len(covers)),
        key=lambda k: (-covers[k][0].length, covers[k][0].start),
    )
    occupied = [False] * target_length
    projected: list[LabeledSpan] = []
    for k in order:
        span, lo, hi = covers[k]
        run = _longest_free_run(occupied, lo, hi)
        if run is None:
            continue
        for pos in range(run[0], run[1] + 1):
            occupied[pos] = True
        projected.append(LabeledSpan(span.label, run[0], run[1]))
    return sorted(projected, key=lambda s: s.start)


def project_sentence(
    source_tags: list[str],
    alignment: set[tuple[int, int]],
    target_length: int,
) -> list[str]:
    """Decode source tags, project the spans, and re-encode for the target."""
    spans = decode_spans(source_tags)
    projected = project_spans(spans, alignment, target_length)
    return encode_spans(projected, target_length)
