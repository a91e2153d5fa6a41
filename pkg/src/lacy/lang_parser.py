"""Parse instructions back into intents, and decide intent equivalence.

The grammar is the closed loop of the template bank: every sentence the
renderer can produce parses back to the identical intent. Parsing is
case-insensitive, articles are optional, object names match longest-first,
and the trailing sentence punctuation is ignored.

Two intents are equivalent when they pick the same object and their
placements agree: equal cells, equal (direction, reference) pairs, or, for
an absolute/relative pair, overlapping placement regions in the scene at
hand (checked with the raster oracle).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence

from .scene import CELL_LABELS, Direction8, GridCell, Scene
from .spatial_lang import (
    AbsolutePlacement,
    DescriptionType,
    Intent,
    RelativePlacement,
    TemplateBank,
    ThresholdConfig,
    DEFAULT_THRESHOLDS,
    get_default_bank,
)
from .regions import regions_intersect

_ARTICLES = ("the", "a", "an")
_BOUNDARY = r"(?![a-zA-Z0-9])"

_DIRECTIONS_BY_LABEL = {d.value: d for d in Direction8}
_CELL_VOCAB = CELL_LABELS + ("middle center",)


class ParseErrorKind(Enum):
    UNKNOWN_VERB = "unknown_verb"
    UNKNOWN_OBJECT = "unknown_object"
    UNKNOWN_CELL = "unknown_cell"
    UNKNOWN_DIRECTION = "unknown_direction"
    MALFORMED_STRUCTURE = "malformed_structure"


class ParseError(ValueError):
    """A typed parse failure carrying the character span that caused it."""

    def __init__(self, kind: ParseErrorKind, span: tuple[int, int], message: str):
        super().__init__(f"{kind.value} at {span[0]}:{span[1]}: {message}")
        self.kind = kind
        self.span = span
        self.message = message


def _alternation(phrases: Sequence[str]) -> str:
    ordered = sorted(set(phrases), key=lambda p: (-len(p), p))
    return "|".join(re.escape(p) for p in ordered)


def _frame_pattern(frame: str) -> str:
    """Compile a frame template into a regex, articles optional.

    Slots capture arbitrary text so the offending words can be reported;
    slot values are validated after matching.
    """
    pieces: list[tuple[str, str]] = []
    for token in re.split(r"(\{(?:cell|direction|reference)\})", frame):
        if token in ("{cell}", "{direction}", "{reference}"):
            pieces.append(("slot", token[1:-1]))
        else:
            for word in token.split():
                pieces.append(("word", word))
    parts: list[str] = []
    for i, (kind, value) in enumerate(pieces):
        last = i == len(pieces) - 1
        if kind == "word" and value in _ARTICLES:
            parts.append(r"(?:(?:the|a|an)\s+)?")
            continue
        if kind == "slot":
            pat = f"(?P<{value}>.+)" if last else f"(?P<{value}>.+?)"
        else:
            pat = re.escape(value)
        parts.append(pat if last else pat + r"\s+")
    return "".join(parts)


@dataclass(frozen=True)
class _Matcher:
    pick_verb_re: re.Pattern
    place_verb_re: re.Pattern
    article_re: re.Pattern
    and_re: re.Pattern
    it_re: re.Pattern
    object_re: re.Pattern
    frames: tuple[tuple[DescriptionType, re.Pattern], ...]
    catalog: frozenset[str]


@lru_cache(maxsize=256)
def _build_matcher(catalog: tuple[str, ...], bank: TemplateBank) -> _Matcher:
    flags = re.IGNORECASE
    frames = []
    for frame in bank.relative_frames:
        frames.append((DescriptionType.RELATIVE, re.compile(_frame_pattern(frame), flags)))
    for frame in bank.absolute_frames:
        frames.append((DescriptionType.ABSOLUTE, re.compile(_frame_pattern(frame), flags)))
    return _Matcher(
        pick_verb_re=re.compile(f"(?:{_alternation(bank.pick_verbs)})(?=\\s|$)", flags),
        place_verb_re=re.compile(f"(?:{_alternation(bank.place_verbs)})(?=\\s|$)", flags),
        article_re=re.compile(r"(?:the|a|an)(?=\s)", flags),
        and_re=re.compile(r"and(?=\s|$)", flags),
        it_re=re.compile(r"it(?=\s|$)", flags),
        object_re=re.compile(f"(?:{_alternation(catalog)}){_BOUNDARY}", flags),
        frames=tuple(frames),
        catalog=frozenset(catalog),
    )


def _skip_ws(s: str, pos: int) -> int:
    while pos < len(s) and s[pos].isspace():
        pos += 1
    return pos


def _word_end(s: str, pos: int) -> int:
    end = pos
    while end < len(s) and not s[end].isspace():
        end += 1
    return end


def _normalize_phrase(raw: str) -> str:
    return " ".join(raw.lower().split())


def parse(
    text: str,
    catalog: Sequence[str],
    bank: TemplateBank | None = None,
) -> Intent:
    """Parse one instruction against a catalog of known object names.

    Raises ParseError (and nothing else) on any input it cannot accept.
    """
    bank = bank if bank is not None else get_default_bank()
    matcher = _build_matcher(tuple(n.lower() for n in catalog), bank)
    s = text

    pos = _skip_ws(s, 0)
    if pos >= len(s):
        raise ParseError(ParseErrorKind.MALFORMED_STRUCTURE, (0, len(s)), "empty instruction")

    m = matcher.pick_verb_re.match(s, pos)
    if not m:
        raise ParseError(
            ParseErrorKind.UNKNOWN_VERB, (pos, _word_end(s, pos)), "expected a pick verb"
        )
    pos = _skip_ws(s, m.end())

    m = matcher.article_re.match(s, pos)
    if m:
        pos = _skip_ws(s, m.end())

    m = matcher.object_re.match(s, pos)
    if not m:
        sep = re.compile(r"\s+and(?=\s|$)", re.IGNORECASE).search(s, pos)
        end = sep.start() if sep else len(s)
        raise ParseError(
            ParseErrorKind.UNKNOWN_OBJECT, (pos, end), "not a known object name"
        )
    pick_target = _normalize_phrase(m.group(0))
    pos = _skip_ws(s, m.end())

    m = matcher.and_re.match(s, pos)
    if not m:
        raise ParseError(
            ParseErrorKind.MALFORMED_STRUCTURE,
            (pos, _word_end(s, pos)),
            "expected 'and' between the pick and place clauses",
        )
    pos = _skip_ws(s, m.end())

    m = matcher.place_verb_re.match(s, pos)
    if not m:
        raise ParseError(
            ParseErrorKind.UNKNOWN_VERB, (pos, _word_end(s, pos)), "expected a place verb"
        )
    pos = _skip_ws(s, m.end())

    m = matcher.it_re.match(s, pos)
    if m:
        pos = _skip_ws(s, m.end())

    tail_end = len(s)
    while tail_end > pos and (s[tail_end - 1].isspace() or s[tail_end - 1] in ".!?"):
        tail_end -= 1
    if pos >= tail_end:
        raise ParseError(
            ParseErrorKind.MALFORMED_STRUCTURE, (pos, len(s)), "missing placement phrase"
        )

    for desc_type, frame_re in matcher.frames:
        fm = frame_re.fullmatch(s, pos, tail_end)
        if not fm:
            continue
        if desc_type is DescriptionType.ABSOLUTE:
            cell_raw = _normalize_phrase(fm.group("cell"))
            if cell_raw not in _CELL_VOCAB:
                raise ParseError(
                    ParseErrorKind.UNKNOWN_CELL, fm.span("cell"), f"{cell_raw!r} is not a grid cell"
                )
            return Intent(pick_target, AbsolutePlacement(GridCell.from_label(cell_raw)))
        direction_raw = _normalize_phrase(fm.group("direction"))
        if direction_raw not in _DIRECTIONS_BY_LABEL:
            raise ParseError(
                ParseErrorKind.UNKNOWN_DIRECTION,
                fm.span("direction"),
                f"{direction_raw!r} is not a direction",
            )
        reference_raw = _normalize_phrase(fm.group("reference"))
        if reference_raw not in matcher.catalog:
            raise ParseError(
                ParseErrorKind.UNKNOWN_OBJECT,
                fm.span("reference"),
                f"{reference_raw!r} is not a known object name",
            )
        return Intent(
            pick_target,
            RelativePlacement(_DIRECTIONS_BY_LABEL[direction_raw], reference_raw),
        )

    raise ParseError(
        ParseErrorKind.MALFORMED_STRUCTURE, (pos, tail_end), "unrecognized placement phrase"
    )


def intents_equivalent(
    a: Intent,
    b: Intent,
    scene: Scene,
    thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
) -> bool:
    """Scene-conditioned equivalence; reflexive and symmetric, not transitive.

    (A relative region can straddle two cells, making it equivalent to both
    while the cells stay distinct from each other.)
    """
    if a.pick_target != b.pick_target:
        return False
    pa, pb = a.placement, b.placement
    if isinstance(pa, AbsolutePlacement) and isinstance(pb, AbsolutePlacement):
        return pa.cell == pb.cell
    if isinstance(pa, RelativePlacement) and isinstance(pb, RelativePlacement):
        return pa.direction is pb.direction and pa.reference == pb.reference
    return regions_intersect(pa, pb, scene, thresholds)
