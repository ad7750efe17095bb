"""LDAR lightning record parsing.

A record line carries eight numeric fields, ``dd hh mm ss ll xx yy zz``:
day, hour, minute, second, microsecond, then east/north/altitude offsets
in meters. Fields may be separated by whitespace, commas, or both.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable

from ..errors import MalformedLine

log = logging.getLogger(__name__)

_SPLIT = re.compile(r"[,\s]+")


@dataclass(frozen=True)
class StrikeRecord:
    day: int
    hour: int
    minute: int
    second: int
    microsecond: int
    east_m: int
    north_m: int
    alt_m: int

    def __post_init__(self):
        if not 1 <= self.day <= 31:
            raise ValueError(f"day {self.day} outside 1..31")
        if not 0 <= self.hour < 24:
            raise ValueError(f"hour {self.hour} outside 0..23")
        if not 0 <= self.minute < 60:
            raise ValueError(f"minute {self.minute} outside 0..59")
        if not 0 <= self.second < 60:
            raise ValueError(f"second {self.second} outside 0..59")
        if not 0 <= self.microsecond < 1_000_000:
            raise ValueError(f"microsecond {self.microsecond} outside 0..999999")


def _to_int(field: str) -> int:
    # int(float()) truncates toward zero; plain ints skip the float round-trip
    try:
        return int(field)
    except ValueError:
        return int(float(field))


def parse_line(line: str, line_no: int = 1) -> StrikeRecord:
    fields = [f for f in _SPLIT.split(line.strip()) if f]
    if len(fields) != 8:
        raise MalformedLine(line_no, f"expected 8 fields, got {len(fields)}", line)
    try:
        values = [_to_int(f) for f in fields]
    except (ValueError, OverflowError):
        raise MalformedLine(line_no, "non-numeric field", line) from None
    try:
        return StrikeRecord(*values)
    except ValueError as exc:
        raise MalformedLine(line_no, str(exc), line) from None


def parse_ldar(
    text: str | Iterable[str],
    strict: bool = False,
    errors: list[MalformedLine] | None = None,
) -> list[StrikeRecord]:
    """Parse LDAR text into records, in file order.

    Blank lines and ``#`` comments are ignored. A malformed line raises
    :class:`MalformedLine` when ``strict`` is set; otherwise it is logged,
    appended to ``errors`` if a list is given, and skipped.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    records = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            records.append(parse_line(stripped, line_no))
        except MalformedLine as exc:
            if strict:
                raise
            log.warning("skipping %s", exc)
            if errors is not None:
                errors.append(exc)
    return records


def serialize_ldar(records: Iterable[StrikeRecord]) -> str:
    out = []
    for r in records:
        out.append(
            f"{r.day:02d} {r.hour:02d} {r.minute:02d} {r.second:02d} "
            f"{r.microsecond:06d} {r.east_m} {r.north_m} {r.alt_m}\n"
        )
    return "".join(out)


def read_ldar(path, strict: bool = False, errors: list[MalformedLine] | None = None):
    with open(path, encoding="utf-8") as fh:
        return parse_ldar(fh, strict=strict, errors=errors)
