"""The 8x8 S-box value object, its inverse, digests and text formats."""

from __future__ import annotations

import hashlib
from typing import Iterable

import numpy as np

from .errors import NotBijective, ParseError, SBoxError, WrongLength

SIZE = 256
GRID16 = "grid16"
HEX_LINE = "hex_line"
FORMATS = (GRID16, HEX_LINE)


def _check_bijective(values: bytes) -> None:
    seen = {}
    for i, v in enumerate(values):
        if v in seen:
            raise NotBijective(v, seen[v], i)
        seen[v] = i


class SBox:
    """Immutable bijection on bytes; ``table[x]`` is the image of ``x``."""

    __slots__ = ("_table",)

    def __init__(self, table: Iterable[int]):
        if isinstance(table, (bytes, bytearray)):
            raw = bytes(table)
        else:
            values = [int(v) for v in table]
            if any(v < 0 or v > 255 for v in values):
                bad = next(v for v in values if v < 0 or v > 255)
                raise SBoxError(f"value {bad} is not a byte")
            raw = bytes(values)
        if len(raw) != SIZE:
            raise WrongLength(f"expected {SIZE} entries, got {len(raw)}")
        _check_bijective(raw)
        object.__setattr__(self, "_table", raw)

    def __setattr__(self, name, value):
        raise AttributeError("SBox is immutable")

    @property
    def table(self) -> bytes:
        return self._table

    @property
    def array(self) -> np.ndarray:
        return np.frombuffer(self._table, dtype=np.uint8)

    def __array__(self, dtype=None, copy=None):
        arr = np.frombuffer(self._table, dtype=np.uint8).copy()
        return arr if dtype is None else arr.astype(dtype)

    def __len__(self) -> int:
        return SIZE

    def __getitem__(self, x):
        return self._table[x]

    def __iter__(self):
        return iter(self._table)

    def __call__(self, x: int) -> int:
        return self._table[x]

    def __eq__(self, other) -> bool:
        return isinstance(other, SBox) and self._table == other._table

    def __hash__(self) -> int:
        return hash(self._table)

    def __repr__(self) -> str:
        return f"SBox({self._table[:4].hex()}...{self._table[-2:].hex()})"

    @classmethod
    def identity(cls) -> SBox:
        return cls(bytes(range(SIZE)))

    def inverse(self) -> SBox:
        return reverse_sbox(self)

    def digest(self) -> bytes:
        return canonical_digest(self)


def from_bytes(raw: Iterable[int]) -> SBox:
    """Validate 256 byte values and wrap them as an :class:`SBox`.

    Raises :class:`WrongLength` or :class:`NotBijective`; the latter names
    the first repeated value and both indices where it occurs.
    """
    return SBox(raw)


def reverse_sbox(s: SBox) -> SBox:
    """Inverse table, filled through the 16x16 row/column addressing."""
    out = [0] * SIZE
    for row in range(16):
        for col in range(16):
            v = s[row * 16 + col]
            out[(v // 16) * 16 + v % 16] = row * 16 + col
    return SBox(bytes(out))


def canonical_digest(s: SBox) -> bytes:
    """SHA3-256 over the table bytes in index order."""
    return hashlib.sha3_256(s.table).digest()


def serialize(s: SBox, fmt: str = GRID16) -> str:
    if fmt == GRID16:
        t = s.table
        return "".join(
            " ".join(str(v) for v in t[r * 16:(r + 1) * 16]) + "\n" for r in range(16)
        )
    if fmt == HEX_LINE:
        return s.table.hex() + "\n"
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def _parse_hex(text: str) -> SBox:
    line = text.strip()
    if len(line) != 2 * SIZE:
        raise ParseError(f"hex line must be {2 * SIZE} characters, got {len(line)}", row=1)
    try:
        raw = bytes.fromhex(line)
    except ValueError as exc:
        raise ParseError(f"invalid hex: {exc}", row=1) from None
    return SBox(raw)


def _parse_grid(text: str) -> SBox:
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(rows) != 16:
        raise ParseError(f"grid must have 16 rows, got {len(rows)}")
    values = []
    for r, line in enumerate(rows, start=1):
        fields = line.replace(",", " ").split()
        if len(fields) != 16:
            raise ParseError(f"expected 16 values, got {len(fields)}", row=r)
        for c, field in enumerate(fields, start=1):
            try:
                v = int(field)
            except ValueError:
                raise ParseError(f"not an integer: {field!r}", row=r, col=c) from None
            if not 0 <= v <= 255:
                raise ParseError(f"value {v} outside 0..255", row=r, col=c)
            values.append(v)
    return SBox(bytes(values))


def parse(text: str, fmt: str | None = None) -> SBox:
    """Read an S-box from grid16 or hex_line text.

    With ``fmt=None`` the format is detected: a single 512-character token
    is hex, anything else is treated as a grid.
    """
    if fmt is None:
        stripped = text.strip()
        fmt = HEX_LINE if len(stripped.split()) == 1 and len(stripped) == 2 * SIZE else GRID16
    if fmt == HEX_LINE:
        return _parse_hex(text)
    if fmt == GRID16:
        return _parse_grid(text)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def load(path) -> SBox:
    with open(path, encoding="ascii") as fh:
        return parse(fh.read())


def save(s: SBox, path, fmt: str = GRID16) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize(s, fmt))
