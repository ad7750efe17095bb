"""Bit streams: raw extraction from strike locations and Von Neumann whitening."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InsufficientBits, InsufficientRecords
from .ldar import StrikeRecord

RAW = "raw"
WHITENED = "whitened"


@dataclass(frozen=True, eq=False)
class BitStream:
    """Ordered 0/1 values held as a read-only ``uint8`` array."""

    bits: np.ndarray
    origin: str = RAW

    def __post_init__(self):
        arr = np.ascontiguousarray(self.bits, dtype=np.uint8).reshape(-1)
        if arr.size and arr.max() > 1:
            raise ValueError("bit stream may contain only 0 and 1")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)
        if self.origin not in (RAW, WHITENED):
            raise ValueError(f"origin must be {RAW!r} or {WHITENED!r}")

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitStream)
            and self.origin == other.origin
            and np.array_equal(self.bits, other.bits)
        )

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BitStream(self.bits[item], self.origin)
        return int(self.bits[item])

    @classmethod
    def from_string(cls, text: str, origin: str = RAW) -> BitStream:
        digits = "".join(ch for ch in text if not ch.isspace())
        if digits.strip("01"):
            raise ValueError("bit string may contain only '0' and '1'")
        return cls(np.frombuffer(digits.encode("ascii"), dtype=np.uint8) - ord("0"), origin)

    def to_string(self) -> str:
        return (self.bits + ord("0")).tobytes().decode("ascii")

    @classmethod
    def from_packed(cls, data: bytes, nbits: int | None = None, origin: str = RAW) -> BitStream:
        arr = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if nbits is not None:
            arr = arr[:nbits]
        return cls(arr, origin)

    def to_packed(self) -> bytes:
        """MSB-first packing; a partial final byte is zero-padded."""
        return np.packbits(self.bits).tobytes()

    def bytes_view(self) -> np.ndarray:
        """Consecutive 8-bit groups as byte values, trailing bits dropped."""
        n = len(self) // 8
        return np.packbits(self.bits[: n * 8])


def strike_diff_bits(records: Sequence[StrikeRecord]) -> BitStream:
    """Raw bits from each strike's offset against the first strike.

    For every record after the first, the absolute east, north and altitude
    differences are reduced mod 256 and emitted as 8 bits each, MSB first,
    giving 24 bits per record.
    """
    if len(records) < 2:
        raise InsufficientRecords(f"need at least 2 strike records, got {len(records)}")
    coords = np.array([(r.east_m, r.north_m, r.alt_m) for r in records], dtype=np.int64)
    diffs = np.abs(coords[1:] - coords[0]) % 256
    return BitStream(np.unpackbits(diffs.astype(np.uint8).reshape(-1)), RAW)


def von_neumann(stream: BitStream) -> BitStream:
    """Debias by pairs: 01 -> 0, 10 -> 1, 00 and 11 dropped."""
    bits = stream.bits
    n = len(bits) // 2
    first = bits[0:2 * n:2]
    second = bits[1:2 * n:2]
    keep = first != second
    return BitStream(first[keep], WHITENED)


class BitReader:
    """Cursor over a bit stream handing out MSB-first integers.

    With ``wrap=True`` reading continues from the start once the end is
    reached; ``wraps`` counts how often that happened.
    """

    def __init__(self, stream: BitStream | np.ndarray, wrap: bool = False, pos: int = 0):
        self.bits = stream.bits if isinstance(stream, BitStream) else np.asarray(stream, np.uint8)
        if wrap and len(self.bits) == 0:
            raise InsufficientBits("cannot wrap an empty bit stream")
        self.wrap = wrap
        self.pos = pos
        self.wraps = 0

    @property
    def remaining(self) -> int | None:
        return None if self.wrap else len(self.bits) - self.pos

    def peek(self, count: int) -> np.ndarray:
        """Up to ``count`` upcoming bits without advancing."""
        n = len(self.bits)
        if not self.wrap:
            return self.bits[self.pos:self.pos + count]
        idx = (self.pos + np.arange(count)) % n
        return self.bits[idx]

    def advance(self, count: int) -> None:
        n = len(self.bits)
        if not self.wrap:
            if self.pos + count > n:
                raise InsufficientBits(f"requested {count} bits, {n - self.pos} left")
            self.pos += count
            return
        self.wraps += (self.pos + count) // n
        self.pos = (self.pos + count) % n

    def take(self, count: int) -> np.ndarray:
        chunk = self.peek(count)
        if len(chunk) < count:
            raise InsufficientBits(f"requested {count} bits, {len(chunk)} left")
        self.advance(count)
        return chunk

    def take_int(self, width: int) -> int:
        value = 0
        for b in self.take(width):
            value = (value << 1) | int(b)
        return value


def write_bits(stream: BitStream, path, packed: bool = False) -> None:
    """ASCII output is one line of '0'/'1' per 64 bits."""
    if packed:
        with open(path, "wb") as fh:
            fh.write(stream.to_packed())
        return
    text = stream.to_string()
    with open(path, "w", encoding="ascii") as fh:
        for i in range(0, len(text), 64):
            fh.write(text[i:i + 64] + "\n")


def read_bits(path, packed: bool | None = None, origin: str = RAW) -> BitStream:
    """Read a bit file; ``packed=None`` sniffs ASCII '0'/'1' content."""
    with open(path, "rb") as fh:
        data = fh.read()
    if packed is None:
        packed = bool(data.strip(b"01\r\n \t"))
    if packed:
        return BitStream.from_packed(data, origin=origin)
    return BitStream.from_string(data.decode("ascii"), origin)
