"""S-box construction by 8-direction random walks over a grid of random bytes.

The bit stream is cut into bytes and laid out row-major as the largest
k x k square. A walk starts at a cell, collects the byte there, then moves
one cell per 3-bit direction code (MSB first) on a torus, collecting each
byte value the first time it is seen. The collection order of the 256
distinct values is the S-box.
"""

from __future__ import annotations

import csv
import enum
import functools
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .entropy.bits import BitReader, BitStream
from .errors import (
    ExhaustedDirections,
    InsufficientBits,
    InvalidTotal,
    StepBudgetExceeded,
    WalkError,
)
from .sbox import SBox

log = logging.getLogger(__name__)

MIN_SIDE = 16
STEP_BUDGET = 65_536
_CHUNK = 4096


class Direction(enum.IntEnum):
    LEFT = 0
    LEFT_UP = 1
    UP = 2
    RIGHT_UP = 3
    RIGHT = 4
    RIGHT_DOWN = 5
    DOWN = 6
    LEFT_DOWN = 7

    @property
    def delta(self) -> tuple[int, int]:
        return (int(DROW[self]), int(DCOL[self]))


# (row, col) offsets indexed by direction code; rows grow downward
DROW = np.array([0, -1, -1, -1, 0, 1, 1, 1], dtype=np.int64)
DCOL = np.array([-1, -1, 0, 1, 1, 1, 0, -1], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class EntropyGrid:
    cells: np.ndarray

    def __post_init__(self):
        cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise ValueError(f"grid must be square, got shape {cells.shape}")
        if cells.shape[0] < MIN_SIDE:
            raise ValueError(f"grid side must be at least {MIN_SIDE}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def k(self) -> int:
        return self.cells.shape[0]

    @functools.cached_property
    def _distinct(self) -> int:
        return int(np.unique(self.cells).size)

    def distinct_values(self) -> int:
        return self._distinct


def build_grid(bits: BitStream) -> EntropyGrid:
    """Bytes from consecutive 8-bit groups, truncated to the largest square."""
    if len(bits) < MIN_SIDE * MIN_SIDE * 8:
        raise InsufficientBits(
            f"grid needs at least {MIN_SIDE * MIN_SIDE * 8} bits, got {len(bits)}"
        )
    distance = bits.bytes_view()
    k = math.isqrt(len(distance))
    return EntropyGrid(distance[: k * k].reshape(k, k))


@dataclass(frozen=True, eq=False)
class WalkTrace:
    start: tuple[int, int]
    steps: np.ndarray  # direction codes, one per move
    visited_values: np.ndarray  # value at every visited cell, start included

    def positions(self, k: int) -> np.ndarray:
        rows = (self.start[0] + np.concatenate(([0], np.cumsum(DROW[self.steps])))) % k
        cols = (self.start[1] + np.concatenate(([0], np.cumsum(DCOL[self.steps])))) % k
        return np.stack([rows, cols], axis=1)

    def collected(self) -> np.ndarray:
        """Boolean mask: True where the visit added a new value."""
        _, first = np.unique(self.visited_values, return_index=True)
        mask = np.zeros(len(self.visited_values), dtype=bool)
        mask[first] = True
        return mask

    def to_csv(self, k: int) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("step", "row", "col", "value", "collected"))
        pos = self.positions(k)
        for i, ((r, c), v, new) in enumerate(zip(pos, self.visited_values, self.collected())):
            writer.writerow((i, int(r), int(c), int(v), int(new)))
        return buf.getvalue()


def random_walk(
    grid: EntropyGrid,
    directions: BitStream | BitReader,
    start: tuple[int, int],
    step_budget: int = STEP_BUDGET,
) -> tuple[SBox, WalkTrace]:
    """Walk until all 256 byte values are collected.

    ``directions`` may be a stream (read from its first bit) or a shared
    :class:`BitReader`, which is advanced by 3 bits per move actually taken.
    """
    reader = directions if isinstance(directions, BitReader) else BitReader(directions)
    k = grid.k
    r, c = start
    if not (0 <= r < k and 0 <= c < k):
        raise ValueError(f"start {start} outside a {k}x{k} grid")
    if grid.distinct_values() < 256:
        raise StepBudgetExceeded(
            f"grid holds only {grid.distinct_values()} distinct byte values"
        )
    cells = grid.cells
    seen = np.zeros(256, dtype=bool)
    order = [int(cells[r, c])]
    seen[order[0]] = True
    step_chunks: list[np.ndarray] = []
    value_chunks: list[np.ndarray] = [np.array(order, dtype=np.uint8)]
    taken = 0

    while len(order) < 256:
        if taken >= step_budget:
            raise StepBudgetExceeded(
                f"collected {len(order)} of 256 values within {step_budget} steps"
            )
        want = min(_CHUNK, step_budget - taken)
        raw = reader.peek(3 * want)
        m = len(raw) // 3
        if m == 0:
            raise ExhaustedDirections(
                f"direction stream ended after {taken} steps with {len(order)} values"
            )
        triples = raw[: 3 * m].reshape(m, 3).astype(np.int64)
        codes = (triples[:, 0] << 2) | (triples[:, 1] << 1) | triples[:, 2]
        rows = (r + np.cumsum(DROW[codes])) % k
        cols = (c + np.cumsum(DCOL[codes])) % k
        vals = cells[rows, cols]

        uniq, first = np.unique(vals, return_index=True)
        fresh = ~seen[uniq]
        uniq, first = uniq[fresh], first[fresh]
        by_time = np.argsort(first, kind="stable")
        uniq, first = uniq[by_time], first[by_time]
        need = 256 - len(order)
        used = m
        if len(uniq) >= need:
            uniq = uniq[:need]
            used = int(first[need - 1]) + 1
        order.extend(int(v) for v in uniq)
        seen[uniq] = True
        reader.advance(3 * used)
        step_chunks.append(codes[:used])
        value_chunks.append(vals[:used])
        r, c = int(rows[used - 1]), int(cols[used - 1])
        taken += used

    steps = np.concatenate(step_chunks) if step_chunks else np.zeros(0, dtype=np.int64)
    trace = WalkTrace(start, steps.astype(np.uint8), np.concatenate(value_chunks))
    return SBox(bytes(order)), trace


def start_position(reader: BitReader, k: int) -> tuple[int, int]:
    """Row and column from the next 2*ceil(log2 k) bits, reduced mod k.

    Once a wrapping reader has cycled, the row is shifted by the pass
    count: re-reading the same stream would otherwise fall back into step
    with the earlier walks and reproduce their S-boxes.
    """
    width = max(1, math.ceil(math.log2(k)))
    passes = reader.wraps
    row = (reader.take_int(width) + passes) % k
    col = reader.take_int(width) % k
    return row, col


@dataclass(frozen=True)
class WalkConfig:
    """Construction settings.

    ``grid_side=None`` lays the whole stream out as the grid and reads
    directions from the same stream starting at bit 0. An explicit side
    takes the grid from the leading ``side*side*8`` bits and directions
    from the rest. With ``wrap`` the direction reader cycles instead of
    running dry.
    """

    grid_side: int | None = None
    step_budget: int = STEP_BUDGET
    max_failures: int = 1000
    wrap: bool = True


def prepare(bits: BitStream, config: WalkConfig) -> tuple[EntropyGrid, BitReader]:
    if config.grid_side is None:
        grid = build_grid(bits)
        reader = BitReader(bits, wrap=config.wrap)
    else:
        side = config.grid_side
        need = side * side * 8
        if side < MIN_SIDE:
            raise ValueError(f"grid side must be at least {MIN_SIDE}")
        if len(bits) <= need:
            raise InsufficientBits(
                f"grid of side {side} needs more than {need} bits, got {len(bits)}"
            )
        grid = build_grid(bits[:need])
        reader = BitReader(bits[need:], wrap=config.wrap)
    if grid.distinct_values() < 256:
        raise InsufficientBits(
            f"grid holds only {grid.distinct_values()} distinct byte values; "
            "supply more random bits"
        )
    return grid, reader


def iter_walks(
    grid: EntropyGrid, reader: BitReader, config: WalkConfig
) -> Iterator[tuple[SBox, WalkTrace]]:
    """Successful walks, each from a fresh start read off ``reader``."""
    failures = 0
    while True:
        try:
            start = start_position(reader, grid.k)
            yield random_walk(grid, reader, start, config.step_budget)
        except (WalkError, InsufficientBits) as exc:
            failures += 1
            log.debug("walk failed: %s", exc)
            if isinstance(exc, (ExhaustedDirections, InsufficientBits)) or (
                failures > config.max_failures
            ):
                raise InsufficientBits(f"random walks stopped: {exc}") from exc


@dataclass
class Construction:
    grid: EntropyGrid
    sboxes: list[SBox] = field(default_factory=list)
    traces: list[WalkTrace] = field(default_factory=list)
    wraps: int = 0


def construct(bits: BitStream, total: int, config: WalkConfig | None = None) -> Construction:
    """Build one grid and walk it until ``total`` S-boxes exist."""
    if total < 1:
        raise InvalidTotal(f"total must be at least 1, got {total}")
    config = config or WalkConfig()
    grid, reader = prepare(bits, config)
    result = Construction(grid)
    walks = iter_walks(grid, reader, config)
    for sbox, trace in walks:
        result.sboxes.append(sbox)
        result.traces.append(trace)
        if len(result.sboxes) == total:
            break
    result.wraps = reader.wraps
    if reader.wraps:
        log.info("direction stream reused %d time(s)", reader.wraps)
    return result


def construct_sboxes(bits: BitStream, total: int, config: WalkConfig | None = None) -> list[SBox]:
    return construct(bits, total, config).sboxes
