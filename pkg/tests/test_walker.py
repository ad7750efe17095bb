import numpy as np
import pytest

import oracles
from trngsbox.entropy import BitReader, BitStream
from trngsbox.errors import (
    ExhaustedDirections,
    InsufficientBits,
    InvalidTotal,
    StepBudgetExceeded,
)
from trngsbox.walker import (
    DCOL,
    DROW,
    Direction,
    EntropyGrid,
    WalkConfig,
    build_grid,
    construct,
    construct_sboxes,
    random_walk,
    start_position,
)


def codes_to_bits(codes):
    return np.array([(c >> s) & 1 for c in codes for s in (2, 1, 0)], dtype=np.uint8)


def grid_of_all_values(k=16, seed=0):
    """k x k grid whose first 256 cells (row-major) are a shuffle of 0..255."""
    rng = np.random.default_rng(seed)
    flat = np.concatenate([rng.permutation(256), rng.integers(0, 256, k * k - 256)])
    return EntropyGrid(flat.reshape(k, k).astype(np.uint8))


def test_direction_table():
    assert Direction.LEFT.delta == (0, -1)
    assert Direction.RIGHT_DOWN.delta == (1, 1)
    assert Direction.UP.delta == (-1, 0)
    assert DROW.sum() == 0 and DCOL.sum() == 0
    assert len({(int(r), int(c)) for r, c in zip(DROW, DCOL)}) == 8


def test_build_grid_square_and_row_major():
    bits = BitStream(np.unpackbits(np.arange(300, dtype=np.uint16).astype(np.uint8)))
    grid = build_grid(bits)
    assert grid.k == 17
    assert grid.cells[0, :3].tolist() == [0, 1, 2]
    assert grid.cells[1, 0] == 17


def test_build_grid_needs_16x16():
    with pytest.raises(InsufficientBits):
        build_grid(BitStream(np.zeros(2047, dtype=np.uint8)))


def test_right_only_walk_over_identity_rows():
    # 16x16 grid of 0..255 row-major; moving right wraps within row 0 and never leaves it
    grid = EntropyGrid(np.arange(256, dtype=np.uint8).reshape(16, 16))
    right = BitStream(codes_to_bits([Direction.RIGHT] * 600))
    with pytest.raises(StepBudgetExceeded):
        random_walk(grid, BitReader(right, wrap=True), (0, 0), step_budget=5000)


def test_right_down_alternating_collects_everything():
    grid = EntropyGrid(np.arange(256, dtype=np.uint8).reshape(16, 16))
    codes = [Direction.RIGHT] * 15 + [Direction.DOWN]
    bits = BitStream(codes_to_bits(codes * 16))
    s, trace = random_walk(grid, bits, (0, 0))
    # row 0 left to right, then down to (1, 15) and right around the torus to (1, 14)
    assert list(s)[:18] == list(range(16)) + [31, 16]
    assert list(s) == oracles.walk(grid.cells.tolist(), bits.bits.tolist(), (0, 0))[0]
    assert len(trace.steps) == 255


def test_wraparound_on_torus():
    grid = grid_of_all_values()
    # start at the top-left corner and go up-left: lands on the bottom-right cell
    bits = BitStream(codes_to_bits([Direction.LEFT_UP] + [Direction.RIGHT] * 2000))
    _, trace = random_walk(grid, BitReader(bits, wrap=True), (0, 0))
    assert trace.positions(16)[1].tolist() == [15, 15]


def test_walk_matches_step_by_step_simulator():
    rng = np.random.default_rng(11)
    grid = EntropyGrid(rng.integers(0, 256, (60, 60), dtype=np.uint8))
    assert grid.distinct_values() == 256
    bits = BitStream(rng.integers(0, 2, 300_000, dtype=np.uint8))
    s, trace = random_walk(grid, bits, (7, 31))
    order, steps = oracles.walk(grid.cells.tolist(), bits.bits.tolist(), (7, 31))
    assert list(s) == order
    assert len(trace.steps) == steps
    assert trace.collected().sum() == 256


def test_reader_advanced_by_moves_taken():
    rng = np.random.default_rng(12)
    grid = EntropyGrid(rng.integers(0, 256, (40, 40), dtype=np.uint8))
    reader = BitReader(BitStream(rng.integers(0, 2, 300_000, dtype=np.uint8)))
    _, trace = random_walk(grid, reader, (0, 0))
    assert reader.pos == 3 * len(trace.steps)


def test_too_few_distinct_values_fails_fast():
    grid = EntropyGrid(np.zeros((16, 16), dtype=np.uint8))
    with pytest.raises(StepBudgetExceeded):
        random_walk(grid, BitStream(np.zeros(30, dtype=np.uint8)), (0, 0))


def test_direction_stream_runs_dry():
    grid = grid_of_all_values()
    with pytest.raises(ExhaustedDirections):
        random_walk(grid, BitStream(codes_to_bits([Direction.RIGHT] * 10)), (0, 0))


def test_start_position_reads_two_fields():
    reader = BitReader(BitStream.from_string("00011" "11111"), wrap=False)
    # k=20 -> 5 bits each: row 3, col 31 % 20
    assert start_position(reader, 20) == (3, 11)


def test_trace_csv():
    grid = EntropyGrid(np.arange(256, dtype=np.uint8).reshape(16, 16))
    bits = BitStream(codes_to_bits(([Direction.RIGHT] * 15 + [Direction.DOWN]) * 16))
    _, trace = random_walk(grid, bits, (0, 0))
    lines = trace.to_csv(16).splitlines()
    assert lines[0] == "step,row,col,value,collected"
    assert lines[1] == "0,0,0,0,1"
    assert lines[16] == "15,0,15,15,1"
    assert lines[17] == "16,1,15,31,1"


def test_construct_replays(whitened_bits):
    built = construct(whitened_bits, 25)
    assert len(built.sboxes) == 25
    cells = built.grid.cells.tolist()
    for s, trace in zip(built.sboxes, built.traces):
        order, steps = oracles.walk(cells, codes_to_bits(trace.steps).tolist(), trace.start)
        assert list(s) == order and steps == len(trace.steps)


def test_construct_is_deterministic(whitened_bits):
    a = construct_sboxes(whitened_bits[:200_000], 3)
    b = construct_sboxes(whitened_bits[:200_000], 3)
    assert a == b


def test_construct_explicit_side(whitened_bits):
    built = construct(whitened_bits, 2, WalkConfig(grid_side=100))
    assert built.grid.k == 100
    assert len(set(built.sboxes)) == 2


def test_invalid_total(whitened_bits):
    with pytest.raises(InvalidTotal):
        construct(whitened_bits, 0)


def test_no_wrap_runs_out(whitened_bits):
    with pytest.raises(InsufficientBits):
        construct(whitened_bits[:20_000], 50, WalkConfig(wrap=False))


def test_wrapped_walks_stay_distinct(whitened_bits):
    built = construct(whitened_bits[:300_000], 300)
    assert built.wraps > 0
    assert len(set(built.sboxes)) >= 295
