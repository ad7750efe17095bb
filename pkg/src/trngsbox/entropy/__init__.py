"""Entropy extraction from LDAR lightning records."""

from .bits import (
    RAW,
    WHITENED,
    BitReader,
    BitStream,
    read_bits,
    strike_diff_bits,
    von_neumann,
    write_bits,
)
from .ldar import StrikeRecord, parse_ldar, read_ldar, serialize_ldar
from .stattests import SIGNIFICANCE, TESTS, StatTestResult, run_battery, stat_test

__all__ = [
    "RAW",
    "WHITENED",
    "SIGNIFICANCE",
    "TESTS",
    "BitReader",
    "BitStream",
    "StatTestResult",
    "StrikeRecord",
    "parse_ldar",
    "read_bits",
    "read_ldar",
    "run_battery",
    "serialize_ldar",
    "stat_test",
    "strike_diff_bits",
    "von_neumann",
    "write_bits",
]
