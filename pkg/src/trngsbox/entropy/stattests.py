"""Statistical randomness tests following NIST SP 800-22 rev. 1a.

Nine of the suite's tests are provided: frequency (monobit), frequency
within a block, runs, longest run of ones, discrete Fourier transform,
serial, approximate entropy, and cumulative sums in both directions.
Every test function takes a 0/1 array and returns a :class:`StatTestResult`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc, gammaincc
from scipy.stats import norm

from ..errors import InsufficientBits, UnknownTest
from .bits import BitStream

SIGNIFICANCE = 0.01


@dataclass(frozen=True)
class StatTestResult:
    test_name: str
    p_value: float
    significance: float = SIGNIFICANCE
    statistic: float | None = None
    # all p-values for tests that report more than one (serial)
    p_values: tuple[float, ...] = field(default=())

    def __post_init__(self):
        p = min(1.0, max(0.0, float(self.p_value)))
        object.__setattr__(self, "p_value", p)
        if not self.p_values:
            object.__setattr__(self, "p_values", (p,))

    @property
    def passed(self) -> bool:
        return self.p_value >= self.significance

    def as_dict(self) -> dict:
        return {
            "test": self.test_name,
            "p_value": self.p_value,
            "p_values": list(self.p_values),
            "statistic": self.statistic,
            "significance": self.significance,
            "passed": self.passed,
        }


def _as_array(bits) -> np.ndarray:
    if isinstance(bits, BitStream):
        return bits.bits
    if isinstance(bits, str):
        return BitStream.from_string(bits).bits
    return np.asarray(bits, dtype=np.uint8)


def monobit(bits, significance: float = SIGNIFICANCE) -> StatTestResult:
    e = _as_array(bits)
    n = len(e)
    s = abs(2 * int(e.sum()) - n)
    s_obs = s / math.sqrt(n)
    return StatTestResult("monobit", erfc(s_obs / math.sqrt(2)), significance, s_obs)


def block_frequency(bits, block_size: int = 128, significance: float = SIGNIFICANCE) -> StatTestResult:
    e = _as_array(bits)
    blocks = len(e) // block_size
    if blocks == 0:
        raise InsufficientBits(f"block frequency needs at least {block_size} bits")
    pi = e[: blocks * block_size].reshape(blocks, block_size).mean(axis=1)
    chi2 = 4.0 * block_size * float(np.sum((pi - 0.5) ** 2))
    return StatTestResult("block_frequency", gammaincc(blocks / 2, chi2 / 2), significance, chi2)


def runs(bits, significance: float = SIGNIFICANCE) -> StatTestResult:
    e = _as_array(bits)
    n = len(e)
    pi = float(e.mean())
    # frequency prerequisite: the runs statistic is meaningless on a biased sequence
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        return StatTestResult("runs", 0.0, significance, None)
    v_obs = 1 + int(np.count_nonzero(e[1:] != e[:-1]))
    num = abs(v_obs - 2 * n * pi * (1 - pi))
    den = 2 * math.sqrt(2 * n) * pi * (1 - pi)
    return StatTestResult("runs", erfc(num / den), significance, float(v_obs))


# (block length, class boundaries low..high, class probabilities)
_LONGEST_RUN = (
    (750_000, 10_000, 10, 16, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6_272, 128, 4, 9, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (128, 8, 1, 4, (0.2148, 0.3672, 0.2305, 0.1875)),
)


def _longest_ones(block: np.ndarray) -> int:
    padded = np.concatenate(([0], block, [0])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    if edges.size == 0:
        return 0
    return int((edges[1::2] - edges[0::2]).max())


def longest_run(bits, significance: float = SIGNIFICANCE) -> StatTestResult:
    e = _as_array(bits)
    n = len(e)
    for min_n, m, lo, hi, probs in _LONGEST_RUN:
        if n >= min_n:
            break
    else:
        raise InsufficientBits("longest run test needs at least 128 bits")
    blocks = n // m
    counts = np.zeros(len(probs))
    for block in e[: blocks * m].reshape(blocks, m):
        run = min(max(_longest_ones(block), lo), hi)
        counts[run - lo] += 1
    expected = blocks * np.array(probs)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    k = len(probs) - 1
    return StatTestResult("longest_run", gammaincc(k / 2, chi2 / 2), significance, chi2)


def dft(bits, significance: float = SIGNIFICANCE) -> StatTestResult:
    e = _as_array(bits)
    n = len(e)
    x = 2.0 * e - 1.0
    modulus = np.abs(np.fft.fft(x))[: n // 2]
    threshold = math.sqrt(math.log(1 / 0.05) * n)
    n0 = 0.95 * n / 2
    n1 = int(np.count_nonzero(modulus < threshold))
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4)
    return StatTestResult("dft", erfc(abs(d) / math.sqrt(2)), significance, d)


def _pattern_counts(e: np.ndarray, m: int) -> np.ndarray:
    """Frequencies of all overlapping m-bit patterns, sequence read cyclically."""
    n = len(e)
    if m == 0:
        return np.array([n])
    ext = np.concatenate((e, e[: m - 1])).astype(np.int64)
    codes = np.zeros(n, dtype=np.int64)
    for i in range(m):
        codes = (codes << 1) | ext[i:i + n]
    return np.bincount(codes, minlength=1 << m)


def _psi_sq(e: np.ndarray, m: int) -> float:
    if m <= 0:
        return 0.0
    counts = _pattern_counts(e, m).astype(float)
    n = len(e)
    return (2.0 ** m / n) * float(np.sum(counts ** 2)) - n


def _default_serial_m(n: int) -> int:
    return max(2, min(16, int(math.floor(math.log2(n))) - 3))


def serial(bits, m: int | None = None, significance: float = SIGNIFICANCE) -> StatTestResult:
    """Serial test; reports both p-values, ``p_value`` is the smaller one."""
    e = _as_array(bits)
    if m is None:
        m = _default_serial_m(len(e))
    if m < 2:
        raise ValueError("serial test needs block length m >= 2")
    psi = [_psi_sq(e, m - i) for i in range(3)]
    del1 = psi[0] - psi[1]
    del2 = psi[0] - 2 * psi[1] + psi[2]
    p1 = float(gammaincc(2 ** (m - 2), del1 / 2))
    p2 = float(gammaincc(2 ** (m - 3), del2 / 2))
    return StatTestResult("serial", min(p1, p2), significance, del1, (p1, p2))


def _phi(e: np.ndarray, m: int) -> float:
    counts = _pattern_counts(e, m)
    pi = counts[counts > 0] / len(e)
    return float(np.sum(pi * np.log(pi)))


def approximate_entropy(bits, m: int | None = None, significance: float = SIGNIFICANCE) -> StatTestResult:
    e = _as_array(bits)
    n = len(e)
    if m is None:
        m = max(1, min(10, int(math.floor(math.log2(n))) - 6))
    apen = _phi(e, m) - _phi(e, m + 1)
    chi2 = 2.0 * n * (math.log(2) - apen)
    return StatTestResult("approximate_entropy", gammaincc(2 ** (m - 1), chi2 / 2), significance, chi2)


def cumulative_sums(bits, reverse: bool = False, significance: float = SIGNIFICANCE) -> StatTestResult:
    e = _as_array(bits)
    n = len(e)
    x = 2 * e.astype(np.int64) - 1
    if reverse:
        x = x[::-1]
    z = int(np.abs(np.cumsum(x)).max())
    name = "cusum_reverse" if reverse else "cusum_forward"
    if z == 0:
        return StatTestResult(name, 1.0, significance, 0.0)
    sq = math.sqrt(n)
    # bounds truncate toward zero, as in the reference C code
    k = np.arange(int((-n / z + 1) / 4), int((n / z - 1) / 4) + 1)
    s1 = np.sum(norm.cdf((4 * k + 1) * z / sq) - norm.cdf((4 * k - 1) * z / sq))
    k = np.arange(int((-n / z - 3) / 4), int((n / z - 1) / 4) + 1)
    s2 = np.sum(norm.cdf((4 * k + 3) * z / sq) - norm.cdf((4 * k + 1) * z / sq))
    return StatTestResult(name, 1.0 - s1 + s2, significance, float(z))


def _cusum_reverse(bits, significance: float = SIGNIFICANCE) -> StatTestResult:
    return cumulative_sums(bits, reverse=True, significance=significance)


TESTS = {
    "monobit": (monobit, 100),
    "block_frequency": (block_frequency, 128),
    "runs": (runs, 100),
    "longest_run": (longest_run, 128),
    "dft": (dft, 1000),
    "serial": (serial, 100),
    "approximate_entropy": (approximate_entropy, 100),
    "cusum_forward": (cumulative_sums, 100),
    "cusum_reverse": (_cusum_reverse, 100),
}


def stat_test(name: str, bits, **params) -> StatTestResult:
    """Run the named test after checking its minimum input length."""
    try:
        func, min_bits = TESTS[name]
    except KeyError:
        raise UnknownTest(f"unknown test {name!r}; choose from {', '.join(TESTS)}") from None
    e = _as_array(bits)
    if len(e) < min_bits:
        raise InsufficientBits(f"{name} needs at least {min_bits} bits, got {len(e)}")
    return func(e, **params)


def run_battery(bits, significance: float = SIGNIFICANCE) -> list[StatTestResult]:
    """All nine tests with default parameters; tests lacking data are skipped."""
    e = _as_array(bits)
    results = []
    for name, (_, min_bits) in TESTS.items():
        if len(e) >= min_bits:
            results.append(stat_test(name, e, significance=significance))
    return results


def format_table(results: list[StatTestResult]) -> str:
    lines = [f"{'test':<22}{'p-value':>12}  result"]
    for r in results:
        verdict = "pass" if r.passed else "FAIL"
        pv = ", ".join(f"{p:.6f}" for p in r.p_values)
        lines.append(f"{r.test_name:<22}{pv:>12}  {verdict}")
    return "\n".join(lines) + "\n"


def format_keyvalue(results: list[StatTestResult]) -> str:
    out = []
    for r in results:
        out.append(f"{r.test_name}.p_value={r.p_value:.12g}")
        if len(r.p_values) > 1:
            out.append(f"{r.test_name}.p_values={','.join(f'{p:.12g}' for p in r.p_values)}")
        out.append(f"{r.test_name}.passed={str(r.passed).lower()}")
    return "\n".join(out) + "\n"
