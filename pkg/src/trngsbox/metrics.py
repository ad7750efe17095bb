"""S-box security metrics: Walsh spectra, nonlinearity, SAC, BIC, LP and DP.

Functions accept an :class:`~trngsbox.sbox.SBox` or any length-2**n
sequence of n-bit values, so the same code checks 4-bit toy boxes
exhaustively.

Two nonlinearity figures are reported. ``nonlinearity`` is the published
score: the floor of the mean nonlinearity of the n coordinate (single
output bit) functions. ``min_nonlinearity`` is the minimum over all
2**n - 1 nonzero output masks and is the figure tied to LP by
``lp == (2**(n-1) - min_nonlinearity) / 2**n``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np


def _table(s) -> tuple[np.ndarray, int]:
    t = np.asarray(s, dtype=np.int64).reshape(-1)
    size = t.size
    n = size.bit_length() - 1
    if size < 2 or 1 << n != size:
        raise ValueError(f"table length {size} is not a power of two")
    return t, n


def _parity(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    shift = 32
    while shift:
        v ^= v >> shift
        shift >>= 1
    return v & 1


def component(s, mask: int) -> np.ndarray:
    """Truth table of the Boolean function x -> parity(S(x) & mask)."""
    t, _ = _table(s)
    return _parity(t & mask).astype(np.uint8)


def fwht(values: np.ndarray) -> np.ndarray:
    """Fast Walsh-Hadamard transform along axis 0 (natural order, unnormalized)."""
    a = np.array(values, dtype=np.int64)
    size = a.shape[0]
    h = 1
    while h < size:
        a = a.reshape((size // (2 * h), 2, h) + a.shape[1:])
        lo = a[:, 0] + a[:, 1]
        hi = a[:, 0] - a[:, 1]
        a[:, 0] = lo
        a[:, 1] = hi
        a = a.reshape((size,) + a.shape[3:])
        h *= 2
    return a


def walsh_spectrum(f: Sequence[int]) -> np.ndarray:
    """W(phi) = sum_x (-1)^(f(x) xor x.phi) for a 0/1 truth table ``f``."""
    signs = 1 - 2 * np.asarray(f, dtype=np.int64)
    return fwht(signs)


def walsh_matrix(s) -> np.ndarray:
    """Spectra of every component; column ``m`` is the spectrum for mask ``m``."""
    t, n = _table(s)
    masks = np.arange(1 << n)
    signs = 1 - 2 * _parity(t[:, None] & masks[None, :])
    return fwht(signs)


def component_nonlinearities(s) -> np.ndarray:
    """Nonlinearity of each component; entry 0 (the zero mask) is 0."""
    t, n = _table(s)
    w = np.abs(walsh_matrix(t)).max(axis=0)
    return (1 << (n - 1)) - w // 2


def coordinate_nonlinearities(s) -> np.ndarray:
    t, n = _table(s)
    masks = 1 << np.arange(n)
    signs = 1 - 2 * ((t[:, None] & masks[None, :]) != 0).astype(np.int64)
    w = np.abs(fwht(signs)).max(axis=0)
    return (1 << (n - 1)) - w // 2


def nonlinearity(s) -> int:
    """Published nonlinearity score: floor of the mean coordinate nonlinearity."""
    nls = coordinate_nonlinearities(s)
    return int(nls.sum() // len(nls))


def min_nonlinearity(s) -> int:
    return int(component_nonlinearities(s)[1:].min())


def nonlinearity_scores(tables: np.ndarray) -> np.ndarray:
    """Vectorized :func:`nonlinearity` over a (count, 256) array of tables."""
    tables = np.asarray(tables, dtype=np.int64)
    count, size = tables.shape
    n = size.bit_length() - 1
    bits = (tables[:, :, None] >> np.arange(n)) & 1
    signs = np.moveaxis(1 - 2 * bits, 1, 0)  # (size, count, n)
    w = np.abs(fwht(signs)).max(axis=0)
    nls = (1 << (n - 1)) - w // 2
    return nls.sum(axis=1) // n


@dataclass(frozen=True)
class SacMatrix:
    q: np.ndarray  # q[r, w]: flip rate of output bit w when input bit r flips
    offset: float
    mean: float


def sac(s) -> SacMatrix:
    t, n = _table(s)
    x = np.arange(1 << n)
    q = np.empty((n, n))
    for r in range(n):
        diff = t ^ t[x ^ (1 << r)]
        q[r] = ((diff[:, None] >> np.arange(n)) & 1).mean(axis=0)
    return SacMatrix(q, float(np.abs(0.5 - q).mean()), float(q.mean()))


@dataclass(frozen=True)
class BicResult:
    bic_sac: float
    bic_nl: int
    correlation: float  # max |corr| of avalanche variable pairs
    sac_pairs: np.ndarray  # (pairs, n): SAC of g_jk per flipped input bit
    nl_pairs: np.ndarray  # nonlinearity of each g_jk
    pairs: tuple[tuple[int, int], ...]


def bic(s) -> BicResult:
    """Bit independence over output-bit pairs j < k.

    ``g_jk(x) = bit_j(S(x)) xor bit_k(S(x))``; bic_nl is the minimum
    nonlinearity over pairs and bic_sac the mean of their flip rates over
    all input bits. ``correlation`` is max over input bit i and pairs of
    |corr(b_j, b_k)| for the avalanche vector S(x) xor S(x xor e_i); a
    constant avalanche variable contributes 0.
    """
    t, n = _table(s)
    size = 1 << n
    x = np.arange(size)
    bits = (t[:, None] >> np.arange(n)) & 1
    pairs = tuple((j, k) for j in range(n) for k in range(j + 1, n))
    g = np.stack([bits[:, j] ^ bits[:, k] for j, k in pairs], axis=1)  # (size, pairs)

    w = np.abs(fwht(1 - 2 * g)).max(axis=0)
    nl_pairs = (1 << (n - 1)) - w // 2

    sac_pairs = np.empty((len(pairs), n))
    corr = 0.0
    for i in range(n):
        flipped = x ^ (1 << i)
        sac_pairs[:, i] = (g ^ g[flipped]).mean(axis=0)
        av = ((t ^ t[flipped])[:, None] >> np.arange(n)) & 1
        sd = av.std(axis=0)
        for j, k in pairs:
            if sd[j] == 0 or sd[k] == 0:
                continue
            c = abs(float(np.mean((av[:, j] - av[:, j].mean()) * (av[:, k] - av[:, k].mean())))
                    / (sd[j] * sd[k]))
            corr = max(corr, c)
    return BicResult(
        float(sac_pairs.mean()), int(nl_pairs.min()), float(corr), sac_pairs, nl_pairs, pairs
    )


def lp(s) -> float:
    """max over nonzero input/output masks of |#{x.a == S(x).b}/2**n - 1/2|."""
    t, n = _table(s)
    w = np.abs(walsh_matrix(t)[1:, 1:])
    return float(w.max()) / (1 << (n + 1))


def ddt(s) -> np.ndarray:
    """Difference distribution table: ddt[dx, dy] = #{x : S(x) ^ S(x ^ dx) == dy}."""
    t, n = _table(s)
    size = 1 << n
    x = np.arange(size)
    dx = x[:, None]
    dy = t[x[None, :]] ^ t[x[None, :] ^ dx]
    flat = (dx * size + dy).reshape(-1)
    return np.bincount(flat, minlength=size * size).reshape(size, size)


def dp(s) -> tuple[np.ndarray, float]:
    table = ddt(s)
    return table, float(table[1:].max()) / table.shape[0]


def dp_row_maxima(s) -> np.ndarray:
    """Per input difference, the largest DP; entry 0 is reported as 0."""
    table = ddt(s)
    out = table.max(axis=1) / table.shape[0]
    out[0] = 0.0
    return out


@dataclass(frozen=True)
class MetricReport:
    nonlinearity: int
    nonlinearity_min: int
    sac_mean: float
    sac_offset: float
    bic_sac: float
    bic_nl: int
    bic_corr: float
    lp: float
    dp_max: float

    FIELDS = (
        "nonlinearity", "nonlinearity_min", "sac_mean", "sac_offset",
        "bic_sac", "bic_nl", "bic_corr", "lp", "dp_max",
    )

    def as_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        lines = []
        for key, value in self.as_dict().items():
            lines.append(f"{key}={value:.6f}" if isinstance(value, float) else f"{key}={value}")
        return "\n".join(lines) + "\n"

    def to_csv_row(self) -> list:
        return [getattr(self, f) for f in self.FIELDS]


def evaluate(s) -> MetricReport:
    t, n = _table(s)
    sm = sac(t)
    b = bic(t)
    _, dp_max = dp(t)
    return MetricReport(
        nonlinearity=nonlinearity(t),
        nonlinearity_min=min_nonlinearity(t),
        sac_mean=sm.mean,
        sac_offset=sm.offset,
        bic_sac=b.bic_sac,
        bic_nl=b.bic_nl,
        bic_corr=b.correlation,
        lp=lp(t),
        dp_max=dp_max,
    )


def reports_to_csv(rows: Sequence[tuple[str, MetricReport]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("name",) + MetricReport.FIELDS)
    for name, report in rows:
        writer.writerow([name] + report.to_csv_row())
    return buf.getvalue()


def ddt_to_csv(table: np.ndarray) -> str:
    buf = io.StringIO()
    np.savetxt(buf, table, fmt="%d", delimiter=",")
    return buf.getvalue()
