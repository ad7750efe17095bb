import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_sboxes
from trngsbox import metrics
from trngsbox.sbox import SBox

# PRESENT's 4-bit S-box: NL 4, differential uniformity 4, LP 1/4
PRESENT = [0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2]

perm4 = st.permutations(list(range(16)))


def naive_walsh(f):
    n = len(f)
    return [sum((-1) ** (f[x] ^ oracles.dot(a, x)) for x in range(n)) for a in range(n)]


@settings(max_examples=40)
@given(st.lists(st.integers(0, 1), min_size=16, max_size=16))
def test_walsh_matches_double_loop(f):
    assert metrics.walsh_spectrum(f).tolist() == naive_walsh(f)


def test_walsh_of_linear_function_is_a_spike():
    f = [oracles.dot(0b1011, x) for x in range(16)]
    w = metrics.walsh_spectrum(f)
    assert w[0b1011] == 16 and np.count_nonzero(w) == 1


def test_walsh_matrix_columns():
    w = metrics.walsh_matrix(PRESENT)
    for mask in range(16):
        assert w[:, mask].tolist() == naive_walsh(oracles.component(PRESENT, mask))


def test_fwht_involution():
    v = np.arange(64) % 7 - 3
    assert np.array_equal(metrics.fwht(metrics.fwht(v)), 64 * v)


def test_present_known_figures():
    assert metrics.min_nonlinearity(PRESENT) == 4
    assert metrics.lp(PRESENT) == 0.25
    assert metrics.dp(PRESENT)[1] == 4 / 16


def test_identity_figures():
    ident = SBox.identity()
    assert metrics.nonlinearity(ident) == 0
    assert metrics.min_nonlinearity(ident) == 0
    assert metrics.lp(ident) == 0.5
    assert metrics.dp(ident)[1] == 1.0
    s = metrics.sac(ident)
    assert s.mean == 0.125 and s.offset == 0.5
    assert np.array_equal(s.q, np.eye(8))


def test_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        metrics.nonlinearity(list(range(12)))


# exhaustive 4-bit oracles

@settings(max_examples=25, deadline=None)
@given(perm4)
def test_4bit_against_oracles(s):
    assert metrics.nonlinearity(s) == oracles.nl_score(s)
    assert metrics.min_nonlinearity(s) == oracles.nl_min(s)
    assert metrics.sac(s).q.tolist() == oracles.sac_matrix(s)
    assert metrics.lp(s) == oracles.lp(s)
    assert metrics.ddt(s).tolist() == oracles.ddt(s)
    assert metrics.dp(s)[1] == oracles.dp_max(s)

    b = metrics.bic(s)
    want = oracles.bic_pairs(s)
    assert list(b.pairs) == list(want)
    assert b.nl_pairs.tolist() == [want[p][0] for p in b.pairs]
    assert b.sac_pairs.tolist() == [want[p][1] for p in b.pairs]
    assert b.correlation == pytest.approx(oracles.bic_correlation(s), abs=1e-12)


# 8-bit published tables

@pytest.mark.parametrize("name, score, nl_min", [("1a", 105, 94), ("1b", 104, 96), ("1c", 108, 92)])
def test_published_nonlinearity(published, name, score, nl_min):
    s = published[name]
    assert metrics.nonlinearity(s) == score
    assert metrics.min_nonlinearity(s) == nl_min


def test_nonlinearity_agrees_with_affine_distance(published):
    s = list(published["1c"])
    assert metrics.nonlinearity(s) == oracles.nl_score(s, oracles.affine_distance_nl_np)
    nls = metrics.component_nonlinearities(s)
    for mask in (1, 3, 0x80, 0xFF):
        assert nls[mask] == oracles.affine_distance_nl_np(oracles.component(s, mask))


def test_frozen_report_1c(published):
    r = metrics.evaluate(published["1c"])
    assert (r.nonlinearity, r.nonlinearity_min, r.bic_nl) == (108, 92, 96)
    assert r.sac_mean == pytest.approx(0.50146484375, abs=1e-12)
    assert r.bic_sac == pytest.approx(0.49937220982, abs=1e-10)
    assert r.lp == 0.140625
    assert r.dp_max == 12 / 256


def test_frozen_report_1a(published):
    r = metrics.evaluate(published["1a"])
    assert r.sac_mean == pytest.approx(0.50927734375, abs=1e-12)
    assert r.lp == 0.1328125
    assert r.dp_max == 10 / 256


def test_lp_identity_random():
    for t in random_sboxes(20, seed=3):
        assert metrics.lp(t) == (128 - metrics.min_nonlinearity(t)) / 256


def test_parseval_and_balance():
    for t in random_sboxes(10, seed=4):
        w = metrics.walsh_matrix(t)
        assert np.all((w[:, 1:] ** 2).sum(axis=0) == 1 << 16)
        assert np.all(w[0, 1:] == 0)


def test_vectorized_scores_match_scalar():
    ts = random_sboxes(12, seed=5)
    assert metrics.nonlinearity_scores(np.array(ts)).tolist() == [metrics.nonlinearity(t) for t in ts]


def test_ddt_rows_sum_and_even():
    table = metrics.ddt(random_sboxes(1, seed=6)[0])
    assert np.all(table.sum(axis=1) == 256)
    assert np.all(table % 2 == 0)
    assert table[0, 0] == 256


def test_dp_row_maxima(published):
    rows = metrics.dp_row_maxima(published["1a"])
    assert rows[0] == 0
    assert rows.max() == 10 / 256


def test_report_serialization(published):
    r = metrics.evaluate(published["1b"])
    text = r.to_text()
    assert text.splitlines()[0] == "nonlinearity=104"
    csv_text = metrics.reports_to_csv([("1b", r)])
    header, row = csv_text.splitlines()
    assert header.split(",") == ["name", *metrics.MetricReport.FIELDS]
    assert row.startswith("1b,104,96,")
    assert len(metrics.ddt_to_csv(metrics.ddt(published["1b"])).splitlines()) == 256
