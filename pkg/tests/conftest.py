import numpy as np
import pytest

from trngsbox import tables
from trngsbox.entropy import parse_ldar, strike_diff_bits, von_neumann
from trngsbox.sbox import SBox

FIXTURE_SEED = 20_231_107


def synthetic_ldar(n_records: int, seed: int = FIXTURE_SEED) -> str:
    """LDAR text for a few storm cells drifting across a 100 km field.

    Strikes cluster around cell centres with a few km of spread, so
    offsets from the first strike are far wider than 256 m and their low
    byte is close to uniform.
    """
    rng = np.random.default_rng(seed)
    cells = rng.uniform(-50_000, 50_000, size=(6, 2))
    which = rng.integers(len(cells), size=n_records)
    east = cells[which, 0] + rng.normal(0, 4_000, n_records)
    north = cells[which, 1] + rng.normal(0, 4_000, n_records)
    alt = np.abs(rng.normal(7_000, 3_000, n_records))
    t = np.sort(rng.uniform(0, 6 * 3600, n_records))
    lines = []
    for i in range(n_records):
        s = t[i]
        hh, rem = divmod(s, 3600)
        mm, ss = divmod(rem, 60)
        lines.append(
            f"14 {int(hh):02d} {int(mm):02d} {int(ss):02d} {int((ss % 1) * 1e6):06d} "
            f"{int(east[i])} {int(north[i])} {int(alt[i])}"
        )
    return "\n".join(lines) + "\n"


@pytest.fixture(scope="session")
def ldar_text():
    return synthetic_ldar(180_000)


@pytest.fixture(scope="session")
def whitened_bits(ldar_text):
    """The reference 10**6-bit whitened stream."""
    raw = strike_diff_bits(parse_ldar(ldar_text))
    white = von_neumann(raw)
    assert len(white) >= 1_000_000
    return white[:1_000_000]


@pytest.fixture(scope="session")
def published():
    return {
        "1a": SBox(bytes(tables.SBOX_1A)),
        "1b": SBox(bytes(tables.SBOX_1B)),
        "1c": SBox(bytes(tables.SBOX_1C)),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sboxes(count: int, seed: int = 7, n: int = 8) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [rng.permutation(1 << n) for _ in range(count)]


def gradient_image(width: int = 64, height: int = 64):
    """Smooth RGB test picture: two ramps and a disc, like a natural image."""
    from trngsbox.spn import ImageBuffer

    y, x = np.mgrid[0:height, 0:width]
    r = (255 * x / max(width - 1, 1)).astype(np.uint8)
    g = (255 * y / max(height - 1, 1)).astype(np.uint8)
    disc = (x - width / 2) ** 2 + (y - height / 2) ** 2 < (min(width, height) / 3) ** 2
    b = np.where(disc, 200, 40).astype(np.uint8)
    return ImageBuffer(np.stack([r, g, b], axis=2))


@pytest.fixture(scope="session")
def optimized_pool(published):
    return [published["1a"], published["1b"], published["1c"]]


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
