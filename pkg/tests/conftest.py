import numpy as np
import pytest

from steincond.core import InputPair, sample_generic, sample_stream


def random_pair(seed: int, n: int, d: int = 1) -> InputPair:
    pair, _ = sample_generic(n, d, sample_stream(seed, 0))
    return pair


def series_grammian(pair: InputPair, terms: int = 4000) -> np.ndarray:
    """Truncated ``sum_k A^k B B^* A^*k``; only for strongly stable pairs."""
    p = np.zeros((pair.n, pair.n), dtype=complex)
    v = pair.b.astype(complex)
    for _ in range(terms):
        p += v @ v.conj().T
        v = pair.a @ v
    return p


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def spectra_match(x, y, atol: float) -> bool:
    """Nearest-neighbour comparison; robust to ordering of near-equal values."""
    dist = np.abs(np.asarray(x)[:, None] - np.asarray(y)[None, :])
    return bool(max(dist.min(axis=0).max(), dist.min(axis=1).max()) <= atol)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
