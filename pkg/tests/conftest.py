import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lesionseg import _backend, _fallback, morphology, nn  # noqa: E402

BACKENDS = ["python"] + (["cython"] if _backend.compiled() is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel implementation."""
    mod = _fallback if request.param == "python" else _backend.compiled()
    monkeypatch.setattr(morphology, "kernels", mod)
    monkeypatch.setattr(nn, "kernels", mod)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_mask(rng, shape=(64, 64), density=None):
    """Blobby random mask: thresholded sums of a few random disks plus salt noise."""
    h, w = shape
    density = rng.uniform(0.2, 0.6) if density is None else density
    yy, xx = np.mgrid[:h, :w]
    field = np.zeros(shape)
    for _ in range(rng.integers(1, 6)):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        r = rng.uniform(3, max(h, w) / 3)
        field += ((yy - cy) ** 2 + (xx - cx) ** 2 <= r * r)
    noise = rng.random(shape) < density * 0.1
    return (field > 0) ^ noise


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
