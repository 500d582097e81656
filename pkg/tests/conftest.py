import numpy as np
import pytest

from stainkit.synth import SynthSpec, synthesize_stain_image

ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, text in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] AC{number}: {text}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def blob_sample():
    """(rgb, stains, concentrations, labels) of a seeded blob-cells image."""
    return synthesize_stain_image(SynthSpec(concentration_law="blob-cells", seed=0))


@pytest.fixture(scope="session")
def sparse_sample():
    return synthesize_stain_image(SynthSpec(seed=0))


def random_image(rng, h=24, w=32, lo=0, hi=256):
    return rng.integers(lo, hi, size=(h, w, 3), dtype=np.uint8)
