import numpy as np
import pytest

from mftpe.image import Image, sample_image

KEY = bytes(range(32))
NONCE = bytes(range(16, 32))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def key():
    return KEY


@pytest.fixture
def nonce():
    return NONCE


@pytest.fixture
def rgb_image(rng):
    return Image(rng.integers(0, 256, (32, 48, 3), dtype=np.uint8))


@pytest.fixture
def gray_image(rng):
    return Image(rng.integers(0, 256, (16, 16), dtype=np.uint8))


@pytest.fixture(scope="session")
def astronaut():
    return sample_image()


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Records one PASS/FAIL line for an acceptance criterion, then asserts it."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def record(label: str, ok: bool, detail: str = ""):
        line = f"{label:<34} {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        print(line)
        lines.append(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
