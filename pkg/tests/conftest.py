import numpy as np
import pytest

from dfretract.model import build_radial_hydrogenic, build_synthetic


@pytest.fixture(scope="session")
def small_model():
    return build_synthetic(3, dim=8, q=2.0, n_bound=3)


@pytest.fixture(scope="session")
def mid_model():
    return build_synthetic(5, dim=32, q=2.0, n_bound=6)


@pytest.fixture(scope="session")
def hydrogen():
    return build_radial_hydrogenic(1, channels=(-1,), n_per_channel=30, q=1.0)


@pytest.fixture(scope="session")
def neon_like():
    return build_radial_hydrogenic(10, channels=(-1, 1, -2), n_per_channel=20, q=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str, seconds: float) -> None:
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail} ({seconds:.1f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
