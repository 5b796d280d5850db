import csv
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pointflux.model import PointInteraction, make_preset_state, orthogonal_gaussian

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).parent / "data"
ALPHA_NEG = -1 / (4 * math.pi)


@pytest.fixture(scope="session")
def gauss():
    return make_preset_state("gaussian", sigma=1.0)


@pytest.fixture(scope="session")
def expo():
    return make_preset_state("exponential_decay")


@pytest.fixture(scope="session")
def wproj():
    return make_preset_state("w_projected_exponential")


@pytest.fixture(scope="session")
def ortho():
    return orthogonal_gaussian(1.0, PointInteraction(ALPHA_NEG))


@pytest.fixture(scope="session")
def faddeeva_oracle():
    with open(DATA / "faddeeva_oracle.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    z = np.array([float(r["re_z"]) + 1j * float(r["im_z"]) for r in rows])
    w = np.array([float(r["re_w"]) + 1j * float(r["im_w"]) for r in rows])
    e = np.array([float(r["re_erfc"]) + 1j * float(r["im_erfc"]) for r in rows])
    return z, w, e


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for a criterion, print it, then assert."""
    def record(label: str, ok: bool, detail: str):
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: s.split(":")[0]):
            terminalreporter.write_line(line)
