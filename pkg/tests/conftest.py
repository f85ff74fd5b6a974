import json
from pathlib import Path

import numpy as np
import pytest

ORACLES = Path(__file__).parent / "oracles" / "frozen.json"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def frozen():
    return json.loads(ORACLES.read_text())


def random_factors(rng, n, spread=(0.5, 2.0)):
    """Well-conditioned lower-triangular ``T`` and positive ``G``."""
    T = np.tril(rng.standard_normal((n, n))) / np.sqrt(n)
    T[np.diag_indices(n)] = rng.uniform(0.8, 1.5, n) * rng.choice([-1.0, 1.0], n)
    G = rng.uniform(*spread, n)
    return np.ascontiguousarray(T), G


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
