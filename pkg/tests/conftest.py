from pathlib import Path

import numpy as np
import pytest

from optisplit.data import Dataset

FIXTURES = Path(__file__).parent / "fixtures"
CONCRETE = FIXTURES / "concrete.csv"
CONCRETE_RESPONSE = "compressive_strength"


def make_dataset(X, y, names=None):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] != len(y):
        X = X.T
    names = names or [f"x{i + 1}" for i in range(X.shape[1])]
    cols = {n: X[:, i] for i, n in enumerate(names)}
    cols["y"] = np.asarray(y, dtype=float)
    return Dataset(cols, "y")


def recovery_instance(seed, n=200, k=5, active=3, coef=5.0, sigma=1.0):
    """k standard-normal predictors, the first ``active`` with coefficient ``coef``."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, k))
    y = X[:, :active] @ np.full(active, coef) + sigma * rng.standard_normal(n)
    return make_dataset(X, y)


@pytest.fixture(scope="session")
def concrete():
    from optisplit.data import load_csv
    return load_csv(CONCRETE, CONCRETE_RESPONSE)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
