import numpy as np
import pytest

from flsg.models import ModelVector

# filled by the decorators in test_acceptance.py
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(0xF15A6)


def random_model(rng, p, scale=1.0):
    return ModelVector((scale * rng.standard_normal(p)).astype(np.float32))


def random_models(rng, n, p, scale=1.0):
    return [random_model(rng, p, scale) for _ in range(n)]
