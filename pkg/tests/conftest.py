import numpy as np
import pytest

from rig.genbip import generate_naive, generate_thinned
from rig.model import ModelParams, WeightAssignment, edge_probability

# a 3x3 instance with one sparse row, one dense row and one clamped pair
SMALL_PARAMS = ModelParams(3, 1.0, 1.0, 0.5)
SMALL_A = np.array([0.5, 1.0, 4.0])
SMALL_B = np.array([1.0, 2.0, 0.3])
REPLICATES = 100_000

_ACCEPTANCE = []
_INDICATORS = {}


@pytest.fixture
def small_instance():
    weights = WeightAssignment(SMALL_A, SMALL_B)
    return SMALL_PARAMS, weights, edge_probability(SMALL_PARAMS, SMALL_A[:, None], SMALL_B[None, :])


def edge_indicators(generator, replicates=REPLICATES, **kwargs):
    """(replicates, 3, 3) edge indicators of the small instance, cached per call signature."""
    key = (generator, replicates, tuple(sorted(kwargs.items())))
    if key not in _INDICATORS:
        weights = WeightAssignment(SMALL_A, SMALL_B)
        gen = generate_naive if generator == "naive" else generate_thinned
        out = np.zeros((replicates, 3, 3), dtype=bool)
        for r in range(replicates):
            bip = gen(SMALL_PARAMS, weights, r, **kwargs)
            v, e = bip.edges()
            out[r, v, e] = True
        _INDICATORS[key] = out
    return _INDICATORS[key]


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
