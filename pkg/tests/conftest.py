import numpy as np
import pytest

from graphonsp import Graph


def random_graph(rng, n, weighted=True, density=0.5):
    iu = np.triu_indices(n, 1)
    vals = rng.random(len(iu[0])) if weighted else (rng.random(len(iu[0])) < density).astype(float)
    S = np.zeros((n, n))
    S[iu] = vals
    S[(iu[1], iu[0])] = vals
    return Graph(S)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
