import math
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import brentq

from regqgraph.graph import build_linear_graph, load_graph

ROOT = Path(__file__).resolve().parents[1]
CONFIG = ROOT / "configs" / "step_b03.json"
IRREGULAR = ROOT / "configs" / "four_vertex_irregular.json"


@pytest.fixture(scope="session")
def step():
    return build_linear_graph([0.3, 0.7], [0.0, 0.5])


@pytest.fixture(scope="session")
def step_dressed():
    return load_graph(CONFIG)


def sine_roots(S1, S2, r2, n_max):
    """Independent oracle: brentq on sin(S0 k) - r2 sin((S1 - S2) k) over a fine grid."""
    S0 = S1 + S2
    f = lambda k: math.sin(S0 * k) - r2 * math.sin((S1 - S2) * k)
    ks = np.linspace(1e-6, (n_max + 2) * math.pi / S0, 200 * (n_max + 2))
    vals = np.array([f(k) for k in ks])
    roots = []
    for a, b, fa, fb in zip(ks[:-1], ks[1:], vals[:-1], vals[1:]):
        if fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=1e-15, rtol=1e-15))
        if len(roots) == n_max:
            break
    return np.array(roots)


def random_regular(rng, n_bonds, count):
    """Random regular Dirichlet chains with n_bonds bonds."""
    from regqgraph.spectral import trig_equation
    out = []
    while len(out) < count:
        g = build_linear_graph(rng.uniform(0.2, 1.5, n_bonds), rng.uniform(-1.0, 0.95, n_bonds))
        eq = trig_equation(g)
        if eq.alpha < 0.95:
            out.append((g, eq))
    return out


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
