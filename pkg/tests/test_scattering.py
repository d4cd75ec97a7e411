import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regqgraph.graph import DressedGraph, build_linear_graph
from regqgraph.scattering import (directed_bonds, graph_s_matrix, reversal_permutation,
                                  spectral_determinant, vertex_sigma)
from regqgraph.spectral import exact_roots, separators, trig_equation


def ring_graph():
    bonds = [(0, 1, 1.0, 0.2, 0.3), (1, 2, 0.7, -0.5, -0.1), (2, 0, 1.3, 0.0, 0.2),
             (2, 3, 0.4, 0.6, 0.0)]
    return DressedGraph.from_bonds(4, bonds, vertex_lambda0=[0.0, 0.5, -0.3, 0.0])


def test_sigma_middle_vertex(step):
    nbrs, s = vertex_sigma(step.to_dressed(), 1)
    i, j = nbrs.index(0), nbrs.index(2)
    assert s[i, i].real == pytest.approx(0.1715729, abs=1e-7)
    assert s[j, j].real == pytest.approx(-0.1715729, abs=1e-7)
    # transmission oracle: sqrt(1 - r^2) = 2 sqrt(b1 b2)/(b1 + b2) = 0.98517143
    assert s[i, j].real == pytest.approx(math.sqrt(1 - 0.1715729 ** 2), abs=1e-7)
    assert s[i, j].real == pytest.approx(0.985171, abs=5e-7)
    assert s[j, i] == s[i, j]
    assert np.linalg.norm(s.conj().T @ s - np.eye(2)) < 1e-12


def test_sigma_dirichlet_dead_end(step):
    _, s = vertex_sigma(step.to_dressed(), 0)
    assert s.shape == (1, 1) and s[0, 0] == -1


@pytest.mark.parametrize("d", [2, 3, 5])
def test_sigma_symmetric_star(d):
    bonds = [(0, j, 1.0 + j, 0.3, 0.0) for j in range(1, d + 1)]
    _, s = vertex_sigma(DressedGraph.from_bonds(d + 1, bonds), 0)
    assert np.allclose(s, -np.eye(d) + 2.0 / d, atol=1e-14)


def test_sigma_unitary_with_vertex_term():
    g = ring_graph()
    for v in range(4):
        _, s = vertex_sigma(g, v)
        assert np.linalg.norm(s.conj().T @ s - np.eye(len(s))) < 1e-12


def test_ordering_and_reversal():
    g = ring_graph()
    db = directed_bonds(g)
    nb = g.n_bonds
    assert len(set(db)) == 2 * nb
    assert all(i < j for i, j in db[:nb])
    P = reversal_permutation(nb)
    assert np.array_equal(P @ P, np.eye(2 * nb))
    assert all(db[nb + a] == db[a][::-1] for a in range(nb))


@pytest.mark.parametrize("graph", ["step", "ring"])
def test_unitarity_random_k(graph, step):
    g = step.to_dressed() if graph == "step" else ring_graph()
    rng = np.random.default_rng(1)
    for k in rng.uniform(0.01, 500, 100):
        assert graph_s_matrix(g, k).unitarity_defect() < 1e-12


@settings(max_examples=50)
@given(st.floats(0.01, 1e3), st.floats(0.01, 1e3))
def test_moduli_k_independent(k1, k2):
    g = ring_graph()
    a, b = np.abs(graph_s_matrix(g, k1).S), np.abs(graph_s_matrix(g, k2).S)
    assert np.max(np.abs(a - b)) < 1e-12


def test_moduli_one_vs_ten(step):
    g = step.to_dressed()
    assert np.max(np.abs(np.abs(graph_s_matrix(g, 1).S) - np.abs(graph_s_matrix(g, 10).S))) < 1e-12


@pytest.mark.parametrize("graph", ["step", "ring"])
def test_derivative_finite_difference(graph, step):
    g = step.to_dressed() if graph == "step" else ring_graph()
    h = 1e-6
    fd = (graph_s_matrix(g, 4 + h).S - graph_s_matrix(g, 4 - h).S) / (2 * h)
    assert np.max(np.abs(fd - graph_s_matrix(g, 4).dS)) < 1e-6


def test_determinant_at_root_and_separator(step):
    g = step.to_dressed()
    assert abs(spectral_determinant(g, 4.107149)) < 1e-5
    k_hat = float(separators(trig_equation(step), 1))
    assert abs(spectral_determinant(g, k_hat)) > 0.1
    assert abs(spectral_determinant(g, 5.9277368)) > 0.1


def test_determinant_bound():
    g = ring_graph()
    bound = 2 ** (2 * g.n_bonds)
    for k in np.linspace(0.1, 50, 200):
        assert abs(spectral_determinant(g, k)) <= bound


@given(st.floats(0.01, 200))
def test_determinant_even(k):
    g = build_linear_graph([0.3, 0.7, 0.45], [0.0, 0.5, -0.4]).to_dressed()
    assert abs(spectral_determinant(g, k)) == pytest.approx(abs(spectral_determinant(g, -k)), rel=1e-9,
                                                            abs=1e-12)


def test_determinant_zeros_match_roots(step):
    """Sign changes of the normalised determinant coincide with the exact roots."""
    g = step.to_dressed()
    eq = trig_equation(step)
    roots = exact_roots(eq, range(1, 31))
    ks = np.linspace(1e-3, roots[-1] + 0.5 * eq.spacing, 20000)
    S0 = step.total_action
    # det(1 - S) = c e^{i S0 k} f(k) with f real; strip the phase
    d = np.array([spectral_determinant(g, k) for k in ks]) * np.exp(-1j * S0 * ks)
    phase = d[np.argmax(np.abs(d))] / abs(d[np.argmax(np.abs(d))])
    f = (d / phase).real
    assert np.max(np.abs((d / phase).imag)) < 1e-9 * np.max(np.abs(d))
    idx = np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)
    from scipy.optimize import brentq

    def fr(k):
        return (spectral_determinant(g, k) * np.exp(-1j * S0 * k) / phase).real

    zeros = np.array([brentq(fr, ks[i], ks[i + 1], xtol=1e-14) for i in idx])
    assert zeros.size == roots.size
    assert np.max(np.abs(zeros - roots)) < 1e-9
    norm = np.max(np.abs(d))
    assert all(abs(spectral_determinant(g, k)) < 1e-8 * norm for k in roots)
