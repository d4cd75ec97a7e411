import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from regqgraph.errors import ConfigError, GraphError, TunnelingRegimeError
from regqgraph.graph import (Boundary, DressedGraph, as_linear, build_linear_graph, load_graph,
                             parse_graph, reflection_coefficients, validate)
from regqgraph.scattering import vertex_sigma

lengths = st.floats(0.05, 5.0)
lambdas = st.floats(-3.0, 0.99)


def test_step_geometry(step):
    assert np.allclose(step.betas, [1.0, 0.7071068], atol=1e-7)
    assert np.allclose(step.actions, [0.3, 0.4949747], atol=1e-7)
    assert step.total_action == pytest.approx(0.7949747, abs=1e-7)


def test_box():
    assert build_linear_graph([1.0], [0.0]).total_action == 1.0


@pytest.mark.parametrize("lam", [1.0, 1.2])
def test_tunneling_rejected(lam):
    with pytest.raises(TunnelingRegimeError, match="tunneling regime unsupported"):
        build_linear_graph([0.3, 0.7], [0.0, lam])


def test_nonpositive_length():
    with pytest.raises(GraphError):
        build_linear_graph([0.3, 0.0], [0.0, 0.0])


def test_validate_ok(step):
    assert validate(step) == []


def test_validate_magnetic_symmetric():
    g = DressedGraph.from_bonds(3, [(0, 1, 1.0, 0.0, 0.0), (1, 2, 1.0, 0.0, 0.0)])
    A = np.zeros((3, 3))
    A[0, 1] = A[1, 0] = 0.4
    bad = DressedGraph(3, g.connectivity, g.lengths, g.lambdas, A, g.vertex_lambda0)
    assert "magnetic matrix not antisymmetric" in validate(bad)


def test_validate_disconnected():
    g = DressedGraph.from_bonds(4, [(0, 1, 1.0, 0.0, 0.0), (2, 3, 1.0, 0.0, 0.0)])
    assert "graph not connected" in validate(g)


def test_asymmetric_lambda_rejected():
    g = DressedGraph.from_bonds(2, [(0, 1, 1.0, 0.3, 0.0)])
    lam = np.array(g.lambdas)
    lam[1, 0] = 0.2
    with pytest.raises(GraphError):
        DressedGraph(2, g.connectivity, g.lengths, lam, g.magnetic, g.vertex_lambda0)


def test_reflections_step(step):
    r = reflection_coefficients(step)
    assert r[1] == pytest.approx(0.1715729, abs=1e-7)
    assert r[0] == r[2] == -1.0
    # cross-check against the vertex matrix diagonal
    nbrs, sigma = vertex_sigma(step.to_dressed(), 1)
    assert sigma[nbrs.index(0), nbrs.index(0)].real == pytest.approx(r[1], abs=1e-12)


def test_neumann_ends():
    r = reflection_coefficients(build_linear_graph([1, 1], [0, 0], "neumann", Boundary.NEUMANN))
    assert r[0] == r[-1] == 1.0 and r[1] == 0.0


@given(st.floats(0.01, 1.0))
def test_equal_media_no_reflection(c):
    lam = 1 - c * c
    assert reflection_coefficients(build_linear_graph([1, 2], [lam, lam]))[1] == pytest.approx(0, abs=1e-12)


@given(lambdas, lambdas)
def test_reflection_antisymmetric(l1, l2):
    r12 = reflection_coefficients(build_linear_graph([1, 1], [l1, l2]))[1]
    r21 = reflection_coefficients(build_linear_graph([1, 1], [l2, l1]))[1]
    assert r12 == pytest.approx(-r21, abs=1e-12)
    assert abs(r12) < 1


@given(st.lists(st.tuples(lengths, st.floats(0.0, 0.99)), min_size=1, max_size=6))
def test_beta_range_and_valid(bonds):
    g = build_linear_graph([b[0] for b in bonds], [b[1] for b in bonds])
    assert np.all((g.betas > 0) & (g.betas <= 1))
    assert validate(g) == []
    acts = g.to_dressed().reduced_actions()
    assert all(v > 0 for v in acts.per_bond.values())
    assert acts.total == pytest.approx(g.total_action, rel=1e-12)


@given(st.floats(0.0, 0.98), st.floats(0.0, 0.98))
def test_beta_decreasing(a, b):
    lo, hi = sorted([a, b])
    g = build_linear_graph([1, 1], [lo, hi])
    assert g.betas[0] >= g.betas[1]


def test_config_roundtrip(step, step_dressed):
    lin = as_linear(step_dressed)
    assert lin.lengths == step.lengths and lin.lambdas == step.lambdas
    assert lin.bc_left is Boundary.DIRICHLET


def test_parse_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        parse_graph({"vertices": 2, "bonds": [], "colour": 1})
    with pytest.raises(ConfigError):
        parse_graph({"vertices": 2, "bonds": [{"i": 0, "j": 1, "length": 1, "mass": 2}]})


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_graph(tmp_path / "missing.json")
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_graph(p)


def test_parse_boundary(tmp_path):
    doc = {"vertices": 3, "bonds": [{"i": 0, "j": 1, "length": 1}, {"i": 1, "j": 2, "length": 1}],
           "boundary": {"left": "neumann", "right": "dirichlet"}}
    p = tmp_path / "g.json"
    p.write_text(json.dumps(doc))
    g = as_linear(load_graph(p))
    assert g.bc_left is Boundary.NEUMANN and g.bc_right is Boundary.DIRICHLET
