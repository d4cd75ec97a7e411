"""Dressed quantum graphs with scaling bond potentials.

A bond carrying the potential ``U = lambda * E`` behaves like a free bond with
wavenumber ``beta * k`` where ``beta = sqrt(1 - lambda)``.  Only the
above-barrier case ``lambda < 1`` is supported.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, GraphError, TunnelingRegimeError


class Boundary(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @property
    def reflection(self) -> float:
        return -1.0 if self is Boundary.DIRICHLET else 1.0


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DressedGraph:
    """Quantum graph with scaling potentials, magnetic phases and vertex terms.

    Matrices are ``n_vertices x n_vertices``; entries off the bond set are
    ignored.  Vertex indices are zero based.  ``dead_end_bc`` maps valence-1
    vertices to their boundary condition (Dirichlet when absent).
    """

    n_vertices: int
    connectivity: np.ndarray
    lengths: np.ndarray
    lambdas: np.ndarray
    magnetic: np.ndarray
    vertex_lambda0: np.ndarray
    dead_end_bc: Mapping[int, Boundary] = field(default_factory=dict)

    def __post_init__(self):
        n = self.n_vertices
        set_ = object.__setattr__
        set_(self, "connectivity", _frozen(self.connectivity, int))
        for name in ("lengths", "lambdas", "magnetic"):
            set_(self, name, _frozen(getattr(self, name)))
        set_(self, "vertex_lambda0", _frozen(self.vertex_lambda0))
        set_(self, "dead_end_bc", {int(v): Boundary(b) for v, b in self.dead_end_bc.items()})
        for name in ("connectivity", "lengths", "lambdas", "magnetic"):
            if getattr(self, name).shape != (n, n):
                raise GraphError(f"{name} must be {n}x{n}")
        if self.vertex_lambda0.shape != (n,):
            raise GraphError(f"vertex_lambda0 must have length {n}")
        mask = self.connectivity != 0
        if not np.array_equal(self.lambdas * mask, (self.lambdas * mask).T):
            raise GraphError("lambda matrix not symmetric on the bond set")

    @classmethod
    def from_bonds(cls, n_vertices, bonds, vertex_lambda0=None, dead_end_bc=None):
        """Build from ``(i, j, length, lambda, magnetic)`` tuples.

        ``magnetic`` is the phase per unit length for travel from i to j.
        """
        n = n_vertices
        C = np.zeros((n, n), dtype=int)
        L = np.zeros((n, n))
        lam = np.zeros((n, n))
        A = np.zeros((n, n))
        for bond in bonds:
            i, j, length, lmb = bond[:4]
            a = bond[4] if len(bond) > 4 else 0.0
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"bond ({i}, {j}) references a missing vertex")
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if C[i, j]:
                raise GraphError(f"duplicate bond ({i}, {j})")
            C[i, j] = C[j, i] = 1
            L[i, j] = L[j, i] = length
            lam[i, j] = lam[j, i] = lmb
            A[i, j], A[j, i] = a, -a
        if vertex_lambda0 is None:
            vertex_lambda0 = np.zeros(n)
        return cls(n, C, L, lam, A, vertex_lambda0, dict(dead_end_bc or {}))

    @property
    def bonds(self) -> list[tuple[int, int]]:
        """Undirected bonds ``(i, j)`` with ``i < j`` in lexicographic order."""
        i, j = np.nonzero(np.triu(self.connectivity, 1))
        return list(zip(i.tolist(), j.tolist()))

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    @property
    def betas(self) -> np.ndarray:
        """Matrix of ``beta_ij = sqrt(1 - lambda_ij)`` on bonds, zero elsewhere."""
        mask = self.connectivity != 0
        with np.errstate(invalid="ignore"):
            return np.where(mask, np.sqrt(np.where(mask, 1.0 - self.lambdas, 1.0)), 0.0)

    def valence(self, i: int) -> int:
        return int(self.connectivity[i].sum())

    def boundary(self, i: int) -> Boundary:
        return self.dead_end_bc.get(i, Boundary.DIRICHLET)

    def reduced_actions(self) -> "ReducedActionSet":
        B = self.betas
        return ReducedActionSet({b: float(B[b] * self.lengths[b]) for b in self.bonds})

    def digest(self) -> str:
        """Stable hash of the graph parameters for run metadata."""
        payload = {
            "n": self.n_vertices,
            "bonds": [[i, j, repr(float(self.lengths[i, j])), repr(float(self.lambdas[i, j])),
                       repr(float(self.magnetic[i, j]))] for i, j in self.bonds],
            "lambda0": [repr(float(x)) for x in self.vertex_lambda0],
            "bc": {str(k): v.value for k, v in sorted(self.dead_end_bc.items())},
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ReducedActionSet:
    per_bond: Mapping[tuple[int, int], float]

    @property
    def total(self) -> float:
        return math.fsum(self.per_bond.values())


@dataclass(frozen=True)
class LinearGraph:
    """Chain of bonds ``B_1 .. B_{N_V-1}`` with dead ends at both extremities."""

    lengths: tuple[float, ...]
    lambdas: tuple[float, ...]
    bc_left: Boundary = Boundary.DIRICHLET
    bc_right: Boundary = Boundary.DIRICHLET

    @property
    def n_bonds(self) -> int:
        return len(self.lengths)

    @property
    def n_vertices(self) -> int:
        return len(self.lengths) + 1

    @property
    def betas(self) -> np.ndarray:
        return np.sqrt(1.0 - np.asarray(self.lambdas, dtype=float))

    @property
    def actions(self) -> np.ndarray:
        """Reduced bond actions ``S_i = beta_i L_i``."""
        return self.betas * np.asarray(self.lengths, dtype=float)

    @property
    def total_action(self) -> float:
        return math.fsum(self.actions.tolist())

    def to_dressed(self) -> DressedGraph:
        bonds = [(i, i + 1, L, lam, 0.0) for i, (L, lam) in enumerate(zip(self.lengths, self.lambdas))]
        bc = {0: self.bc_left, self.n_vertices - 1: self.bc_right}
        return DressedGraph.from_bonds(self.n_vertices, bonds, dead_end_bc=bc)


def build_linear_graph(lengths: Sequence[float], lambdas: Sequence[float],
                       bc_left=Boundary.DIRICHLET, bc_right=Boundary.DIRICHLET) -> LinearGraph:
    if len(lengths) != len(lambdas):
        raise GraphError("lengths and lambdas must have equal size")
    if len(lengths) < 1:
        raise GraphError("a linear graph needs at least one bond")
    for i, (L, lam) in enumerate(zip(lengths, lambdas)):
        if not L > 0:
            raise GraphError(f"bond {i + 1}: nonpositive length {L}")
        if not lam < 1:
            raise TunnelingRegimeError(
                f"bond {i + 1}: lambda={lam} >= 1, tunneling regime unsupported")
    return LinearGraph(tuple(float(x) for x in lengths), tuple(float(x) for x in lambdas),
                       Boundary(bc_left), Boundary(bc_right))


def as_dressed(graph) -> DressedGraph:
    return graph.to_dressed() if isinstance(graph, LinearGraph) else graph


def as_linear(graph) -> LinearGraph:
    """View a path-shaped DressedGraph as a LinearGraph.

    The chain starts at the lower-indexed dead end.  Magnetic phases are
    dropped: on a tree they are removable by a gauge transformation.
    """
    if isinstance(graph, LinearGraph):
        return graph
    C = graph.connectivity
    n = graph.n_vertices
    deg = C.sum(axis=1)
    if n < 2 or graph.n_bonds != n - 1 or deg.max() > 2 or validate(graph):
        raise GraphError("graph is not a valid path")
    if np.any(graph.vertex_lambda0 != 0):
        raise GraphError("linear graph analysis requires zero vertex parameters")
    order = [int(np.flatnonzero(deg == 1)[0])]
    while len(order) < n:
        nxt = [j for j in np.flatnonzero(C[order[-1]]) if j not in order[-2:]]
        order.append(int(nxt[0]))
    pairs = list(zip(order[:-1], order[1:]))
    return build_linear_graph([graph.lengths[p] for p in pairs], [graph.lambdas[p] for p in pairs],
                              graph.boundary(order[0]), graph.boundary(order[-1]))


def validate(graph) -> list[str]:
    """Return every violated invariant; an empty list means the graph is valid."""
    g = as_dressed(graph)
    problems = []
    C, mask = g.connectivity, g.connectivity != 0
    if not np.array_equal(C, C.T):
        problems.append("connectivity matrix not symmetric")
    if np.any(np.diag(C) != 0):
        problems.append("self-loop in connectivity matrix")
    if not set(np.unique(C)) <= {0, 1}:
        problems.append("connectivity entries must be 0 or 1")
    sym = mask & mask.T
    if not np.array_equal(g.lengths * sym, (g.lengths * sym).T):
        problems.append("length matrix not symmetric")
    if np.any(mask & ~(g.lengths > 0)):
        problems.append("nonpositive bond length")
    if not np.array_equal(g.magnetic * sym, -(g.magnetic * sym).T):
        problems.append("magnetic matrix not antisymmetric")
    if np.any(mask & ~(g.lambdas < 1)):
        problems.append("lambda >= 1 on a bond: tunneling regime unsupported")
    if g.n_vertices > 0:
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in np.flatnonzero(C[v]).tolist():
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        if len(seen) != g.n_vertices:
            problems.append("graph not connected")
    for v in g.dead_end_bc:
        if not 0 <= v < g.n_vertices or g.valence(v) != 1:
            problems.append(f"boundary flag on vertex {v}, which is not a dead end")
    return problems


def reflection_coefficients(graph: LinearGraph) -> np.ndarray:
    """Vertex reflection coefficients ``r_1 .. r_{N_V}`` seen from the left bond.

    Interior: ``(beta_{i-1} - beta_i) / (beta_{i-1} + beta_i)``; the sign
    flips for a reflection from the right-hand side.  Dead ends carry -1
    (Dirichlet) or +1 (Neumann).
    """
    b = graph.betas
    r = np.empty(graph.n_vertices)
    r[0] = graph.bc_left.reflection
    r[-1] = graph.bc_right.reflection
    r[1:-1] = (b[:-1] - b[1:]) / (b[:-1] + b[1:])
    return r


_TOP_KEYS = {"vertices", "bonds", "vertex_lambda0", "boundary"}
_BOND_KEYS = {"i", "j", "length", "lambda", "magnetic"}


def parse_graph(data: Mapping) -> DressedGraph:
    """Build a graph from the JSON document layout (see README)."""
    if not isinstance(data, Mapping):
        raise ConfigError("graph definition must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    if "vertices" not in data or "bonds" not in data:
        raise ConfigError("'vertices' and 'bonds' are required")
    n = data["vertices"]
    if not isinstance(n, int) or n < 1:
        raise ConfigError("'vertices' must be a positive integer")
    bonds = []
    for b in data["bonds"]:
        if not isinstance(b, Mapping):
            raise ConfigError("each bond must be an object")
        extra = set(b) - _BOND_KEYS
        if extra:
            raise ConfigError(f"unknown bond keys: {sorted(extra)}")
        try:
            bonds.append((int(b["i"]), int(b["j"]), float(b["length"]),
                          float(b.get("lambda", 0.0)), float(b.get("magnetic", 0.0))))
        except KeyError as exc:
            raise ConfigError(f"bond missing key {exc}") from None
    lam0 = data.get("vertex_lambda0", [0.0] * n)
    if len(lam0) != n:
        raise ConfigError("'vertex_lambda0' must list one value per vertex")
    graph = DressedGraph.from_bonds(n, bonds, [float(x) for x in lam0])
    dead_ends = [v for v in range(n) if graph.valence(v) == 1]
    bc = {}
    for key, value in dict(data.get("boundary", {})).items():
        try:
            flag = Boundary(str(value).lower())
        except ValueError:
            raise ConfigError(f"boundary value {value!r} must be 'dirichlet' or 'neumann'") from None
        if key == "left" and dead_ends:
            bc[dead_ends[0]] = flag
        elif key == "right" and dead_ends:
            bc[dead_ends[-1]] = flag
        elif key.isdigit():
            bc[int(key)] = flag
        else:
            raise ConfigError(f"unknown boundary key {key!r}")
    return DressedGraph(n, graph.connectivity, graph.lengths, graph.lambdas, graph.magnetic,
                        graph.vertex_lambda0, bc)


def load_graph(path) -> DressedGraph:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_graph(data)
