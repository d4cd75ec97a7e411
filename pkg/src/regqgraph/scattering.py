"""Directed-bond scattering matrix ``S(k) = D(k) T`` and the spectral determinant.

State vector: one amplitude per directed bond ``u -> v``, taken on arrival at
``v``.  Slots ``0 .. N_B-1`` hold the ``i < j`` directions of the
lexicographically sorted bonds, slots ``N_B .. 2N_B-1`` the reversals, so the
reversal map is the block swap ``[[0, 1], [1, 0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import as_dressed


def directed_bonds(graph) -> list[tuple[int, int]]:
    g = as_dressed(graph)
    fwd = g.bonds
    return fwd + [(j, i) for i, j in fwd]


def reversal_permutation(n_bonds: int) -> np.ndarray:
    eye = np.eye(n_bonds)
    zero = np.zeros((n_bonds, n_bonds))
    return np.block([[zero, eye], [eye, zero]])


def vertex_sigma(graph, i: int) -> tuple[list[int], np.ndarray]:
    """Vertex scattering matrix at ``V_i`` over its neighbours (ascending).

    ``sigma[a, b]`` is the amplitude for arriving from neighbour ``b`` and
    leaving towards neighbour ``a``.  Dead ends use their boundary flag
    instead of the generic formula.
    """
    g = as_dressed(graph)
    nbrs = np.flatnonzero(g.connectivity[i]).tolist()
    if len(nbrs) == 1:
        return nbrs, np.array([[complex(g.boundary(i).reflection)]])
    b = g.betas[i, nbrs]
    v = b.sum()
    sigma = -np.eye(len(nbrs), dtype=complex) + 2.0 * np.sqrt(np.outer(b, b)) / (v + 1j * g.vertex_lambda0[i])
    return nbrs, sigma


def transfer_matrix(graph) -> np.ndarray:
    """k-independent part ``T``: ``T[(v->w), (u->v)] = sigma^(v)_{w,u}``."""
    g = as_dressed(graph)
    dirs = directed_bonds(g)
    index = {d: n for n, d in enumerate(dirs)}
    T = np.zeros((len(dirs), len(dirs)), dtype=complex)
    for v in range(g.n_vertices):
        nbrs, sigma = vertex_sigma(g, v)
        for a, w in enumerate(nbrs):
            for b, u in enumerate(nbrs):
                T[index[(v, w)], index[(u, v)]] = sigma[a, b]
    return T


def _bond_data(graph):
    g = as_dressed(graph)
    dirs = directed_bonds(g)
    rows, cols = np.array(dirs).T
    action = g.betas[rows, cols] * g.lengths[rows, cols]
    magnetic = g.magnetic[rows, cols] * g.lengths[rows, cols]
    return action, magnetic


@dataclass(frozen=True, eq=False)
class ScatteringMatrix:
    k: complex
    S: np.ndarray
    dS: np.ndarray

    def unitarity_defect(self) -> float:
        n = self.S.shape[0]
        return float(np.abs(self.S.conj().T @ self.S - np.eye(n)).max())


class ScatteringModel:
    """Precomputed ``T`` and bond phases; evaluates ``S`` on arrays of ``k``."""

    def __init__(self, graph):
        self.graph = as_dressed(graph)
        self.T = transfer_matrix(self.graph)
        self.action, self.magnetic = _bond_data(self.graph)

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    def phases(self, k):
        k = np.asarray(k, dtype=complex)
        return np.exp(1j * (k[..., None] * self.action + self.magnetic))

    def stack(self, k) -> np.ndarray:
        """``S(k)`` for every entry of ``k``; shape ``k.shape + (2N_B, 2N_B)``."""
        return self.phases(k)[..., :, None] * self.T

    def derivative_stack(self, k) -> np.ndarray:
        return (1j * self.action * self.phases(k))[..., :, None] * self.T

    def determinant(self, k):
        S = self.stack(k)
        return np.linalg.det(np.eye(self.dim) - S)


def graph_s_matrix(graph, k) -> ScatteringMatrix:
    model = ScatteringModel(graph)
    return ScatteringMatrix(k, model.stack(k), model.derivative_stack(k))


def spectral_determinant(graph, k):
    """``det(1 - S(k))`` by LU factorisation; ``k`` may be complex or an array."""
    return ScatteringModel(graph).determinant(k)
