"""Explicit periodic-orbit series for individual eigenvalues of regular linear graphs.

Integrating ``k rho(k)`` over the separator interval ``(k_hat_{n-1}, k_hat_n)``
term by term gives::

    k_n = k_hat_n - pi/(2 S0)
          - (1/pi) Re sum_p sum_nu (A_p^nu / nu) e^{i nu S_p k_hat_n}
                [ (1 - e^{-i nu w_p}) (i k_hat_n - 1/(nu S_p)) + (i pi / S0) e^{-i nu w_p} ]

with ``w_p = pi S_p / S0``.  The series converges only conditionally: terms
must be summed in order of increasing code length.  Each code-length group is
summed exactly (``math.fsum``) and the group sums are accumulated with Kahan
compensation, so results do not depend on evaluation order or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import as_linear
from .orbits import OrbitTable, OrbitTerm, orbit_table, wall_transfer_matrix
from .spectral import (TrigSpectralEquation, exact_roots, mean_staircase, require_regular,
                       separators, trig_equation)


@dataclass(frozen=True)
class ExpansionContext:
    total_action: float
    k_hat: float
    n: int
    l: int


def kahan_sum(values) -> float:
    total = 0.0
    carry = 0.0
    for v in values:
        y = v - carry
        t = total + y
        carry = (t - total) - y
        total = t
    return total


def _term_values(action, weight, nu, k_hat, S0):
    nu = np.asarray(nu, dtype=float)
    action = np.asarray(action, dtype=float)
    omega = math.pi * action / S0
    back = np.exp(-1j * nu * omega)
    amp = np.power(weight, nu) / nu
    bracket = (1 - back) * (1j * k_hat - 1.0 / (nu * action)) + (1j * math.pi / S0) * back
    return -(amp * np.exp(1j * nu * action * k_hat) * bracket).real / math.pi


def eigenvalue_term(term: OrbitTerm, ctx: ExpansionContext) -> float:
    """Contribution of one ``(prime, nu)`` orbit term to ``k_n``."""
    return float(_term_values(term.action, term.weight, term.nu, ctx.k_hat, ctx.total_action))


def grouped_sum(values: np.ndarray, table: OrbitTable) -> float:
    return kahan_sum(math.fsum(values[a:b].tolist()) for _, a, b in table.group_bounds())


def _context(graph, eq=None):
    g = as_linear(graph)
    eq = eq or trig_equation(g)
    require_regular(eq)
    return g, eq


TABLE_LIMIT = 20


def _transfer_group_sums(g, k_hat, S0, l):
    """Per code length ``m`` the summed terms, from ``G_m(k) = Tr M(k)^m / m``.

    With ``a = k_hat - pi/S0`` the bracket regroups as
    ``i k_hat (G_m(b) - G_m(a)) + (i pi/S0) G_m(a) - i int_a^b G_m dk``;
    ``G_m`` is a trigonometric polynomial, so a Gauss-Legendre rule with
    enough nodes integrates it to rounding error.
    """
    b, a = k_hat, k_hat - math.pi / S0
    top = 2.0 * l * float(np.max(g.actions))
    x, w = np.polynomial.legendre.leggauss(int(top * (b - a) / 2) + 40)
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
    M, _ = wall_transfer_matrix(g, np.concatenate([[a, b], nodes]))
    power = np.broadcast_to(np.eye(2), M.shape).astype(complex)
    out = []
    for m in range(1, l + 1):
        power = power @ M
        G = np.trace(power, axis1=1, axis2=2) / m
        integral = 0.5 * (b - a) * (w @ G[2:])
        bracket = 1j * k_hat * (G[1] - G[0]) + (1j * math.pi / S0) * G[0] - 1j * integral
        out.append(-bracket.real / math.pi)
    return out


def shared_table(g, l_max: int) -> OrbitTable | None:
    """Orbit table worth sharing across levels, or None when group sums come from ``M``."""
    if g.n_vertices == 3 and l_max > TABLE_LIMIT:
        return None
    return orbit_table(g, l_max)


def eigenvalue_expansion(graph, n: int, l: int, table: OrbitTable | None = None,
                         eq: TrigSpectralEquation | None = None) -> float:
    """``k_n(l)``: the series truncated to orbits of code length ``<= l``.

    Three-vertex graphs beyond ``TABLE_LIMIT`` use exact per-length group
    sums from the wall transfer matrix instead of listing every orbit.
    """
    g, eq = _context(graph, eq)
    if n < 1 or l < 1:
        raise ValueError("n and l must be >= 1")
    S0 = eq.total_action
    k_hat = float(separators(eq, n))
    if table is None and l > TABLE_LIMIT and g.n_vertices == 3:
        return (k_hat - math.pi / (2 * S0)) + kahan_sum(_transfer_group_sums(g, k_hat, S0, l))
    table = orbit_table(g, l) if table is None else table.truncated(l)
    vals = _term_values(table.action, table.weight, table.nu, k_hat, S0)
    return (k_hat - math.pi / (2 * S0)) + grouped_sum(vals, table)


def _group_traces(g, k, l, table):
    """Per code length ``m``: ``(sum A^nu e^{i nu S k}/nu, sum S A^nu e^{i nu S k})``."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if g.n_vertices == 3:
        M, dM = wall_transfer_matrix(g, k)
        power = np.broadcast_to(np.eye(2), M.shape).astype(complex)
        stair, dens = [], []
        for m in range(1, l + 1):
            dens.append(-1j * np.trace(power @ dM, axis1=1, axis2=2))
            power = power @ M
            stair.append(np.trace(power, axis1=1, axis2=2) / m)
        return np.array(stair), np.array(dens)
    table = orbit_table(g, l) if table is None else table.truncated(l)
    stair = np.zeros((l, k.size), dtype=complex)
    dens = np.zeros((l, k.size), dtype=complex)
    for m, a, b in table.group_bounds():
        nu = table.nu[a:b, None]
        S = table.action[a:b, None]
        z = np.power(table.weight[a:b, None], nu) * np.exp(1j * nu * S * k[None, :])
        stair[m - 1] = (z / nu).sum(axis=0)
        dens[m - 1] = (S * z).sum(axis=0)
    return stair, dens


def density_fluctuation(graph, k, l: int, table: OrbitTable | None = None):
    """Oscillating part of the density truncated at code length ``l``."""
    g = as_linear(graph)
    _, dens = _group_traces(g, k, l, table)
    out = dens.sum(axis=0).real / math.pi
    return out if np.ndim(k) else float(out[0])


def staircase_truncated(graph, k, l: int, table: OrbitTable | None = None,
                        eq: TrigSpectralEquation | None = None):
    """Mean staircase plus the truncated orbit sum for the fluctuations."""
    g, eq = _context(graph, eq)
    stair, _ = _group_traces(g, k, l, table)
    mean, _ = mean_staircase(eq, np.atleast_1d(k))
    out = mean + stair.sum(axis=0).imag / math.pi
    return out if np.ndim(k) else float(out[0])


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    l: int
    k_expansion: float
    k_exact: float

    @property
    def abs_err(self) -> float:
        return abs(self.k_expansion - self.k_exact)

    @property
    def rel_err(self) -> float:
        return self.abs_err / self.k_exact


def convergence_report(graph, levels: Sequence[int], l_values: Sequence[int],
                       threads: int = 1) -> list[ConvergenceRow]:
    """``k_n(l)`` against the exact root for every ``(n, l)``; rows ordered by n then l."""
    g, eq = _context(graph)
    table = shared_table(g, max(l_values))
    exact = dict(zip(levels, exact_roots(eq, levels).tolist()))
    grid = [(n, l) for n in levels for l in l_values]

    def work(item):
        n, l = item
        return ConvergenceRow(n, l, eigenvalue_expansion(g, n, l, table, eq), exact[n])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(work, grid))
    return [work(item) for item in grid]
