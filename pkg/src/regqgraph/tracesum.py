"""Eigenvalues from regularised trace sums of ``S(k)`` and numerical quadrature.

``sum_{n<=N} Tr S^n / n`` at ``k + i eps`` stands in for
``-ln det(1 - S)``.  Truncating at ``N = 2l`` matches the orbit series at code
length ``l`` without enumerating a single orbit.  The level integral
``int k rho_l dk`` over a separator interval is done by parts, so only the
staircase ``N_l(k)`` is evaluated and nothing is differentiated numerically.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import QuadratureError
from .graph import as_linear
from .scattering import ScatteringModel
from .spectral import TrigSpectralEquation, require_regular, root_windows, trig_equation

DEFAULT_EPS = 1e-12


def trace_partial_sums(model: ScatteringModel, k, n_max: int) -> np.ndarray:
    """Running sums ``sum_{m<=n} Tr S(k)^m / m`` for ``n = 1 .. n_max``; shape ``(n_max,) + k.shape``."""
    k = np.asarray(k, dtype=complex)
    S = model.stack(k)
    power = S.copy()
    acc = np.zeros(k.shape, dtype=complex)
    out = np.empty((n_max,) + k.shape, dtype=complex)
    for n in range(1, n_max + 1):
        acc = acc + np.trace(power, axis1=-2, axis2=-1) / n
        out[n - 1] = acc
        if n < n_max:
            power = power @ S
    return out


def trace_power_sum(graph, k, n_max: int):
    """``sum_{n=1}^{n_max} Tr S(k)^n / n``; tends to ``-ln det(1 - S)`` for ``Im k > 0``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    out = trace_partial_sums(ScatteringModel(graph), k, n_max)[-1]
    return out if np.ndim(k) else complex(out)


def staircase_offset(graph, eps_ratio: float = 1e-8) -> float:
    """``N_bar(0)`` chosen so the exact staircase vanishes just above ``k = 0``.

    Evaluated from the eigenvalues of ``S`` close to the origin, where a
    principal-branch ``log(1 - s)`` per eigenvalue equals the trace series.
    """
    model = ScatteringModel(graph)
    S0 = float(model.action.sum()) / 2
    delta = 1e-7 * math.pi / S0
    k = delta + 1j * eps_ratio * delta
    s = np.linalg.eigvals(model.stack(k))
    fluct = float(np.sum(-np.log(1 - s)).imag) / math.pi
    return -(S0 * delta / math.pi) - fluct


def staircase_numeric(graph, k, eps: float, n_max: int, offset: float | None = None):
    """``N_bar(k) + (1/pi) Im sum_{n<=n_max} Tr S(k + i eps)^n / n``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    model = ScatteringModel(graph)
    S0 = float(model.action.sum()) / 2
    if offset is None:
        offset = staircase_offset(graph)
    kk = np.asarray(k, dtype=float)
    fluct = trace_partial_sums(model, kk + 1j * eps, n_max)[-1].imag / math.pi
    out = S0 * kk / math.pi + offset + fluct
    return out if np.ndim(k) else float(out)


def _panel_nodes(edges, panels, points):
    x, w = np.polynomial.legendre.leggauss(points)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        cuts = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(cuts)
        mid = 0.5 * (cuts[:-1] + cuts[1:])
        nodes.append((mid[:, None] + half[:, None] * x).ravel())
        weights.append((half[:, None] * w).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def numeric_sweep(graph, n: int, l_values: Sequence[int], eps: float = DEFAULT_EPS,
                  quad_points: int = 32, tol: float = 1e-10, max_doublings: int = 8,
                  eq: TrigSpectralEquation | None = None) -> np.ndarray:
    """``k_n(l)`` from the trace sums for every ``l`` in ``l_values`` on one shared grid.

    The interval is split at the allowed-zone edges; each piece carries
    composite Gauss-Legendre panels that are doubled until every requested
    ``l`` changes by less than ``tol``.
    """
    g = as_linear(graph)
    eq = eq or trig_equation(g)
    require_regular(eq)
    if eps <= 0:
        raise ValueError("eps must be positive")
    ls = np.asarray(l_values, dtype=int)
    if ls.size == 0 or ls.min() < 1:
        raise ValueError("truncation lengths must be >= 1")
    model = ScatteringModel(g)
    S0 = eq.total_action
    lo, hi, zlo, zhi = (float(x) for x in root_windows(eq, n))
    edges = np.array([lo, zlo, zhi, hi])
    n_max = 2 * int(ls.max())

    freq = n_max * float(model.action.max())
    widest = float(np.diff(edges).max())
    panels = max(1, int(math.ceil(freq * widest / (2 * math.pi) * 4 / quad_points)))

    ends = trace_partial_sums(model, np.array([lo, hi]) + 1j * eps, n_max)[2 * ls - 1].imag / math.pi
    mean_part = (S0 / math.pi) * (hi * hi - lo * lo) / 2
    boundary = hi * (S0 * hi / math.pi + ends[:, 1]) - lo * (S0 * lo / math.pi + ends[:, 0])

    previous = None
    for _ in range(max_doublings):
        nodes, weights = _panel_nodes(edges, panels, quad_points)
        fluct = trace_partial_sums(model, nodes + 1j * eps, n_max)[2 * ls - 1].imag / math.pi
        result = boundary - (fluct @ weights + mean_part)
        if previous is not None and np.max(np.abs(result - previous)) < tol:
            return result
        previous = result
        panels *= 2
    raise QuadratureError(f"quadrature for n={n} did not converge to {tol:g}; eps too small "
                          f"for the grid or l too large")


def eigenvalue_numeric(graph, n: int, l: int, eps: float = DEFAULT_EPS, quad_points: int = 32,
                       tol: float = 1e-10, eq: TrigSpectralEquation | None = None) -> float:
    """``k_n(l)`` from the trace sums truncated at ``n_max = 2l``."""
    if l < 1:
        raise ValueError("l must be >= 1")
    return float(numeric_sweep(graph, n, [l], eps, quad_points, tol, eq=eq)[0])
