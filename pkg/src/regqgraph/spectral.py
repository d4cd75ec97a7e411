"""Trigonometric spectral equation of linear graphs and its exact roots.

Canonical form::

    cos(S0 k - pi g0) = sum_i a_i cos(W_i k - pi g_i),   0 <= W_i < S0

Phases are stored as fractions of pi (``gamma``) and normalised into
``[0, 1)`` by absorbing signs into the amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import BracketError, NotRegularError, TermCountError, UnsupportedBoundaryError
from .graph import Boundary, as_linear

MAX_SYMBOLIC_BONDS = 16


@dataclass(frozen=True)
class TrigTerm:
    amplitude: float
    frequency: float
    gamma: float


@dataclass(frozen=True)
class TrigSpectralEquation:
    total_action: float
    gamma0: float
    terms: tuple[TrigTerm, ...]
    mu: int | None = None
    n_bonds: int | None = None

    @property
    def alpha(self) -> float:
        return math.fsum(abs(t.amplitude) for t in self.terms)

    @property
    def spacing(self) -> float:
        return math.pi / self.total_action

    def phi(self, k):
        k = np.asarray(k, dtype=float)
        out = np.zeros_like(k)
        for t in self.terms:
            out = out + t.amplitude * np.cos(t.frequency * k - math.pi * t.gamma)
        return out

    def __call__(self, k):
        """Residual ``cos(S0 k - pi g0) - Phi(k)``."""
        k = np.asarray(k, dtype=float)
        return np.cos(self.total_action * k - math.pi * self.gamma0) - self.phi(k)

    def derivative(self, k):
        k = np.asarray(k, dtype=float)
        out = -self.total_action * np.sin(self.total_action * k - math.pi * self.gamma0)
        for t in self.terms:
            out = out + t.amplitude * t.frequency * np.sin(t.frequency * k - math.pi * t.gamma)
        return out


def _normalise_phase(amplitude, phase):
    """Return ``(a, gamma)`` with ``a cos(x - pi gamma)`` equal to ``amplitude cos(x - phase)``."""
    phase = math.fmod(phase, 2 * math.pi)
    if phase < 0:
        phase += 2 * math.pi
    if phase >= math.pi:
        phase -= math.pi
        amplitude = -amplitude
    gamma = phase / math.pi
    if math.isclose(gamma, 1.0, abs_tol=1e-13):
        gamma, amplitude = 0.0, -amplitude
    return amplitude, gamma


def _transfer_coefficients(betas, actions):
    """Expand ``psi(end)`` as ``sum_s c_s exp(i k s.S)`` over sign vectors ``s``.

    Per bond the (psi, psi'/k) transfer matrix
    ``[[cos t, sin t / b], [-b sin t, cos t]]`` splits into
    ``e^{it} P + e^{-it} Q``; the start vector encodes a Dirichlet wall.
    """
    states = {(): np.array([0.0, 1.0], dtype=complex)}
    for b in betas:
        P = 0.5 * np.array([[1.0, -1j / b], [1j * b, 1.0]])
        Q = 0.5 * np.array([[1.0, 1j / b], [-1j * b, 1.0]])
        nxt = {}
        for signs, vec in states.items():
            nxt[signs + (1,)] = P @ vec
            nxt[signs + (-1,)] = Q @ vec
        states = nxt
    actions = np.asarray(actions, dtype=float)
    return [(float(np.dot(s, actions)), complex(v[0])) for s, v in states.items()]


def trig_equation(graph, determine=True) -> TrigSpectralEquation:
    """Canonical spectral equation of a linear graph with Dirichlet ends."""
    g = as_linear(graph)
    if g.bc_left is not Boundary.DIRICHLET or g.bc_right is not Boundary.DIRICHLET:
        raise UnsupportedBoundaryError("trigonometric form requires Dirichlet dead ends")
    if g.n_bonds > MAX_SYMBOLIC_BONDS:
        raise TermCountError(f"{g.n_bonds} bonds exceed the symbolic expansion limit "
                             f"({MAX_SYMBOLIC_BONDS})")
    S = g.actions
    S0 = g.total_action
    coeffs = _transfer_coefficients(g.betas, S)
    lead = sum(c for w, c in coeffs if math.isclose(w, S0, rel_tol=1e-13))
    phase0 = -np.angle(lead)
    sign, gamma0 = _normalise_phase(1.0, phase0)
    scale = abs(lead)

    groups: dict[float, complex] = {}
    tol = 1e-12 * S0
    for w, c in coeffs:
        if abs(abs(w) - S0) <= tol or w < -tol:
            continue
        key = next((q for q in groups if abs(q - w) <= tol), None)
        if key is None:
            groups[w] = c
        else:
            groups[key] += c

    terms = []
    for w in sorted(groups):
        c = groups[w]
        if abs(w) <= tol:
            a, gam = -sign * c.real / scale, 0.0
            w = 0.0
        else:
            a, gam = _normalise_phase(-sign * abs(c) / scale, -np.angle(c))
        if abs(a) > 1e-15:
            terms.append(TrigTerm(float(a), float(w), float(gam)))
    if len(terms) > 3 ** g.n_bonds - 1:
        raise TermCountError(f"{len(terms)} terms exceed the bound 3^N_B - 1")
    eq = TrigSpectralEquation(S0, gamma0, tuple(terms), None, g.n_bonds)
    if determine and eq.alpha < 1:
        eq = replace(eq, mu=determine_mu(eq))
    return eq


def regularity(eq: TrigSpectralEquation) -> tuple[float, bool]:
    alpha = eq.alpha
    return alpha, alpha < 1


def require_regular(eq: TrigSpectralEquation) -> None:
    alpha, ok = regularity(eq)
    if not ok:
        raise NotRegularError(alpha)


def four_vertex_bound(r2):
    """Upper edge ``(1 - |r2|) / (1 + |r2|)`` of the regular diamond in the (r2, r3) plane."""
    r2 = np.abs(np.asarray(r2, dtype=float))
    return (1 - r2) / (1 + r2)


def four_vertex_alpha(r2, r3):
    r2, r3 = np.asarray(r2, dtype=float), np.asarray(r3, dtype=float)
    return np.abs(r3) + np.abs(r2 * r3) + np.abs(r2)


def four_vertex_region(grid: int):
    """Sample the regularity boundary ``r3 = +-(1-|r2|)/(1+|r2|)`` on ``r2 in [-1, 1]``.

    Returns ``(r2, upper, lower)``.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    r2 = np.linspace(-1.0, 1.0, grid)
    upper = four_vertex_bound(r2)
    return r2, upper, -upper


def four_vertex_classification(grid: int):
    """Regular / non-regular flags on a ``grid x grid`` lattice of ``[-1, 1]^2``."""
    r2, r3 = np.meshgrid(np.linspace(-1, 1, grid), np.linspace(-1, 1, grid), indexing="ij")
    return r2, r3, four_vertex_alpha(r2, r3) < 1


def separators(eq: TrigSpectralEquation, n):
    """Separating points ``(pi/S0) (n + mu + g0 + 1)``; ``n`` may be an array."""
    if eq.mu is None:
        raise ValueError("mu has not been determined for this equation")
    n = np.asarray(n)
    return eq.spacing * (n + eq.mu + eq.gamma0 + 1)


def _first_positive_root(eq, k_max, steps_per_interval=64):
    h = eq.spacing / steps_per_interval
    ks = h * np.arange(1, int(math.ceil(k_max / h)) + 2)
    f = eq(ks)
    hit = np.flatnonzero((f[:-1] == 0) | (np.sign(f[:-1]) * np.sign(f[1:]) < 0))
    if hit.size == 0:
        return None
    i = hit[0]
    if f[i] == 0:
        return float(ks[i])
    lo, hi = float(ks[i]), float(ks[i + 1])
    flo = f[i]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = eq(mid)
        if fm == 0 or hi - lo <= 1e-15 * hi:
            break
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def determine_mu(eq: TrigSpectralEquation) -> int:
    """Offset placing the first positive root in ``I_1``."""
    k1 = _first_positive_root(eq, 3 * eq.spacing)
    if k1 is None:
        raise BracketError("no positive root below 3 pi / S0; malformed equation")
    return int(math.floor(k1 / eq.spacing - eq.gamma0 - 1))


@dataclass(frozen=True)
class RootWindow:
    n: int
    interval: tuple[float, float]
    zone: tuple[float, float]
    forbidden: tuple[float, float]
    u: float


def zone_offset(eq: TrigSpectralEquation) -> float:
    """Distance ``arccos(alpha)/S0`` between a root zone edge and the nearest ``pi/S0`` grid point."""
    return math.acos(min(eq.alpha, 1.0)) / eq.total_action


def root_windows(eq: TrigSpectralEquation, n):
    """Arrays ``(interval_lo, interval_hi, zone_lo, zone_hi)`` for levels ``n``."""
    n = np.asarray(n)
    hi = separators(eq, n)
    lo = hi - eq.spacing
    d = zone_offset(eq)
    return lo, hi, lo + d, hi - d


def root_window(eq: TrigSpectralEquation, n: int) -> RootWindow:
    lo, hi, zlo, zhi = (float(x) for x in root_windows(eq, n))
    d = zone_offset(eq)
    return RootWindow(n, (lo, hi), (zlo, zhi), (hi - d, hi + d), d / eq.spacing)


def _as_levels(n_range) -> np.ndarray:
    if isinstance(n_range, (int, np.integer)):
        return np.array([int(n_range)])
    return np.array(list(n_range), dtype=int)


def exact_roots(eq: TrigSpectralEquation, n_range: Iterable[int] | int,
                check_samples: int = 33) -> np.ndarray:
    """Root ``k_n`` in each separator interval, by bisection plus one Newton polish."""
    require_regular(eq)
    ns = _as_levels(n_range)
    lo, hi, zlo, zhi = root_windows(eq, ns)
    flo, fhi = eq(lo), eq(hi)
    if np.any(flo * fhi >= 0):
        bad = ns[flo * fhi >= 0]
        raise BracketError(f"no sign change across I_n for n={bad[:5].tolist()}")

    # uniqueness: exactly one sign change on a sample grid over each interval
    t = np.linspace(0.0, 1.0, check_samples)
    grid = lo[:, None] + (hi - lo)[:, None] * t
    fs = np.sign(eq(grid))
    changes = np.count_nonzero(fs[:, :-1] * fs[:, 1:] < 0, axis=1)
    if np.any(changes != 1):
        raise BracketError(f"interval without a unique root: n={ns[changes != 1][:5].tolist()}")

    a, b, fa = lo.copy(), hi.copy(), flo.copy()
    target = 1e-14 * np.abs(hi)
    for _ in range(200):
        active = (b - a) > target
        if not active.any():
            break
        mid = 0.5 * (a + b)
        fm = eq(mid)
        same = np.sign(fm) == np.sign(fa)
        a = np.where(active & same, mid, a)
        fa = np.where(active & same, fm, fa)
        b = np.where(active & ~same, mid, b)
    k = 0.5 * (a + b)
    newton = k - eq(k) / eq.derivative(k)
    ok = (newton >= lo) & (newton <= hi) & (np.abs(eq(newton)) <= np.abs(eq(k)))
    k = np.where(ok, newton, k)

    resid = np.abs(eq(k))
    if np.any(resid >= 1e-12 * np.maximum(1.0, eq.total_action * k)):
        raise BracketError("root refinement did not reach |f| < 1e-12")
    slack = 1e-12 * np.abs(k)
    if np.any((k < zlo - slack) | (k > zhi + slack)):
        raise BracketError("root outside its allowed zone")
    _check_parity_branch(eq, ns, k)
    return k


def _check_parity_branch(eq, ns, k):
    """Confirm the explicit arccos form of each root."""
    phi = np.clip(eq.phi(k), -1.0, 1.0)
    even = (ns + eq.mu) % 2 == 0
    branch = np.where(even, np.arccos(phi), math.pi - np.arccos(phi))
    pred = eq.spacing * (ns + eq.mu + eq.gamma0) + branch / eq.total_action
    if np.any(np.abs(pred - k) > 1e-8 * np.maximum(1.0, k)):
        raise BracketError("root does not satisfy its parity branch")


def mean_staircase(eq: TrigSpectralEquation, k):
    """Average counting function and density ``(N_bar(k), S0/pi)``.

    ``N_bar(0) = -(mu + g0 + 1)`` puts ``N_bar`` at ``n - 1/2`` on the mean
    root position of level ``n``, which gives ``N(0+) = 0`` for the exact
    staircase.
    """
    rho = eq.total_action / math.pi
    return rho * np.asarray(k, dtype=float) + mean_staircase_offset(eq), rho


def mean_staircase_offset(eq: TrigSpectralEquation) -> float:
    if eq.mu is None:
        raise ValueError("mu has not been determined for this equation")
    return -(eq.mu + eq.gamma0 + 1.0)
