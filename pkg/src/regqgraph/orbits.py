"""Periodic orbits of linear graphs: necklace counting, enumeration, actions, weights.

Three-vertex graphs use the two-letter wall code: ``L`` is a bounce off the
left dead end, ``R`` off the right one.  Longer chains use vertex walks: a
cyclic tuple of visited vertices, consecutive entries one bond apart.  Both
are stored as their lexicographically minimal rotation.  The code length of
a walk is half its number of steps, which agrees with the wall code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .graph import as_linear, reflection_coefficients

LN2 = math.log(2.0)


# -- counting -----------------------------------------------------------------

def euler_totient(n: int) -> int:
    """Number of ``1 <= m <= n`` coprime to ``n``; ``phi(1) = 1``."""
    if n < 1:
        raise ValueError("n must be positive")
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def necklace_count(length: int, alphabet: int = 2) -> int:
    """Exact number of necklaces of the given length."""
    if length < 1:
        raise ValueError("length must be positive")
    total = sum(euler_totient(d) * alphabet ** (length // d) for d in divisors(length))
    q, r = divmod(total, length)
    assert r == 0
    return q


def _logsumexp(xs) -> float:
    xs = list(xs)
    top = max(xs)
    return top + math.log(math.fsum(math.exp(x - top) for x in xs))


def necklace_count_log(length: int, alphabet: int = 2) -> float:
    """``ln N(length)`` without forming the large integer."""
    la = math.log(alphabet)
    terms = [math.log(euler_totient(d)) + (length // d) * la for d in divisors(length)]
    return _logsumexp(terms) - math.log(length)


def lyndon_count(length: int, alphabet: int = 2) -> int:
    """Number of aperiodic necklaces (prime orbit codes), by Moebius inversion."""
    def mobius(n):
        out, p = 1, 2
        while p * p <= n:
            if n % p == 0:
                n //= p
                if n % p == 0:
                    return 0
                out = -out
            p += 1
        return -out if n > 1 else out
    return sum(mobius(d) * alphabet ** (length // d) for d in divisors(length)) // length


def cumulative_orbit_count(l_max: int) -> int:
    """``#(l)``: binary necklaces of length ``<= l``, repetitions included."""
    return sum(necklace_count(m) for m in range(1, l_max + 1))


@dataclass(frozen=True)
class EntropyEstimate:
    l: int
    log_count: float
    value: float
    bound: float = LN2

    @property
    def exp_value(self) -> float:
        return math.exp(self.value)


def topological_entropy(l: int) -> EntropyEstimate:
    """Finite-length estimate ``ln #(l) / l`` for the binary code, in log domain."""
    if l < 2:
        raise ValueError("l must be >= 2")
    log_count = _logsumexp(necklace_count_log(m) for m in range(1, l + 1))
    return EntropyEstimate(l, log_count, log_count / l)


# -- words ----------------------------------------------------------------------

def prenecklaces(length: int, alphabet: int = 2) -> Iterator[tuple[tuple[int, ...], int]]:
    """FKM generation of all prenecklaces in lexicographic order.

    Yields ``(word, p)`` where ``p`` is the length of the longest Lyndon
    prefix; the word is a necklace iff ``length % p == 0`` and a Lyndon word
    iff ``p == length``.
    """
    a = [0] * (length + 1)
    p = 1
    yield tuple(a[1:]), p
    top = alphabet - 1
    while True:
        i = length
        while i > 0 and a[i] == top:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        p = i
        for j in range(i + 1, length + 1):
            a[j] = a[j - p]
        yield tuple(a[1:]), p


def lyndon_words(length: int, alphabet: int = 2) -> Iterator[tuple[int, ...]]:
    for word, p in prenecklaces(length, alphabet):
        if p == length:
            yield word


def necklaces(length: int, alphabet: int = 2) -> Iterator[tuple[int, ...]]:
    for word, p in prenecklaces(length, alphabet):
        if length % p == 0:
            yield word


def canonical_rotation(word: Sequence) -> tuple:
    w = tuple(word)
    return min(w[i:] + w[:i] for i in range(len(w))) if w else w


def primitive_root(word: Sequence) -> tuple[tuple, int]:
    """Split a word as ``prime ** nu`` with ``prime`` of minimal length."""
    w = tuple(word)
    n = len(w)
    for d in divisors(n):
        if w == w[:d] * (n // d):
            return w[:d], n // d
    raise AssertionError("unreachable")


def is_prime_word(word: Sequence) -> bool:
    return primitive_root(word)[1] == 1


WALL_LETTERS = "LR"


def letters_to_word(code: str) -> tuple[int, ...]:
    try:
        return tuple(WALL_LETTERS.index(c) for c in code)
    except ValueError:
        raise ValueError(f"orbit code {code!r} must use letters L and R") from None


def word_to_letters(word: Sequence[int]) -> str:
    return "".join(WALL_LETTERS[c] for c in word)


def wall_code_to_walk(code: str) -> tuple[int, ...]:
    """``L -> (0, 1)``, ``R -> (2, 1)``: the vertex walk of a three-vertex code."""
    walk = []
    for c in code:
        walk += [0, 1] if c == "L" else [2, 1]
    return canonical_rotation(walk)


# -- orbit terms ------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitTerm:
    prime: str | tuple[int, ...]
    nu: int
    code_length: int
    action: float
    weight: float


def _prime_walks(n_vertices: int, steps: int) -> list[tuple[int, ...]]:
    """Aperiodic closed walks of ``steps`` steps on a path, as minimal rotations."""
    out = []
    last = n_vertices - 1

    def extend(walk, start):
        if len(walk) == steps:
            if abs(walk[-1] - start) == 1 and canonical_rotation(walk) == tuple(walk) \
                    and is_prime_word(walk):
                out.append(tuple(walk))
            return
        v = walk[-1]
        for w in (v - 1, v + 1):
            if start <= w <= last:
                walk.append(w)
                extend(walk, start)
                walk.pop()

    for s in range(n_vertices - 1):
        extend([s], s)
    out.sort()
    return out


def _terms_at_length(graph, m: int):
    """(prime, nu) pairs whose total code length is exactly ``m``."""
    if graph.n_vertices == 3:
        pairs = [(word_to_letters(w), m // d) for d in divisors(m) for w in lyndon_words(d)]
    else:
        pairs = [(w, m // d) for d in divisors(m) for w in _prime_walks(graph.n_vertices, 2 * d)]
    pairs.sort()
    return pairs


def enumerate_orbit_terms(graph, l_max: int) -> Iterator[OrbitTerm]:
    """Stream every ``(prime, nu)`` with ``nu * |prime| <= l_max``, shortest first."""
    g = as_linear(graph)
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    for m in range(1, l_max + 1):
        for prime, nu in _terms_at_length(g, m):
            yield OrbitTerm(prime, nu, m, orbit_action(prime, g), orbit_weight(prime, g))


def _walk(code, g) -> tuple[int, ...]:
    if isinstance(code, str):
        if g.n_vertices != 3:
            raise ValueError("wall codes apply to three-vertex graphs only")
        return wall_code_to_walk(code)
    walk = tuple(int(v) for v in code)
    n = len(walk)
    if n < 2 or n % 2:
        raise ValueError("a closed walk on a chain has an even, nonzero number of steps")
    for i in range(n):
        a, b = walk[i], walk[(i + 1) % n]
        if abs(a - b) != 1 or not (0 <= a < g.n_vertices):
            raise ValueError(f"walk {walk} leaves the chain")
    return walk


def orbit_action(code, graph) -> float:
    """Reduced action of an orbit code (sum of traversed bond actions)."""
    g = as_linear(graph)
    S = g.actions
    if isinstance(code, str) and g.n_vertices == 3:
        w = letters_to_word(code)
        n_right = sum(w)
        return 2 * (len(w) - n_right) * float(S[0]) + 2 * n_right * float(S[1])
    walk = _walk(code, g)
    n = len(walk)
    return math.fsum(float(S[min(walk[i], walk[(i + 1) % n])]) for i in range(n))


def orbit_weight(code, graph) -> float:
    """Product of reflection and transmission amplitudes along the orbit.

    Reflections count ``+r_i`` from the lower bond side and ``-r_i`` from
    the upper one; dead ends contribute their boundary reflection; each pair
    of transmissions through ``V_i`` contributes ``1 - r_i^2``.
    """
    g = as_linear(graph)
    walk = _walk(code, g)
    r = reflection_coefficients(g)
    last = g.n_vertices - 1
    n = len(walk)
    weight = 1.0
    crossings = [0] * g.n_vertices
    for i in range(n):
        prev, cur, nxt = walk[i - 1], walk[i], walk[(i + 1) % n]
        if cur == 0 or cur == last:
            weight *= r[cur]
        elif prev == nxt:
            weight *= r[cur] if prev < cur else -r[cur]
        else:
            crossings[cur] += 1
    for v, c in enumerate(crossings):
        if c:
            weight *= (1.0 - r[v] ** 2) ** (c // 2)
    return weight


# -- vectorised tables -----------------------------------------------------------

@lru_cache(maxsize=None)
def _binary_lyndon_stats(length: int) -> np.ndarray:
    """Rows ``(n_R, n_LL, n_RR, n_changes)`` for every binary Lyndon word, lexicographic."""
    rows = []
    for w in lyndon_words(length):
        n_right = sum(w)
        same_l = same_r = changes = 0
        for i in range(length):
            a, b = w[i], w[(i + 1) % length]
            if a != b:
                changes += 1
            elif a:
                same_r += 1
            else:
                same_l += 1
        rows.append((n_right, same_l, same_r, changes))
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class OrbitTable:
    """Columnar orbit terms sorted by code length (then prime, then nu)."""

    code_length: np.ndarray
    nu: np.ndarray
    action: np.ndarray
    weight: np.ndarray

    def __len__(self):
        return len(self.code_length)

    def truncated(self, l: int) -> "OrbitTable":
        k = int(np.searchsorted(self.code_length, l, side="right"))
        return OrbitTable(self.code_length[:k], self.nu[:k], self.action[:k], self.weight[:k])

    def group_bounds(self) -> list[tuple[int, int, int]]:
        """``(code_length, start, stop)`` slices of equal code length."""
        lengths, starts = np.unique(self.code_length, return_index=True)
        stops = list(starts[1:]) + [len(self)]
        return [(int(m), int(a), int(b)) for m, a, b in zip(lengths, starts, stops)]


def orbit_table(graph, l_max: int) -> OrbitTable:
    g = as_linear(graph)
    cols = ([], [], [], [])
    if g.n_vertices == 3:
        S1, S2 = (float(x) for x in g.actions)
        r2 = float(reflection_coefficients(g)[1])
        wl, wr = g.bc_left.reflection, g.bc_right.reflection
        for m in range(1, l_max + 1):
            block = []
            for d in divisors(m):
                st = _binary_lyndon_stats(d)
                n_r = st[:, 0]
                action = 2.0 * (d - n_r) * S1 + 2.0 * n_r * S2
                weight = (wl ** (d - n_r) * wr ** n_r * r2 ** st[:, 1] * (-r2) ** st[:, 2]
                          * (1.0 - r2 * r2) ** (st[:, 3] // 2))
                block.append((d, action, weight, m // d))
            # ties: lexicographic prime order interleaves lengths; order within a group is
            # immaterial to the exactly rounded group sums, so blocks stay by divisor
            for d, action, weight, nu in block:
                cols[0].append(np.full(len(action), m))
                cols[1].append(np.full(len(action), nu))
                cols[2].append(action)
                cols[3].append(weight)
    else:
        for t in enumerate_orbit_terms(g, l_max):
            cols[0].append([t.code_length])
            cols[1].append([t.nu])
            cols[2].append([t.action])
            cols[3].append([t.weight])
    arrays = [np.concatenate(c) if c else np.empty(0) for c in cols]
    return OrbitTable(arrays[0].astype(np.int64), arrays[1].astype(np.int64),
                      arrays[2].astype(float), arrays[3].astype(float))


def wall_transfer_matrix(graph, k):
    """2x2 letter matrix ``M`` with ``sum_{|code|=m} A^nu e^{i nu S k} / nu = Tr(M^m) / m``.

    Returns ``(M, dM/dk)`` with a leading axis over ``k``.
    """
    g = as_linear(graph)
    if g.n_vertices != 3:
        raise ValueError("wall transfer matrix is defined for three-vertex graphs")
    S = g.actions
    r2 = float(reflection_coefficients(g)[1])
    t = math.sqrt(1.0 - r2 * r2)
    walls = np.array([g.bc_left.reflection, g.bc_right.reflection])
    pair = np.array([[r2, t], [t, -r2]])
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    phase = np.exp(2j * k[:, None] * S[None, :])
    M = (walls * phase)[:, :, None] * pair
    dM = (2j * S * walls * phase)[:, :, None] * pair
    return M, dM
