"""Brute-force facet machinery for tiny instances.

The envelopment polyhedron P is homogenised into the cone generated by
``(1, x_j, y_j)`` for each DMU (or ``(1, 0, 0)`` and rays ``(0, x_j, y_j)``
under CRS), the trade-off rays ``(0, r-_t, r+_t)`` and the disposability
rays ``(0, e_i, 0)`` and ``(0, 0, -e_r)``. A facet ``a.(t, x, y) >= 0`` of
that cone with ``a = (-sigma, v, -u)`` is a facet ``v x - u y >= sigma``
of P, except for ``t >= 0`` which is dropped.

Facets are found by the double description method on the inequality
system ``G a >= 0`` whose extreme rays are the facet normals. All
arithmetic uses :class:`fractions.Fraction` built from the exact binary
values of the inputs, so adjacency and deduplication are exact.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.typing import ArrayLike

from maxrgm.core import Dataset, FloatArray, Rts, Technology, TradeoffSpec
from maxrgm.errors import DivisionByZeroNormal, InstanceTooLarge

MAX_DIM = 4
MAX_GENERATORS = 8

Vec = tuple[Fraction, ...]


@dataclass(frozen=True, eq=False)
class Facet:
    """``v x - u y >= sigma`` with ``sum(v) + sum(u) = 1``."""

    v: FloatArray
    u: FloatArray
    sigma: float
    exact: tuple[Vec, Vec, Fraction]

    def slack(self, x: ArrayLike, y: ArrayLike) -> float:
        return float(self.v @ np.asarray(x, float) - self.u @ np.asarray(y, float) - self.sigma)

    def __repr__(self) -> str:
        return f"Facet(v={self.v.tolist()}, u={self.u.tolist()}, sigma={self.sigma})"


def _generators(tech: Technology) -> list[Vec]:
    m, s = tech.m, tech.s
    F = Fraction
    gens: list[Vec] = []
    X, Y = tech.dataset.X, tech.dataset.Y
    if tech.rts is Rts.VRS_TO:
        for j in range(tech.n):
            gens.append((F(1), *map(F, X[:, j].tolist()), *map(F, Y[:, j].tolist())))
    else:
        gens.append((F(1),) + (F(0),) * (m + s))
        for j in range(tech.n):
            gens.append((F(0), *map(F, X[:, j].tolist()), *map(F, Y[:, j].tolist())))
    Rm, Rp = tech.tradeoffs.R_minus, tech.tradeoffs.R_plus
    for t in range(tech.K):
        gens.append((F(0), *map(F, Rm[:, t].tolist()), *map(F, Rp[:, t].tolist())))
    for i in range(m):
        gens.append(tuple(F(1) if k == 1 + i else F(0) for k in range(1 + m + s)))
    for r in range(s):
        gens.append(tuple(F(-1) if k == 1 + m + r else F(0) for k in range(1 + m + s)))
    return gens


def _dot(a: Vec, b: Vec) -> Fraction:
    return sum((p * q for p, q in zip(a, b)), Fraction(0))


def _rank(rows: Sequence[Vec]) -> int:
    mat = [list(r) for r in rows]
    if not mat:
        return 0
    rank, cols = 0, len(mat[0])
    for c in range(cols):
        piv = next((k for k in range(rank, len(mat)) if mat[k][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        for k in range(len(mat)):
            if k != rank and mat[k][c] != 0:
                f = mat[k][c] / mat[rank][c]
                mat[k] = [a - f * b for a, b in zip(mat[k], mat[rank])]
        rank += 1
        if rank == len(mat):
            break
    return rank


def _solve_square(M: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(M)
    aug = [row[:] + [b[k]] for k, row in enumerate(M)]
    for c in range(n):
        piv = next(k for k in range(c, n) if aug[k][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        for k in range(n):
            if k != c and aug[k][c] != 0:
                f = aug[k][c] / aug[c][c]
                aug[k] = [a - f * q for a, q in zip(aug[k], aug[c])]
    return [aug[k][n] / aug[k][k] for k in range(n)]


def _primitive(a: Vec) -> Vec:
    """Scale so the largest absolute entry is 1 (a canonical representative)."""
    big = max(abs(c) for c in a)
    return tuple(c / big for c in a)


def extreme_rays(G: Sequence[Vec]) -> list[Vec]:
    """Extreme rays of the pointed cone ``{a | g.a >= 0 for g in G}`` by double description.

    ``G`` must have full column rank.
    """
    d = len(G[0])
    # pick d linearly independent rows to start from
    basis_rows: list[int] = []
    for k in range(len(G)):
        if _rank([G[b] for b in basis_rows] + [G[k]]) > len(basis_rows):
            basis_rows.append(k)
            if len(basis_rows) == d:
                break
    if len(basis_rows) < d:
        raise ValueError("generator matrix is rank deficient")
    B = [list(G[k]) for k in basis_rows]
    # initial rays: columns of B^{-1}, i.e. solutions of B a = e_k
    rays: list[Vec] = []
    for k in range(d):
        e = [Fraction(int(k == j)) for j in range(d)]
        rays.append(_primitive(tuple(_solve_square(B, e))))
    added = list(basis_rows)
    for k in range(len(G)):
        if k in basis_rows:
            continue
        g = G[k]
        vals = [_dot(g, r) for r in rays]
        pos = [(r, v) for r, v in zip(rays, vals) if v > 0]
        zero = [r for r, v in zip(rays, vals) if v == 0]
        neg = [(r, v) for r, v in zip(rays, vals) if v < 0]
        new: list[Vec] = []
        for rp, vp in pos:
            tight_p = {h for h in added if _dot(G[h], rp) == 0}
            for rn, vn in neg:
                common = [h for h in added if h in tight_p and _dot(G[h], rn) == 0]
                if len(common) < d - 2 or _rank([G[h] for h in common]) < d - 2:
                    continue
                combo = tuple(vp * cn - vn * cp for cp, cn in zip(rp, rn))
                new.append(_primitive(combo))
        rays = [r for r, _ in pos] + zero + new
        added.append(k)
    unique: dict[Vec, None] = {}
    for r in rays:
        unique.setdefault(r, None)
    return list(unique)


def enumerate_facets(tech: Technology) -> list[Facet]:
    """Complete duplicate-free facet list of the envelopment polyhedron."""
    if tech.m + tech.s > MAX_DIM or tech.n + tech.K > MAX_GENERATORS:
        raise InstanceTooLarge(
            f"facet enumeration is limited to m+s <= {MAX_DIM} and n+K <= {MAX_GENERATORS}"
        )
    m, s = tech.m, tech.s
    facets = []
    seen: set[tuple] = set()
    for a in extreme_rays(_generators(tech)):
        v = a[1 : 1 + m]
        u = tuple(-c for c in a[1 + m :])
        total = sum(v) + sum(u)
        if total == 0:
            continue  # the homogenising face t >= 0
        v = tuple(c / total for c in v)
        u = tuple(c / total for c in u)
        sigma = -a[0] / total
        key = (v, u, sigma)
        if key in seen:
            continue
        seen.add(key)
        facets.append(
            Facet(
                _ro(np.array([float(c) for c in v])),
                _ro(np.array([float(c) for c in u])),
                float(sigma),
                key,
            )
        )
    facets.sort(key=lambda f: (f.exact[2], f.exact[0], f.exact[1]))
    return facets


def _ro(a: np.ndarray) -> FloatArray:
    a.setflags(write=False)
    return a


def contains(facets: Sequence[Facet], x: ArrayLike, y: ArrayLike) -> bool:
    """Exact test of every facet inequality (orthant conditions not included)."""
    xe, ye = _exact(x), _exact(y)
    return all(_dot(f.exact[0], xe) - _dot(f.exact[1], ye) >= f.exact[2] for f in facets)


def _exact(values: ArrayLike) -> Vec:
    return tuple(Fraction(float(c)) for c in np.asarray(values, float).reshape(-1))


def phi_natural(facets: Sequence[Facet], x: ArrayLike, y: ArrayLike, r: int, strict: bool = False) -> float:
    """Closed-form largest expansion of output ``r`` alone.

    Facets whose ``u_r`` is zero do not bound that expansion and are skipped;
    with ``strict=True`` they raise :class:`DivisionByZeroNormal` instead.
    Returns ``inf`` when no facet bounds the expansion. Evaluated exactly.
    """
    xe, ye = _exact(x), _exact(y)
    if not ye[r] > 0:
        raise ValueError(f"output {r} is not positive")
    best: Fraction | None = None
    for f in facets:
        v, u, sigma = f.exact
        if u[r] == 0:
            if strict:
                raise DivisionByZeroNormal(f"facet {f!r} has zero weight on output {r}")
            continue
        others = _dot(u, ye) - u[r] * ye[r]
        ratio = (_dot(v, xe) - others - sigma) / (u[r] * ye[r])
        best = ratio if best is None else min(best, ratio)
    return float("inf") if best is None else float(best)


def theta_natural(facets: Sequence[Facet], x: ArrayLike, y: ArrayLike, i: int) -> float:
    """Closed-form smallest contraction of input ``i`` alone, clamped at zero. Evaluated exactly."""
    xe, ye = _exact(x), _exact(y)
    if not xe[i] > 0:
        raise ValueError(f"input {i} is not positive")
    best = Fraction(0)
    for f in facets:
        v, u, sigma = f.exact
        if v[i] > 0:
            others = _dot(v, xe) - v[i] * xe[i]
            best = max(best, (sigma + _dot(u, ye) - others) / (v[i] * xe[i]))
    return float(best)


def all_normals_positive(facets: Sequence[Facet]) -> bool:
    return all(np.all(f.v > 0) and np.all(f.u > 0) for f in facets)


# --- random tiny instances -------------------------------------------------------


def _random_data(rng: np.random.Generator, m: int, s: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    # integer data keep exact degeneracies exact in binary floating point;
    # decimal data such as 1.8 and 5.4 produce facets with 1e-16 coefficients
    # that no tolerance-based LP can resolve
    X = rng.integers(1, 11, size=(m, n)).astype(float)
    Y = rng.integers(0, 11, size=(s, n)).astype(float)
    Y[:, Y.max(axis=0) == 0] = 1.0
    return X, Y


def random_positive_instance(rng: np.random.Generator, m: int, s: int, n: int) -> Technology:
    """Tiny VRS technology whose trade-offs force every admissible price to be positive.

    A random positive price ``(v0, u0)`` is drawn. The coordinates are
    visited in a random cycle and, for each consecutive pair, one trade-off
    column makes the first multiplier bound the next from below; ``(v0, u0)``
    satisfies every such bound, so the cycle is consistent and forces all
    multipliers of a normalised price to be strictly positive.
    """
    k = m + s
    if k > MAX_DIM or n + k > MAX_GENERATORS:
        raise InstanceTooLarge("instance exceeds the oracle limits")
    price = rng.uniform(0.5, 2.0, size=k)  # (v0, u0)
    X, Y = _random_data(rng, m, s, n)
    order = rng.permutation(k)
    Rm = np.zeros((m, k))
    Rp = np.zeros((s, k))
    for t in range(k):
        a_idx, b_idx = int(order[t]), int(order[(t + 1) % k])
        a = float(rng.integers(1, 5))
        rho = float(rng.uniform(0.3, 1.0))
        b = a * price[a_idx] / price[b_idx] * rho  # price[a]*a - price[b]*b >= 0
        # column contributes  +a to multiplier a_idx and -b to b_idx in v R- - u R+
        for idx, coef in ((a_idx, a), (b_idx, -b)):
            if idx < m:
                Rm[idx, t] += coef
            else:
                Rp[idx - m, t] -= coef
    spec = TradeoffSpec.from_matrices(Rm, Rp)
    return Technology(Dataset.from_arrays(X, Y), spec, Rts.VRS_TO)


def random_plain_instance(rng: np.random.Generator, m: int, s: int, n: int, rts: Rts = Rts.VRS_TO) -> Technology:
    """Tiny technology with no trade-offs (facet normals may have zeros)."""
    X, Y = _random_data(rng, m, s, n)
    return Technology(Dataset.from_arrays(X, Y), None, rts)
