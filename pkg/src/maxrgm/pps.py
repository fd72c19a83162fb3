"""Membership, single-coordinate expansion/contraction and slack LPs over a technology.

All programs share the same envelopment block: variables ``(lambda, pi)``
followed by model-specific columns, input rows ``X lambda + R- pi <= .``,
output rows ``Y lambda + R+ pi >= .`` and, for VRS with trade-offs, the
convexity row ``sum(lambda) = 1``.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from maxrgm.core import Dmu, FloatArray, Rts, Technology, index_sets
from maxrgm.errors import (
    DimensionMismatch,
    NotInTechnology,
    Unbounded,
    UnboundedExpansion,
    ZeroInputIndex,
    ZeroOutputIndex,
)
from maxrgm.lp import LinearProgram, LpOutcome, Relation, Sense, SolverSettings, Status, solve


def envelopment_lp(
    tech: Technology,
    extra_in: FloatArray,
    extra_out: FloatArray,
    x_rhs: FloatArray,
    y_rhs: FloatArray,
    objective_extra: FloatArray,
    sense: Sense,
    extra_lower: FloatArray | None = None,
    extra_upper: FloatArray | None = None,
    extra_rows: list[tuple[FloatArray, Relation, float]] | None = None,
) -> LinearProgram:
    """Assemble an LP over ``(lambda, pi, extra)``.

    ``extra_in`` (m x e) and ``extra_out`` (s x e) are the coefficients of the
    ``e`` model-specific variables in the input and output rows. Additional
    rows in ``extra_rows`` only involve the extra variables.
    """
    G_in, G_out = tech.generators()
    g = G_in.shape[1]
    e = extra_in.shape[1]
    A_in = np.hstack([G_in, extra_in])
    A_out = np.hstack([G_out, extra_out])
    blocks = [A_in, A_out]
    rels = [Relation.LE] * tech.m + [Relation.GE] * tech.s
    rhs = [np.asarray(x_rhs, dtype=float), np.asarray(y_rhs, dtype=float)]
    if tech.rts is Rts.VRS_TO:
        conv = np.zeros((1, g + e))
        conv[0, : tech.n] = 1.0
        blocks.append(conv)
        rels.append(Relation.EQ)
        rhs.append(np.ones(1))
    for coef, rel, b in extra_rows or ():
        row = np.zeros((1, g + e))
        row[0, g:] = coef
        blocks.append(row)
        rels.append(rel)
        rhs.append(np.array([b], dtype=float))
    c = np.concatenate([np.zeros(g), np.asarray(objective_extra, dtype=float)])
    lower = np.concatenate([np.zeros(g), np.zeros(e) if extra_lower is None else extra_lower])
    upper = np.concatenate([np.full(g, np.inf), np.full(e, np.inf) if extra_upper is None else extra_upper])
    return LinearProgram(c, np.vstack(blocks), tuple(rels), np.concatenate(rhs), lower, upper, sense)


def _check_dims(tech: Technology, x: FloatArray, y: FloatArray) -> None:
    if x.shape != (tech.m,) or y.shape != (tech.s,):
        raise DimensionMismatch(f"point has shape ({x.size}, {y.size}), technology expects ({tech.m}, {tech.s})")


def in_sign_domain(tech: Technology, x: FloatArray, y: FloatArray) -> bool:
    """Orthant part of the technology: VRS-TO needs y != 0, CRS needs x != 0."""
    if np.any(x < 0) or np.any(y < 0):
        return False
    if tech.rts is Rts.VRS_TO:
        return bool(np.any(y > 0))
    return bool(np.any(x > 0))


def feasibility_lp(tech: Technology, x: FloatArray, y: FloatArray) -> LinearProgram:
    return envelopment_lp(
        tech, np.zeros((tech.m, 0)), np.zeros((tech.s, 0)), x, y, np.zeros(0), Sense.MIN
    )


def membership(tech: Technology, x: ArrayLike, y: ArrayLike, settings: SolverSettings | None = None) -> bool:
    """True iff ``(x, y)`` lies in the technology (polyhedron and orthant conditions)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    _check_dims(tech, x, y)
    if not in_sign_domain(tech, x, y):
        return False
    return solve(feasibility_lp(tech, x, y), settings).optimal


def _require(outcome: LpOutcome, what: str) -> LpOutcome:
    if outcome.status is Status.INFEASIBLE:
        raise NotInTechnology(f"{what}: assessed point is not in the technology")
    return outcome


def expansion_lp(tech: Technology, x: FloatArray, y: FloatArray, r: int) -> LinearProgram:
    extra_out = np.zeros((tech.s, 1))
    extra_out[r, 0] = -y[r]
    y_rhs = y.copy()
    y_rhs[r] = 0.0
    return envelopment_lp(
        tech, np.zeros((tech.m, 1)), extra_out, x, y_rhs, np.ones(1), Sense.MAX,
        extra_lower=np.ones(1),
    )


def contraction_lp(tech: Technology, x: FloatArray, y: FloatArray, i: int) -> LinearProgram:
    extra_in = np.zeros((tech.m, 1))
    extra_in[i, 0] = -x[i]
    x_rhs = x.copy()
    x_rhs[i] = 0.0
    return envelopment_lp(
        tech, extra_in, np.zeros((tech.s, 1)), x_rhs, y, np.ones(1), Sense.MIN,
        extra_lower=np.zeros(1), extra_upper=np.ones(1),
    )


def expand_output(tech: Technology, x: ArrayLike, y: ArrayLike, r: int, settings: SolverSettings | None = None) -> float:
    """Vector form of :func:`max_output_expansion`."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    _check_dims(tech, x, y)
    if not 0 <= r < tech.s or not y[r] > 0:
        raise ZeroOutputIndex(f"output {r} is zero or out of range")
    out = _require(solve(expansion_lp(tech, x, y, r), settings), "max_output_expansion")
    if out.status is Status.UNBOUNDED:
        raise UnboundedExpansion(f"output {r} expands without limit")
    return float(out.primal[-1])


def contract_input(tech: Technology, x: ArrayLike, y: ArrayLike, i: int, settings: SolverSettings | None = None) -> float:
    """Vector form of :func:`min_input_contraction`."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    _check_dims(tech, x, y)
    if not 0 <= i < tech.m or not x[i] > 0:
        raise ZeroInputIndex(f"input {i} is zero or out of range")
    out = _require(solve(contraction_lp(tech, x, y, i), settings), "min_input_contraction")
    return float(out.primal[-1])


def max_output_expansion(tech: Technology, dmu: Dmu, r: int, settings: SolverSettings | None = None) -> float:
    """Largest factor by which output ``r`` (0-based) alone can grow while staying in the technology."""
    if r not in index_sets(dmu).i_plus_y:
        raise ZeroOutputIndex(f"output {r} of {dmu.name!r} is zero")
    return expand_output(tech, dmu.x, dmu.y, r, settings)


def min_input_contraction(tech: Technology, dmu: Dmu, i: int, settings: SolverSettings | None = None) -> float:
    """Smallest factor in [0, 1] to which input ``i`` (0-based) alone can shrink."""
    if i not in index_sets(dmu).i_plus_x:
        raise ZeroInputIndex(f"input {i} of {dmu.name!r} is zero")
    return contract_input(tech, dmu.x, dmu.y, i, settings)


def additive_lp(tech: Technology, x: FloatArray, y: FloatArray) -> LinearProgram:
    # slacks (eps-, eps+); eps- is capped by x so the improved point keeps x >= 0
    m, s = tech.m, tech.s
    extra_in = np.hstack([np.eye(m), np.zeros((m, s))])
    extra_out = np.hstack([np.zeros((s, m)), -np.eye(s)])
    upper = np.concatenate([x, np.full(s, np.inf)])
    return envelopment_lp(tech, extra_in, extra_out, x, y, np.ones(m + s), Sense.MAX, extra_upper=upper)


def additive_inefficiency(tech: Technology, dmu: Dmu, settings: SolverSettings | None = None) -> float:
    """Maximum total slack ``sum(eps-) + sum(eps+)``; zero exactly on the strong frontier."""
    return additive_inefficiency_at(tech, dmu.x, dmu.y, settings)


def additive_inefficiency_at(tech: Technology, x: ArrayLike, y: ArrayLike, settings: SolverSettings | None = None) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    _check_dims(tech, x, y)
    out = _require(solve(additive_lp(tech, x, y), settings), "additive_inefficiency")
    if out.status is Status.UNBOUNDED:
        raise Unbounded("total slack is unbounded")
    return max(0.0, float(out.value))
