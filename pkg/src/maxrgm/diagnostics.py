"""Pre-flight checks on a technology.

* facet positivity: a sufficient LP test that every facet normal of the
  envelopment polyhedron is strictly positive, so weak and strong frontiers
  coincide;
* free lunch: whether some point with zero input and nonzero output lies in
  the polyhedron, solved in primal and dual form;
* trade-off consistency: feasibility of a multiplier system built from
  pairs of DMUs;
* the strongly efficient set, via the additive slack model.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from maxrgm import pps
from maxrgm.core import Dataset, FloatArray, Rts, Technology
from maxrgm.errors import AssumptionViolated, InvalidIds
from maxrgm.lp import LinearProgram, LpOutcome, Relation, Sense, SolverSettings, Status, dual_value, solve

POSITIVITY_TOL = 1e-9
FREE_LUNCH_TOL = 1e-9
EFFICIENCY_TOL = 1e-6
DUALITY_TOL = 1e-6


class Feasibility(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class DiagnosticsReport:
    """``v_star``/``u_star`` hold NaN where the positivity LP was infeasible.

    ``free_lunch_value`` is None when the free-lunch LP is infeasible and
    ``inf`` when it is unbounded. ``notes`` collects annotations such as an
    unmet hypothesis.
    """

    v_star: FloatArray
    u_star: FloatArray
    facet_positivity_passed: bool
    free_lunch_value: float | None
    has_free_lunch: bool
    free_lunch_dual_value: float | None = None
    notes: tuple[str, ...] = ()
    duality_gaps: tuple[float, ...] = field(default=(), repr=False)


def _multiplier_lp(tech: Technology, objective: FloatArray) -> LinearProgram:
    """min objective.(v, u) s.t. sum(v) + sum(u) = 1, v R- - u R+ >= 0, v, u >= 0."""
    m, s = tech.m, tech.s
    Rm, Rp = tech.tradeoffs.R_minus, tech.tradeoffs.R_plus
    A = np.vstack([np.ones((1, m + s)), np.hstack([Rm.T, -Rp.T])])
    rels = (Relation.EQ,) + (Relation.GE,) * tech.K
    b = np.concatenate([[1.0], np.zeros(tech.K)])
    return LinearProgram(objective, A, rels, b, sense=Sense.MIN)


def positivity_lps(tech: Technology) -> list[LinearProgram]:
    k = tech.m + tech.s
    return [_multiplier_lp(tech, np.eye(k)[j]) for j in range(k)]


def facet_positivity_check(tech: Technology, settings: SolverSettings | None = None) -> DiagnosticsReport:
    """Minimise each multiplier over the normalised cone of admissible prices."""
    values = []
    gaps = []
    for lp in positivity_lps(tech):
        out = solve(lp, settings)
        if out.optimal:
            values.append(out.value)
            gaps.append(_gap(lp, out))
        else:
            values.append(np.nan)
    vals = np.array(values)
    v, u = vals[: tech.m], vals[tech.m :]
    passed = bool(np.all(np.isfinite(vals)) and np.min(vals) > POSITIVITY_TOL)
    v.setflags(write=False)
    u.setflags(write=False)
    return DiagnosticsReport(v, u, passed, None, False, duality_gaps=tuple(gaps))


def _gap(lp: LinearProgram, out: LpOutcome) -> float:
    gap = abs(out.value - dual_value(lp, out)) / (1.0 + abs(out.value))
    if gap > DUALITY_TOL:
        raise AssumptionViolated(f"primal and dual values disagree (relative gap {gap:.3g})")
    return gap


def free_lunch_lp(tech: Technology) -> LinearProgram:
    """max sum(d) s.t. X lam + R- pi <= 0, Y lam + R+ pi >= d, [sum(lam) = 1]."""
    s = tech.s
    extra_out = -np.eye(s)
    return pps.envelopment_lp(
        tech, np.zeros((tech.m, s)), extra_out, np.zeros(tech.m), np.zeros(s), np.ones(s), Sense.MAX
    )


def free_lunch_dual_lp(tech: Technology) -> LinearProgram:
    """Dual form over ``(v, u, sigma)``: min -sigma s.t. v x_j - u y_j >= sigma, v R- - u R+ >= 0, u >= 1."""
    m, s, n, K = tech.m, tech.s, tech.n, tech.K
    X, Y = tech.dataset.X, tech.dataset.Y
    Rm, Rp = tech.tradeoffs.R_minus, tech.tradeoffs.R_plus
    vrs = tech.rts is Rts.VRS_TO
    rows_obs = np.hstack([X.T, -Y.T, -np.ones((n, 1)) if vrs else np.zeros((n, 1))])
    rows_tr = np.hstack([Rm.T, -Rp.T, np.zeros((K, 1))])
    A = np.vstack([rows_obs, rows_tr])
    rels = (Relation.GE,) * (n + K)
    c = np.zeros(m + s + 1)
    c[-1] = -1.0
    lower = np.concatenate([np.zeros(m), np.ones(s), [-np.inf if vrs else 0.0]])
    upper = np.concatenate([np.full(m + s, np.inf), [np.inf if vrs else 0.0]])
    return LinearProgram(c, A, rels, np.zeros(n + K), lower, upper, Sense.MIN)


def free_lunch_check(tech: Technology, settings: SolverSettings | None = None, u_star: FloatArray | None = None) -> DiagnosticsReport:
    """Largest total output producible from zero input, checked against its dual."""
    notes: list[str] = []
    if u_star is not None and not (np.all(np.isfinite(u_star)) and np.min(u_star) > POSITIVITY_TOL):
        notes.append("hypothesis unmet: some output multiplier minimum is not positive")
    primal = free_lunch_lp(tech)
    out = solve(primal, settings)
    dual_lp = free_lunch_dual_lp(tech)
    dout = solve(dual_lp, settings)
    dval = dout.value if dout.optimal else None
    gaps: list[float] = []
    if out.status is Status.INFEASIBLE:
        value, has = None, False
    elif out.status is Status.UNBOUNDED:
        value, has = float("inf"), True
        notes.append("free-lunch LP is unbounded")
    else:
        value = float(out.value)
        has = value > FREE_LUNCH_TOL
        gaps.append(_gap(primal, out))
        if dval is not None:
            gap = abs(value - dval) / (1.0 + abs(value))
            if gap > DUALITY_TOL:
                raise AssumptionViolated(f"free-lunch primal {value} and dual {dval} disagree")
            gaps.append(gap)
    if dout.optimal:
        gaps.append(_gap(dual_lp, dout))
    empty = np.zeros(0)
    empty.setflags(write=False)
    return DiagnosticsReport(empty, empty, False, value, has, dval, tuple(notes), tuple(gaps))


def diagnose(tech: Technology, settings: SolverSettings | None = None) -> DiagnosticsReport:
    """Facet positivity and free-lunch checks in one report."""
    pos = facet_positivity_check(tech, settings)
    fl = free_lunch_check(tech, settings, pos.u_star)
    return DiagnosticsReport(
        pos.v_star,
        pos.u_star,
        pos.facet_positivity_passed,
        fl.free_lunch_value,
        fl.has_free_lunch,
        fl.free_lunch_dual_value,
        fl.notes,
        pos.duality_gaps + fl.duality_gaps,
    )


def consistency_lp(
    dataset: Dataset,
    pairs: Iterable[tuple[int, int]],
    extra: Sequence[tuple[Sequence[float], Sequence[float], str, float]] = (),
) -> LinearProgram:
    m, s = dataset.m, dataset.s
    rows = []
    for p, q in pairs:
        if not (1 <= p <= dataset.n and 1 <= q <= dataset.n):
            raise InvalidIds(f"pair ({p}, {q}) references an unknown DMU")
        dp, dq = dataset[p], dataset[q]
        rows.append((np.concatenate([dp.x - dq.x, -(dp.y - dq.y)]), Relation.GE, 0.0))
    rows.append((np.ones(m + s), Relation.EQ, 1.0))
    for cv, cu, rel, rhs in extra:
        rows.append((np.concatenate([np.asarray(cv, float), np.asarray(cu, float)]), Relation.parse(rel), float(rhs)))
    return LinearProgram.from_rows(Sense.MIN, np.zeros(m + s), rows)


def tradeoff_consistency(
    dataset: Dataset,
    pairs: Iterable[tuple[int, int]],
    extra: Sequence[tuple[Sequence[float], Sequence[float], str, float]] = (),
    settings: SolverSettings | None = None,
) -> Feasibility:
    """Is there a normalised non-negative price (v, u) valuing every pair move p -> q as no gain?

    ``extra`` rows are ``(coef_v, coef_u, relation, rhs)``.
    """
    out = solve(consistency_lp(dataset, pairs, extra), settings)
    return Feasibility.FEASIBLE if out.optimal else Feasibility.INFEASIBLE


def strong_efficient_set(tech: Technology, settings: SolverSettings | None = None, tol: float = EFFICIENCY_TOL) -> frozenset[int]:
    """Ids of DMUs with zero total slack in the additive model."""
    return frozenset(d.id for d in tech.dataset if pps.additive_inefficiency(tech, d, settings) <= tol)
