"""Efficiency measures: the extended max Russell graph measure and the FGL family.

The max measure needs one LP per positive coordinate: the best single-input
contraction and the best single-output expansion. Its score is the better
of the two resulting single-coordinate projections.

The FGL measures minimise an average of ``theta_i`` and ``1/phi_r``. The
``1/phi_r`` terms are convex, so they are handled by outer approximation:
each is replaced by an epigraph variable ``t_r`` and tangent cuts are added
at the current iterate until the linearisation error is below tolerance.
"""

from __future__ import annotations

import enum
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TypeVar

import numpy as np
from numpy.typing import ArrayLike

from maxrgm import pps
from maxrgm.core import Dmu, FloatArray, Technology
from maxrgm.errors import (
    AssumptionViolated,
    NoOptimum,
    NotConverged,
    NotInTechnology,
    OutOfRange,
    UnboundedExpansion,
)
from maxrgm.lp import LinearProgram, Relation, Sense, SolverSettings, Status, solve

SNAP_TOL = 1e-9
TIE_TOL = 1e-9
CUT_TOL = 1e-7
MAX_CUTS = 100
ZERO_TARGET_TOL = 1e-6


class Side(enum.Enum):
    INPUT = "input"
    OUTPUT = "output"
    EFFICIENT = "efficient"


class FglVariant(enum.Enum):
    CLASSIC = "classic"
    MODIFIED = "modified"
    RUSSELL = "russell"


def _frozen(a: ArrayLike) -> FloatArray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _snap(value: float) -> float:
    return 1.0 if abs(value - 1.0) <= SNAP_TOL else value


@dataclass(frozen=True, eq=False)
class MaxRgmResult:
    """Outcome of :func:`max_rgm`.

    ``theta_star`` is the best single-input contraction factor (``1/phi_star``
    when the point has no positive input) and ``phi_star`` the best
    single-output expansion factor. ``per_coordinate`` maps ``("x", i)`` and
    ``("y", r)`` (0-based) to the LP values. ``target_theta`` and
    ``target_phi`` are the factor vectors of the reported target.
    """

    score: float
    theta_star: float
    phi_star: float
    side: Side
    coordinate: int | None
    target_x: FloatArray
    target_y: FloatArray
    per_coordinate: Mapping[tuple[str, int], float]
    target_theta: FloatArray
    target_phi: FloatArray
    m: int
    s: int

    @property
    def input_score(self) -> float:
        return (self.m + self.s - 1 + self.theta_star) / (self.m + self.s)

    @property
    def output_score(self) -> float:
        return (self.m + self.s - 1 + 1.0 / self.phi_star) / (self.m + self.s)

    @property
    def normalized(self) -> float:
        return normalized_score(self.score, self.m, self.s)


def closest_score(theta_star: float, phi_star: float, m: int, s: int) -> float:
    """Score of the better single-coordinate projection."""
    k = m + s
    return max((k - 1 + theta_star) / k, (k - 1 + 1.0 / phi_star) / k)


def max_rgm(tech: Technology, dmu: Dmu, settings: SolverSettings | None = None) -> MaxRgmResult:
    """Extended max Russell graph measure of ``dmu`` with its closest target."""
    return max_rgm_at(tech, dmu.x, dmu.y, settings)


def max_rgm_at(tech: Technology, x: ArrayLike, y: ArrayLike, settings: SolverSettings | None = None) -> MaxRgmResult:
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    m, s = tech.m, tech.s
    if not pps.in_sign_domain(tech, x, y) if x.shape == (m,) and y.shape == (s,) else False:
        raise NotInTechnology("assessed point lies outside the orthant of the technology")
    per: dict[tuple[str, int], float] = {}
    phis: list[tuple[float, int]] = []
    for r in np.flatnonzero(y > 0):
        try:
            phi = _snap(pps.expand_output(tech, x, y, int(r), settings))
        except UnboundedExpansion as exc:
            raise AssumptionViolated(str(exc)) from exc
        per[("y", int(r))] = phi
        phis.append((phi, int(r)))
    thetas: list[tuple[float, int]] = []
    for i in np.flatnonzero(x > 0):
        theta = _snap(pps.contract_input(tech, x, y, int(i), settings))
        per[("x", int(i))] = theta
        thetas.append((theta, int(i)))
    if not phis:
        raise NotInTechnology("assessed point has no positive output")

    # smallest index wins ties: min() over (value, index) pairs does that
    phi_star, r_star = min(phis)
    if thetas:
        theta_star, neg_i = max((t, -i) for t, i in thetas)
        i_star = -neg_i
    else:
        theta_star, i_star = 1.0 / phi_star, None

    score = closest_score(theta_star, phi_star, m, s)
    k = m + s
    in_score = (k - 1 + theta_star) / k
    out_score = (k - 1 + 1.0 / phi_star) / k
    target_theta = np.ones(m)
    target_phi = np.ones(s)
    if score >= 1.0:
        side, coord = Side.EFFICIENT, None
    elif out_score >= in_score - TIE_TOL or i_star is None:
        side, coord = Side.OUTPUT, r_star
        target_phi[r_star] = phi_star
    else:
        side, coord = Side.INPUT, i_star
        target_theta[i_star] = theta_star
    return MaxRgmResult(
        score=score,
        theta_star=theta_star,
        phi_star=phi_star,
        side=side,
        coordinate=coord,
        target_x=_frozen(target_theta * x),
        target_y=_frozen(target_phi * y),
        per_coordinate=dict(per),
        target_theta=_frozen(target_theta),
        target_phi=_frozen(target_phi),
        m=m,
        s=s,
    )


def normalized_score(score: float, m: int, s: int) -> float:
    """Rescale a max-measure score from ``(1 - 1/(m+s), 1]`` onto ``(0, 1]``."""
    k = m + s
    if not (k - 1) / k - 1e-12 <= score <= 1.0 + 1e-12:
        raise OutOfRange(f"score {score} outside [{(k - 1) / k}, 1]")
    return min(1.0, max(0.0, k * score - (k - 1)))


# --- FGL family ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FglResult:
    """Outcome of :func:`fgl`.

    ``infimum`` is set when some output term has weight one but zero data:
    its ``1/phi_r`` can be pushed to zero without ever reaching it, so the
    score is an infimum rather than an attained minimum.
    """

    score: float
    theta: FloatArray
    phi: FloatArray
    target_x: FloatArray
    target_y: FloatArray
    psi: FloatArray | None
    zero_input_target: bool
    converged: bool
    gap: float
    iterations: int
    infimum: bool = False
    variant: FglVariant = FglVariant.CLASSIC
    weights_x: FloatArray = field(default=None, repr=False)  # type: ignore[assignment]
    weights_y: FloatArray = field(default=None, repr=False)  # type: ignore[assignment]


def psi(tech: Technology, dmu: Dmu, r: int, settings: SolverSettings | None = None) -> int:
    """1 if output ``r`` is positive or can be raised from zero inside the technology, else 0."""
    return psi_at(tech, dmu.x, dmu.y, r, settings)


def psi_at(tech: Technology, x: ArrayLike, y: ArrayLike, r: int, settings: SolverSettings | None = None) -> int:
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y[r] > 0:
        return 1
    extra_out = np.zeros((tech.s, 1))
    extra_out[r, 0] = -1.0
    lp = pps.envelopment_lp(tech, np.zeros((tech.m, 1)), extra_out, x, y, np.ones(1), Sense.MAX)
    out = solve(lp, settings)
    if out.status is Status.UNBOUNDED:
        return 1
    if out.status is Status.INFEASIBLE:
        return 0
    feas = (settings or SolverSettings()).feas_tol
    return int(out.value > feas)


@dataclass(frozen=True)
class _CutProblem:
    tech: Technology
    x: FloatArray
    y: FloatArray
    wx: FloatArray  # weight per input
    ty: tuple[int, ...]  # outputs carrying a 1/phi term
    theta_upper: FloatArray

    def lp(self, cuts: Sequence[tuple[int, float]]) -> LinearProgram:
        m, s = self.tech.m, self.tech.s
        nt = len(self.ty)
        e = m + s + nt
        extra_in = np.zeros((m, e))
        extra_in[:, :m] = -np.diag(self.x)
        extra_out = np.zeros((s, e))
        extra_out[:, m : m + s] = -np.diag(self.y)
        obj = np.concatenate([self.wx, np.zeros(s), np.ones(nt)])
        lower = np.concatenate([np.zeros(m), np.ones(s), np.zeros(nt)])
        upper = np.concatenate([self.theta_upper, np.full(s, np.inf), np.full(nt, np.inf)])
        rows = []
        for k, phat in cuts:
            # t_k + phi_r / phat^2 >= 2 / phat
            coef = np.zeros(e)
            coef[m + self.ty[k]] = 1.0 / (phat * phat)
            coef[m + s + k] = 1.0
            rows.append((coef, Relation.GE, 2.0 / phat))
        return pps.envelopment_lp(
            self.tech, extra_in, extra_out, np.zeros(m), np.zeros(s), obj, Sense.MIN,
            extra_lower=lower, extra_upper=upper, extra_rows=rows,
        )


@dataclass(frozen=True)
class _CutSolution:
    objective: float
    theta: FloatArray
    phi: FloatArray
    gap: float
    iterations: int


def _cutting_plane(problem: _CutProblem, seeds: Sequence[float], settings: SolverSettings | None) -> _CutSolution | None:
    """Minimise ``wx.theta + sum_{r in ty} 1/phi_r``; None when infeasible."""
    m, s = problem.tech.m, problem.tech.s
    cuts: list[tuple[int, float]] = []
    for k in range(len(problem.ty)):
        cuts.append((k, 1.0))
        if seeds[k] > 1.0 and np.isfinite(seeds[k]):
            cuts.append((k, float(seeds[k])))
    gap = np.inf
    for it in range(1, MAX_CUTS + 1):
        out = solve(problem.lp(cuts), settings)
        if out.status is Status.INFEASIBLE:
            return None
        if out.status is Status.UNBOUNDED:
            raise NotConverged("cutting-plane master problem is unbounded")
        z = out.primal[-(m + s + len(problem.ty)) :]
        theta, phi, t = z[:m], z[m : m + s], z[m + s :]
        inv = np.array([1.0 / phi[r] for r in problem.ty])
        errs = inv - t
        gap = float(np.max(errs, initial=0.0))
        if gap < CUT_TOL:
            obj = float(problem.wx @ theta + inv.sum())
            return _CutSolution(obj, theta, phi, gap, it)
        for k, err in enumerate(errs):
            if err >= CUT_TOL:
                cuts.append((k, float(phi[problem.ty[k]])))
    raise NotConverged(f"cutting-plane gap {gap:.3g} above {CUT_TOL:g} after {MAX_CUTS} iterations")


def fgl(
    tech: Technology,
    dmu: Dmu,
    variant: FglVariant = FglVariant.CLASSIC,
    settings: SolverSettings | None = None,
    probe_zero_input: bool = True,
) -> FglResult:
    """FGL-type Russell measure of ``dmu``; see :class:`FglVariant`."""
    return fgl_at(tech, dmu.x, dmu.y, variant, settings, probe_zero_input)


def fgl_at(
    tech: Technology,
    x: ArrayLike,
    y: ArrayLike,
    variant: FglVariant = FglVariant.CLASSIC,
    settings: SolverSettings | None = None,
    probe_zero_input: bool = True,
) -> FglResult:
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    m, s = tech.m, tech.s
    if variant is FglVariant.RUSSELL and (np.any(x <= 0) or np.any(y <= 0)):
        raise NoOptimum("the Russell measure has no optimum on data with zero entries")

    wx = (x > 0).astype(float)
    psi_vec = None
    if variant is FglVariant.MODIFIED:
        psi_vec = np.array([psi_at(tech, x, y, r, settings) for r in range(s)], dtype=float)
        wy = psi_vec
    else:
        wy = (y > 0).astype(float)
    ty = tuple(int(r) for r in range(s) if wy[r] > 0 and y[r] > 0)
    infimum = bool(np.any((wy > 0) & (y == 0)))
    denom = float(wx.sum() + wy.sum())

    seeds = []
    for r in ty:
        try:
            seeds.append(pps.expand_output(tech, x, y, r, settings))
        except UnboundedExpansion:
            seeds.append(np.inf)
    problem = _CutProblem(tech, x, y, wx, ty, np.ones(m))
    sol = _cutting_plane(problem, seeds, settings)
    if sol is None:
        raise NotInTechnology("assessed point is not in the technology")
    score = min(1.0, sol.objective / denom)

    zero_target = False
    if probe_zero_input and np.any(x > 0):
        probe = _CutProblem(tech, x, y, wx, ty, np.where(x > 0, 0.0, 1.0))
        psol = _cutting_plane(probe, seeds, settings)
        zero_target = psol is not None and psol.objective / denom <= score + ZERO_TARGET_TOL

    theta = np.clip(sol.theta, 0.0, 1.0)
    phi = np.maximum(sol.phi, 1.0)
    return FglResult(
        score=score,
        theta=_frozen(theta),
        phi=_frozen(phi),
        target_x=_frozen(theta * x),
        target_y=_frozen(phi * y),
        psi=None if psi_vec is None else _frozen(psi_vec),
        zero_input_target=zero_target,
        converged=True,
        gap=sol.gap,
        iterations=sol.iterations,
        infimum=infimum,
        variant=variant,
        weights_x=_frozen(wx),
        weights_y=_frozen(wy),
    )


# --- batch evaluation ------------------------------------------------------------

R = TypeVar("R")


def evaluate_many(fn: Callable[[Dmu], R], dmus: Iterable[Dmu], workers: int = 1) -> list[R]:
    """Apply ``fn`` to every DMU, optionally on a thread pool; results keep input order."""
    dmus = list(dmus)
    if workers <= 1:
        return [fn(d) for d in dmus]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, dmus))
