"""Dense two-phase primal simplex.

Every model in the package is assembled as a :class:`LinearProgram` and
handed to :func:`solve`. The solver works on a dense tableau, which is
adequate for the problem sizes here (at most a few thousand columns and
rows). Pivoting uses Dantzig's rule and falls back to Bland's rule after a
run of degenerate pivots; once a non-degenerate pivot happens it returns to
Dantzig. Since the objective strictly improves on non-degenerate pivots and
Bland's rule cannot cycle, the method terminates.

Before pivoting, rows and then columns are equilibrated by powers of two
close to the reciprocal of their largest entry, so scaling is exact in
binary floating point. After the final pivot the basis is refactorized
from the scaled problem to clean up accumulated round-off in both the
primal values and the row duals.
"""

from __future__ import annotations

import enum
import math
import os
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from maxrgm.errors import DimensionMismatch, NumericalBreakdown

__all__ = [
    "Sense",
    "Relation",
    "Status",
    "SolverSettings",
    "LinearProgram",
    "LpOutcome",
    "solve",
    "dual_value",
    "max_violation",
]


class Sense(enum.Enum):
    MIN = "min"
    MAX = "max"


class Relation(enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="

    @classmethod
    def parse(cls, token: str | Relation) -> Relation:
        if isinstance(token, Relation):
            return token
        return {"<=": cls.LE, "=": cls.EQ, "==": cls.EQ, ">=": cls.GE}[token.strip()]


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances for :func:`solve`.

    ``feas_tol`` and ``opt_tol`` apply to the equilibrated problem;
    ``check_tol`` is the relative bound on row violations of the reported
    point in original units.
    """

    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    pivot_tol: float = 1e-10
    check_tol: float = 1e-7
    max_iter: int = 100_000
    bland_after: int = 30

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None, **overrides) -> SolverSettings:
        """Defaults overridden by ``MAXRGM_FEAS_TOL`` / ``MAXRGM_OPT_TOL``, then by keywords."""
        environ = os.environ if environ is None else environ
        kw: dict[str, float] = {}
        if environ.get("MAXRGM_FEAS_TOL"):
            kw["feas_tol"] = float(environ["MAXRGM_FEAS_TOL"])
        if environ.get("MAXRGM_OPT_TOL"):
            kw["opt_tol"] = float(environ["MAXRGM_OPT_TOL"])
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return replace(cls(), **kw)


DEFAULT_SETTINGS = SolverSettings()


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``sense  c.x  s.t.  A[i].x  (<=|=|>=)  b[i],  lower <= x <= upper``.

    Bounds default to ``[0, +inf)``; use ``-np.inf`` / ``np.inf`` for open ends.
    """

    objective: NDArray[np.float64]
    A: NDArray[np.float64]
    relations: tuple[Relation, ...]
    rhs: NDArray[np.float64]
    lower: NDArray[np.float64] = None  # type: ignore[assignment]
    upper: NDArray[np.float64] = None  # type: ignore[assignment]
    sense: Sense = Sense.MIN

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        n = c.size
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        if A.ndim != 2 or A.shape[1] != n:
            raise DimensionMismatch(f"constraint matrix has shape {A.shape}, expected (k, {n})")
        rels = tuple(Relation.parse(r) for r in self.relations)
        b = np.asarray(self.rhs, dtype=float).reshape(-1)
        if len(rels) != A.shape[0] or b.size != A.shape[0]:
            raise DimensionMismatch("relations/rhs length must equal the number of rows")
        lo = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).reshape(-1).copy()
        up = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).reshape(-1).copy()
        if lo.size != n or up.size != n:
            raise DimensionMismatch("bounds must have one entry per variable")
        if not np.all(np.isfinite(b)) or not np.all(np.isfinite(A)) or not np.all(np.isfinite(c)):
            raise ValueError("objective, matrix and rhs must be finite")
        if np.any(lo > up) or np.any(lo == np.inf) or np.any(up == -np.inf):
            raise ValueError("every variable needs lower <= upper")
        for name, arr in (("objective", c), ("A", A), ("rhs", b), ("lower", lo), ("upper", up)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "relations", rels)

    @classmethod
    def from_rows(
        cls,
        sense: Sense,
        objective: Sequence[float],
        rows: Iterable[tuple[Sequence[float], Relation | str, float]],
        bounds: Sequence[tuple[float | None, float | None]] | None = None,
    ) -> LinearProgram:
        """Build from ``(coefficients, relation, rhs)`` triples; ``None`` bounds mean unbounded."""
        c = np.asarray(objective, dtype=float)
        rows = list(rows)
        A = np.array([r[0] for r in rows], dtype=float).reshape(len(rows), c.size)
        rels = tuple(Relation.parse(r[1]) for r in rows)
        b = np.array([r[2] for r in rows], dtype=float)
        lo = up = None
        if bounds is not None:
            lo = np.array([-np.inf if l is None else l for l, _ in bounds], dtype=float)
            up = np.array([np.inf if u is None else u for _, u in bounds], dtype=float)
        return cls(c, A, rels, b, lo, up, sense)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class LpOutcome:
    status: Status
    value: float | None = None
    primal: NDArray[np.float64] | None = None
    duals: NDArray[np.float64] | None = None
    iterations: int = 0
    basis: tuple[int, ...] = field(default=(), repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LpOutcome):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is b
            return np.array_equal(np.asarray(a), np.asarray(b))

        return (
            self.status is other.status
            and same(self.value, other.value)
            and same(self.primal, other.primal)
            and same(self.duals, other.duals)
            and self.iterations == other.iterations
        )

    __hash__ = None  # type: ignore[assignment]


def _pow2_reciprocal(values: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.ones_like(values)
    nz = values > 0
    out[nz] = np.exp2(-np.round(np.log2(values[nz])))
    return out


class _StandardForm:
    """``min c.z  s.t.  A z = b, z >= 0`` with bookkeeping to map back."""

    def __init__(self, lp: LinearProgram) -> None:
        n = lp.num_vars
        c = lp.objective if lp.sense is Sense.MIN else -lp.objective
        lo, up = lp.lower, lp.upper
        shift = np.zeros(n)
        z_var: list[int] = []
        z_sign: list[float] = []
        z_cap: list[float] = []
        for j in range(n):
            if np.isfinite(lo[j]) and lo[j] == up[j]:
                shift[j] = lo[j]
            elif np.isfinite(lo[j]):
                shift[j] = lo[j]
                z_var.append(j), z_sign.append(1.0), z_cap.append(up[j] - lo[j])
            elif np.isfinite(up[j]):
                shift[j] = up[j]
                z_var.append(j), z_sign.append(-1.0), z_cap.append(np.inf)
            else:
                z_var.append(j), z_sign.append(1.0), z_cap.append(np.inf)
                z_var.append(j), z_sign.append(-1.0), z_cap.append(np.inf)
        self.n = n
        self.shift = shift
        self.z_var = np.array(z_var, dtype=int)
        self.z_sign = np.array(z_sign)
        nz = self.z_var.size
        self.nz = nz

        k = lp.num_rows
        A_z = lp.A[:, self.z_var] * self.z_sign if nz else np.zeros((k, 0))
        b = lp.rhs - lp.A @ shift
        rels = list(lp.relations)
        caps = [(t, cap) for t, cap in enumerate(z_cap) if np.isfinite(cap)]
        if caps:
            bound_rows = np.zeros((len(caps), nz))
            for row, (t, _) in enumerate(caps):
                bound_rows[row, t] = 1.0
            A_z = np.vstack([A_z, bound_rows])
            b = np.concatenate([b, [cap for _, cap in caps]])
            rels += [Relation.LE] * len(caps)
        self.k_user = k
        self.c_const = float(c @ shift)
        c_z = c[self.z_var] * self.z_sign if nz else np.zeros(0)

        rows = A_z.shape[0]
        row_scale = _pow2_reciprocal(np.max(np.abs(A_z), axis=1) if nz else np.zeros(rows))
        A1 = A_z * row_scale[:, None]
        col_scale = _pow2_reciprocal(np.max(np.abs(A1), axis=0) if rows else np.zeros(nz))
        A2 = A1 * col_scale[None, :]
        b2 = b * row_scale
        self.row_scale = row_scale
        self.col_scale = col_scale

        # slack columns, then orient rows so that b >= 0 and slacks enter with +1 when possible
        n_slack = sum(1 for r in rels if r is not Relation.EQ)
        S = np.zeros((rows, n_slack))
        slack_of_row = np.full(rows, -1)
        t = 0
        for i, rel in enumerate(rels):
            if rel is Relation.LE:
                S[i, t] = 1.0
            elif rel is Relation.GE:
                S[i, t] = -1.0
            else:
                continue
            slack_of_row[i] = nz + t
            t += 1
        flip = np.ones(rows)
        for i, rel in enumerate(rels):
            if b2[i] < 0 or (b2[i] == 0 and rel is Relation.GE):
                flip[i] = -1.0
        self.A = np.hstack([A2, S]) * flip[:, None]
        self.b = b2 * flip
        self.c = np.concatenate([c_z * col_scale, np.zeros(n_slack)])
        self.flip = flip
        self.rows = rows
        self.cols = nz + n_slack
        self.slack_of_row = slack_of_row

    def unscale(self, z_scaled: NDArray[np.float64]) -> NDArray[np.float64]:
        z = z_scaled[: self.nz] * self.col_scale
        x = self.shift.copy()
        if self.nz:
            np.add.at(x, self.z_var, self.z_sign * z)
        return x

    def user_duals(self, y_std: NDArray[np.float64]) -> NDArray[np.float64]:
        y = y_std * self.flip * self.row_scale
        return y[: self.k_user]


class _Tableau:
    def __init__(self, A, b, c, basis, settings: SolverSettings) -> None:
        rows, cols = A.shape
        T = np.zeros((rows + 1, cols + 1))
        T[:rows, :cols] = A
        T[:rows, cols] = b
        self.T = T
        self.rows = rows
        self.cols = cols
        self.basis = list(basis)
        self.settings = settings
        self.iterations = 0
        self.set_costs(c)

    def set_costs(self, c) -> None:
        T = self.T
        cb = c[self.basis]
        T[-1, : self.cols] = c - cb @ T[: self.rows, : self.cols]
        T[-1, self.cols] = -(cb @ T[: self.rows, self.cols])

    @property
    def objective(self) -> float:
        return -self.T[-1, self.cols]

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        rhs = T[: self.rows, self.cols]
        rhs[(rhs < 0) & (rhs > -self.settings.feas_tol)] = 0.0
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: NDArray[np.bool_]) -> str:
        """Iterate to optimality over columns flagged in ``allowed``."""
        s = self.settings
        T = self.T
        degenerate_run = 0
        bland = False
        while True:
            if self.iterations >= s.max_iter:
                raise NumericalBreakdown(f"simplex iteration limit {s.max_iter} reached")
            d = T[-1, : self.cols]
            candidates = np.flatnonzero(allowed & (d < -s.opt_tol))
            if candidates.size == 0:
                return "optimal"
            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmin(d[candidates])])
            col = T[: self.rows, j]
            rhs = T[: self.rows, self.cols]
            eligible = np.flatnonzero(col > s.pivot_tol)
            if eligible.size == 0:
                return "unbounded"
            ratios = rhs[eligible] / col[eligible]
            best = ratios.min()
            ties = eligible[ratios <= best + 1e-12 * max(1.0, abs(best))]
            if bland:
                basis = np.asarray(self.basis)[ties]
                r = int(ties[np.argmin(basis)])
            else:
                r = int(ties[np.argmax(col[ties])])
            if best <= s.feas_tol:
                degenerate_run += 1
                if degenerate_run >= s.bland_after:
                    bland = True
            else:
                degenerate_run = 0
                bland = False
            self.pivot(r, j)


def solve(lp: LinearProgram, settings: SolverSettings | None = None) -> LpOutcome:
    """Solve ``lp``; deterministic for a given input and settings."""
    s = settings or DEFAULT_SETTINGS
    sf = _StandardForm(lp)
    rows, cols = sf.rows, sf.cols

    # initial basis: a +1 slack where available, artificials elsewhere
    basis: list[int] = []
    art_rows: list[int] = []
    for i in range(rows):
        sl = sf.slack_of_row[i]
        if sl >= 0 and sf.A[i, sl] == 1.0:
            basis.append(int(sl))
        else:
            basis.append(-1)
            art_rows.append(i)
    n_art = len(art_rows)
    A_ext = np.hstack([sf.A, np.zeros((rows, n_art))])
    for t, i in enumerate(art_rows):
        A_ext[i, cols + t] = 1.0
        basis[i] = cols + t
    c1 = np.concatenate([np.zeros(cols), np.ones(n_art)])
    tab = _Tableau(A_ext, sf.b, c1, basis, s)
    feas_scale = 1.0 + (float(np.max(np.abs(sf.b))) if rows else 0.0)

    if n_art:
        tab.run(np.ones(cols + n_art, dtype=bool))
        if tab.objective > s.feas_tol * feas_scale:
            return LpOutcome(Status.INFEASIBLE, iterations=tab.iterations)
        # drive remaining artificials out of the basis; a row with no usable
        # structural entry is redundant and keeps its artificial at zero
        for r in range(tab.rows):
            if tab.basis[r] >= cols:
                row = tab.T[r, :cols]
                j = int(np.argmax(np.abs(row))) if cols else 0
                if cols and abs(row[j]) > s.pivot_tol:
                    tab.pivot(r, j)
    c2 = np.concatenate([sf.c, np.zeros(n_art)])
    tab.set_costs(c2)
    status = tab.run(np.arange(cols + n_art) < cols)
    if status == "unbounded":
        return LpOutcome(Status.UNBOUNDED, iterations=tab.iterations)

    # refactorize on the scaled problem
    basis_idx = np.array(tab.basis, dtype=int)
    B = A_ext[:, basis_idx]
    try:
        xb = np.linalg.solve(B, sf.b)
        y_std = np.linalg.solve(B.T, c2[basis_idx])
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown("singular basis at optimum") from exc
    if not (np.all(np.isfinite(xb)) and np.all(np.isfinite(y_std))):
        raise NumericalBreakdown("non-finite values after refactorization")
    if np.any(xb < -max(s.check_tol, 1e3 * s.feas_tol) * feas_scale):
        raise NumericalBreakdown("basis lost primal feasibility on refactorization")
    z = np.zeros(cols + n_art)
    z[basis_idx] = np.maximum(xb, 0.0)
    x = sf.unscale(z)
    x = np.clip(x, lp.lower, lp.upper)
    duals = sf.user_duals(y_std)
    value = float(lp.objective @ x)
    if lp.sense is Sense.MAX:
        duals = -duals
    scale = 1.0 + np.abs(lp.rhs) + np.abs(lp.A) @ np.abs(x)
    if lp.num_rows and np.max(_row_violation(lp, x) / scale) > s.check_tol:
        raise NumericalBreakdown("reported point violates a constraint beyond check tolerance")
    return LpOutcome(Status.OPTIMAL, value, x, duals, tab.iterations, tuple(int(b) for b in basis_idx))


def _row_violation(lp: LinearProgram, x: NDArray[np.float64]) -> NDArray[np.float64]:
    ax = lp.A @ x
    viol = np.zeros(lp.num_rows)
    for i, rel in enumerate(lp.relations):
        if rel is Relation.LE:
            viol[i] = max(0.0, ax[i] - lp.rhs[i])
        elif rel is Relation.GE:
            viol[i] = max(0.0, lp.rhs[i] - ax[i])
        else:
            viol[i] = abs(ax[i] - lp.rhs[i])
    return viol


def max_violation(lp: LinearProgram, x: NDArray[np.float64]) -> float:
    """Largest row violation scaled by ``1 + |rhs|``; bounds included."""
    worst = 0.0
    if lp.num_rows:
        worst = float(np.max(_row_violation(lp, x) / (1.0 + np.abs(lp.rhs))))
    below = np.where(np.isfinite(lp.lower), lp.lower - x, 0.0)
    above = np.where(np.isfinite(lp.upper), x - lp.upper, 0.0)
    return max(worst, float(np.max(below, initial=0.0)), float(np.max(above, initial=0.0)))


def dual_value(lp: LinearProgram, outcome: LpOutcome) -> float:
    """Objective of the LP dual at ``outcome.duals`` including bound multipliers.

    Reduced costs ``c - A^T y`` are charged against the bound at which the
    primal variable sits; for variables strictly inside their bounds the
    primal value is used, which contributes nothing at an exact optimum.
    """
    if not outcome.optimal:
        raise ValueError("dual value is defined for optimal outcomes only")
    y = outcome.duals
    x = outcome.primal
    sign = 1.0 if lp.sense is Sense.MIN else -1.0
    c = sign * lp.objective
    yy = sign * y
    d = c - lp.A.T @ yy if lp.num_rows else c.copy()
    total = float(lp.rhs @ yy) if lp.num_rows else 0.0
    for j in range(lp.num_vars):
        if d[j] > 0 and math.isfinite(lp.lower[j]):
            total += d[j] * lp.lower[j]
        elif d[j] < 0 and math.isfinite(lp.upper[j]):
            total += d[j] * lp.upper[j]
        else:
            total += d[j] * x[j]
    return sign * total
