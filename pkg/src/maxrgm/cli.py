"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure,
4 frontier assumption unverified (rerun with ``--force`` to evaluate anyway).
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from maxrgm import diagnostics as dg
from maxrgm import measures as ms
from maxrgm import olympic
from maxrgm.core import Dataset, Rts, Technology, read_dataset_csv
from maxrgm.errors import (
    AssumptionUnverified,
    AssumptionViolated,
    DataError,
    NoOptimum,
    SolverError,
    MaxRgmError,
)
from maxrgm.lp import SolverSettings
from maxrgm.report import ReportRow, render_csv, round_half_away

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER, EXIT_ASSUMPTION = 0, 1, 2, 3, 4

SCORE_TOL = 0.001
TARGET_TOL = 0.1
_SLACK = 1e-9  # absorbs binary noise at the tolerance boundary

MEASURES = {
    "maxrgm": None,
    "fgl": ms.FglVariant.CLASSIC,
    "fgl-modified": ms.FglVariant.MODIFIED,
    "russell": ms.FglVariant.RUSSELL,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _settings(args: argparse.Namespace) -> SolverSettings:
    try:
        return SolverSettings.from_env(feas_tol=args.feas_tol, opt_tol=args.opt_tol)
    except ValueError as exc:
        raise UsageError(f"bad tolerance in the environment: {exc}") from exc


def _technology(args: argparse.Namespace) -> Technology:
    dataset = read_dataset_csv(args.dataset)
    rts = Rts(args.rts)
    spec = None
    if args.tradeoffs:
        spec = olympic.read_tradeoffs(args.tradeoffs, dataset.m, dataset.s)
        if rts is Rts.CRS and spec.K:
            raise DataError("--rts crs takes no trade-off file")
    return Technology(dataset, spec, rts)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _require_frontier(tech: Technology, settings: SolverSettings, force: bool) -> None:
    report = dg.facet_positivity_check(tech, settings)
    if report.facet_positivity_passed:
        return
    if not force:
        raise AssumptionUnverified(
            "frontier assumption unverified: some multiplier minimum is not positive (use --force to evaluate anyway)"
        )
    print("warning: frontier assumption unverified; evaluating because of --force", file=sys.stderr)


def _evaluate_rows(
    tech: Technology,
    measure: str,
    settings: SolverSettings,
    workers: int,
    with_fgl: bool = False,
) -> list[ReportRow]:
    variant = MEASURES[measure]

    def one(dmu):
        rgm = fgl = None
        if variant is None:
            rgm = ms.max_rgm(tech, dmu, settings)
            if with_fgl:
                fgl = ms.fgl(tech, dmu, ms.FglVariant.CLASSIC, settings)
        else:
            fgl = ms.fgl(tech, dmu, variant, settings)
        return ReportRow.from_results(dmu, rgm, fgl)

    return ms.evaluate_many(one, tech.dataset, workers)


def cmd_evaluate(args: argparse.Namespace) -> int:
    settings = _settings(args)
    tech = _technology(args)
    if args.measure == "maxrgm":
        _require_frontier(tech, settings, args.force)
    rows = _evaluate_rows(tech, args.measure, settings, args.workers)
    _emit(render_csv(rows, args.full_precision), args.out)
    return EXIT_OK


def _fmt(value: float | None, full: bool, places: int = 5):
    if value is None:
        return None
    if not np.isfinite(value):
        return "nan" if np.isnan(value) else "inf"
    return float(value) if full else float(round_half_away(value, places))


def cmd_diagnose(args: argparse.Namespace) -> int:
    settings = _settings(args)
    tech = _technology(args)
    rep = dg.diagnose(tech, settings)
    full = args.full_precision
    ds = tech.dataset
    doc = {
        "v_star": {f"x{i + 1}": _fmt(v, full) for i, v in enumerate(rep.v_star)},
        "u_star": {f"y{r + 1}": _fmt(u, full) for r, u in enumerate(rep.u_star)},
        "facet_positivity_passed": rep.facet_positivity_passed,
        "frontier_assumption": "verified" if rep.facet_positivity_passed else "unverified",
        "free_lunch_value": _fmt(rep.free_lunch_value, full),
        "free_lunch_dual_value": _fmt(rep.free_lunch_dual_value, full),
        "has_free_lunch": rep.has_free_lunch,
        "notes": list(rep.notes),
        "n": ds.n,
        "m": ds.m,
        "s": ds.s,
        "K": tech.K,
    }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_efficient_set(args: argparse.Namespace) -> int:
    tech = _technology(args)
    ids = sorted(dg.strong_efficient_set(tech, _settings(args)))
    lines = [str(i) for i in ids]
    lines.append(f"# {len(ids)}/{tech.n} strongly efficient")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_tradeoffs_olympic(args: argparse.Namespace) -> int:
    dataset = read_dataset_csv(args.dataset) if args.dataset else olympic.load_dataset()
    cfg = olympic.OlympicConfig.load(args.config)
    top = cfg.top_set_reduced if args.top == "reduced" else cfg.top_set
    spec = olympic.build_olympic_tradeoffs(dataset, top, cfg.hub)
    _emit(olympic.tradeoffs_to_json(spec), args.out)
    return EXIT_OK


def cmd_tradeoffs_check(args: argparse.Namespace) -> int:
    dataset = read_dataset_csv(args.dataset) if args.dataset else olympic.load_dataset()
    pairs, extra = olympic.read_pairs(args.pairs)
    rows = [(e.coef_v, e.coef_u, e.relation, e.rhs) for e in extra]
    result = dg.tradeoff_consistency(dataset, pairs, rows, _settings(args))
    _emit(f"{result.value.upper()}\n", args.out)
    return EXIT_OK


@dataclass(frozen=True)
class Mismatch:
    dmu: int
    field: str
    expected: str
    computed: str


def compare_with_expected(rows: Sequence[ReportRow], expected: Sequence[olympic.ExpectedRow]) -> list[Mismatch]:
    by_id = {r.dmu: r for r in rows}
    out: list[Mismatch] = []
    for e in expected:
        r = by_id[e.dmu]
        if abs(r.score_maxrgm - e.score_maxrgm) > SCORE_TOL + _SLACK:
            out.append(Mismatch(e.dmu, "score_maxrgm", f"{e.score_maxrgm:.3f}", repr(r.score_maxrgm)))
        if e.target_coordinate:
            if r.target_coordinate != e.target_coordinate:
                out.append(Mismatch(e.dmu, "target_coordinate", e.target_coordinate, r.target_coordinate))
            elif abs(r.target_value - e.target_value) > TARGET_TOL + _SLACK:
                out.append(Mismatch(e.dmu, "target_value", f"{e.target_value:.1f}", repr(r.target_value)))
        if r.score_fgl is not None and abs(r.score_fgl - e.score_fgl) > SCORE_TOL + _SLACK:
            out.append(Mismatch(e.dmu, "score_fgl", f"{e.score_fgl:.3f}", repr(r.score_fgl)))
        if r.zero_input_target is not None and r.zero_input_target != e.zero_input_target:
            out.append(Mismatch(e.dmu, "zero_input_target", str(e.zero_input_target).lower(), str(r.zero_input_target).lower()))
    return out


def reproduce_olympics(settings: SolverSettings | None = None, workers: int = 1) -> tuple[list[ReportRow], list[Mismatch]]:
    """Rerun the case study from the bundled data and diff against the published values."""
    settings = settings or SolverSettings.from_env()
    tech = Technology(olympic.load_dataset(), olympic.olympic_tradeoffs())
    rows = _evaluate_rows(tech, "maxrgm", settings, workers, with_fgl=True)
    return rows, compare_with_expected(rows, olympic.load_expected())


def cmd_reproduce(args: argparse.Namespace) -> int:
    rows, mismatches = reproduce_olympics(_settings(args), args.workers)
    _emit(render_csv(rows, args.full_precision), args.out)
    for mm in mismatches:
        print(f"mismatch DMU_{mm.dmu} {mm.field}: expected {mm.expected}, computed {mm.computed}", file=sys.stderr)
    fields = sorted({mm.field for mm in mismatches})
    summary = ", ".join(f"{f}={sum(mm.field == f for mm in mismatches)}" for f in fields) or "none"
    print(f"reproduced {len(rows)} DMUs; mismatches: {summary}", file=sys.stderr)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, dataset_required: bool = True) -> None:
    p.add_argument("--dataset", required=dataset_required, help="DMU table (CSV: dmu,name,x_*,y_*)")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--feas-tol", type=float, default=None, help="LP feasibility tolerance")
    p.add_argument("--opt-tol", type=float, default=None, help="LP optimality tolerance")
    p.add_argument("--full-precision", action="store_true", help="disable display rounding")


def _add_technology(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tradeoffs", help="trade-off specification (JSON)")
    p.add_argument("--rts", choices=[r.value for r in Rts], default=Rts.VRS_TO.value)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maxrgm", description="Extended max Russell graph measure with production trade-offs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", help="per-DMU scores and closest targets")
    _add_common(p)
    _add_technology(p)
    p.add_argument("--measure", choices=list(MEASURES), default="maxrgm")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--force", action="store_true", help="evaluate even if the frontier assumption is unverified")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("diagnose", help="multiplier positivity and free-lunch checks")
    _add_common(p)
    _add_technology(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("efficient-set", help="strongly efficient DMUs (additive model)")
    _add_common(p)
    _add_technology(p)
    p.set_defaults(func=cmd_efficient_set)

    p = sub.add_parser("tradeoffs", help="trade-off utilities")
    tsub = p.add_subparsers(dest="tradeoffs_command", required=True, parser_class=_Parser)
    q = tsub.add_parser("olympic", help="emit the case-study trade-off specification")
    _add_common(q, dataset_required=False)
    q.add_argument("--config", help="case-study config (JSON); defaults to the bundled one")
    q.add_argument("--top", choices=["reduced", "full"], default="reduced")
    q.set_defaults(func=cmd_tradeoffs_olympic)
    q = tsub.add_parser("check", help="feasibility of a multiplier consistency system")
    _add_common(q, dataset_required=False)
    q.add_argument("--pairs", required=True, help="pairs document (JSON)")
    q.set_defaults(func=cmd_tradeoffs_check)

    p = sub.add_parser("reproduce-olympics", help="rerun the bundled case study and diff against published values")
    _add_common(p, dataset_required=False)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be at least 1")
        return args.func(args)
    except UsageError as exc:
        print(f"maxrgm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AssumptionUnverified, AssumptionViolated) as exc:
        print(f"maxrgm: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (DataError, NoOptimum) as exc:
        print(f"maxrgm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SolverError, MaxRgmError) as exc:
        print(f"maxrgm: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
