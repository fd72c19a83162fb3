"""Case-study plumbing: bundled Paris 2024 data, trade-off construction and file formats.

Trade-off and pairs files are JSON documents. Numbers in trade-off columns
are written as decimal strings so that a round trip is exact::

    {"m": 3, "s": 3,
     "columns": [{"label": "(9,1)", "r_minus": ["-43306", ...], "r_plus": [...]}]}

A pairs file describes one consistency system::

    {"pairs": [[p, q], ...],
     "extra": [{"v": [...], "u": [...], "relation": ">=", "rhs": "0"}]}
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from maxrgm.core import Dataset, TradeoffColumn, TradeoffSpec, read_dataset_csv
from maxrgm.errors import DataError, DimensionMismatch, InvalidIds

DATA_PACKAGE = "maxrgm.data"
DATASET_FILE = "paris2024.csv"
EXPECTED_FILE = "paris2024_expected.csv"
CONFIG_FILE = "paris2024_config.json"


def data_path(name: str) -> Path:
    return Path(str(resources.files(DATA_PACKAGE).joinpath(name)))


@dataclass(frozen=True)
class OlympicConfig:
    efficient_set: tuple[int, ...]
    top_set: tuple[int, ...]
    top_set_reduced: tuple[int, ...]
    hub: int

    @classmethod
    def load(cls, path: str | Path | None = None) -> OlympicConfig:
        raw = json.loads(Path(path or data_path(CONFIG_FILE)).read_text(encoding="utf-8"))
        try:
            return cls(
                tuple(int(i) for i in raw["efficient_set"]),
                tuple(int(i) for i in raw["top_set"]),
                tuple(int(i) for i in raw["top_set_reduced"]),
                int(raw["hub"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed case-study config: {exc}") from exc


def load_dataset() -> Dataset:
    return read_dataset_csv(data_path(DATASET_FILE))


@dataclass(frozen=True)
class ExpectedRow:
    dmu: int
    name: str
    score_maxrgm: float
    target_coordinate: str
    target_value: float
    score_fgl: float
    zero_input_target: bool


def load_expected(path: str | Path | None = None) -> tuple[ExpectedRow, ...]:
    """Published scores and targets, one row per DMU."""
    with open(path or data_path(EXPECTED_FILE), newline="", encoding="utf-8") as fh:
        rows = []
        for rec in csv.DictReader(fh):
            rows.append(
                ExpectedRow(
                    int(rec["dmu"]),
                    rec["name"],
                    float(rec["score_maxrgm"]),
                    rec["target_coordinate"],
                    float(rec["target_value"]) if rec["target_value"] else float("nan"),
                    float(rec["score_fgl"]),
                    rec["zero_input_target"].strip().lower() == "true",
                )
            )
    return tuple(rows)


def _check_ids(dataset: Dataset, ids) -> None:
    bad = [i for i in ids if not 1 <= int(i) <= dataset.n]
    if bad:
        raise InvalidIds(f"DMU ids out of range 1..{dataset.n}: {bad}")


def build_olympic_tradeoffs(dataset: Dataset, top_set, hub: int) -> TradeoffSpec:
    """Columns x_p - x_q, y_p - y_q for the case-study pair set plus the silver-to-bronze column.

    Pairs are (outsider, top) for every outsider and top unit, then
    (top, hub) for every other top unit; the final column ``(0,0)`` trades
    one silver medal for one bronze medal at fixed inputs.
    """
    top = sorted({int(i) for i in top_set})
    _check_ids(dataset, [*top, hub])
    if hub not in top:
        raise InvalidIds(f"hub {hub} is not in the top set")
    if dataset.s != 3:
        raise DimensionMismatch("the silver-to-bronze column needs exactly three outputs")
    pairs = olympic_pairs(dataset, top, hub)
    cols = [
        TradeoffColumn(dataset[p].x - dataset[q].x, dataset[p].y - dataset[q].y, f"({p},{q})")
        for p, q in pairs
    ]
    cols.append(TradeoffColumn(np.zeros(dataset.m), np.array([0.0, -1.0, 1.0]), "(0,0)"))
    return TradeoffSpec(dataset.m, dataset.s, tuple(cols))


def olympic_pairs(dataset: Dataset, top_set, hub: int | None = None) -> list[tuple[int, int]]:
    top = sorted({int(i) for i in top_set})
    _check_ids(dataset, top)
    top_lookup = set(top)
    pairs = [(p, q) for p in range(1, dataset.n + 1) if p not in top_lookup for q in top]
    if hub is not None:
        pairs += [(p, hub) for p in top if p != hub]
    return pairs


def olympic_tradeoffs() -> TradeoffSpec:
    cfg = OlympicConfig.load()
    return build_olympic_tradeoffs(load_dataset(), cfg.top_set_reduced, cfg.hub)


# --- trade-off spec files -------------------------------------------------------


def _num(text: Any, where: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{where}: not a number: {text!r}") from exc
    if not np.isfinite(value):
        raise DataError(f"{where}: non-finite value")
    return value


def _fmt(value: float) -> str:
    return repr(float(value)) if value != int(value) else str(int(value))


def _lines(head: str, items: list[str], tail: str) -> str:
    # one record per line keeps large documents diffable
    return head + ",\n".join(items) + tail


def tradeoffs_to_json(spec: TradeoffSpec) -> str:
    cols = [
        "  " + json.dumps({"label": c.label, "r_minus": [_fmt(v) for v in c.r_minus], "r_plus": [_fmt(v) for v in c.r_plus]})
        for c in spec.columns
    ]
    return _lines(f'{{"m": {spec.m}, "s": {spec.s}, "columns": [\n', cols, "\n]}\n")


def tradeoffs_from_json(text: str, m: int | None = None, s: int | None = None) -> TradeoffSpec:
    try:
        doc = json.loads(text)
        columns = doc["columns"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"malformed trade-off document: {exc}") from exc
    m = int(doc.get("m", m if m is not None else -1))
    s = int(doc.get("s", s if s is not None else -1))
    cols = []
    for t, c in enumerate(columns):
        label = str(c.get("label", t + 1))
        rm = [_num(v, f"column {label} r_minus") for v in c["r_minus"]]
        rp = [_num(v, f"column {label} r_plus") for v in c["r_plus"]]
        if m < 0:
            m, s = len(rm), len(rp)
        cols.append(TradeoffColumn(np.array(rm), np.array(rp), label))
    if m < 0:
        raise DataError("empty trade-off document needs explicit m and s")
    return TradeoffSpec(m, s, tuple(cols))


def read_tradeoffs(path: str | Path, m: int | None = None, s: int | None = None) -> TradeoffSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return tradeoffs_from_json(text, m, s)


# --- consistency-system files ---------------------------------------------------


@dataclass(frozen=True)
class ExtraInequality:
    """``v . coef_v + u . coef_u  (relation)  rhs``."""

    coef_v: tuple[float, ...]
    coef_u: tuple[float, ...]
    relation: str = ">="
    rhs: float = 0.0


def read_pairs(path: str | Path) -> tuple[list[tuple[int, int]], list[ExtraInequality]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        pairs = [(int(p), int(q)) for p, q in doc.get("pairs", [])]
        extra = [
            ExtraInequality(
                tuple(_num(v, "extra v") for v in e["v"]),
                tuple(_num(u, "extra u") for u in e["u"]),
                str(e.get("relation", ">=")),
                _num(e.get("rhs", "0"), "extra rhs"),
            )
            for e in doc.get("extra", [])
        ]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed pairs document: {exc}") from exc
    return pairs, extra


def pairs_to_json(pairs, extra=()) -> str:
    pair_text = ", ".join(f"[{int(p)}, {int(q)}]" for p, q in pairs)
    rows = [
        "  " + json.dumps({"v": [_fmt(v) for v in e.coef_v], "u": [_fmt(u) for u in e.coef_u], "relation": e.relation, "rhs": _fmt(e.rhs)})
        for e in extra
    ]
    return _lines(f'{{"pairs": [{pair_text}],\n "extra": [\n', rows, "\n]}\n")
