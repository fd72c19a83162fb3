"""Report rows and their CSV rendering."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from maxrgm.core import Dmu
from maxrgm.measures import FglResult, MaxRgmResult, Side

COLUMNS = (
    "dmu",
    "name",
    "score_maxrgm",
    "side",
    "target_coordinate",
    "target_value",
    "score_fgl",
    "zero_input_target",
)


def round_half_away(value: float, places: int) -> str:
    """Decimal text of ``value`` rounded half away from zero.

    Rounding starts from the shortest repr of the binary64 value, so 0.8825
    becomes 0.883 even though its binary value is slightly below.
    """
    q = Decimal(1).scaleb(-places)
    d = Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_UP)
    if d == 0:
        d = abs(d)
    return f"{d:.{places}f}"


@dataclass(frozen=True)
class ReportRow:
    dmu: int
    name: str
    score_maxrgm: float | None = None
    side: str = ""
    target_coordinate: str = ""
    target_value: float | None = None
    score_fgl: float | None = None
    zero_input_target: bool | None = None

    @classmethod
    def from_results(cls, dmu: Dmu, rgm: MaxRgmResult | None = None, fgl: FglResult | None = None) -> ReportRow:
        coord = ""
        value = None
        side = ""
        if rgm is not None:
            side = rgm.side.value
            if rgm.side is Side.OUTPUT:
                coord = f"y{rgm.coordinate + 1}"
                value = float(rgm.target_y[rgm.coordinate])
            elif rgm.side is Side.INPUT:
                coord = f"x{rgm.coordinate + 1}"
                value = float(rgm.target_x[rgm.coordinate])
        return cls(
            dmu.id,
            dmu.name,
            None if rgm is None else rgm.score,
            side,
            coord,
            value,
            None if fgl is None else fgl.score,
            None if fgl is None else fgl.zero_input_target,
        )

    def cells(self, full_precision: bool = False) -> list[str]:
        def num(v: float | None, places: int) -> str:
            if v is None:
                return ""
            return repr(float(v)) if full_precision else round_half_away(v, places)

        flag = "" if self.zero_input_target is None else str(self.zero_input_target).lower()
        return [
            str(self.dmu),
            self.name,
            num(self.score_maxrgm, 3),
            self.side,
            self.target_coordinate,
            num(self.target_value, 1),
            num(self.score_fgl, 3),
            flag,
        ]


def render_csv(rows: Iterable[ReportRow], full_precision: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in sorted(rows, key=lambda r: r.dmu):
        w.writerow(row.cells(full_precision))
    return buf.getvalue()
