from __future__ import annotations

import numpy as np
import pytest
from conftest import tiny_instances
from hypothesis import given
from hypothesis import strategies as st

from maxrgm import measures as ms
from maxrgm import pps
from maxrgm.core import Dataset, Dmu, Rts, Technology, TradeoffSpec
from maxrgm.errors import AssumptionViolated, NoOptimum, OutOfRange
from maxrgm.measures import FglVariant, Side


def test_published_rows(olympic_rgm):
    usa = olympic_rgm[1]
    assert usa.score == 1.0 and usa.side is Side.EFFICIENT and usa.coordinate is None
    china = olympic_rgm[2]
    assert round(china.score, 3) == 0.883
    assert china.side is Side.OUTPUT and china.coordinate == 0
    assert china.target_y[0] == pytest.approx(134.3, abs=0.05)
    zambia = olympic_rgm[90]
    assert round(zambia.score, 3) == 0.837 and zambia.target_y[2] == pytest.approx(40.4, abs=0.05)
    brazil = olympic_rgm[19]
    assert round(brazil.score, 3) == 0.852 and brazil.coordinate == 1
    assert brazil.target_y[1] == pytest.approx(63.9, abs=0.05)


def test_tunisia_argentina_anchor(olympic_rgm, olympic_dataset):
    assert np.all(olympic_dataset[52].x >= olympic_dataset[54].x)
    assert np.array_equal(olympic_dataset[52].y, olympic_dataset[54].y)
    assert olympic_rgm[54].score > olympic_rgm[52].score
    assert (round(olympic_rgm[54].score, 3), round(olympic_rgm[52].score, 3)) == (0.854, 0.845)


def test_result_invariants(olympic_rgm, olympic_dataset):
    for d in olympic_dataset:
        res = olympic_rgm[d.id]
        assert res.score == ms.closest_score(res.theta_star, res.phi_star, 3, 3)
        assert res.score > 5 / 6
        # recompute from the per-coordinate LP values
        phi = min(v for (k, _), v in res.per_coordinate.items() if k == "y")
        theta = max(v for (k, _), v in res.per_coordinate.items() if k == "x")
        assert ms.closest_score(theta, phi, 3, 3) == res.score
        changed = (res.target_x != d.x).sum() + (res.target_y != d.y).sum()
        assert changed <= 1
        assert np.all(res.target_x[d.x > 0] > 0)


def test_targets_are_members(olympic_rgm, olympic_tech):
    for res in list(olympic_rgm.values())[::7]:
        assert pps.membership(olympic_tech, res.target_x, res.target_y * (1 - 1e-9))
        assert pps.additive_inefficiency_at(olympic_tech, res.target_x, res.target_y) <= 1e-5


def test_tie_prefers_output_side():
    # one DMU at (2, 1) against the hull of (1, 1) and (2, 2):
    # contracting x to 1 and expanding y to 2 give the same score
    tech = Technology(Dataset.from_arrays([[1.0, 2.0]], [[1.0, 2.0]]))
    res = ms.max_rgm_at(tech, [2.0], [1.0])
    assert res.input_score == pytest.approx(res.output_score)
    assert res.side is Side.OUTPUT


def test_smallest_index_wins_on_ties():
    tech = Technology(Dataset.from_arrays([[1.0, 1.0]], [[2.0, 1.0], [1.0, 2.0]]))
    # theta = 1/4 leaves the output side ahead, where both outputs double
    res = ms.max_rgm_at(tech, [4.0], [1.0, 1.0])
    assert res.per_coordinate[("y", 0)] == res.per_coordinate[("y", 1)] == 2.0
    assert res.side is Side.OUTPUT and res.coordinate == 0


def test_input_side_target():
    tech = Technology(Dataset.from_arrays([[1.0, 1.1]], [[1.0, 5.0]]))
    res = ms.max_rgm_at(tech, [1.1], [1.0])
    assert res.side is Side.INPUT
    assert res.target_x[0] == pytest.approx(1.0)
    assert res.target_theta[0] == pytest.approx(1 / 1.1)


def test_no_positive_input():
    # the free lunch column lets (0, y) into the technology
    tech = Technology(Dataset.from_arrays([[1.0]], [[1.0]]), TradeoffSpec.from_matrices([[-1.0]], [[0.0]]))
    res = ms.max_rgm_at(tech, [0.0], [0.5])
    assert res.theta_star == pytest.approx(1 / res.phi_star)
    assert res.side is Side.OUTPUT


def test_assumption_violated():
    tech = Technology(Dataset.from_arrays([[1.0]], [[1.0]]), TradeoffSpec.from_matrices([[0.0]], [[1.0]]))
    with pytest.raises(AssumptionViolated):
        ms.max_rgm(tech, tech.dataset[1])


def test_normalized_score():
    assert ms.normalized_score(1.0, 3, 3) == 1.0
    assert ms.normalized_score(5 / 6, 3, 3) == pytest.approx(0.0)
    assert ms.normalized_score(0.883, 3, 3) == pytest.approx(0.298)
    with pytest.raises(OutOfRange):
        ms.normalized_score(0.5, 3, 3)
    with pytest.raises(OutOfRange):
        ms.normalized_score(1.1, 3, 3)


@given(st.integers(1, 4), st.integers(1, 4), st.floats(0.0, 1.0))
def test_normalized_score_range(m, s, t):
    k = m + s
    score = (k - 1) / k + t / k
    assert 0.0 <= ms.normalized_score(score, m, s) <= 1.0


# --- FGL ---------------------------------------------------------------------------


def test_fgl_published(olympic_fgl, olympic_tech):
    assert round(olympic_fgl[2].score, 3) == 0.322
    assert round(olympic_fgl[54].score, 3) == 0.097 and olympic_fgl[54].zero_input_target
    assert round(olympic_fgl[52].score, 3) == round(olympic_fgl[54].score, 3)
    assert round(olympic_fgl[63].score, 3) == 0.039
    assert olympic_fgl[1].score == pytest.approx(1.0, abs=1e-9)
    for res in list(olympic_fgl.values())[::11]:
        assert res.converged and res.gap < 1e-7
        assert pps.membership(olympic_tech, res.target_x, res.target_y * (1 - 1e-9))
        wx, wy = res.weights_x, res.weights_y
        obj = (wx @ res.theta + sum(1 / res.phi[r] for r in range(3) if wy[r] and res.phi[r] * 0 == 0 and res.target_y[r] > 0))
        assert res.score == pytest.approx(obj / (wx.sum() + wy.sum()), abs=1e-6)


def test_thailand_zero_input_probe_is_tight(olympic_tech, olympic_dataset):
    # the published table marks no zero-input target for DMU_46, but an optimal
    # target with x = 0 exists: fixing theta = 0 does not raise the optimum
    d = olympic_dataset[46]
    free = ms.fgl(olympic_tech, d, probe_zero_input=False)
    fixed = ms._cutting_plane(
        ms._CutProblem(olympic_tech, d.x, d.y, (d.x > 0).astype(float), (0, 1, 2), np.zeros(3)),
        [pps.max_output_expansion(olympic_tech, d, r) for r in range(3)],
        None,
    )
    assert fixed is not None
    assert fixed.objective / 6 == pytest.approx(free.score, abs=1e-7)  # cutting-plane accuracy


def test_fgl_strongly_efficient_is_one():
    tech = Technology(Dataset.from_arrays([[1.0, 2.0]], [[1.0, 3.0]]))
    for d in tech.dataset:
        assert ms.fgl(tech, d).score == pytest.approx(1.0, abs=1e-9)


def test_modified_equals_classic_for_positive_outputs(olympic_tech, olympic_dataset):
    for j in (2, 3, 19):
        d = olympic_dataset[j]
        assert np.all(d.y > 0)
        a = ms.fgl(olympic_tech, d, FglVariant.CLASSIC, probe_zero_input=False)
        b = ms.fgl(olympic_tech, d, FglVariant.MODIFIED, probe_zero_input=False)
        assert a.score == pytest.approx(b.score, abs=1e-9)
        assert b.psi.tolist() == [1.0, 1.0, 1.0]


def test_modified_crs_positive_outputs():
    tech = Technology(Dataset.from_arrays([[1.0, 2.0, 3.0]], [[1.0, 3.0, 2.0], [2.0, 1.0, 1.0]]), None, Rts.CRS)
    for d in tech.dataset:
        a = ms.fgl(tech, d, FglVariant.CLASSIC)
        b = ms.fgl(tech, d, FglVariant.MODIFIED)
        assert a.score == pytest.approx(b.score, abs=1e-9)


def test_modified_infimum_convention(olympic_tech, olympic_dataset):
    z = olympic_dataset[90]
    res = ms.fgl(olympic_tech, z, FglVariant.MODIFIED, probe_zero_input=False)
    assert res.psi.tolist() == [1.0, 1.0, 1.0]
    assert res.infimum and res.converged
    classic = ms.fgl(olympic_tech, z, probe_zero_input=False)
    # two extra zero-valued terms in a denominator that grows from 4 to 6
    assert res.score == pytest.approx(classic.score * 4 / 6, abs=1e-9)


def test_psi_examples(olympic_tech, olympic_dataset):
    assert ms.psi(olympic_tech, olympic_dataset[2], 0) == 1
    assert ms.psi(olympic_tech, olympic_dataset[90], 0) == 1
    single = Technology(Dataset.from_arrays([[1.0]], [[1.0], [0.0]]))
    assert ms.psi(single, single.dataset[1], 1) == 0


def test_russell_refuses_zero_data(olympic_tech, olympic_dataset):
    with pytest.raises(NoOptimum):
        ms.fgl(olympic_tech, olympic_dataset[90], FglVariant.RUSSELL)
    d = olympic_dataset[2]
    assert ms.fgl(olympic_tech, d, FglVariant.RUSSELL).score == pytest.approx(ms.fgl(olympic_tech, d).score, abs=1e-9)


def _grid_fgl(tech: Technology, d: Dmu, steps: int = 2000) -> float:
    """Dense search for m = s = 1: minimise (theta + 1/phi)/2 over a theta grid,
    taking the largest feasible phi at each grid point."""
    best = np.inf
    for theta in np.linspace(0, 1, steps + 1)[1:]:
        x = [theta * d.x[0]]
        try:
            phi = pps.expand_output(tech, x, d.y, 0)
        except Exception:  # theta below the feasible range
            continue
        best = min(best, (theta + 1 / phi) / 2)
    return best


def test_fgl_matches_grid_search():
    count = 0
    for tech in tiny_instances(21, 60):
        if (tech.m, tech.s) != (1, 1):
            continue
        for d in tech.dataset:
            res = ms.fgl(tech, d, probe_zero_input=False)
            assert res.score == pytest.approx(_grid_fgl(tech, d), abs=1e-3)
            count += 1
        if count >= 8:
            break
    assert count >= 4


def test_evaluate_many_keeps_order(olympic_tech, olympic_dataset):
    dmus = list(olympic_dataset)[:8]
    fn = lambda d: ms.max_rgm(olympic_tech, d).score  # noqa: E731
    assert ms.evaluate_many(fn, dmus, workers=4) == ms.evaluate_many(fn, dmus, workers=1)
