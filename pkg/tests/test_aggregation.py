import math
from fractions import Fraction

import numpy as np
import pytest

from collective_knapsack import aggregation as agg
from collective_knapsack.knapsack import solve
from collective_knapsack.model import EvaluationMatrix, ProjectSet, build_panel, make_costs

# Borda points per group for three projects (rows) and five groups (columns)
FIVE_GROUP_POINTS = np.array([[2, 1, 1, 2, 0], [1, 2, 0, 0, 2], [0, 0, 2, 1, 1]])


def test_method_codes_and_kinds():
    assert len(agg.METHOD_NAMES) == 12
    assert agg.AggregationMethod("borda").code == 7
    assert agg.AggregationMethod("median").is_direct
    assert not agg.AggregationMethod("zscore").is_direct
    with pytest.raises(ValueError):
        agg.AggregationMethod("plurality")
    with pytest.raises(ValueError):
        agg.AggregationMethod("trimmed_mean", alpha=0.5)


@pytest.mark.parametrize("alpha, n, p", [(0.2, 3, 1), (0.2, 5, 1), (0.2, 7, 1), (0.2, 9, 2), (0.25, 10, 3), (0.1, 5, 1)])
def test_trim_count_rounds_half_up(alpha, n, p):
    assert agg.trim_count(alpha, n) == p


def test_trim_count_rejects_too_many():
    with pytest.raises(ValueError):
        agg.trim_count(0.4, 2)


@pytest.mark.parametrize(
    "row, scheme, p, expected",
    [
        ([4, 1, 7], "mean", 0, 4.0),
        ([4, 1, 7], "median", 0, 4.0),
        ([4, 1, 7], "trimmed", 1, 4.0),
        ([4, 1, 7], "winsorized", 1, 4.0),
        ([1, 2, 3, 4, 100], "winsorized", 1, 3.0),
        ([1, 2, 3, 4, 100], "trimmed", 1, 3.0),
        ([3, 1, 4, 2], "median", 0, 2.5),
    ],
)
def test_order_weighted_examples(row, scheme, p, expected):
    assert agg.aggregate_order_weighted(row, scheme, p) == pytest.approx(expected, abs=1e-12)


def test_winsorized_weights_match_formula():
    # outer p get 0, positions p+1 and N-p get (p+1)/N, 1/N in between
    z = agg.order_weights(7, "winsorized", 2)
    np.testing.assert_allclose(z, np.array([0, 0, 3, 1, 3, 0, 0]) / 7)


def test_order_weighted_rejects_large_p():
    with pytest.raises(ValueError):
        agg.aggregate_order_weighted([1, 2, 3], "trimmed", 2)


def test_min_variance_examples():
    assert agg.aggregate_min_variance([3, 5, 10], [2, 2, 2]) == pytest.approx(6.0)
    assert agg.aggregate_min_variance([10, 0], [1, 3]) == pytest.approx(9.0)
    assert agg.aggregate_min_variance([7, 99], [0, 5]) == 7.0
    # several exact groups share the weight
    assert agg.aggregate_min_variance([4, 8, 100], [0, 0, 1]) == 6.0


def test_pick_individual():
    assert agg.pick_individual(build_panel(5, 4, 5), 0, 10) == 2
    assert agg.pick_individual(build_panel(5, 0, 1), 0, 10) == 0
    panel = build_panel(5, 1, 2)
    assert panel.levels == (4.0, 6.0)
    assert agg.pick_individual(panel, 0, 10) == 0


def test_pick_delegate():
    panel = build_panel(5, 4, 5)
    assert agg.pick_delegate(3.0, panel) == 1
    assert agg.pick_delegate(9.9, panel) == 4
    assert agg.pick_delegate(0.0, build_panel(5, 0, 3)) == 0
    np.testing.assert_array_equal(agg.pick_delegate(np.array([0.0, 4.1, 6.0]), panel), [0, 2, 2])


def _qualities_from_points(points):
    # any qualities whose within-column order reproduces the points
    return points.astype(float) + 0.5


def test_borda_five_groups():
    q = _qualities_from_points(FIVE_GROUP_POINTS)
    np.testing.assert_array_equal(agg.score_borda(q), [6, 5, 4])


def test_borda_single_group():
    np.testing.assert_array_equal(agg.score_borda(np.array([[3.0], [1.0], [2.0]])), [2, 0, 1])


def test_borda_identical_rankings():
    q = np.tile(np.array([[5.0], [9.0], [1.0], [7.0]]), (1, 6))
    s = agg.score_borda(q)
    np.testing.assert_array_equal(s, 6 * np.array([1, 3, 0, 2]))
    assert s.max() == 6 * (4 - 1)


def test_borda_ties_favour_lower_index():
    np.testing.assert_array_equal(agg.score_borda(np.array([[1.0], [1.0], [0.0]])), [2, 1, 0])


def test_yes_no_examples():
    assert agg.score_yes_no(np.array([[-1, 0.5, 2]])).tolist() == [2]
    assert agg.score_yes_no(np.array([[0.0, -2.0, -0.1]])).tolist() == [0]
    assert agg.score_yes_no(np.ones((4, 3))).tolist() == [3] * 4
    assert agg.score_yes_no(np.array([[1.0, 2.0, 3.0]]), cutoff=1.5).tolist() == [2]


def test_scaling_examples():
    np.testing.assert_allclose(agg.scale_qualities(np.array([[2.0], [4.0]]), "minmax"), [0, 1])
    s = math.sqrt(3 / 2)
    np.testing.assert_allclose(agg.scale_qualities(np.array([[1.0], [2.0], [3.0]]), "zscore"), [-s, 0, s])
    sd = np.asarray(agg.scale_qualities(np.array([[1.0], [2.0], [3.0]]), "stddev"))
    np.testing.assert_allclose(sd, np.array([1, 2, 3]) / math.sqrt(2 / 3))
    assert sd.std() == pytest.approx(1.0) and sd.mean() != 0


def test_scaling_degenerate_columns():
    flat = np.array([[2.0], [2.0], [2.0]])
    np.testing.assert_array_equal(agg.scale_qualities(flat, "minmax"), [0.5] * 3)
    np.testing.assert_array_equal(agg.scale_qualities(flat, "zscore"), [0.0] * 3)
    np.testing.assert_array_equal(agg.scale_qualities(flat, "stddev"), [2.0] * 3)
    with pytest.raises(ValueError):
        agg.scale_qualities(flat, "rank")


def _noiseless(values, costs, n_groups=3, types=None):
    n = len(values)
    types = types if types is not None else tuple(np.linspace(0.5, 9.5, n))
    proj = ProjectSet(values, costs, types)
    v = np.repeat(np.asarray(values, dtype=float)[:, None], n_groups, axis=1)
    return proj, EvaluationMatrix(v, np.zeros_like(v))


def test_noiseless_direct_methods_recover_values():
    proj, ev = _noiseless(tuple(range(1, 11)), make_costs("decreasing", 10))
    panel = build_panel(5, 2, 3)
    for name in sorted(agg.DIRECT):
        inst = agg.collective_instance(agg.AggregationMethod(name), ev, proj, panel, Fraction(5))
        assert inst.item_values == tuple(float(v) for v in proj.values), name


def test_pathology_borda_single_group():
    proj, ev = _noiseless((10, 2, 1), (Fraction(1, 10), Fraction(1), Fraction(9, 10)), n_groups=1)
    panel = build_panel(5, 0, 1)
    borda = agg.collective_instance(agg.AggregationMethod("borda"), ev, proj, panel, Fraction(1))
    np.testing.assert_allclose(borda.item_values, [0.2, 1.0, 0.0])
    assert solve(borda).chosen == (0, 1, 0)
    direct = agg.collective_instance(agg.AggregationMethod("arithmetic_mean"), ev, proj, panel, Fraction(1))
    assert solve(direct).chosen == (1, 0, 1)


def test_pathology_borda_three_groups_scales_scores():
    proj, ev = _noiseless((10, 2, 1), (Fraction(1, 10), Fraction(1), Fraction(9, 10)), n_groups=3)
    panel = build_panel(5, 2, 3)
    borda = agg.collective_instance(agg.AggregationMethod("borda"), ev, proj, panel, Fraction(1))
    np.testing.assert_allclose(borda.item_values, [0.6, 3.0, 0.0])
    assert solve(borda).chosen == (0, 1, 0)


def test_aggregate_returns_scores_for_indirect_methods():
    proj, ev = _noiseless((10, 2, 1), (Fraction(1, 10), Fraction(1), Fraction(9, 10)), n_groups=1)
    s = agg.aggregate(agg.AggregationMethod("borda"), ev, proj, build_panel(5, 0, 1))
    np.testing.assert_allclose(s, [2, 1, 0])


def test_delegation_and_individual_use_expected_group():
    proj = ProjectSet((1.0, 2.0), (1, 1), (1.0, 9.0))
    v = np.array([[10.0, 20.0, 30.0], [40.0, 50.0, 60.0]])
    ev = EvaluationMatrix(v, np.ones_like(v))
    panel = build_panel(5, 4, 3)
    np.testing.assert_array_equal(agg.aggregate(agg.AggregationMethod("delegation"), ev, proj, panel), [10, 60])
    np.testing.assert_array_equal(agg.aggregate(agg.AggregationMethod("individual"), ev, proj, panel), [20, 50])


def test_beta_zero_delegate_matches_individual_level():
    panel = build_panel(5, 0, 5)
    k_ind = agg.pick_individual(panel, 0, 10)
    for t in np.linspace(0, 10, 41):
        assert panel.levels[agg.pick_delegate(t, panel)] == panel.levels[k_ind]


def test_scaling_treats_underflowing_spread_as_flat():
    col = np.array([[0.0], [5e-324]])
    np.testing.assert_array_equal(agg.scale_qualities(col, "zscore"), [0.0, 0.0])
    np.testing.assert_array_equal(agg.scale_qualities(col, "stddev"), col[:, 0])
    np.testing.assert_array_equal(agg.scale_qualities(col, "minmax"), [0.0, 1.0])
