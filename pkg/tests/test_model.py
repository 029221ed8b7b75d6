from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collective_knapsack.model import (
    CostStructure,
    NoiseModel,
    ProjectSet,
    build_panel,
    make_costs,
    perception_sigma,
    sample_evaluations,
    sample_types,
)
from collective_knapsack import rng
from collective_knapsack.rng import RandomSource


@pytest.mark.parametrize(
    "center, breadth, size, expected",
    [
        (5, 0, 5, (5.0,) * 5),
        (5, 4, 5, (1.0, 3.0, 5.0, 7.0, 9.0)),
        (5, 10, 3, (-5.0, 5.0, 15.0)),
        (5, 3, 1, (5.0,)),
    ],
)
def test_build_panel_examples(center, breadth, size, expected):
    assert build_panel(center, breadth, size).levels == expected


@pytest.mark.parametrize("size, breadth", [(0, 1.0), (3, -0.5)])
def test_build_panel_rejects(size, breadth):
    with pytest.raises(ValueError):
        build_panel(5, breadth, size)


@settings(max_examples=200, deadline=None)
@given(
    center=st.floats(-50, 50, allow_nan=False),
    breadth=st.floats(0, 50, allow_nan=False),
    size=st.integers(1, 21),
)
def test_panel_invariants(center, breadth, size):
    levels = np.asarray(build_panel(center, breadth, size).levels)
    assert levels.size == size
    assert np.all(np.diff(levels) >= 0)
    scale = 1e-12 * (1 + abs(center) + breadth)
    np.testing.assert_allclose(levels + levels[::-1], np.full(size, 2 * center), rtol=0, atol=scale)
    if size > 1:
        assert levels[0] == pytest.approx(center - breadth, abs=1e-12)
        np.testing.assert_allclose(np.diff(levels), 2 * breadth / (size - 1), atol=1e-12)


@pytest.mark.parametrize("t, e, k, expected", [(7, 7, 1, 0), (2, 5, 1, 3), (2, 5, 4, 12)])
def test_perception_sigma(t, e, k, expected):
    assert perception_sigma(t, e, k) == expected


def test_perception_sigma_rejects_negative_multiplier():
    with pytest.raises(ValueError):
        perception_sigma(1, 2, -1)
    with pytest.raises(ValueError):
        NoiseModel(-0.1)


def test_make_costs_examples():
    assert make_costs("uniform", 30) == [Fraction(1)] * 30
    dec = make_costs(CostStructure.DECREASING, 30)
    assert dec[0] == Fraction(60, 31) and dec[-1] == Fraction(2, 31)
    inc = make_costs("increasing", 30)
    assert inc[0] == Fraction(2, 31) and inc[-1] == Fraction(60, 31)


@given(n=st.integers(1, 200), kind=st.sampled_from(list(CostStructure)))
@settings(max_examples=200, deadline=None)
def test_costs_sum_exactly_to_n(n, kind):
    costs = make_costs(kind, n)
    assert sum(costs) == n
    assert all(c > 0 for c in costs)
    if kind is not CostStructure.UNIFORM:
        assert all((n + 1) % c.denominator == 0 for c in costs)


def test_project_set_validation():
    with pytest.raises(ValueError):
        ProjectSet((1.0, 2.0), (Fraction(1),))
    with pytest.raises(ValueError):
        ProjectSet((0.0,), (Fraction(1),))
    with pytest.raises(ValueError):
        ProjectSet((1.0,), (Fraction(0),))
    with pytest.raises(ValueError):
        ProjectSet((1.0,), (Fraction(1),), types=(11.0,))


def _projects(types):
    n = len(types)
    return ProjectSet(tuple(range(1, n + 1)), make_costs("uniform", n), tuple(types))


def test_zero_noise_returns_values_exactly():
    proj = _projects([0.3, 5.0, 9.9])
    ev = sample_evaluations(proj, build_panel(5, 2, 3), NoiseModel(0.0), RandomSource(1), 0)
    np.testing.assert_array_equal(ev.values, np.array([[1.0] * 3, [2.0] * 3, [3.0] * 3]))
    assert np.all(ev.sigmas == 0)


def test_exact_expertise_match_returns_value():
    proj = _projects([3.0])
    ev = sample_evaluations(proj, build_panel(5, 2, 3), NoiseModel(1.0), RandomSource(1), 0)
    assert ev.values[0, 0] == 1.0
    assert ev.values[0, 1] != 1.0


def test_sampling_is_deterministic():
    proj = _projects([1.0, 4.0, 8.0])
    panel = build_panel(5, 3, 5)
    a = sample_evaluations(proj, panel, NoiseModel(), RandomSource(5), 17)
    b = sample_evaluations(proj, panel, NoiseModel(), RandomSource(5), 17)
    np.testing.assert_array_equal(a.values, b.values)
    c = sample_evaluations(proj, panel, NoiseModel(), RandomSource(5), 18)
    assert not np.array_equal(a.values, c.values)


def test_sampled_moments_match_sigma():
    # v = 5 at type 2 against expertise 5 gives sigma = 3
    proj = ProjectSet((5.0,), (Fraction(1),), (2.0,))
    panel = build_panel(5, 0, 1)
    src = RandomSource(2024)
    z = rng.normal(2024, rng.TAG_EVAL, np.arange(100_000), 0, 0)
    draws = 5.0 + 3.0 * z
    assert abs(draws.mean() - 5.0) < 0.03
    assert abs(draws.std() - 3.0) < 0.03
    # the sampler reads the same stream
    one = sample_evaluations(proj, panel, NoiseModel(), src, 77).values[0, 0]
    assert one == draws[77]


def test_sample_types_range():
    t = sample_types(RandomSource(3), 0, 10_000, 0.0, 10.0)
    assert t.min() >= 0.0 and t.max() < 10.0
    assert abs(t.mean() - 5.0) < 0.15
