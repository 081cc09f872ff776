import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import qmc

from linermoo.metrics import (
    epsilon_indicator,
    hv_contribution,
    hv_contributions,
    hypervolume_2d,
    nondominated_front,
    pareto_mask,
    reference_point,
)


def random_front(rng, n):
    x = np.sort(rng.random(n))
    y = np.sort(rng.random(n))[::-1]
    return np.column_stack([x, y])


def qmc_hypervolume(front, ref, m=20):
    """Scrambled Sobol estimate of the dominated area inside [min, ref]."""
    lo = front.min(axis=0)
    pts = qmc.Sobol(2, scramble=True, seed=0).random_base2(m)
    pts = lo + pts * (ref - lo)
    covered = np.zeros(len(pts), dtype=bool)
    for p in front:
        covered |= np.all(pts >= p, axis=1)
    return covered.mean() * np.prod(ref - lo)


def test_spec_examples():
    assert hypervolume_2d([(1, 1)], (2, 2)) == 1.0
    assert hypervolume_2d([(1, 2), (2, 1)], (3, 3)) == 3.0
    front = [(1, 3), (2, 2), (3, 1)]
    assert hv_contribution(front, 1, (4, 4)) == 1.0
    assert hv_contribution([(1, 1)], 0, (2, 2)) == hypervolume_2d([(1, 1)], (2, 2))


def test_duplicates_contribute_nothing():
    front = [(1, 3), (2, 2), (2, 2), (3, 1)]
    assert hv_contribution(front, 1, (4, 4)) == 0.0
    assert hv_contribution(front, 2, (4, 4)) == 0.0
    assert hv_contributions(front, (4, 4)).tolist() == [1.0, 0.0, 0.0, 1.0]


def test_reference_must_be_dominated():
    with pytest.raises(ValueError):
        hypervolume_2d([(1, 1), (3, 0)], (2, 2))
    with pytest.raises(ValueError):
        hypervolume_2d([(2, 1)], (2, 2))  # equality is not strict dominance


def test_empty_front():
    assert hypervolume_2d(np.zeros((0, 2)), (1, 1)) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_hypervolume_against_sobol(seed):
    rng = np.random.default_rng(seed)
    front = random_front(rng, 20)
    ref = np.array([1.1, 1.1])
    assert hypervolume_2d(front, ref) == pytest.approx(qmc_hypervolume(front, ref), rel=1e-3)


@st.composite
def fronts(draw, min_size=1, max_size=15):
    n = draw(st.integers(min_size, max_size))
    pts = draw(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)), min_size=n, max_size=n))
    return np.array(pts, dtype=float)


REF = np.array([21.0, 21.0])


@settings(max_examples=200, deadline=None)
@given(fronts())
def test_batch_contributions_equal_definition(front):
    batch = hv_contributions(front, REF)
    literal = [hv_contribution(front, i, REF) for i in range(len(front))]
    assert batch.tolist() == literal


@settings(max_examples=200, deadline=None)
@given(fronts(), st.tuples(st.integers(0, 20), st.integers(0, 20)))
def test_adding_a_point_never_lowers_hv(front, extra):
    bigger = np.vstack([front, np.array(extra, dtype=float)])
    assert hypervolume_2d(bigger, REF) >= hypervolume_2d(front, REF)


@settings(max_examples=200, deadline=None)
@given(fronts(), st.integers(-5, 5), st.integers(-5, 5))
def test_translation_invariance(front, dx, dy):
    shift = np.array([dx, dy], dtype=float)
    assert hypervolume_2d(front + shift, REF + shift) == hypervolume_2d(front, REF)


@settings(max_examples=200, deadline=None)
@given(fronts())
def test_contributions_sum_at_most_total(front):
    assert hv_contributions(front, REF).sum() <= hypervolume_2d(front, REF)


def _dominated_by_any(p, pts):
    return any(np.all(q <= p) and np.any(q < p) for q in pts)


@settings(max_examples=200, deadline=None)
@given(fronts(max_size=25))
def test_pareto_mask_against_pairwise(front):
    expected = [not _dominated_by_any(p, front) for p in front]
    assert pareto_mask(front).tolist() == expected


def test_nondominated_front_is_sorted_and_unique():
    pts = np.array([[3, 1], [1, 3], [2, 2], [2, 2], [3, 3]], dtype=float)
    assert nondominated_front(pts).tolist() == [[1, 3], [2, 2], [3, 1]]


def brute_epsilon(a, b):
    """Smallest eps on a fine grid of candidate values such that a - eps covers b."""
    cands = sorted({float(x) for x in (a[:, None, :] - b[None, :, :]).ravel()})
    for eps in cands:
        if all(any(np.all(p - eps <= q) for p in a) for q in b):
            return eps
    raise AssertionError


@settings(max_examples=100, deadline=None)
@given(fronts(max_size=8), fronts(max_size=8))
def test_epsilon_against_scan(a, b):
    assert epsilon_indicator(a, b) == brute_epsilon(a, b)


def test_epsilon_examples():
    a = np.array([[1.0, 3.0], [3.0, 1.0]])
    assert epsilon_indicator(a, a) == 0.0
    assert epsilon_indicator(a - 1.0, a) <= 0.0
    with pytest.raises(ValueError):
        epsilon_indicator(np.zeros((0, 2)), a)


def test_reference_point_margin():
    ref = reference_point([[1.0, 10.0], [2.0, 0.0]])
    assert ref.tolist() == [2.2, 11.0]
    assert reference_point([[0.0, -5.0], [-1.0, -10.0]]).tolist() == [1.0, -4.5]
