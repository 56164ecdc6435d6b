import numpy as np
import pytest

from widthlab.balls import BallIntersection, DimensionError, lp_norm
from widthlab.exponents import Exponent
from widthlab.norms import (
    DualIntersectionNorm, IntersectionNorm, LpNorm, UnsupportedPairError,
    dual_norm, embedding_norm, intersection_norm, maximizer, norm,
    spike_dual_norm, support_vector, supporting_functional,
    supporting_functional_coeffs,
)

@pytest.fixture
def pair():
    """Both balls survive canonicalization in dimension 16."""
    return BallIntersection.of(16, (2, 1), ('inf', 0.5))

def test_lp_norm():
    assert(norm([3, 4], LpNorm(2, 2)) == pytest.approx(5))
    assert(norm([3, 4], LpNorm(2, 2, scale=2)) == pytest.approx(2.5))
    assert(norm([3, -4], LpNorm('inf', 2)) == 4)
    assert(norm([3, -4], LpNorm(1, 2)) == 7)

def test_lp_norm_rejects_scale():
    with pytest.raises(ValueError):
        LpNorm(2, 3, scale=0)

def test_wrong_dimension():
    with pytest.raises(DimensionError):
        norm([1, 2, 3], LpNorm(2, 2))

def test_intersection_norm():
    set = BallIntersection.of(2, (1, 1), ('inf', 0.5))
    assert(norm([1, 0.5], IntersectionNorm(set)) == pytest.approx(2))
    assert(intersection_norm(np.array([0.25, 0.25]), set) == pytest.approx(0.5))

@pytest.mark.parametrize('p', [1, '3/2', 2, 3, 'inf'])
def test_supporting_functional_lp(p):
    x = np.array([0.3, -1.2, 0.7, 0.0])
    spec = LpNorm(p, 4)
    f = supporting_functional(x, spec)
    assert(f @ x == pytest.approx(norm(x, spec)))
    assert(lp_norm(f, spec.p.dual) == pytest.approx(1))

def test_supporting_functional_intersection():
    set = BallIntersection.of(2, (1, 1), ('inf', 0.5))
    x = np.array([1, 0.5])
    f = supporting_functional(x, IntersectionNorm(set))
    assert(np.allclose(f, [2, 0]))
    assert(dual_norm(f, set).value == pytest.approx(1))

def test_maximizer_lp():
    assert(np.allclose(maximizer([3, 4], LpNorm(2, 2)), [0.6, 0.8]))
    assert(np.allclose(maximizer([3, -4], LpNorm(1, 2)), [0, -1]))

def test_dual_norm_zero(pair):
    result = dual_norm(np.zeros(16), pair)
    assert(result.value == 0)
    assert(result.converged)

def test_dual_norm_single_ball():
    set = BallIntersection.of(2, (2, 1))
    result = dual_norm([1, 1], set)
    assert(result.value == pytest.approx(np.sqrt(2)))
    assert(result.lower == result.upper)
    assert(result.converged)

def test_dual_norm_collapses_to_one_ball():
    set = BallIntersection.of(2, (1, 1), ('inf', 0.5))
    assert(dual_norm([1, 1], set).value == pytest.approx(1))

@pytest.mark.parametrize('z,expected', [
    (np.eye(16)[0], 0.5),
    (np.ones(16), 4.0),
])
def test_dual_norm_bracket(pair, z, expected):
    result = dual_norm(z, pair)
    assert(result.lower <= result.upper + 1e-9)
    assert(result.lower == pytest.approx(expected, rel=1e-4))
    assert(result.upper == pytest.approx(expected, rel=1e-4))
    assert(intersection_norm(result.witness, pair) <= 1 + 1e-9)
    assert(np.allclose(result.splitting.sum(axis=0), z))
    assert(result.gap < 1e-3)

def test_support_vector():
    q = Exponent.of(4)
    x = support_vector(3, q, 8)
    assert(np.count_nonzero(x) == 3)
    assert(lp_norm(x, q.dual) == pytest.approx(1))
    for s in (0, 9):
        with pytest.raises(ValueError):
            support_vector(s, q, 8)

def test_spike_dual_norm(pair):
    # Both balls are active at s = 4.
    assert(spike_dual_norm(4, 4, pair) == pytest.approx(2 ** -0.5))
    assert(spike_dual_norm(1, 4, pair) == pytest.approx(0.5))
    x = support_vector(4, Exponent.of(4), 16)
    assert(dual_norm(x, pair).value == pytest.approx(2 ** -0.5, rel=1e-4))

@pytest.mark.parametrize('s', [1, 4, 16])
def test_supporting_functional_coeffs(pair, s):
    b = supporting_functional_coeffs(s, 4, pair)
    x = support_vector(s, Exponent.of(4), 16)
    assert(b @ x == pytest.approx(spike_dual_norm(s, 4, pair)))
    assert(intersection_norm(b, pair) == pytest.approx(1))

def test_embedding_norm_lp():
    assert(embedding_norm(LpNorm(1, 4), LpNorm(2, 4)) == 1)
    assert(embedding_norm(LpNorm(2, 4), LpNorm(1, 4)) == pytest.approx(2))
    assert(embedding_norm(LpNorm(2, 4, 3), LpNorm(2, 4)) == pytest.approx(3))

def test_embedding_norm_intersection(pair):
    assert(embedding_norm(LpNorm(2, 16), IntersectionNorm(pair)) == pytest.approx(2))
    assert(embedding_norm(DualIntersectionNorm(pair), LpNorm(2, 16)) == pytest.approx(2))

def test_embedding_norm_unsupported(pair):
    with pytest.raises(UnsupportedPairError):
        embedding_norm(IntersectionNorm(pair), LpNorm(2, 16))
    with pytest.raises(DimensionError):
        embedding_norm(LpNorm(2, 3), LpNorm(2, 4))
