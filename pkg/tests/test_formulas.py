import pytest

from widthlab.balls import Ball, BallIntersection, Kind, Regime, WidthQuery, theorem4_regime
from widthlab.exponents import Exponent
from widthlab.formulas import (
    BoundReport, RegimeError, THEOREMS, evaluate_all, inclusion_upper_bound,
    pair_term, section_radius, simple_family_order, single_ball_order,
    theorem1_order, theorem2_order, theorem3_order, theorem4_order,
    theoremb_order,
)

@pytest.fixture
def theorem2_query():
    return WidthQuery(BallIntersection.of(16, (2, 1), ('inf', 0.5)), 4, 4)

@pytest.mark.parametrize('N,n,q,p,expected', [
    (100, 25, 2, '3/2', 0.2 * 100 ** (1 / 3)),
    (16, 4, 2, 4, 2.0),
    (16, 4, 4, 3, 1.0),
    (100, 0, 2, '3/2', 1.0),
])
def test_single_ball_order(N, n, q, p, expected):
    assert(single_ball_order(N, n, q, p) == pytest.approx(expected))

def test_single_ball_order_example():
    assert(single_ball_order(100, 25, 2, '3/2') == pytest.approx(0.92832, abs=1e-5))

@pytest.mark.parametrize('N,n,q,p', [
    (10, 6, 2, 2),
    (10, 1, '3/2', 2),
    (10, 1, 2, 1),
])
def test_single_ball_order_rejects(N, n, q, p):
    with pytest.raises(RegimeError):
        single_ball_order(N, n, q, p)

def test_theoremb_scales_radius():
    query = WidthQuery(BallIntersection.of(16, (4, 3)), 4, 2)
    report = theoremb_order(query)
    assert(report.order_value == pytest.approx(6))
    assert(report.linear_applicable)
    with pytest.raises(RegimeError):
        theoremb_order(WidthQuery(BallIntersection.of(16, (2, 1), (4, 1)), 4, 2))

def test_theorem1():
    query = WidthQuery(BallIntersection.of(100, ('3/2', 1), (2, 1)), 25, 2)
    report = theorem1_order(query)
    assert(isinstance(report, BoundReport))
    assert(report.order_value == pytest.approx(0.92832, abs=1e-5))
    assert(report.regime == Regime.THM1)
    assert(len(report.formula_trace) == 2)
    assert(report.p1 == Exponent.of('3/2'))

def test_theorem1_needs_small_first_p():
    query = WidthQuery(BallIntersection.of(100, (2, 1), (3, 1)), 25, 4)
    with pytest.raises(RegimeError, match='p_1 < 2'):
        theorem1_order(query)

def test_theorem1_needs_ordering():
    # nu increases with p.
    query = WidthQuery(BallIntersection.of(100, ('3/2', 1), (2, 2)), 25, 2)
    with pytest.raises(RegimeError, match='ordered'):
        theorem1_order(query)

def test_theorem2(theorem2_query):
    report = theorem2_order(theorem2_query)
    assert(report.order_value == pytest.approx(0.70711, abs=1e-5))
    assert(report.regime == Regime.THM2)
    assert(report.certified_upper >= report.order_value - 1e-9)

def test_theorem2_needs_quarter(theorem2_query):
    with pytest.raises(RegimeError, match='N/4'):
        theorem2_order(theorem2_query.replace(n=5))

def test_pair_term():
    lam, value = pair_term(Ball(2, 1), Ball('inf', 0.5), Exponent.of(4))
    assert(lam == 0.5)
    assert(value == pytest.approx(2 ** -0.5))
    assert(pair_term(Ball(3, 2), Ball(3, 1), Exponent.of(3)) == (0, 2))

def test_theorem3_part2_matches_theorem2(theorem2_query):
    report = theorem3_order(theorem2_query, part=2)
    assert(report.order_value == pytest.approx(theorem2_order(theorem2_query).order_value))
    assert(report.details['part'] == 2)

def test_theorem3_part1_family():
    query = WidthQuery(BallIntersection.of(100, (2, 1)), 25, 2)
    family = [Ball('3/2', 1), Ball(2, 0.5)]
    report = theorem3_order(query, family=family)
    assert(report.details['part'] == 1)
    assert(report.order_value == pytest.approx(0.5))

def test_theorem3_rejects(theorem2_query):
    with pytest.raises(RegimeError):
        theorem3_order(theorem2_query, part=1)
    with pytest.raises(RegimeError):
        theorem3_order(theorem2_query, family=[])
    with pytest.raises(ValueError):
        theorem3_order(theorem2_query, part=3)

def test_theorem4_regime1():
    # Past `N = 10^10` the spread branch can win inside the hypotheses.
    N = 10 ** 12
    query = WidthQuery(BallIntersection.of(N, ('3/2', 1), (4, 1)), 10 ** 10, 2)
    report = theorem4_order(query)
    assert(report.regime == Regime.THM4_REGIME1)
    assert(report.advisories == [])
    assert(report.order_value == pytest.approx(0.1))

def test_theorem4_regime2():
    query = WidthQuery(BallIntersection.of(10 ** 6, ('3/2', 40), (4, 1)), 100, 2)
    report = theorem4_order(query)
    assert(report.regime == Regime.THM4_REGIME2)
    assert(report.details['lambda'] == pytest.approx(0.4))
    assert(report.order_value == pytest.approx(40 ** 0.6))

def test_theorem4_ratio_tolerance():
    # A ratio a rounding error below 1 still counts as 1.
    query = WidthQuery(BallIntersection.of(10 ** 6, ('3/2', 1 - 1e-14), (4, 1)), 100, 2)
    report = theorem4_order(query)
    assert(report.advisories == [])
    assert(report.regime == theorem4_regime(query) == Regime.THM4_REGIME1)

def test_theorem4_advisory():
    query = WidthQuery(BallIntersection.of(100, ('3/2', 1), (4, 1)), 9, 2)
    report = theorem4_order(query)
    assert(report.regime == Regime.NONE)
    assert(len(report.advisories) == 1)
    assert(report.details['regime'] == 1)
    assert(report.order_value == pytest.approx(1))

def test_theorem4_rejects(theorem2_query):
    with pytest.raises(RegimeError):
        theorem4_order(theorem2_query)

def test_simple_family_large_p():
    query = WidthQuery(BallIntersection.of(16, (4, 1)), 4, 2)
    report = simple_family_order(query)
    assert(report.regime == Regime.KNOWN_LARGE_P)
    assert(report.order_value == pytest.approx(2))

def test_simple_family_middle_p():
    query = WidthQuery(BallIntersection.of(16, (2, 1), (3, 0.5)), 4, 4)
    report = simple_family_order(query)
    assert(report.regime == Regime.KNOWN_MIDDLE_P)
    assert(report.order_value == pytest.approx(0.5))
    with pytest.raises(RegimeError):
        simple_family_order(query.replace(set=BallIntersection.of(16, ('3/2', 1))))

def test_section_radius():
    assert(section_radius(Exponent.of('inf'), Exponent.of(4), 16) == pytest.approx(2))
    assert(section_radius(Exponent.of(2), Exponent.of(4), 16) == 1)

def test_inclusion_upper_bound(theorem2_query):
    query = theorem2_query.replace(n=0)
    assert(inclusion_upper_bound(query) == pytest.approx(2 ** -0.5))
    assert(inclusion_upper_bound(query.replace(n=16)) == 0)

def test_evaluate_all(theorem2_query):
    results = evaluate_all(theorem2_query)
    assert(tuple(results) == THEOREMS)
    assert(isinstance(results['thm2'], BoundReport))
    assert(isinstance(results['thm3'], BoundReport))
    assert(isinstance(results['thm1'], RegimeError))
    assert(isinstance(results['thm4'], RegimeError))
    assert(isinstance(results['thmb'], RegimeError))

def test_evaluate_all_kolmogorov(theorem2_query):
    results = evaluate_all(theorem2_query.replace(kind=Kind.KOLMOGOROV))
    assert(tuple(results) == THEOREMS)
    assert(all(isinstance(report, RegimeError) for report in results.values()))
    assert('certified upper bound only' in str(results['thm2']))

def test_evaluate_all_linear():
    spread = WidthQuery(BallIntersection.of(100, ('3/2', 1)), 25, 2, Kind.LINEAR)
    assert(isinstance(evaluate_all(spread)['thmb'], RegimeError))
    assert(isinstance(evaluate_all(spread, kind=Kind.GELFAND)['thmb'], BoundReport))
    flat = WidthQuery(BallIntersection.of(16, (3, 1)), 4, 4, Kind.LINEAR)
    assert(evaluate_all(flat)['thmb'].order_value == 1.0)
