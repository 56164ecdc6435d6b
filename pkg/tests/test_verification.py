import fractions
import numpy as np
import pytest

from widthlab import verification
from widthlab.balls import BallIntersection, Kind, WidthQuery
from widthlab.exponents import solve_lambda
from widthlab.norms import LEMMA1_C, LpNorm, norm, supporting_functional

def swapped(pi, pj, q):
    return 1 - solve_lambda(pi, pj, q)

def test_suite_result():
    result = verification.SuiteResult('example')
    result.check(True, lambda: {'never': 'built'})
    result.check(False, lambda: {'first': 1})
    result.check(False, lambda: {'second': 2})
    assert(not result.passed)
    assert((result.checks, result.failures) == (3, 2))
    assert(result.counterexample == {'first': 1})
    assert(result.json()['name'] == 'example')

def test_run_rejects_unknown():
    with pytest.raises(ValueError, match='nope'):
        verification.run(['nope'])

def test_run_order():
    results = verification.run(['specialization', 'quadratic_infimum'])
    assert([r.name for r in results] == ['quadratic_infimum', 'specialization'])
    assert(all(r.passed for r in results))

def test_quadratic():
    result = verification.quadratic_suite(seed=3, samples=40)
    assert(result.passed)
    assert(result.checks == 40)

def test_lemma1():
    result = verification.lemma1_suite(samples=2000)
    assert(result.passed)
    assert(result.checks == 2000)

@pytest.mark.parametrize('c,holds', [(LEMMA1_C, True), (fractions.Fraction(1, 2), False)])
def test_lemma1_constant(c, holds):
    spec = LpNorm('inf', 2)
    x, h = np.array([1.0, 0.5]), np.array([0.0, -1.5])
    f = supporting_functional(x, spec)
    lhs = norm(x + h, spec) ** 2
    rhs = norm(x, spec) ** 2 / 2 + 2 * norm(x, spec) * (f @ h) + float(c) * norm(h, spec) ** 2
    assert((lhs >= rhs) == holds)

def test_consistency():
    assert(verification.consistency_suite(samples=30).passed)

def test_consistency_catches_swapped_lambda():
    result = verification.consistency_suite(samples=30, interpolator=swapped)
    assert(not result.passed)
    assert(result.counterexample is not None)

def test_specialization():
    result = verification.specialization_suite(seed=1, samples=20)
    assert(result.passed)
    assert(result.checks == 40)

def test_sobolev():
    result = verification.sobolev_suite(samples=2000)
    assert(result.passed)
    assert(result.notes['valid'] > 0)
    assert(set(result.notes) == {'valid', 'uncovered', 'ties'})

def test_sandwich_instances():
    queries = verification.sandwich_instances(seed=0, count=10)
    assert(len(queries) == 10)
    assert(all(2 <= q.N <= 8 and 2 * q.n <= q.N for q in queries))
    assert(all(q.kind == Kind.GELFAND for q in queries))
    assert(queries == verification.sandwich_instances(seed=0, count=10))

def test_duality_instances():
    queries = verification.duality_instances()
    assert(len(queries) == 13)
    assert(max(q.N for q in queries) <= 4)
    single = WidthQuery(BallIntersection.of(3, ('3/2', 1.0)), 1, 2)
    assert(single in queries)
