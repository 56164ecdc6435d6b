"""
Acceptance suites.

Each suite samples or enumerates instances, checks a property on each, and
returns a `SuiteResult`. Every tunable that a mutation test needs to reach
(the quadratic constant, the interpolation formula) is a keyword argument.
"""

import dataclasses
import fractions
import math
import numpy as np
import scipy.optimize
import typing as t

from widthlab.balls import Ball, BallIntersection, WidthQuery
from widthlab.certified import (
    corollary_threshold, gluskin_lower_bound, group_lower_bound, quadratic_infimum,
)
from widthlab.exponents import Exponent, INF, TWO, solve_lambda
from widthlab.formulas import (
    Interpolator, RegimeError, evaluate_all, inclusion_upper_bound,
    single_ball_order, theorem1_order, theorem2_order, theorem3_order,
)
from widthlab.norms import (
    LEMMA1_C, IntersectionNorm, LpNorm, embedding_norm, norm, spike_dual_norm,
    supporting_functional, supporting_functional_coeffs,
)
from widthlab.oracle import (
    OracleBudget, duality_estimates, gelfand_estimate, kolmogorov_estimate,
)
from widthlab.sobolev import (
    Layer, SobolevInstance, ThetaTieError, matching_cases, validate,
    width_exponent,
)

Fraction = fractions.Fraction

LEMMA_EXPONENTS = ('1', '3/2', '2', '3', 'inf')
LEMMA_DIMS = (2, 4, 8, 16)
DUALITY_TOL = 0.05
SPREAD_LIMIT = 0.05
EXACT_TOL = 1e-3
CLASSICAL_TOL = 0.1
QUADRATIC_TOL = 1e-9
SPECIALIZATION_TOL = 1e-9
SCALE_RTOL = 1e-12
CONTINUITY_TOL = 1e-9

@dataclasses.dataclass
class SuiteResult:
    name: str
    passed: bool = True
    checks: int = 0
    failures: int = 0
    counterexample: t.Optional[dict] = None
    inconclusive: int = 0
    notes: t.Dict[str, t.Any] = dataclasses.field(default_factory=dict)

    def check(self, ok: bool, counterexample: t.Callable[[], dict]):
        self.checks += 1
        if not ok:
            self.failures += 1
            self.passed = False
            if self.counterexample is None:
                self.counterexample = counterexample()

    def json(self) -> dict:
        return dataclasses.asdict(self)

def _random_intersection(rng, N: int, exponents=LEMMA_EXPONENTS, max_balls: int = 3) -> BallIntersection:
    k = int(rng.integers(1, max_balls + 1))
    ps = rng.choice(exponents, size=k, replace=False)
    return BallIntersection(
        N, tuple(Ball(p, float(rng.uniform(0.5, 2.0))) for p in ps)
    )

def lemma1_suite(
    seed: int = 0, c=LEMMA1_C, samples: int = 10 ** 5, **_,
) -> SuiteResult:
    """`‖x+h‖² ≥ ‖x‖²/2 + 2‖x‖ f_x(h) + c‖h‖²` on random pairs."""
    result = SuiteResult('lemma1')
    rng = np.random.default_rng(seed)
    c = float(c)
    specs = [LpNorm(p, N) for p in LEMMA_EXPONENTS for N in LEMMA_DIMS]
    specs += [IntersectionNorm(_random_intersection(rng, N)) for N in LEMMA_DIMS for _ in range(5)]
    for k in range(samples):
        spec = specs[k % len(specs)]
        N = spec.dim
        x = rng.standard_normal(N)
        h = rng.standard_normal(N) * 10 ** rng.uniform(-2, 2)
        if k % 3 == 0:
            # Sparse directions reach the corners of `ℓ_1` and `ℓ_∞` balls.
            h[rng.random(N) < 0.5] = 0.0
        nx, nh = norm(x, spec), norm(h, spec)
        f = supporting_functional(x, spec)
        lhs = norm(x + h, spec) ** 2
        rhs = nx * nx / 2 + 2 * nx * float(f @ h) + c * nh * nh
        result.check(lhs >= rhs - 1e-12 * max(1.0, abs(lhs), abs(rhs)), lambda: {
            'norm': repr(spec) if isinstance(spec, LpNorm) else 'intersection',
            'x': x.tolist(), 'h': h.tolist(), 'lhs': lhs, 'rhs': rhs, 'c': c,
        })
    return result

def quadratic_suite(seed: int = 0, samples: int = 100, **_) -> SuiteResult:
    """The closed-form infimum against a grid and a bounded scalar search."""
    result = SuiteResult('quadratic_infimum')
    rng = np.random.default_rng(seed)
    for k in range(samples):
        A = float(rng.uniform(0.1, 10.0))
        # Large K clamps the infimum to zero.
        K = float(10 ** rng.uniform(-3, 1)) if k % 4 else float(rng.uniform(1.0, 100.0))
        c = float(10 ** rng.uniform(-3, 0))
        half_sq, lin = A * A / 2, 2 * A * A * K

        def quadratic(s):
            return half_sq - lin * s + c * s * s

        vertex = lin / (2 * c)
        grid = np.linspace(0.0, 2 * vertex + 1.0, 1001)
        values = quadratic(grid)
        i = int(np.argmin(values))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        search = scipy.optimize.minimize_scalar(
            quadratic, bounds=(lo, hi), method='bounded', options={'xatol': 1e-12},
        )
        numeric = max(0.0, min(float(values[i]), float(search.fun)))
        closed = quadratic_infimum(half_sq, lin, c)
        result.check(
            abs(closed - numeric) <= QUADRATIC_TOL * max(1.0, half_sq),
            lambda: {'A': A, 'K': K, 'c': c, 'closed': closed, 'numeric': numeric},
        )
    return result

def duality_instances() -> t.List[WidthQuery]:
    pair = BallIntersection.of(3, (1, 1.0), ('inf', 0.5))
    queries = [WidthQuery(pair, n, q) for q in (TWO, INF) for n in range(4)]
    single = BallIntersection.of(3, ('3/2', 1.0))
    queries += [WidthQuery(single, n, TWO) for n in range(4)]
    queries.append(WidthQuery(BallIntersection.of(4, (2, 1.0)), 2, INF))
    return queries

def duality_suite(
    seed: int = 0, budget: OracleBudget = OracleBudget(), **_,
) -> SuiteResult:
    """Direct Gelfand estimates against their dual Kolmogorov estimates."""
    result = SuiteResult('duality')
    for query in duality_instances():
        primal, dual = duality_estimates(query, seed, budget)
        if max(primal.relative_spread, dual.relative_spread) > SPREAD_LIMIT:
            result.inconclusive += 1
            continue
        gap = abs(primal.value - dual.value)
        result.check(gap <= DUALITY_TOL, lambda: {
            'N': query.N, 'n': query.n, 'q': query.q.json(),
            'primal': primal.value, 'dual': dual.value, 'gap': gap,
        })
    return result

def exact_suite(
    seed: int = 0, budget: OracleBudget = OracleBudget(), **_,
) -> SuiteResult:
    """Widths known in closed form."""
    result = SuiteResult('exact_cases')

    def expect(label, estimate, expected, tol):
        result.check(abs(estimate - expected) <= tol, lambda: {
            'case': label, 'estimate': estimate, 'expected': expected,
        })

    euclid = BallIntersection.of(4, (2, 1.0))
    for n in range(1, 4):
        estimate = gelfand_estimate(WidthQuery(euclid, n, TWO), seed, budget)
        expect(f'd^{n}(B_2^4, l_2^4)', estimate.value, 1.0, EXACT_TOL)
    estimate = gelfand_estimate(WidthQuery(BallIntersection.of(2, (2, 1.0)), 1, INF), seed, budget)
    expect('d^1(B_2^2, l_inf^2)', estimate.value, math.sqrt(0.5), EXACT_TOL)
    estimate = kolmogorov_estimate(LpNorm(2, 2), LpNorm(INF, 2), 1, seed, budget)
    expect('d_1(B_2^2, l_inf^2)', estimate.value, math.sqrt(0.5), EXACT_TOL)
    classical = BallIntersection.of(5, (4, 1.0))
    for n in range(3):
        expected = (5 - n) ** 0.25
        estimate = gelfand_estimate(WidthQuery(classical, n, TWO), seed, budget)
        expect(f'd^{n}(B_4^5, l_2^5)', estimate.value, expected, CLASSICAL_TOL * expected)
    return result

SANDWICH_EXPONENTS = ('1', '3/2', '2', '3', '4', 'inf')
SANDWICH_TARGETS = (TWO, Exponent.of(4), INF)

def sandwich_instances(seed: int, count: int = 50) -> t.List[WidthQuery]:
    rng = np.random.default_rng(seed)
    queries = []
    for _ in range(count):
        N = int(rng.integers(2, 9))
        set = _random_intersection(rng, N, SANDWICH_EXPONENTS)
        n = int(rng.integers(0, N // 2 + 1))
        q = SANDWICH_TARGETS[int(rng.integers(len(SANDWICH_TARGETS)))]
        queries.append(WidthQuery(set, n, q))
    return queries

def sandwich_suite(
    seed: int = 0,
    budget: OracleBudget = OracleBudget(),
    delta: float = 0.05,
    count: int = 50,
    **_,
) -> SuiteResult:
    """Certified bounds around oracle estimates, and around each other."""
    result = SuiteResult('sandwich')
    for query in sandwich_instances(seed, count):
        lower = gluskin_lower_bound(query).lower_bound
        upper = inclusion_upper_bound(query)
        facts = lambda: {
            'N': query.N, 'n': query.n, 'q': query.q.json(),
            'balls': [(b.p.json(), b.nu) for b in query.set],
            'lower': lower, 'upper': upper,
        }
        result.check(lower <= upper, facts)
        estimate = gelfand_estimate(query, seed, budget)
        if estimate.relative_spread > SPREAD_LIMIT:
            result.inconclusive += 1
            continue
        value = estimate.value
        result.check(lower <= value * (1 + delta), lambda: {**facts(), 'oracle': value})
        result.check(value <= upper * (1 + delta), lambda: {**facts(), 'oracle': value})
    return result

CONSISTENCY_EXPONENTS = ('2', '5/2', '3', '4', '6', '8', 'inf')
CONSISTENCY_TARGETS = ('3', '4', '5', '6')

def _ordered_family(rng, N: int, ps) -> BallIntersection:
    """Radii satisfying both chains for exponents sorted by `p`."""
    balls = [Ball(ps[0], 1.0)]
    for p in ps[1:]:
        prev = balls[-1]
        gap = float(prev.p.recip - p.recip)
        balls.append(Ball(p, prev.nu * N ** (-gap * float(rng.uniform(0, 1)))))
    return BallIntersection(N, tuple(balls))

def _brute_pair_minimum(set: BallIntersection, q: Exponent) -> float:
    values = []
    for i, bi in enumerate(set.balls):
        for j, bj in enumerate(set.balls):
            if not bi.p <= q <= bj.p:
                continue
            if i == j:
                values.append(bi.nu)
            elif bi.p != bj.p:
                lam = (bi.p.recip - q.recip) / (bi.p.recip - bj.p.recip)
                values.append(bi.nu ** (1 - float(lam)) * bj.nu ** float(lam))
    return min(values)

def consistency_suite(
    seed: int = 0,
    interpolator: Interpolator = solve_lambda,
    samples: int = 100,
    **_,
) -> SuiteResult:
    """Formulas against one another and against brute force."""
    result = SuiteResult('theorem_consistency')
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        N = int(2 ** rng.integers(2, 13))
        n = int(rng.integers(0, N // 2 + 1))
        p = Exponent.from_recip(Fraction(int(rng.integers(51, 100)), 100))
        q = Exponent.of(CONSISTENCY_TARGETS[int(rng.integers(len(CONSISTENCY_TARGETS)))])
        query = WidthQuery(BallIntersection.of(N, (p, 1.0)), n, q)
        value = theorem1_order(query).order_value
        expected = single_ball_order(N, n, q, p)
        result.check(value == expected, lambda: {
            'check': 'theorem1 vs single ball', 'N': N, 'n': n, 'p': str(p),
            'q': str(q), 'value': value, 'expected': expected,
        })

    done = 0
    while done < samples:
        N = int(2 ** rng.integers(4, 13))
        r = int(rng.integers(2, 4))
        ps = sorted(
            Exponent.of(p) for p in rng.choice(CONSISTENCY_EXPONENTS, size=r, replace=False)
        )
        q = Exponent.of(CONSISTENCY_TARGETS[int(rng.integers(len(CONSISTENCY_TARGETS)))])
        if not ps[0] < q < ps[-1]:
            continue
        set = _ordered_family(rng, N, ps)
        query = WidthQuery(set, int(rng.integers(0, N // 4 + 1)), q)
        done += 1
        value = theorem2_order(query, interpolator).order_value
        expected = _brute_pair_minimum(set, q)
        facts = lambda: {
            'N': N, 'q': str(q), 'balls': [(str(b.p), b.nu) for b in set],
            'value': value, 'expected': expected,
        }
        result.check(value == expected, lambda: {'check': 'theorem2 vs brute force', **facts()})
        if r == 2:
            part2 = theorem3_order(query, part=2, interpolator=interpolator).order_value
            result.check(part2 == value, lambda: {
                'check': 'theorem3 part 2 vs theorem2', **facts(), 'part2': part2,
            })
        alpha = float(rng.uniform(0.1, 10.0))
        scaled = WidthQuery(set.scaled(alpha), query.n, q)
        rescaled = evaluate_all(scaled)
        for key, report in evaluate_all(query).items():
            if isinstance(report, RegimeError):
                continue
            other = rescaled[key]
            target = alpha * report.order_value
            result.check(
                not isinstance(other, RegimeError)
                and abs(other.order_value - target) <= SCALE_RTOL * abs(target),
                lambda: {'check': f'{key} scale equivariance', **facts(), 'alpha': alpha},
            )
    return result

def specialization_suite(seed: int = 0, samples: int = 100, c=LEMMA1_C, **_) -> SuiteResult:
    """The group-averaging bound reproduces the per-spike bound."""
    result = SuiteResult('specialization')
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        N = int(rng.integers(2, 200))
        set = _random_intersection(rng, N)
        q = Exponent.of(('2', '3', '4', 'inf')[int(rng.integers(4))])
        query = WidthQuery(set, int(rng.integers(0, N + 1)), q)
        s = int(rng.integers(1, N + 1))
        A = spike_dual_norm(s, q, set)
        b = supporting_functional_coeffs(s, q, set, check=False)
        embed = embedding_norm(LpNorm(TWO, N), IntersectionNorm(set))
        grouped = group_lower_bound(A, float(np.linalg.norm(b)), embed, query.n, N, c)
        per_s = next(
            row for row in gluskin_lower_bound(query, c).per_s if row.s == s
        ).bound
        result.check(abs(grouped - per_s) <= SPECIALIZATION_TOL * max(1.0, per_s), lambda: {
            'N': N, 'n': query.n, 's': s, 'grouped': grouped, 'per_s': per_s,
        })
        b_l2 = float(rng.uniform(0.01, 2.0))
        big = corollary_threshold(b_l2, embed, N, c)
        small = corollary_threshold(2 * b_l2, embed, N, c)
        result.check(small == big // 4, lambda: {
            'N': N, 'b_l2': b_l2, 'embed': embed, 'n_max': big, 'quadrupled': small,
        })
    return result

SOBOLEV_EXPONENTS = ('10/9', '5/4', '3/2', '2', '3', '4', '6', 'inf')
SOBOLEV_TARGETS = ('3/2', '2', '3', '4', '6')

def random_sobolev(rng) -> SobolevInstance:
    d = int(rng.integers(1, 6))
    s = int(rng.integers(2, 4))
    rs = sorted(rng.choice(np.arange(0, 8), size=s, replace=False).tolist(), reverse=True)
    ps = sorted(Exponent.of(p) for p in rng.choice(SOBOLEV_EXPONENTS, size=s, replace=False))
    q = SOBOLEV_TARGETS[int(rng.integers(len(SOBOLEV_TARGETS)))]
    return SobolevInstance(d, q, tuple(Layer(int(r), p) for r, p in zip(rs, ps)))

def _brute_case4(instance: SobolevInstance):
    best = None
    for a in instance.layers:
        for b in instance.layers:
            if a.p < instance.q < b.p:
                lam = (a.p.recip - instance.q.recip) / (a.p.recip - b.p.recip)
                value = (1 - lam) * Fraction(a.r, instance.d) + lam * Fraction(b.r, instance.d)
                best = value if best is None else max(best, value)
    return best

def sobolev_suite(seed: int = 0, samples: int = 10 ** 5, **_) -> SuiteResult:
    """Worked instances, case dispatch, and the boundary between 3(a) and 3(b)."""
    result = SuiteResult('sobolev')
    worked = [
        (SobolevInstance(3, 2, ((2, '10/9'), (1, 2))), Fraction(2, 3), '3b'),
        (SobolevInstance(4, 2, ((3, '3/2'), (2, 4))), Fraction(3, 4), '5'),
    ]
    for instance, expected, case in worked:
        theta, tag, _ = width_exponent(instance)
        result.check(theta == expected and tag == case, lambda: {
            'instance': repr(instance), 'theta': str(theta), 'case': tag,
        })

    rng = np.random.default_rng(seed)
    valid = uncovered = ties = 0
    for _ in range(samples):
        instance = random_sobolev(rng)
        if validate(instance):
            continue
        valid += 1
        matches = matching_cases(instance)
        if not matches:
            uncovered += 1
            continue
        facts = lambda: {'instance': repr(instance), 'cases': matches}
        result.check(len(matches) == 1, facts)
        if len(matches) > 1:
            continue
        try:
            theta, case, _ = width_exponent(instance)
        except ThetaTieError:
            ties += 1
            continue
        result.check(theta > 0, facts)
        if case == '4':
            brute = _brute_case4(instance)
            result.check(theta == brute, lambda: {**facts(), 'theta': str(theta), 'brute': str(brute)})
    result.notes.update(valid=valid, uncovered=uncovered, ties=ties)

    # Both formulas meet where `(r_1 - r_s)/d = 1/2 - 1/p_s`, here at `p_s = 6`.
    boundary = Fraction(7, 24)
    for p_s in (6 - 1e-8, 6.0, 6 + 1e-8):
        instance = SobolevInstance(3, 8, ((2, '3/2'), (1, p_s)))
        theta, case, _ = width_exponent(instance)
        result.check(abs(float(theta) - float(boundary)) <= CONTINUITY_TOL, lambda: {
            'p_s': p_s, 'theta': float(theta), 'case': case,
        })
    return result

SUITES = {
    'lemma1': lemma1_suite,
    'quadratic_infimum': quadratic_suite,
    'duality': duality_suite,
    'exact_cases': exact_suite,
    'sandwich': sandwich_suite,
    'theorem_consistency': consistency_suite,
    'specialization': specialization_suite,
    'sobolev': sobolev_suite,
}

def run(
    names: t.Optional[t.Iterable[str]] = None,
    *,
    seed: int = 0,
    delta: float = 0.05,
    budget: OracleBudget = OracleBudget(),
    c=LEMMA1_C,
    interpolator: Interpolator = solve_lambda,
    progress: t.Optional[t.Callable[[SuiteResult], None]] = None,
) -> t.List[SuiteResult]:
    """Run suites in their canonical order."""
    names = list(SUITES) if not names else list(names)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise ValueError(f'unknown suites: {", ".join(unknown)}')
    results = []
    for name in SUITES:
        if name not in names:
            continue
        result = SUITES[name](
            seed=seed, delta=delta, budget=budget, c=c, interpolator=interpolator,
        )
        if progress is not None:
            progress(result)
        results.append(result)
    return results
