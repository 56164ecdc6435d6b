"""
Closed-form order estimates for Gelfand widths of ball intersections, and a
certified upper bound.

Order values hold up to unknown absolute constants and are never mixed with
certified values: each `BoundReport` carries both, side by side.
"""

import dataclasses
import math
import numpy as np
import typing as t

from widthlab.balls import (
    Ball, Kind, Regime, WidthQuery, DEFAULT_A0,
    satisfies_ordering, theorem4_ratio_admissible, theorem4_ratio_range,
    theorem4_structure,
)
from widthlab.exponents import Exponent, Real, TWO, interpolate, solve_lambda

LAMBDA_GRID = 33

class RegimeError(ValueError):
    pass

Interpolator = t.Callable[[Exponent, Exponent, Exponent], Real]

@dataclasses.dataclass
class BoundReport:
    query: WidthQuery
    theorem: str
    order_value: float
    regime: Regime
    certified_upper: float
    formula_trace: t.List[t.Tuple[str, float]]
    linear_applicable: bool = False
    p1: t.Optional[Exponent] = None
    advisories: t.List[str] = dataclasses.field(default_factory=list)
    details: t.Dict[str, t.Any] = dataclasses.field(default_factory=dict)

def _require(condition: bool, theorem: str, message: str):
    if not condition:
        raise RegimeError(f'{theorem}: {message}')

def _spread_branch(nu: float, n: int, N: int, p: Exponent) -> float:
    """`ν n^{-1/2} N^{1/p'}`, infinite at `n = 0`."""
    if n == 0:
        return math.inf
    return nu * n ** -0.5 * N ** float(p.dual.recip)

def single_ball_order(N: int, n: int, q, p) -> float:
    """Order of `d^n(B_p^N, l_q^N)` for `n ≤ N/2`, `q ≥ 2`, `p > 1`."""
    q, p = Exponent.of(q), Exponent.of(p)
    _require(2 * n <= N, 'single ball', f'needs n <= N/2, got n={n}, N={N}')
    _require(q >= TWO, 'single ball', f'needs q >= 2, got q={q}')
    _require(p.recip < 1, 'single ball', f'needs p > 1, got p={p}')
    if p >= q:
        return N ** float(q.recip - p.recip)
    if p >= TWO:
        return 1.0
    return min(1.0, _spread_branch(1.0, n, N, p))

def single_ball_linear_applicable(q: Exponent, p: Exponent) -> bool:
    """Whether the linear width has the same order as the Gelfand width."""
    if p >= TWO:
        return True
    return p.recip + q.recip <= 1

def theoremb_order(query: WidthQuery) -> BoundReport:
    """A single ball, scaled by its radius."""
    _require(len(query.set) == 1, 'single ball', f'needs one ball, got {len(query.set)}')
    [ball] = query.set.balls
    value = ball.nu * single_ball_order(query.N, query.n, query.q, ball.p)
    return BoundReport(
        query, 'thmb', value, Regime.THMB_SINGLE,
        inclusion_upper_bound(query),
        [('nu * single_ball_order', value)],
        linear_applicable=single_ball_linear_applicable(query.q, ball.p),
        p1=ball.p,
    )

def _common(query: WidthQuery, theorem: str):
    set = query.set
    _require(query.q >= TWO, theorem, f'needs q >= 2, got q={query.q}')
    _require(all(p.recip < 1 for p in set.ps), theorem, 'needs every p > 1')
    _require(
        satisfies_ordering(set), theorem,
        'needs balls ordered by p with nu non-increasing and nu N^{-1/p} non-decreasing',
    )

def theorem1_order(query: WidthQuery) -> BoundReport:
    """`min {ν_1 n^{-1/2} N^{1/p_1'}, ν_r}` when every `p_j ≤ q` and `p_1 < 2`."""
    theorem = 'theorem1'
    _common(query, theorem)
    set, N, n, q = query.set, query.N, query.n, query.q
    first, last = set.balls[0], set.balls[-1]
    _require(last.p <= q, theorem, f'needs p_r <= q, got p_r={last.p}, q={q}')
    _require(first.p < TWO, theorem, f'needs p_1 < 2, got p_1={first.p}')
    _require(2 * n <= N, theorem, f'needs n <= N/2, got n={n}, N={N}')
    trace = [
        ('nu_1 n^-1/2 N^(1/p_1\')', _spread_branch(first.nu, n, N, first.p)),
        ('nu_r', last.nu),
    ]
    crossover = (first.nu / last.nu) ** 2 * N ** (2 * float(first.p.dual.recip))
    return BoundReport(
        query, theorem, min(v for _, v in trace), Regime.THM1,
        inclusion_upper_bound(query), trace, p1=first.p,
        details={'crossover_n': crossover},
    )

def pair_term(first: Ball, second: Ball, q: Exponent, interpolator: Interpolator = solve_lambda):
    """`(λ, ν_i^{1-λ} ν_j^λ)` for `p_i ≤ q ≤ p_j`."""
    if first.p == second.p:
        return 0, first.nu
    lam = interpolator(first.p, second.p, q)
    return lam, first.nu ** (1 - float(lam)) * second.nu ** float(lam)

def _pair_trace(balls, q, interpolator, strict: bool):
    trace = []
    for i, bi in enumerate(balls):
        for j, bj in enumerate(balls):
            if strict:
                admissible = bi.p < q < bj.p
            else:
                admissible = bi.p <= q <= bj.p and (i == j or bi.p != bj.p)
            if not admissible:
                continue
            lam, value = pair_term(bi, bj, q, interpolator)
            trace.append((f'pair({i + 1},{j + 1}) lambda={float(lam):.12g}', value))
    return trace

def theorem2_order(query: WidthQuery, interpolator: Interpolator = solve_lambda) -> BoundReport:
    """`min ν_i^{1-λ_ij} ν_j^{λ_ij}` over `p_i ≤ q ≤ p_j`, when every `p_j ≥ 2`."""
    theorem = 'theorem2'
    _common(query, theorem)
    set, N, n, q = query.set, query.N, query.n, query.q
    first, last = set.balls[0], set.balls[-1]
    _require(first.p >= TWO, theorem, f'needs p_1 >= 2, got p_1={first.p}')
    _require(first.p < q < last.p, theorem, f'needs p_1 < q < p_r, got q={q}')
    _require(4 * n <= N, theorem, f'needs n <= N/4, got n={n}, N={N}')
    trace = _pair_trace(set.balls, q, interpolator, strict=False)
    return BoundReport(
        query, theorem, min(v for _, v in trace), Regime.THM2,
        inclusion_upper_bound(query), trace, p1=first.p,
    )

def theorem3_order(
    query: WidthQuery,
    family: t.Optional[t.Iterable[Ball]] = None,
    part: t.Optional[int] = None,
    interpolator: Interpolator = solve_lambda,
) -> BoundReport:
    """Infima over an arbitrary finite family, without ordering assumptions.

    Part 1 needs every `p_α ≤ q`, part 2 every `p_α ≥ 2`.
    Without an explicit part, part 1 is tried first.
    """
    theorem = 'theorem3'
    balls = tuple(query.set.balls if family is None else family)
    _require(len(balls) > 0, theorem, 'needs a nonempty family')
    N, n, q = query.N, query.n, query.q
    _require(q >= TWO, theorem, f'needs q >= 2, got q={q}')
    _require(all(b.p.recip < 1 for b in balls), theorem, 'needs inf p > 1')
    part1 = all(b.p <= q for b in balls) and 2 * n <= N
    part2 = all(b.p >= TWO for b in balls) and 4 * n <= N
    if part is None:
        _require(part1 or part2, theorem,
            'needs every p <= q with n <= N/2, or every p >= 2 with n <= N/4')
        part = 1 if part1 else 2
    if part == 1:
        _require(part1, theorem, 'part 1 needs every p <= q and n <= N/2')
        trace = [
            (f'ball({k + 1})', b.nu * min(1.0, _spread_branch(1.0, n, N, b.p)))
            for k, b in enumerate(balls)
        ]
        linear = all(b.p.recip + q.recip <= 1 for b in balls)
        regime = Regime.THM3_PART1
    elif part == 2:
        _require(part2, theorem, 'part 2 needs every p >= 2 and n <= N/4')
        above = [b.nu * N ** float(q.recip - b.p.recip) for b in balls if b.p >= q]
        below = [b.nu for b in balls if b.p <= q]
        trace = [
            ('inf over p >= q', min(above, default=math.inf)),
            ('inf over p <= q', min(below, default=math.inf)),
        ]
        trace.extend(_pair_trace(balls, q, interpolator, strict=True))
        linear = True
        regime = Regime.THM3_PART2
    else:
        raise ValueError(f'part must be 1 or 2: {part}')
    return BoundReport(
        query, theorem, min(v for _, v in trace), regime,
        inclusion_upper_bound(query), trace,
        linear_applicable=linear, p1=min(b.p for b in balls),
        details={'part': part},
    )

def theorem4_order(query: WidthQuery, a0: float = DEFAULT_A0) -> BoundReport:
    """Two balls in `l_2` with `1 < p_1 < 2 < p_2`.

    Ratio and `n` ranges outside the hypotheses are advisory: the value is
    still computed, but the regime flag is cleared.
    """
    theorem = 'theorem4'
    _require(theorem4_structure(query), theorem,
        'needs q = 2 and two balls with 1 < p_1 < 2 < p_2')
    N, n = query.N, query.n
    b1, b2 = query.set.balls
    lam = float(solve_lambda(b1.p, b2.p, TWO))
    ratio, switch, ceiling = theorem4_ratio_range(query.set)
    advisories = []
    if not theorem4_ratio_admissible(ratio, ceiling):
        advisories.append(f'nu_1/nu_2 = {ratio:.12g} outside [1, {ceiling:.12g}]')
    geometric = b1.nu ** (1 - lam) * b2.nu ** lam
    trace = [('nu_1^(1-lambda) nu_2^lambda', geometric)]
    if ratio <= switch:
        regime = Regime.THM4_REGIME1
        trace.append(('nu_1 n^-1/2 N^(1/p_1\')', _spread_branch(b1.nu, n, N, b1.p)))
        limit = a0 * N
    else:
        regime = Regime.THM4_REGIME2
        limit = a0 * ratio ** (2 * lam - 2) * N
    if n > limit:
        advisories.append(f'n = {n} exceeds {limit:.12g}')
    return BoundReport(
        query, theorem, min(v for _, v in trace),
        Regime.NONE if advisories else regime,
        inclusion_upper_bound(query), trace, p1=b1.p, advisories=advisories,
        details={'lambda': lam, 'regime': 1 if regime == Regime.THM4_REGIME1 else 2},
    )

def simple_family_order(query: WidthQuery) -> BoundReport:
    """The two families where every ball lies on one side:
    all `p ≥ q`, or all `2 ≤ p ≤ q`."""
    theorem = 'known'
    set, N, n, q = query.set, query.N, query.n, query.q
    _require(q >= TWO, theorem, f'needs q >= 2, got q={q}')
    _require(all(p.recip < 1 for p in set.ps), theorem, 'needs every p > 1')
    _require(2 * n <= N, theorem, f'needs n <= N/2, got n={n}, N={N}')
    if all(p >= q for p in set.ps):
        trace = [
            (f'ball({k + 1})', b.nu * N ** float(q.recip - b.p.recip))
            for k, b in enumerate(set)
        ]
        regime = Regime.KNOWN_LARGE_P
    else:
        _require(all(TWO <= p <= q for p in set.ps), theorem,
            'needs every p >= q, or every p in [2, q]')
        trace = [(f'ball({k + 1})', b.nu) for k, b in enumerate(set)]
        regime = Regime.KNOWN_MIDDLE_P
    return BoundReport(
        query, theorem, min(v for _, v in trace), regime,
        inclusion_upper_bound(query), trace,
        linear_applicable=regime == Regime.KNOWN_LARGE_P,
    )

def section_radius(p: Exponent, q: Exponent, M: int) -> float:
    """`sup ‖x‖_q` over `B_p^M`, i.e. `M^{max(0, 1/q - 1/p)}`."""
    return M ** float(max(0, q.recip - p.recip))

def inclusion_upper_bound(query: WidthQuery) -> float:
    """A certified upper bound, valid for Gelfand, Kolmogorov, and linear widths.

    The first `n` coordinates are annihilated (or approximated exactly),
    which leaves the same intersection in dimension `N - n`. Its radius in
    `l_q` is bounded through single balls and through the inclusion
    `ν_i B_{p_i} ∩ ν_j B_{p_j} ⊂ ν_i^{1-λ} ν_j^λ B_{p(λ)}`.
    """
    set, N, n, q = query.set, query.N, query.n, query.q
    if n >= N:
        return 0.0
    M = N - n
    best = min(b.nu * section_radius(b.p, q, M) for b in set)
    balls = set.balls
    for i, bi in enumerate(balls):
        for bj in balls[i + 1:]:
            if bi.p == bj.p:
                continue
            lams = [float(lam) for lam in np.linspace(0.0, 1.0, LAMBDA_GRID)]
            lo, hi = (bi, bj) if bi.p < bj.p else (bj, bi)
            if lo.p <= q <= hi.p:
                exact = solve_lambda(lo.p, hi.p, q)
                lams.append(exact if lo is bi else 1 - exact)
            for lam in lams:
                p = interpolate(bi.p, bj.p, lam)
                radius = bi.nu ** (1 - float(lam)) * bj.nu ** float(lam)
                best = min(best, radius * section_radius(p, q, M))
    return best

THEOREMS = ('thm1', 'thm2', 'thm3', 'thm4', 'thmb', 'known')

def evaluate_all(query: WidthQuery, a0: float = DEFAULT_A0, kind: t.Optional[Kind] = None):
    """Every formula, keyed as in `THEOREMS`.

    Values are `BoundReport`s, or the `RegimeError` explaining why the
    formula does not apply. The formulas describe Gelfand widths: for
    Kolmogorov widths none applies, and for linear widths only those whose
    report is `linear_applicable`.
    """
    kind = query.kind if kind is None else Kind(kind)
    evaluations = {
        'thm1': lambda: theorem1_order(query),
        'thm2': lambda: theorem2_order(query),
        'thm3': lambda: theorem3_order(query),
        'thm4': lambda: theorem4_order(query, a0),
        'thmb': lambda: theoremb_order(query),
        'known': lambda: simple_family_order(query),
    }
    results = {}
    for key in THEOREMS:
        if kind == Kind.KOLMOGOROV:
            results[key] = RegimeError(
                f'{key}: gives Gelfand widths; kolmogorov widths get the certified upper bound only')
            continue
        try:
            report = evaluations[key]()
        except RegimeError as error:
            results[key] = error
            continue
        if kind == Kind.LINEAR and not report.linear_applicable:
            report = RegimeError(f'{key}: makes no claim for linear widths here')
        results[key] = report
    return results
