"""
Certified lower bounds by averaging over the signed permutations of a spike.

For a subspace `L` of dimension `n` and the orbit of the spike
`x̂ = s^{-1/q'} (1, …, 1, 0, …, 0)`, averaging the quadratic lower estimate of
squared norms over the orbit leaves a quadratic in `t = ‖y‖` whose infimum
bounds the squared width. No hidden constants enter: the only constant is
`LEMMA1_C`.
"""

import dataclasses
import fractions
import math
import numpy as np
import typing as t

from widthlab.balls import Kind, WidthQuery
from widthlab.exponents import TWO
from widthlab.norms import (
    LEMMA1_C, IntersectionNorm, LpNorm, embedding_norm, spike_dual_norm,
)

EXHAUSTIVE_SWEEP = 10 ** 4
GEOMETRIC_GRID = 256

def quadratic_infimum(half_sq: float, lin_coeff: float, c: float = LEMMA1_C) -> float:
    """`inf_{t ≥ 0} (half_sq - lin_coeff t + c t^2)`, clamped below at zero."""
    c = float(c)
    if c <= 0:
        raise ValueError(f'c must be positive: {c}')
    if lin_coeff < 0:
        raise ValueError(f'linear coefficient must be non-negative: {lin_coeff}')
    return max(0.0, half_sq - lin_coeff ** 2 / (4 * c))

@dataclasses.dataclass
class SweepRow:
    s: int
    A: float
    K: float
    bound: float

@dataclasses.dataclass
class GluskinCertificate:
    s_star: int
    A: float
    K: float
    c: float
    embed: float
    lower_bound: float
    per_s: t.List[SweepRow]
    exhaustive: bool = True
    covers: t.Tuple[str, ...] = (Kind.GELFAND.value, Kind.LINEAR.value)

def _per_s(s: int, query: WidthQuery, embed: float, c: float) -> SweepRow:
    N, n, q = query.N, query.n, query.q
    A = spike_dual_norm(s, q, query.set)
    K = math.sqrt(n) * s ** float(TWO.recip - q.recip) / math.sqrt(N) * embed
    bound = math.sqrt(quadratic_infimum(A * A / 2, 2 * A * A * K, c))
    return SweepRow(s, A, K, bound)

def _analytic_splits(query: WidthQuery) -> t.List[float]:
    """Split points where the minimizing ball of `A(s)` changes, and the
    large-`n` choice for a ball with `p < 2`. Points outside `[1, N]` are
    dropped; the sweep holds both ends already."""
    set, N, n = query.set, query.N, query.n
    logs = []
    for i, bi in enumerate(set.balls):
        for bj in set.balls[i + 1:]:
            gap = float(bi.p.recip - bj.p.recip)
            if gap != 0:
                logs.append(math.log(bi.nu / bj.nu) / gap)
    first = set.balls[0]
    gap = float(first.p.recip - TWO.recip)
    if n > 0 and gap > 0:
        logs.append((math.log(n) / 2 - float(first.p.dual.recip) * math.log(N)) / gap)
    # Exponentiate in log space; close exponents push points past any float.
    return [math.exp(x) for x in logs if 0 <= x <= math.log(N)]

def sweep_candidates(query: WidthQuery, exhaustive: int = EXHAUSTIVE_SWEEP) -> t.List[int]:
    N = query.N
    if N <= exhaustive:
        return list(range(1, N + 1))
    candidates = {1, N}
    candidates.update(int(s) for s in np.unique(np.rint(np.geomspace(1, N, GEOMETRIC_GRID))))
    for point in _analytic_splits(query):
        for s in (math.floor(point), math.ceil(point)):
            candidates.add(min(max(int(s), 1), N))
    return sorted(candidates)

def gluskin_lower_bound(
    query: WidthQuery,
    c: float = LEMMA1_C,
    exhaustive: int = EXHAUSTIVE_SWEEP,
) -> GluskinCertificate:
    """A certified lower bound for `d^n(∩ ν_j B_{p_j}^N, l_q^N)`.

    Linear widths dominate Gelfand widths, so the certificate covers them too.
    """
    c = float(c)
    N = query.N
    embed = embedding_norm(LpNorm(TWO, N), IntersectionNorm(query.set))
    rows = [_per_s(s, query, embed, c) for s in sweep_candidates(query, exhaustive)]
    best = max(rows, key=lambda row: row.bound)
    return GluskinCertificate(
        best.s, best.A, best.K, c, embed, best.bound, rows,
        exhaustive=N <= exhaustive,
    )

def group_lower_bound(
    xhat_norm: float, b_l2: float, embed_norm: float, n: int, N: int,
    c: float = LEMMA1_C,
) -> float:
    """Lower bound for `d_n(V, X)` where `V` is the hull of the orbit of `x̂`
    under a group acting transitively on coordinates, with signs."""
    for name, value in (('xhat_norm', xhat_norm), ('b_l2', b_l2), ('embed_norm', embed_norm)):
        if not value > 0:
            raise ValueError(f'{name} must be positive: {value}')
    lin = 2 * xhat_norm * b_l2 * math.sqrt(n / N) * embed_norm
    return math.sqrt(quadratic_infimum(xhat_norm ** 2 / 2, lin, c))

def corollary_alpha(c: float = LEMMA1_C) -> fractions.Fraction:
    """Keeping the infimum at least `‖x̂‖²/4` needs `b² e² n / N ≤ c/4`."""
    return fractions.Fraction(c) / 4

def corollary_threshold(b_l2: float, embed_norm: float, N: int, c: float = LEMMA1_C) -> int:
    """Largest `n` for which `group_lower_bound(1, b_l2, embed_norm, n, N) ≥ 1/2`."""
    if not (b_l2 > 0 and embed_norm > 0 and N > 0):
        raise ValueError('inputs must be positive')
    b = fractions.Fraction(b_l2)
    e = fractions.Fraction(embed_norm)
    return math.floor(corollary_alpha(c) * N / (b * b * e * e))
