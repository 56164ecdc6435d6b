"""
Intersections of scaled balls `∩_j ν_j B_{p_j}^N` and the width queries asked
about them.
"""

import dataclasses
import enum
import math
import numpy as np
import typing as t

from widthlab.exponents import Exponent, Real, TWO, solve_lambda

# Relative slack for inclusion and membership decisions.
RTOL = 1e-12

class BallError(ValueError):
    pass

class DimensionError(ValueError):
    pass

def lp_norm(x, p: Exponent) -> float:
    x = np.asarray(x, dtype=float)
    m = np.max(np.abs(x)) if x.size else 0.0
    if m == 0:
        return 0.0
    if p.is_infinite():
        return float(m)
    # Scale first so that large exponents neither overflow nor underflow.
    return float(m * np.linalg.norm(x / m, ord=p.value))

@dataclasses.dataclass(frozen=True)
class Ball:
    p: Exponent
    nu: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'p', Exponent.of(self.p))
        nu = float(self.nu)
        if not (nu > 0 and math.isfinite(nu)):
            raise BallError(f'radius must be positive and finite: {self.nu}')
        object.__setattr__(self, 'nu', nu)

class Kind(enum.Enum):
    GELFAND = 'gelfand'
    KOLMOGOROV = 'kolmogorov'
    LINEAR = 'linear'

@dataclasses.dataclass(frozen=True)
class BallIntersection:
    dim: int
    balls: t.Tuple[Ball, ...]

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise BallError(f'dimension must be a positive integer: {self.dim}')
        balls = tuple(self.balls)
        if not balls:
            raise BallError('an intersection needs at least one ball')
        object.__setattr__(self, 'dim', int(self.dim))
        object.__setattr__(self, 'balls', balls)

    @classmethod
    def of(cls, dim: int, *pairs) -> 'BallIntersection':
        """Build from `(p, nu)` pairs."""
        return cls(dim, tuple(Ball(p, nu) for p, nu in pairs))

    def __len__(self):
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    @property
    def ps(self) -> t.List[Exponent]:
        return [b.p for b in self.balls]

    @property
    def nus(self) -> t.List[float]:
        return [b.nu for b in self.balls]

    def scaled(self, alpha: float) -> 'BallIntersection':
        return BallIntersection(
            self.dim, tuple(Ball(b.p, b.nu * alpha) for b in self.balls)
        )

    def with_radius(self, index: int, nu: float) -> 'BallIntersection':
        balls = list(self.balls)
        balls[index] = Ball(balls[index].p, nu)
        return BallIntersection(self.dim, tuple(balls))

@dataclasses.dataclass(frozen=True)
class WidthQuery:
    set: BallIntersection
    n: int
    q: Exponent
    kind: Kind = Kind.GELFAND

    def __post_init__(self):
        object.__setattr__(self, 'q', Exponent.of(self.q))
        object.__setattr__(self, 'kind', Kind(self.kind))
        if int(self.n) != self.n or not 0 <= self.n <= self.set.dim:
            raise BallError(f'n must be an integer in [0, {self.set.dim}]: {self.n}')
        object.__setattr__(self, 'n', int(self.n))

    @property
    def N(self) -> int:
        return self.set.dim

    def replace(self, **changes) -> 'WidthQuery':
        return dataclasses.replace(self, **changes)

def embedding_factor(inner: Exponent, outer: Exponent, N: int) -> float:
    """Supremum of `‖x‖_outer` over the unit ball of `ℓ_inner^N`."""
    return N ** float(max(0, outer.recip - inner.recip))

def contains_ball(inner: Ball, outer: Ball, N: int) -> bool:
    """Whether `inner.nu B_{inner.p}^N ⊆ outer.nu B_{outer.p}^N`."""
    return inner.nu * embedding_factor(inner.p, outer.p, N) <= outer.nu * (1 + RTOL)

def canonicalize(set: BallIntersection) -> BallIntersection:
    """Drop redundant balls and order the rest by increasing `p`.

    The represented set is unchanged.
    """
    N = set.dim
    smallest: t.Dict[Exponent, Ball] = {}
    for ball in set:
        kept = smallest.get(ball.p)
        if kept is None or ball.nu < kept.nu:
            smallest[ball.p] = ball
    balls = sorted(smallest.values(), key=lambda b: b.p)
    while True:
        for j, outer in enumerate(balls):
            if any(
                contains_ball(inner, outer, N)
                for i, inner in enumerate(balls) if i != j
            ):
                del balls[j]
                break
        else:
            break
    return BallIntersection(N, tuple(balls))

def is_canonical(set: BallIntersection) -> bool:
    return canonicalize(set) == set

def satisfies_ordering(set: BallIntersection) -> bool:
    """Whether the balls are ordered by `p` and the radius chains hold.

    Both chains, `ν_1 ≥ … ≥ ν_r` and `ν_1 N^{-1/p_1} ≤ … ≤ ν_r N^{-1/p_r}`,
    are checked non-strictly.
    """
    N = set.dim
    for a, b in zip(set.balls, set.balls[1:]):
        if a.p > b.p:
            return False
        if a.nu < b.nu * (1 - RTOL):
            return False
        left = a.nu * N ** -float(a.p.recip)
        right = b.nu * N ** -float(b.p.recip)
        if left > right * (1 + RTOL):
            return False
    return True

def membership(x, set: BallIntersection) -> bool:
    x = np.asarray(x, dtype=float)
    if x.shape != (set.dim,):
        raise DimensionError(f'expected a vector of length {set.dim}, got shape {x.shape}')
    return all(lp_norm(x, b.p) <= b.nu * (1 + RTOL) for b in set)

class Regime(enum.Flag):
    NONE = 0
    THM1 = enum.auto()
    THM2 = enum.auto()
    THM3_PART1 = enum.auto()
    THM3_PART2 = enum.auto()
    THM4_REGIME1 = enum.auto()
    THM4_REGIME2 = enum.auto()
    THMB_SINGLE = enum.auto()
    KNOWN_LARGE_P = enum.auto()
    KNOWN_MIDDLE_P = enum.auto()

    def names(self) -> t.List[str]:
        return [r.name for r in Regime if r and r in self]

DEFAULT_A0 = 0.01

def theorem4_ratio_range(set: BallIntersection) -> t.Tuple[float, float, float]:
    """`(ν_1/ν_2, N^{1/p_1-1/2}, N^{1/p_1-1/p_2})` for a two-ball family."""
    (b1, b2) = set.balls
    N = set.dim
    ratio = b1.nu / b2.nu
    switch = N ** float(b1.p.recip - TWO.recip)
    ceiling = N ** float(b1.p.recip - b2.p.recip)
    return ratio, switch, ceiling

def theorem4_ratio_admissible(ratio: float, ceiling: float) -> bool:
    """Whether `1 ≤ ν_1/ν_2 ≤ N^{1/p_1-1/p_2}`, up to `RTOL`."""
    return 1 - RTOL <= ratio <= ceiling * (1 + RTOL)

def theorem4_structure(query: WidthQuery) -> bool:
    """The structural hypotheses of the two-ball theorem in `l_2`:
    `q = 2`, `r = 2`, `1 < p_1 < 2 < p_2 ≤ ∞`."""
    set = query.set
    if query.q != TWO or len(set) != 2:
        return False
    (b1, b2) = set.balls
    return 1 > b1.p.recip > TWO.recip > b2.p.recip

def theorem4_regime(query: WidthQuery, a0: float = DEFAULT_A0) -> Regime:
    """Which of the two regimes the instance falls in, if any."""
    if not theorem4_structure(query):
        return Regime.NONE
    ratio, switch, ceiling = theorem4_ratio_range(query.set)
    if not theorem4_ratio_admissible(ratio, ceiling):
        return Regime.NONE
    N, n = query.N, query.n
    if ratio <= switch:
        return Regime.THM4_REGIME1 if n <= a0 * N else Regime.NONE
    (b1, b2) = query.set.balls
    lam = float(solve_lambda(b1.p, b2.p, TWO))
    return Regime.THM4_REGIME2 if n <= a0 * ratio ** (2 * lam - 2) * N else Regime.NONE

def classify_regimes(query: WidthQuery, a0: float = DEFAULT_A0) -> Regime:
    """The regimes whose hypotheses the query satisfies.

    Hypotheses are checked on the family as given; callers wanting the
    reduced family canonicalize first.
    """
    set, N, n, q = query.set, query.N, query.n, query.q
    ps = set.ps
    p1, pr = ps[0], ps[-1]
    sorted_ = all(a <= b for a, b in zip(ps, ps[1:]))
    ordered = satisfies_ordering(set)
    q_at_least_2 = q >= TWO
    all_above_1 = all(p.recip < 1 for p in ps)
    half = 2 * n <= N
    quarter = 4 * n <= N

    regime = Regime.NONE
    if q_at_least_2 and all_above_1 and ordered and sorted_:
        if pr <= q and p1 < TWO and half:
            regime |= Regime.THM1
        if TWO <= p1 and p1 < q < pr and quarter:
            regime |= Regime.THM2
    if q_at_least_2 and all_above_1:
        if all(p <= q for p in ps) and half:
            regime |= Regime.THM3_PART1
        if all(p >= TWO for p in ps) and quarter:
            regime |= Regime.THM3_PART2
        if len(set) == 1 and half:
            regime |= Regime.THMB_SINGLE
        if all(p >= q for p in ps) and half:
            regime |= Regime.KNOWN_LARGE_P
        if all(TWO <= p <= q for p in ps) and half:
            regime |= Regime.KNOWN_MIDDLE_P
    regime |= theorem4_regime(query, a0)
    return regime
