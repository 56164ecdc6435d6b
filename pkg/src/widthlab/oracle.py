"""
Numerical estimates of widths at desk scale.

`d_n(B, Y) = inf_L sup_{x ∈ B} inf_{y ∈ L} ‖x - y‖_Y` is estimated in three
nested layers:

- the distance to `L` is a convex program, built once per restart with `x`
  and the basis of `L` as parameters;
- the supremum of that convex function over `B` is attained at an extreme
  point, found by linearize-and-maximize ascent from random starts (or by
  enumeration when `B` is an `ℓ_1` ball);
- the infimum over `L` runs Nelder-Mead on a chart `U ↦ qr(U_0 + Δ)` of the
  orthonormal bases, re-centered between rounds, from independent restarts.

Estimates are not certificates. The outer infimum is biased upwards and the
inner supremum downwards.
"""

import concurrent.futures
import cvxpy as cp
import dataclasses
import numpy as np
import scipy.optimize
import typing as t

from widthlab.balls import BallIntersection, WidthQuery, canonicalize, lp_norm
from widthlab.exponents import TWO
from widthlab.norms import (
    DualIntersectionNorm, IntersectionNorm, LpNorm, NormSpec,
    _cp_norm, intersection_norm, maximizer, solve_with_fallback,
    supporting_functional,
)

ORTHONORMAL_TOL = 1e-10
ASCENT_RTOL = 1e-12

class DeskScaleError(ValueError):
    pass

@dataclasses.dataclass(frozen=True)
class OracleBudget:
    restarts: int = 32
    ascent_starts: int = 64
    search_starts: int = 4
    ascent_steps: int = 30
    iterations: int = 400
    rounds: int = 3
    max_dim: int = 16
    threads: int = 1

    def __post_init__(self):
        for field in dataclasses.fields(self):
            if getattr(self, field.name) < 1:
                raise ValueError(f'budget {field.name} must be positive')

    def replace(self, **changes) -> 'OracleBudget':
        return dataclasses.replace(self, **changes)

@dataclasses.dataclass(frozen=True)
class SubspaceBasis:
    basis: np.ndarray

    def __post_init__(self):
        U = self.basis
        defect = np.linalg.norm(U.T @ U - np.eye(U.shape[1]))
        if defect > ORTHONORMAL_TOL:
            raise ValueError(f'columns are not orthonormal: defect {defect:.3g}')

    @property
    def N(self) -> int:
        return self.basis.shape[0]

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def from_matrix(cls, M) -> 'SubspaceBasis':
        M = np.asarray(M, dtype=float)
        if M.shape[1] == 0:
            return cls(np.zeros(M.shape))
        Q, R = np.linalg.qr(M)
        # Fix signs so that the chart is a function of M.
        signs = np.sign(np.diag(R))
        signs[signs == 0] = 1
        return cls(Q * signs)

    @classmethod
    def random(cls, N: int, n: int, rng: np.random.Generator) -> 'SubspaceBasis':
        return cls.from_matrix(rng.standard_normal((N, n)))

@dataclasses.dataclass
class OracleEstimate:
    value: float
    restarts_used: int
    inner_max_exact: bool
    spread: float
    restart_values: t.List[float] = dataclasses.field(default_factory=list)

    @property
    def relative_spread(self) -> float:
        if self.value == 0:
            return 0.0 if self.spread == 0 else float('inf')
        return self.spread / max(self.restart_values or [self.value])

def _reduce_target(target: NormSpec) -> NormSpec:
    """Replace a dual intersection norm by an `ℓ_p` norm when one ball remains."""
    if isinstance(target, DualIntersectionNorm):
        canon = canonicalize(target.set)
        if len(canon) == 1:
            [ball] = canon.balls
            return LpNorm(ball.p.dual, target.dim, 1 / ball.nu)
        return DualIntersectionNorm(canon)
    if isinstance(target, IntersectionNorm):
        canon = canonicalize(target.set)
        if len(canon) == 1:
            [ball] = canon.balls
            return LpNorm(ball.p, target.dim, ball.nu)
        return IntersectionNorm(canon)
    return target

class Distance:
    """`x ↦ inf_{y ∈ span U} ‖x - y‖` with a subgradient orthogonal to `U`."""

    def __init__(self, target: NormSpec, n: int):
        target = _reduce_target(target)
        self.target = target
        self.N = N = target.dim
        self.n = n
        self.U = np.zeros((N, n))
        self.closed = isinstance(target, LpNorm) and target.p == TWO
        if self.closed:
            return
        self.x = cp.Parameter(N)
        r = cp.Variable(N)
        if n > 0:
            self.Up = cp.Parameter((N, n))
            c = cp.Variable(n)
            self.link = r == self.x - self.Up @ c
        else:
            self.link = r == self.x
        constraints = [self.link]
        if isinstance(target, LpNorm):
            objective = _cp_norm(r, target.p) / target.scale
        elif isinstance(target, DualIntersectionNorm):
            balls = target.set.balls
            parts = cp.Variable((len(balls), N))
            constraints.append(cp.sum(parts, axis=0) == r)
            objective = sum(b.nu * _cp_norm(parts[j], b.p.dual) for j, b in enumerate(balls))
        else:
            level = cp.Variable()
            constraints.extend(_cp_norm(r, b.p) <= b.nu * level for b in target.set)
            objective = level
        self.problem = cp.Problem(cp.Minimize(objective), constraints)

    def set_basis(self, U: np.ndarray):
        self.U = U
        if not self.closed and self.n > 0:
            self.Up.value = U

    def __call__(self, x: np.ndarray) -> t.Tuple[float, np.ndarray]:
        if self.closed:
            r = x - self.U @ (self.U.T @ x)
            length = np.linalg.norm(r)
            if length == 0:
                return 0.0, np.zeros_like(x)
            return float(length / self.target.scale), r / (length * self.target.scale)
        self.x.value = x
        if not solve_with_fallback(self.problem):
            raise RuntimeError('distance program failed with every solver')
        value = max(float(self.problem.value), 0.0)
        g = np.asarray(self.link.dual_value, dtype=float)
        if g @ x < 0:
            g = -g
        return value, g

def _ascend(phi, source: NormSpec, x: np.ndarray, steps: int):
    value, g = phi(x)
    for _ in range(steps):
        if not np.any(g):
            break
        candidate = maximizer(g, source)
        new_value, new_g = phi(candidate)
        if new_value <= value * (1 + ASCENT_RTOL):
            break
        x, value, g = candidate, new_value, new_g
    return value, x

def _is_cross_polytope(source: NormSpec) -> bool:
    return isinstance(source, LpNorm) and source.p.recip == 1

def _sup_over_ball(phi, source, rng, starts, hints, steps):
    """`(sup, argmax)` of a convex, even function over the unit ball of `source`."""
    if _is_cross_polytope(source):
        vertices = source.scale * np.eye(source.dim)
        values = [phi(v)[0] for v in vertices]
        k = int(np.argmax(values))
        return values[k], vertices[k]
    best_value, best_x = -np.inf, None
    points = list(hints) + [
        maximizer(rng.standard_normal(source.dim), source) for _ in range(starts)
    ]
    for x in points:
        value, x = _ascend(phi, source, x, steps)
        if value > best_value:
            best_value, best_x = value, x
    return best_value, best_x

def _nelder_mead_search(inner, N: int, n: int, rng, budget: OracleBudget):
    """Minimize `inner(U, starts)` over orthonormal `N × n` bases."""
    U0 = SubspaceBasis.random(N, n, rng).basis
    dim = N * n
    step = 0.5
    for _ in range(budget.rounds):
        def objective(delta):
            U = SubspaceBasis.from_matrix(U0 + delta.reshape(N, n)).basis
            return inner(U, budget.search_starts)
        simplex = np.vstack([np.zeros(dim), step * np.eye(dim)])
        result = scipy.optimize.minimize(
            objective, np.zeros(dim), method='Nelder-Mead',
            options={
                'maxfev': budget.iterations,
                'initial_simplex': simplex,
                'xatol': 1e-6,
                'fatol': 1e-9,
            },
        )
        U0 = SubspaceBasis.from_matrix(U0 + result.x.reshape(N, n)).basis
        step /= 2
    return U0

def _check_scale(N: int, n: int, budget: OracleBudget):
    if N > budget.max_dim:
        raise DeskScaleError(f'N = {N} exceeds the desk-scale limit {budget.max_dim}')
    if not 0 <= n <= N:
        raise ValueError(f'n must be in [0, {N}]: {n}')

def _restarts(run, seed: int, budget: OracleBudget, exact: bool) -> OracleEstimate:
    children = np.random.SeedSequence(seed).spawn(budget.restarts)
    if budget.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(budget.threads) as pool:
            values = list(pool.map(run, children))
    else:
        values = [run(child) for child in children]
    return OracleEstimate(
        min(values), len(values), exact, max(values) - min(values), values,
    )

def kolmogorov_estimate(
    source: NormSpec,
    target: NormSpec,
    n: int,
    seed: int = 0,
    budget: OracleBudget = OracleBudget(),
) -> OracleEstimate:
    """Estimate `d_n(B_source, target)`."""
    N = source.dim
    _check_scale(N, n, budget)
    exact = _is_cross_polytope(source)
    if n >= N:
        return OracleEstimate(0.0, 0, exact, 0.0, [0.0])

    def run(child):
        rng = np.random.default_rng(child)
        distance = Distance(target, n)
        hints = []

        def inner(U, starts):
            distance.set_basis(U)
            value, x = _sup_over_ball(distance, source, rng, starts, hints, budget.ascent_steps)
            hints[:] = [x]
            return value

        U = np.zeros((N, 0)) if n == 0 else _nelder_mead_search(inner, N, n, rng, budget)
        return inner(U, budget.ascent_starts)

    if n == 0:
        # Every restart sees the same subspace `{0}`.
        budget = budget.replace(restarts=1)
    return _restarts(run, seed, budget, exact)

def gelfand_estimate(
    query: WidthQuery,
    seed: int = 0,
    budget: OracleBudget = OracleBudget(),
) -> OracleEstimate:
    """Estimate `d^n(∩ ν_j B_{p_j}^N, l_q^N)` as `d_n(B_{q'}^N, X*)`."""
    N = query.N
    return kolmogorov_estimate(
        LpNorm(query.q.dual, N), DualIntersectionNorm(query.set), query.n, seed, budget,
    )

class Section:
    """Maximizes a linear functional over `K ∩ ker Uᵀ`."""

    def __init__(self, set: BallIntersection, n: int):
        self.set = canonicalize(set)
        N = set.dim
        self.n = n
        self.U = np.zeros((N, n))
        self.g = cp.Parameter(N)
        self.y = cp.Variable(N)
        constraints = [_cp_norm(self.y, b.p) <= b.nu for b in self.set]
        if n > 0:
            self.Up = cp.Parameter((N, n))
            constraints.append(self.Up.T @ self.y == 0)
        self.problem = cp.Problem(cp.Maximize(self.g @ self.y), constraints)

    def set_basis(self, U: np.ndarray):
        self.U = U
        if self.n > 0:
            self.Up.value = U

    def argmax(self, g: np.ndarray) -> np.ndarray:
        self.g.value = g
        if not solve_with_fallback(self.problem):
            raise RuntimeError('section program failed with every solver')
        y = np.asarray(self.y.value, dtype=float)
        # Project onto the kernel and scale back inside K.
        y = y - self.U @ (self.U.T @ y)
        excess = intersection_norm(y, self.set)
        return y / excess if excess > 1 else y

def _sup_over_section(section: Section, q, rng, starts, hints, steps):
    N = section.set.dim
    if q.is_infinite():
        values = [lp_norm(section.argmax(e), q) for e in np.eye(N)]
        k = int(np.argmax(values))
        return values[k], None
    best_value, best_y = -np.inf, None
    points = list(hints) + [section.argmax(rng.standard_normal(N)) for _ in range(starts)]
    for y in points:
        value = lp_norm(y, q)
        for _ in range(steps):
            if value == 0:
                break
            candidate = section.argmax(supporting_functional(y, LpNorm(q, N)))
            new_value = lp_norm(candidate, q)
            if new_value <= value * (1 + ASCENT_RTOL):
                break
            y, value = candidate, new_value
        if value > best_value:
            best_value, best_y = value, y
    return best_value, best_y

def gelfand_direct(
    query: WidthQuery,
    seed: int = 0,
    budget: OracleBudget = OracleBudget(),
) -> OracleEstimate:
    """Estimate `d^n` directly: the infimum over `n` functionals of the
    largest `ℓ_q` norm on the intersection of their kernels with the set."""
    N, n, q = query.N, query.n, query.q
    _check_scale(N, n, budget)
    exact = q.is_infinite()
    if n >= N:
        return OracleEstimate(0.0, 0, exact, 0.0, [0.0])

    def run(child):
        rng = np.random.default_rng(child)
        section = Section(query.set, n)
        hints = []

        def inner(U, starts):
            section.set_basis(U)
            value, y = _sup_over_section(section, q, rng, starts, hints, budget.ascent_steps)
            hints[:] = [] if y is None else [y]
            return value

        U = np.zeros((N, 0)) if n == 0 else _nelder_mead_search(inner, N, n, rng, budget)
        return inner(U, budget.ascent_starts)

    if n == 0:
        budget = budget.replace(restarts=1)
    return _restarts(run, seed, budget, exact)

def duality_estimates(
    query: WidthQuery,
    seed: int = 0,
    budget: OracleBudget = OracleBudget(),
) -> t.Tuple[OracleEstimate, OracleEstimate]:
    """`(direct Gelfand estimate, dual Kolmogorov estimate)` for one query."""
    return gelfand_direct(query, seed, budget), gelfand_estimate(query, seed, budget)

def duality_gap(
    query: WidthQuery,
    seed: int = 0,
    budget: OracleBudget = OracleBudget(),
) -> float:
    primal, dual = duality_estimates(query, seed, budget)
    return abs(primal.value - dual.value)

def radius(source: NormSpec, target: NormSpec) -> float:
    """`sup ‖x‖_target` over the unit ball of `source`, by exact enumeration
    for `ℓ_1` sources and by ascent otherwise."""
    estimate = kolmogorov_estimate(source, target, 0)
    return estimate.value

