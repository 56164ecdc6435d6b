"""
Norms on `R^N`: scaled `ℓ_p` norms, the intersection norm
`‖x‖_X = max_j ν_j^{-1} ‖x‖_{p_j}` whose unit ball is `∩_j ν_j B_{p_j}^N`,
and its dual.

The dual norm has no closed form once two or more balls survive
canonicalization. We solve two convex programs, the support function of the
intersection and the infimal convolution `min Σ_j ν_j ‖z_j‖_{p_j'}` over
splittings `Σ_j z_j = z`, and then re-evaluate both solutions with exact
norms. A feasible point bounds the dual norm from below and any splitting
bounds it from above, whatever the solver tolerances were.
"""

import cvxpy as cp
import dataclasses
import fractions
import numpy as np
import typing as t

from widthlab.balls import (
    BallIntersection, DimensionError, canonicalize, embedding_factor, lp_norm,
)
from widthlab.exponents import Exponent, TWO

# The constant of the quadratic lower estimate for squared norms.
# For `‖h‖ ≤ t‖x‖` the estimate holds with `1/(2t^2)`, for `‖h‖ ≥ t‖x‖` it
# holds with `1/4` once `t^2/4 ≥ 2 + 2t`, which is true from `t = 10`.
LEMMA1_C = fractions.Fraction(1, 200)

DUAL_NORM_RTOL = 1e-6
DEFAULT_MAX_ITERS = 2000
FALLBACK_SOLVERS = ('CLARABEL', 'ECOS', 'SCS')
_ITERATION_KEYWORDS = {'CLARABEL': 'max_iter', 'ECOS': 'max_iters', 'SCS': 'max_iters'}

class UnsupportedPairError(ValueError):
    pass

class ConsistencyError(RuntimeError):
    pass

@dataclasses.dataclass(frozen=True)
class LpNorm:
    """`‖x‖_p / scale`; its unit ball is `scale · B_p^N`."""
    p: Exponent
    dim: int
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'p', Exponent.of(self.p))
        if not self.scale > 0:
            raise ValueError(f'scale must be positive: {self.scale}')

@dataclasses.dataclass(frozen=True)
class IntersectionNorm:
    set: BallIntersection

    @property
    def dim(self) -> int:
        return self.set.dim

@dataclasses.dataclass(frozen=True)
class DualIntersectionNorm:
    set: BallIntersection

    @property
    def dim(self) -> int:
        return self.set.dim

NormSpec = t.Union[LpNorm, IntersectionNorm, DualIntersectionNorm]

def _vector(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise DimensionError(f'expected a vector of length {dim}, got shape {x.shape}')
    return x

def norm(x, spec: NormSpec) -> float:
    x = _vector(x, spec.dim)
    if isinstance(spec, LpNorm):
        return lp_norm(x, spec.p) / spec.scale
    if isinstance(spec, IntersectionNorm):
        return max(lp_norm(x, b.p) / b.nu for b in spec.set)
    return dual_norm(x, spec.set).value

def _lp_gradient(x: np.ndarray, p: Exponent) -> np.ndarray:
    """A norm-one functional `f` for `ℓ_p` with `f(x) = ‖x‖_p`."""
    if not np.any(x):
        f = np.zeros_like(x)
        f[0] = 1.0
        return f
    if p.is_infinite():
        k = int(np.argmax(np.abs(x)))
        f = np.zeros_like(x)
        f[k] = np.sign(x[k])
        return f
    if p.recip == 1:
        return np.sign(x)
    y = x / lp_norm(x, p)
    return np.sign(y) * np.abs(y) ** (p.value - 1)

def supporting_functional(x, spec: NormSpec) -> np.ndarray:
    """A functional of dual norm one that attains `spec.norm(x)` at `x`.

    Ties between maximizing coordinates or active balls go to the lowest
    index.
    """
    x = _vector(x, spec.dim)
    if isinstance(spec, LpNorm):
        return _lp_gradient(x, spec.p) / spec.scale
    if isinstance(spec, IntersectionNorm):
        values = [lp_norm(x, b.p) / b.nu for b in spec.set]
        ball = spec.set.balls[int(np.argmax(values))]
        if not np.any(x):
            ball = min(spec.set, key=lambda b: b.nu)
        return _lp_gradient(x, ball.p) / ball.nu
    result = dual_norm(x, spec.set)
    if result.lower == 0:
        return _lp_gradient(x, spec.set.balls[0].p) / spec.set.balls[0].nu
    return result.witness

def maximizer(w, spec: NormSpec) -> np.ndarray:
    """A point of the unit ball of `spec` maximizing `⟨w, ·⟩`."""
    w = _vector(w, spec.dim)
    if isinstance(spec, LpNorm):
        return spec.scale * _lp_gradient(w, spec.p.dual)
    if isinstance(spec, IntersectionNorm):
        return dual_norm(w, spec.set).witness
    return supporting_functional(w, IntersectionNorm(spec.set))

def _cp_norm(expr, p: Exponent):
    if p.is_infinite():
        return cp.norm(expr, 'inf')
    if p.recip == 1:
        return cp.norm1(expr)
    if p == TWO:
        return cp.norm2(expr)
    return cp.pnorm(expr, p.value)

@dataclasses.dataclass
class DualNormResult:
    value: float
    lower: float
    upper: float
    witness: np.ndarray
    splitting: t.Optional[np.ndarray]
    converged: bool
    solver: t.Optional[str] = None

    @property
    def gap(self) -> float:
        if self.upper == 0:
            return 0.0
        return (self.upper - self.lower) / self.upper

def _solve(problem, solver, max_iters) -> bool:
    kwargs = {}
    if solver is not None:
        kwargs['solver'] = solver
        keyword = _ITERATION_KEYWORDS.get(solver)
        if keyword is not None:
            kwargs[keyword] = max_iters
    try:
        problem.solve(**kwargs)
    except cp.error.SolverError:
        return False
    return problem.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE)

def _solvers():
    installed = set(cp.installed_solvers())
    return [None] + [s for s in FALLBACK_SOLVERS if s in installed]

def solve_with_fallback(problem, max_iters: int = DEFAULT_MAX_ITERS) -> bool:
    """Solve with the default solver, then each installed fallback in turn."""
    return any(_solve(problem, solver, max_iters) for solver in _solvers())

def intersection_norm(x, set: BallIntersection) -> float:
    return max(lp_norm(x, b.p) / b.nu for b in set)

def dual_norm(
    z,
    set: BallIntersection,
    *,
    rtol: float = DUAL_NORM_RTOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> DualNormResult:
    """`sup {⟨z, y⟩ : y ∈ ∩_j ν_j B_{p_j}^N}` with a certified bracket."""
    z = _vector(z, set.dim)
    canon = canonicalize(set)
    if not np.any(z):
        witness = np.zeros_like(z)
        splitting = np.zeros((len(canon), z.size))
        return DualNormResult(0.0, 0.0, 0.0, witness, splitting, True)
    if len(canon) == 1:
        [ball] = canon.balls
        value = ball.nu * lp_norm(z, ball.p.dual)
        witness = ball.nu * _lp_gradient(z, ball.p.dual)
        return DualNormResult(value, value, value, witness, z[None, :].copy(), True)

    N = set.dim
    y = cp.Variable(N)
    primal = cp.Problem(
        cp.Maximize(z @ y), [_cp_norm(y, b.p) <= b.nu for b in canon]
    )
    parts = cp.Variable((len(canon), N))
    splitting = cp.Problem(
        cp.Minimize(sum(
            b.nu * _cp_norm(parts[j], b.p.dual) for j, b in enumerate(canon)
        )),
        [cp.sum(parts, axis=0) == z],
    )

    best = None
    for solver in _solvers():
        lower, witness = -np.inf, None
        if _solve(primal, solver, max_iters) and y.value is not None:
            witness = np.asarray(y.value, dtype=float)
            excess = intersection_norm(witness, canon)
            if excess > 1:
                witness = witness / excess
            lower = float(z @ witness)
        upper, split = np.inf, None
        if _solve(splitting, solver, max_iters) and parts.value is not None:
            split = np.asarray(parts.value, dtype=float)
            # Fold the equality residual into the last part so the splitting is exact.
            split[-1] += z - split.sum(axis=0)
            upper = sum(b.nu * lp_norm(split[j], b.p.dual) for j, b in enumerate(canon))
        if best is None:
            best = DualNormResult(upper, lower, upper, witness, split, False, solver)
        else:
            if lower > best.lower:
                best.lower, best.witness = lower, witness
            if upper < best.upper:
                best.upper, best.splitting, best.value = upper, split, upper
        if best.witness is not None and best.splitting is not None:
            best.converged = best.gap <= rtol
            if best.converged:
                break
    if best.witness is None or best.splitting is None:
        raise ConsistencyError('no solver produced a dual norm bracket')
    best.lower = max(best.lower, 0.0)
    return best

def support_vector(s: int, q: Exponent, N: int) -> np.ndarray:
    """`s^{-1/q'}` on the first `s` coordinates, zero elsewhere.

    Its `ℓ_{q'}` norm is one.
    """
    q = Exponent.of(q)
    if not 1 <= s <= N:
        raise ValueError(f's must be in [1, {N}]: {s}')
    x = np.zeros(N)
    x[:s] = s ** -float(q.dual.recip)
    return x

def spike_dual_norm(s: int, q: Exponent, set: BallIntersection) -> float:
    """`min_j ν_j s^{1/q - 1/p_j}`, the dual norm of `support_vector(s, q, N)`."""
    q = Exponent.of(q)
    return min(b.nu * s ** float(q.recip - b.p.recip) for b in set)

def supporting_functional_coeffs(
    s: int, q: Exponent, set: BallIntersection, *, check: bool = True,
) -> np.ndarray:
    """The functional supporting the dual unit ball at `support_vector(s, q, N)`.

    Its coefficients are `A s^{-1/q}` on the first `s` coordinates.
    """
    q = Exponent.of(q)
    N = set.dim
    A = spike_dual_norm(s, q, set)
    b = np.zeros(N)
    b[:s] = A * s ** -float(q.recip)
    if check:
        xhat = support_vector(s, q, N)
        attained = float(b @ xhat)
        if abs(attained - A) > 1e-9 * max(1.0, A):
            raise ConsistencyError(f'functional attains {attained}, expected {A}')
        unit = intersection_norm(b, set)
        if abs(unit - 1) > 1e-9:
            raise ConsistencyError(f'functional has norm {unit}, expected 1')
        result = dual_norm(xhat, set)
        slack = DUAL_NORM_RTOL * max(1.0, A)
        if not result.lower - slack <= A <= result.upper + slack:
            raise ConsistencyError(
                f'dual norm bracket [{result.lower}, {result.upper}] excludes {A}'
            )
    return b

def embedding_norm(source: NormSpec, target: NormSpec) -> float:
    """The operator norm of the identity from `source` to `target`."""
    if source.dim != target.dim:
        raise DimensionError(f'dimensions differ: {source.dim} != {target.dim}')
    N = source.dim
    if isinstance(source, LpNorm) and isinstance(target, LpNorm):
        return source.scale / target.scale * embedding_factor(source.p, target.p, N)
    if isinstance(source, LpNorm) and isinstance(target, IntersectionNorm):
        return source.scale * max(
            embedding_factor(source.p, b.p, N) / b.nu for b in target.set
        )
    if isinstance(source, DualIntersectionNorm) and isinstance(target, LpNorm):
        # The adjoint of `X* -> ℓ_p` is `ℓ_{p'} -> X`.
        adjoint = LpNorm(target.p.dual, N, 1 / target.scale)
        return embedding_norm(adjoint, IntersectionNorm(source.set))
    raise UnsupportedPairError(
        f'no closed form for {type(source).__name__} -> {type(target).__name__}'
    )
