"""
Decay exponents `θ` with `d^n(M, L_q) ≍ n^{-θ}` for intersections
`M = ∩_j W^{r_j}_{p_j}` of Sobolev classes on a John domain in `R^d`.

Only the final case analysis lives here. Inputs must already be in the
reduced form (smoothness strictly decreasing, `r_j/d - 1/p_j` strictly
increasing); nothing is silently rewritten.
"""

import dataclasses
import fractions
import typing as t

from widthlab.exponents import Exponent, Real, TWO, solve_lambda

TIE_TOLERANCE = 1e-12

class InvalidInstanceError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__('; '.join(self.violations))

class NoCaseError(ValueError):
    pass

class ThetaTieError(ValueError):
    pass

@dataclasses.dataclass(frozen=True)
class Layer:
    r: int
    p: Exponent

    def __post_init__(self):
        object.__setattr__(self, 'p', Exponent.of(self.p))

@dataclasses.dataclass(frozen=True)
class SobolevInstance:
    d: int
    q: Exponent
    layers: t.Tuple[Layer, ...]

    def __post_init__(self):
        object.__setattr__(self, 'q', Exponent.of(self.q))
        object.__setattr__(self, 'layers', tuple(
            layer if isinstance(layer, Layer) else Layer(*layer)
            for layer in self.layers
        ))

    @property
    def exact(self) -> bool:
        return self.q.exact and all(layer.p.exact for layer in self.layers)

    def ratio(self, r: int) -> Real:
        """`r/d`, exact when the instance is."""
        if self.exact:
            return fractions.Fraction(r, self.d)
        return r / self.d

def _excess(instance: SobolevInstance, layer: Layer) -> Real:
    return instance.ratio(layer.r) - layer.p.recip

def validate(instance: SobolevInstance) -> t.List[str]:
    """Every violated hypothesis, by name. Empty when the instance is valid."""
    violations = []
    d, q, layers = instance.d, instance.q, instance.layers
    if not (isinstance(d, int) and d >= 1):
        violations.append(f'dimension: d must be a positive integer, got {d}')
        return violations
    if q.is_infinite():
        violations.append('target exponent: q must be finite')
    if len(layers) < 2:
        violations.append(f'layer count: at least two layers required, got {len(layers)}')
    for k, layer in enumerate(layers, 1):
        if not (isinstance(layer.r, int) and layer.r >= 0):
            violations.append(f'smoothness: r_{k} must be a non-negative integer, got {layer.r}')
        if not layer.p.recip < 1:
            violations.append(f'integrability: p_{k} must exceed 1, got {layer.p}')
    if violations:
        return violations
    for k, (a, b) in enumerate(zip(layers, layers[1:]), 1):
        if not a.r > b.r:
            violations.append(
                f'smoothness order: r_{k} > r_{k + 1} required, got {a.r} and {b.r}'
            )
        if not _excess(instance, a) < _excess(instance, b):
            violations.append(
                f'embedding order: r_{k}/d - 1/p_{k} < r_{k + 1}/d - 1/p_{k + 1} required'
            )
    last = layers[-1]
    if not _excess(instance, last) + q.recip > 0:
        violations.append('positivity: r_s/d + 1/q - 1/p_s > 0 required')
    return violations

CASES = ('1', '2', '3a', '3b', '4', '5')

def matching_cases(instance: SobolevInstance) -> t.List[str]:
    """Every case whose hypotheses hold, without short-circuiting."""
    q, layers = instance.q, instance.layers
    ps = [layer.p for layer in layers]
    first, last = layers[0], layers[-1]
    half = fractions.Fraction(1, 2)
    matches = []
    if all(p >= q for p in ps):
        matches.append('1')
    if all(TWO <= p <= q for p in ps):
        matches.append('2')
    if q >= TWO and all(p <= q for p in ps) and first.p < TWO:
        spread = instance.ratio(first.r) - instance.ratio(last.r)
        matches.append('3a' if spread <= half - last.p.recip else '3b')
    if (
        q >= TWO and all(p >= TWO for p in ps)
        and any(p > q for p in ps) and any(p < q for p in ps)
    ):
        matches.append('4')
    if (
        q == TWO and len(layers) == 2 and ps[0] < TWO < ps[1]
        and instance.ratio(first.r - last.r) >= half - last.p.recip
    ):
        matches.append('5')
    return matches

def _tied(a: Real, b: Real, exact: bool) -> bool:
    if exact:
        return a == b
    return abs(a - b) <= TIE_TOLERANCE * max(1.0, abs(a), abs(b))

def width_exponent(instance: SobolevInstance):
    """`(θ, case_tag, details)` with `d^n(M, L_q) ≍ n^{-θ}`."""
    violations = validate(instance)
    if violations:
        raise InvalidInstanceError(violations)
    matches = matching_cases(instance)
    if not matches:
        raise NoCaseError('parameters fall outside every case')
    assert len(matches) == 1, matches
    [case] = matches

    q, layers, exact = instance.q, instance.layers, instance.exact
    first, last = layers[0], layers[-1]
    ratio = instance.ratio
    half = fractions.Fraction(1, 2)
    details: t.Dict[str, t.Any] = {}

    if case == '1':
        theta = ratio(first.r)
    elif case in ('2', '3a'):
        theta = ratio(last.r) + q.recip - last.p.recip
    elif case == '3b':
        denominator = 2 * (ratio(last.r) - ratio(first.r) + last.p.dual.recip)
        theta1 = ratio(first.r) + q.recip - half
        theta2 = (ratio(last.r) + q.recip - last.p.recip) / denominator
        if _tied(theta1, theta2, exact):
            raise ThetaTieError(f'theta_1 = theta_2 = {theta1}')
        theta = min(theta1, theta2)
        details.update(theta1=theta1, theta2=theta2, T_star=1 / denominator)
    elif case == '4':
        pairs = []
        for i, a in enumerate(layers):
            for j, b in enumerate(layers):
                if a.p < q < b.p:
                    lam = solve_lambda(a.p, b.p, q)
                    pairs.append(((i + 1, j + 1), lam, (1 - lam) * ratio(a.r) + lam * ratio(b.r)))
        (pair, lam, theta) = max(pairs, key=lambda item: item[2])
        details.update(argmax=pair, **{'lambda': lam})
        details['pairs'] = {f'{i},{j}': value for (i, j), _, value in pairs}
    else:
        lam = solve_lambda(first.p, last.p, TWO)
        d = instance.d
        theta1 = ratio(first.r)
        theta2 = ((1 - lam) * first.r + lam * last.r) / (2 * lam * (last.r - first.r) + d)
        if _tied(theta1, theta2, exact):
            raise ThetaTieError(f'theta_1 = theta_2 = {theta1}')
        theta = min(theta1, theta2)
        details.update(
            theta1=theta1, theta2=theta2,
            T_star=1 / (2 * lam * (ratio(last.r) - ratio(first.r)) + 1),
            **{'lambda': lam},
        )
    assert theta > 0, theta
    return theta, case, details
