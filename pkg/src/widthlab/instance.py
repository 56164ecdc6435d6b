"""
Instance documents.

A width instance reads

    {"N": 16, "n": 4, "q": 4, "kind": "gelfand",
     "balls": [{"p": 2, "nu": 1}, {"p": "inf", "nu": "1/2"}]}

and a Sobolev instance reads

    {"d": 3, "q": 2, "layers": [{"r": 2, "p": "10/9"}, {"r": 1, "p": 2}]}

Either may be JSON or TOML. Exponents are numbers, `"inf"`, or fractions
`"a/b"`. Errors name the offending field.
"""

import fractions
import json
import pathlib
import tomlkit.exceptions
import typing as t

from widthlab import confee
from widthlab.balls import Ball, BallIntersection, Kind, WidthQuery
from widthlab.exponents import Exponent
from widthlab.sobolev import Layer, SobolevInstance

class InstanceError(ValueError):
    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f'{field}: {message}' if field else message)

def load(path=None, inline: t.Optional[str] = None):
    """The document at `path`, or the JSON text `inline`."""
    if (path is None) == (inline is None):
        raise InstanceError('give exactly one of a path or an inline document')
    try:
        if inline is not None:
            return confee.loads(inline)
        path = pathlib.Path(path)
        if not path.is_file():
            raise InstanceError(f'no such file: {path}')
        return confee.read(path)
    except json.JSONDecodeError as error:
        raise InstanceError(
            f'line {error.lineno}, column {error.colno}: {error.msg}'
        ) from error
    except tomlkit.exceptions.ParseError as error:
        raise InstanceError(f'line {error.line}, column {error.col}: {error}') from error

def _field(proxy, convert, default=None):
    name = confee.path(proxy)
    if not proxy:
        if default is not None:
            return default
        raise InstanceError('missing', name)
    try:
        return convert(proxy())
    except (ValueError, TypeError, ZeroDivisionError) as error:
        raise InstanceError(str(error), name) from error

def _integer(value) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ValueError(f'expected an integer, got {value!r}')
    return int(value)

def _real(value) -> float:
    if isinstance(value, bool):
        raise ValueError(f'expected a number, got {value!r}')
    if isinstance(value, str):
        return float(fractions.Fraction(value.strip()))
    return float(value)

def _positive(value) -> float:
    value = _real(value)
    if not value > 0:
        raise ValueError(f'must be positive, got {value}')
    return value

def _elements(proxy):
    if not proxy:
        raise InstanceError('missing', confee.path(proxy))
    try:
        return confee.elements(proxy)
    except TypeError as error:
        raise InstanceError('expected an array', confee.path(proxy)) from error

def is_sobolev(document) -> bool:
    return bool(document.layers)

def width_query(document, **overrides) -> WidthQuery:
    """Build a `WidthQuery`; `overrides` replace `N`, `n`, or `q`."""
    N = overrides.get('N') or _field(document.N, _integer)
    n = overrides.get('n')
    if n is None:
        n = _field(document.n, _integer)
    q = _field(document.q, Exponent.of)
    kind = _field(document.kind, lambda v: Kind(str(v).lower()), Kind.GELFAND)
    balls = []
    for item in _elements(document.balls):
        p = _field(item.p, Exponent.of)
        nu = _field(item.nu, _positive, 1.0)
        balls.append(Ball(p, nu))
    if not balls:
        raise InstanceError('at least one ball is required', 'balls')
    if N < 1:
        raise InstanceError(f'must be positive, got {N}', 'N')
    if not 0 <= n <= N:
        raise InstanceError(f'must lie in [0, {N}], got {n}', 'n')
    return WidthQuery(BallIntersection(N, tuple(balls)), n, q, kind)

def sobolev_instance(document) -> SobolevInstance:
    d = _field(document.d, _integer)
    q = _field(document.q, Exponent.of)
    layers = []
    for item in _elements(document.layers):
        r = _field(item.r, _integer)
        p = _field(item.p, Exponent.of)
        layers.append(Layer(r, p))
    return SobolevInstance(d, q, tuple(layers))

def describe_query(query: WidthQuery) -> dict:
    return {
        'N': query.N,
        'n': query.n,
        'q': query.q.json(),
        'kind': query.kind.value,
        'balls': [{'p': b.p.json(), 'nu': b.nu} for b in query.set],
    }

def describe_sobolev(instance: SobolevInstance) -> dict:
    return {
        'd': instance.d,
        'q': instance.q.json(),
        'layers': [{'r': layer.r, 'p': layer.p.json()} for layer in instance.layers],
    }
