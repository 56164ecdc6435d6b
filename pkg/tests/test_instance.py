import pytest

from widthlab.balls import Kind
from widthlab.exponents import Exponent
from widthlab.instance import (
    InstanceError, describe_query, describe_sobolev, is_sobolev, load,
    sobolev_instance, width_query,
)

EXAMPLE = '''{"N": 16, "n": 4, "q": 4,
 "balls": [{"p": 2, "nu": 1}, {"p": "inf", "nu": "1/2"}]}'''

def field(text, **overrides):
    with pytest.raises(InstanceError) as info:
        width_query(load(inline=text), **overrides)
    return info.value.field

def test_width_query():
    query = width_query(load(inline=EXAMPLE))
    assert(query.N == 16)
    assert(query.n == 4)
    assert(query.q == Exponent.of(4))
    assert(query.kind == Kind.GELFAND)
    assert(query.set.nus == [1.0, 0.5])
    assert(query.set.ps[1].is_infinite())

def test_overrides():
    query = width_query(load(inline=EXAMPLE), n=2)
    assert(query.n == 2)

def test_defaults():
    query = width_query(load(inline='{"N": 3, "n": 0, "q": 2, "kind": "Kolmogorov", "balls": [{"p": 3}]}'))
    assert(query.set.nus == [1.0])
    assert(query.kind == Kind.KOLMOGOROV)

@pytest.mark.parametrize('text,expected', [
    ('{"N": 4, "n": 1, "q": 2, "balls": [{"p": 2}, {"p": 3, "nu": 0}]}', 'balls[1].nu'),
    ('{"N": 4, "n": 1, "q": 2, "balls": [{"p": 2}, {"p": 3, "nu": -1}]}', 'balls[1].nu'),
    ('{"N": 4, "n": 1, "q": 2, "balls": [{"p": "1/2"}]}', 'balls[0].p'),
    ('{"N": 4, "n": 1, "balls": [{"p": 2}]}', 'q'),
    ('{"N": 4.5, "n": 1, "q": 2, "balls": [{"p": 2}]}', 'N'),
    ('{"N": 4, "n": 5, "q": 2, "balls": [{"p": 2}]}', 'n'),
    ('{"N": 4, "n": 1, "q": 2, "balls": {"p": 2}}', 'balls'),
    ('{"N": 4, "n": 1, "q": 2, "balls": []}', 'balls'),
    ('{"N": 4, "n": 1, "q": 2, "kind": "best", "balls": [{"p": 2}]}', 'kind'),
])
def test_field_errors(text, expected):
    assert(field(text) == expected)

def test_error_message_names_field():
    with pytest.raises(InstanceError, match=r'^balls\[1\]\.nu: must be positive'):
        width_query(load(inline='{"N": 4, "n": 1, "q": 2, "balls": [{"p": 2}, {"p": 3, "nu": 0}]}'))

def test_json_position():
    with pytest.raises(InstanceError, match='line 2, column'):
        load(inline='{"N": 4,\n "n": }')

def test_load_arguments(cwd):
    with pytest.raises(InstanceError):
        load()
    with pytest.raises(InstanceError):
        load(cwd / 'a.json', inline='{}')
    with pytest.raises(InstanceError, match='no such file'):
        load(cwd / 'missing.json')

def test_toml(cwd):
    path = cwd / 'instance.toml'
    path.write_text(
        'N = 16\nn = 4\nq = 4\n'
        '[[balls]]\np = 2\nnu = 1\n'
        '[[balls]]\np = "inf"\nnu = "1/2"\n'
    )
    assert(width_query(load(path)) == width_query(load(inline=EXAMPLE)))

def test_toml_position(cwd):
    path = cwd / 'broken.toml'
    path.write_text('N = 16\nn = = 4\n')
    with pytest.raises(InstanceError, match='line 2'):
        load(path)

def test_describe_query():
    described = describe_query(width_query(load(inline=EXAMPLE)))
    assert(described == {
        'N': 16, 'n': 4, 'q': 4.0, 'kind': 'gelfand',
        'balls': [{'p': 2.0, 'nu': 1.0}, {'p': 'inf', 'nu': 0.5}],
    })

def test_sobolev_instance():
    document = load(inline='{"d": 3, "q": 2, "layers": [{"r": 2, "p": "10/9"}, {"r": 1, "p": 2}]}')
    assert(is_sobolev(document))
    assert(not is_sobolev(load(inline=EXAMPLE)))
    instance = sobolev_instance(document)
    assert(instance.d == 3)
    assert(instance.layers[0].p == Exponent.of('10/9'))
    assert(describe_sobolev(instance)['layers'][1] == {'r': 1, 'p': 2.0})

def test_sobolev_field_errors():
    document = load(inline='{"d": 3, "q": 2, "layers": [{"r": 2, "p": "10/9"}, {"p": 2}]}')
    with pytest.raises(InstanceError) as info:
        sobolev_instance(document)
    assert(info.value.field == 'layers[1].r')
