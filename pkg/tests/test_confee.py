import pytest

from widthlab import confee

@pytest.fixture(params=['toml', 'json'])
def config(request):
    """Return an empty config with a non-existent path."""
    return confee.read(f'/does/not/exist.{request.param}')

@pytest.fixture(params=['toml', 'json'])
def seeded(request):
    if request.param == 'json':
        return confee.loads('{"seed": 7, "oracle": {"restarts": 5}}')
    return confee.loads('seed = 7\n[oracle]\nrestarts = 5\n', confee.TomlType())

def test_empty(config):
    assert(config() == {})
    assert(not config.a)

def test_not_empty(seeded):
    assert(seeded() != {})
    assert(seeded.oracle)

def test_no_default(config):
    with pytest.raises(KeyError, match='oracle.restarts'):
        config.oracle.restarts()

def test_default(config):
    assert(config.a(1) == 1)

def test_nested(seeded):
    assert(seeded.oracle.restarts() == 5)
    assert(seeded.oracle.rounds(2) == 2)
    assert(not seeded.seed.deeper)

def test_proxy_equal(seeded):
    assert(seeded.seed != 7)
    assert(seeded.seed == seeded.seed)

def test_read_only(seeded):
    with pytest.raises(AttributeError, match='read-only'):
        seeded.seed = 3
    assert(seeded.seed() == 7)

def test_resolve_prefers_override(seeded):
    assert(confee.resolve(3, seeded.seed, 0) == 3)
    assert(seeded.seed() == 7)

def test_resolve_falls_back(config, seeded):
    assert(confee.resolve(None, config.seed, 0) == 0)
    assert(confee.resolve(None, config.seed, lambda: 5) == 5)
    assert(confee.resolve(None, seeded.seed, 0) == 7)

def test_path():
    document = confee.loads('{"balls": [{"p": 2}, {"p": 3, "nu": 1}]}')
    assert(confee.path(document.balls[1].nu) == 'balls[1].nu')
    assert(confee.path(document) == '')

def test_elements():
    document = confee.loads('{"balls": [{"p": 2}, {"p": 3}], "N": 4}')
    items = confee.elements(document.balls)
    assert([item.p() for item in items] == [2, 3])
    with pytest.raises(TypeError):
        confee.elements(document.N)

def test_read_toml(cwd):
    path = cwd / '.widthlab.toml'
    path.write_text('seed = 3\n[oracle]\nrestarts = 5\n')
    config = confee.read(path)
    assert(config.seed() == 3)
    assert(config.oracle.restarts() == 5)
    assert(config.oracle.rounds(2) == 2)

def test_read_json(cwd):
    path = cwd / 'config.json'
    path.write_text('{"format": "csv"}')
    assert(confee.read(path).format() == 'csv')

def test_atomic(cwd):
    path = cwd / 'out.txt'
    with confee.atomic(path, 'w') as file:
        file.write('after')
    assert(path.read_text() == 'after')
    assert(list(cwd.iterdir()) == [path])

def test_atomic_cancel(cwd):
    path = cwd / 'out.txt'
    path.write_text('before')
    with confee.atomic(path, 'w') as file:
        file.write('after')
        raise confee.CancelOperation()
    assert(path.read_text() == 'before')
    assert(list(cwd.iterdir()) == [path])

def test_atomic_error(cwd):
    path = cwd / 'out.txt'
    with pytest.raises(RuntimeError):
        with confee.atomic(path, 'w') as file:
            file.write('partial')
            raise RuntimeError('boom')
    assert(not path.exists())
    assert(list(cwd.iterdir()) == [])
