"""
Read-only proxies into TOML and JSON documents.

Configuration files and instance documents are both trees of tables and
arrays. A proxy stands for one node of such a tree, whether or not the node
exists, and remembers where it sits so that errors can name it:

- `a.b.c()` raises `KeyError('.b.c')` when the node is missing
- `a.b.c(1)` returns 1 when the node is missing
- `bool(a.b.c)` tells whether the node exists
- `path(a.balls[1].nu)` is `'balls[1].nu'`

Output files are written through `atomic`.
"""

import contextlib
import json
import pathlib
import shutil
import tempfile
import tomlkit
import typing as t

_MISSING = object()
_SELVES = {}

class CancelOperation(BaseException):
    """Signal the calling context to not commit any changes."""

@contextlib.contextmanager
def atomic(pathlike, *args, **kwargs):
    dst = pathlib.Path(pathlike)
    kwargs['delete'] = False
    kwargs.setdefault('dir', dst.parent)
    # Write to temporary file and then atomically move into place.
    with tempfile.NamedTemporaryFile(*args, **kwargs) as file:
        try:
            yield file
        except CancelOperation:
            pathlib.Path(file.name).unlink(missing_ok=True)
            return
        except BaseException:
            pathlib.Path(file.name).unlink(missing_ok=True)
            raise
    src = pathlib.Path(file.name)
    try:
        shutil.move(src, dst)
    finally:
        src.unlink(missing_ok=True)

def resolve(override, proxy, default):
    """Resolve a configuration value.

    If the override is missing, use the value from the config.
    If the config has no value, use the default.
    Overrides are never written back.
    """
    if override is not None:
        return override
    value = _SELVES[proxy].value
    if value is _MISSING:
        return default() if callable(default) else default
    return value

class TomlType:
    def read(self, file):
        return tomlkit.load(file)
    def loads(self, text):
        return tomlkit.parse(text)
    def root(self):
        return tomlkit.document()

class JsonType:
    def read(self, file):
        return json.load(file)
    def loads(self, text):
        return json.loads(text)
    def root(self):
        return {}

def _type(path: pathlib.Path):
    return JsonType() if path.suffix == '.json' else TomlType()

def read(pathlike, typ=None):
    """Open a document. A missing file is an empty document.

    The suffix `.json` selects JSON; anything else is TOML.
    Syntax errors propagate as the parser's own exception.
    """
    path = pathlib.Path(pathlike)
    if typ is None:
        typ = _type(path)
    if path.exists():
        with path.open('r') as file:
            root = typ.read(file)
    else:
        root = typ.root()
    return Proxy(None, None, root)

def loads(text: str, typ=None):
    """Parse a document held in a string, JSON by default."""
    if typ is None:
        typ = JsonType()
    return Proxy(None, None, typ.loads(text))

# Documents come from TOML or JSON,
# so the only keys are strings and array indices.
Subscript = t.Union[str, int]

def lookup(subscriptable, subscript, default):
    try:
        return subscriptable[subscript]
    except (LookupError, TypeError):
        return default

class Value:
    def __init__(self, parent, name, value):
        self.parent = parent
        self.name = name
        self.value = value
        # Map from names to proxies.
        self.members = {}
    def get(self, name: Subscript):
        proxy = self.members.get(name, None)
        if proxy is None:
            value = (
                _MISSING
                if self.value is _MISSING
                else lookup(self.value, name, _MISSING)
            )
            proxy = Proxy(self, name, value)
            self.members[name] = proxy
        return proxy

class Proxy:
    def __init__(self, parent, name, value):
        _SELVES[self] = Value(parent, name, value)
    def __getitem__(self, name: Subscript):
        return _SELVES[self].get(name)
    def __getattr__(self, name):
        return self[name]
    def __setattr__(self, name, value):
        raise AttributeError(f'documents are read-only: {path(self)}.{name}')
    def __call__(self, default=_MISSING):
        underlying = _SELVES[self]
        value = underlying.value
        if value is _MISSING:
            if default is _MISSING:
                raise KeyError(_path(underlying))
            return default
        return value
    def __bool__(self):
        return _SELVES[self].value is not _MISSING

def _path(self):
    if self.parent is None:
        return ''
    step = f'[{self.name}]' if (type(self.name) is int) else f'.{self.name}'
    return _path(self.parent) + step

def path(proxy) -> str:
    """The location of a proxy, e.g. `balls[1].nu`."""
    return _path(_SELVES[proxy]).lstrip('.')

def elements(proxy):
    """Proxies for the items of an array."""
    value = proxy()
    if isinstance(value, (str, t.Mapping)) or not isinstance(value, t.Sequence):
        raise TypeError(f'{path(proxy) or "document"} is not an array')
    return [proxy[i] for i in range(len(value))]
