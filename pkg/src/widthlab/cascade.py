"""
Dependency injection for click commands.

A class decorated with `group` declares values as methods. A method's
parameters name either other values, which are computed first and cached
for the run, or options, which click parses. Each command collects the
options of every value it depends on, transitively.
"""

import click
import functools
import inspect

_MISSING = object()
_VALUE = 'cascade.value'
_COMMAND = 'cascade.command'
_PARAMETERS = 'cascade.parameters'

def identity(x):
    return x

def compose(*callables):
    def apply(x):
        for c in reversed(callables):
            x = c(x)
        return x
    return apply

class Middle:
    """One run: the instance whose methods compute values, and their cache."""

    def __init__(self, bottom, resolvers):
        self.bottom = bottom
        self.resolvers = resolvers
        self.cache = {}

    def value(self, name, options):
        value = self.cache.get(name, _MISSING)
        if value is _MISSING:
            value = self.resolvers[name](self, options)
            self.cache[name] = value
        return value

class _Resolver:
    """How to compute one value: its dependencies, its own options, and the
    click decorators for every option it needs, keyed by value name."""

    def __init__(self, name, dependencies, options, parameters):
        self.name = name
        self.dependencies = dependencies
        self.options = options
        self.parameters = parameters

    def __call__(self, middle, options):
        values = {d: middle.value(d, options) for d in self.dependencies}
        values.update((o, options[o]) for o in self.options)
        return getattr(middle.bottom, self.name)(**values)

def _resolvers(klass):
    members = klass.__dict__
    resolvers = {}

    def resolve(name):
        if name in resolvers:
            return resolvers[name]
        member = members.get(name)
        if member is None or not getattr(member, _VALUE, False):
            return None
        parameters = {name: getattr(member, _PARAMETERS, identity)}
        dependencies, options = [], []
        for p in inspect.signature(member).parameters:
            if p == 'self':
                continue
            dependency = resolve(p)
            if dependency is None:
                options.append(p)
            else:
                dependencies.append(p)
                parameters.update(dependency.parameters)
        resolvers[name] = _Resolver(name, dependencies, options, parameters)
        return resolvers[name]

    for name in members:
        resolve(name)
    return resolvers

def group(*args, **kwargs):
    def decorator(klass):
        @click.group(*args, **kwargs)
        @click.version_option(package_name='widthlab')
        def group():
            pass

        resolvers = _resolvers(klass)
        for name, resolver in resolvers.items():
            attr = getattr(klass.__dict__[name], _COMMAND, None)
            if attr is None:
                continue
            cargs, ckwargs = attr

            def run(context, _name=name, **options):
                return context.obj.value(_name, options)
            # Click names the command after the function.
            run = functools.wraps(klass.__dict__[name])(run)
            run = click.pass_context(run)
            group.command(*cargs, **ckwargs)(
                compose(*resolver.parameters.values())(run)
            )

        def middle():
            return Middle(klass(), resolvers)

        def result():
            return group(obj=middle())

        # For `click.testing.CliRunner().invoke(result.group, args, obj=result.middle())`.
        result.group = group
        result.middle = middle
        return result
    return decorator

def command(*args, **kwargs):
    def decorator(method):
        assert getattr(method, _COMMAND, None) is None
        setattr(method, _COMMAND, (args, kwargs))
        setattr(method, _VALUE, True)
        return method
    return decorator

def decorator(middle):
    """Apply a click decorator to every command that needs this value."""
    def decorator(method):
        inner = getattr(method, _PARAMETERS, identity)
        setattr(method, _PARAMETERS, compose(middle, inner))
        return method
    return decorator

def option(*args, **kwargs):
    return decorator(click.option(*args, **kwargs))

def value():
    def decorator(method):
        setattr(method, _VALUE, True)
        return method
    return decorator
