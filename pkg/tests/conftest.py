import click.testing
import pathlib
import pytest
import shush
import tempfile

from widthlab.main import Widthlab
from widthlab.oracle import OracleBudget

@pytest.fixture()
def cwd():
    with tempfile.TemporaryDirectory() as cwd:
        yield pathlib.Path(cwd)

@pytest.fixture()
def sh(cwd):
    return shush.Shell() @ cwd

@pytest.fixture()
def widthlab(cwd, monkeypatch):
    """Invoke the command line in-process, from a temporary directory."""
    monkeypatch.chdir(cwd)
    runner = click.testing.CliRunner()
    def invoke(*args):
        return runner.invoke(Widthlab.group, [str(a) for a in args], obj=Widthlab.middle())
    return invoke

@pytest.fixture(scope='session')
def small_budget():
    """Enough search for the two- and three-dimensional exact cases."""
    return OracleBudget(restarts=4, ascent_starts=16, iterations=200, rounds=2)
