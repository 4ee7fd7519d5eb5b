"""Shared fixtures for the test suite."""
import pytest

from qarrow import load_prelude


@pytest.fixture(scope="session")
def prelude():
    return load_prelude()


@pytest.fixture(scope="session")
def defs_map(prelude):
    return {d.name: d.term for d in prelude.program.defs}
