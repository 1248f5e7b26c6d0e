import pytest

from gwquintic.verify import Engine, RunConfig


@pytest.fixture(scope="session")
def default_engine() -> Engine:
    """One shared engine at the default caps for the expensive suites."""
    return Engine(RunConfig())


@pytest.fixture(scope="session")
def small_engine() -> Engine:
    """Cheap engine for logic-level tests."""
    return Engine(RunConfig(dq=2, pad=2))
