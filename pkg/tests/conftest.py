"""Shared test fixtures and hypothesis settings."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile (or load from cache) the jitted loops once per session.

    Tests that measure wall-clock time depend on this so that one-time JIT
    compilation is not billed to the run under test.
    """
    from fxtnes.fastpath import warm_up

    warm_up()
    return True
