"""Shared test fixtures for all tests."""

import pytest

from tests.fixtures.pipeline import Pipeline


@pytest.fixture
def pipeline(tmp_path) -> Pipeline:
    """Fixture corpus with a CLI runner against the mock archive."""
    return Pipeline(tmp_path / "a")
