from __future__ import annotations

import pytest

from helpers import make_mock_config, make_mock_model


@pytest.fixture
def mock_model():
    return make_mock_model()


@pytest.fixture
def mock_config():
    return make_mock_config()
