from __future__ import annotations

import os

import pytest

from pathsampler import engine

BACKENDS = engine.available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_report_header(config):
    return f"pathsampler backends: {', '.join(BACKENDS)} (default {engine.BACKEND}); " \
           f"PATHSAMPLER_BACKEND={os.environ.get('PATHSAMPLER_BACKEND', '')!r}"
