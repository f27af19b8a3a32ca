import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from src.params import builtin_parameter_sets  # noqa: E402

DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture
def modified():
    return builtin_parameter_sets()["modified_a03"]


@pytest.fixture
def nobili():
    return builtin_parameter_sets()["nobili2003"]


@pytest.fixture(params=["modified_a03", "nobili2003"])
def any_params(request):
    return builtin_parameter_sets()[request.param]


@pytest.fixture
def data_dir() -> Path:
    return DATA
