import warnings

import pytest

from exchangesim.device import MaterialParams


@pytest.fixture
def material():
    return MaterialParams()


@pytest.fixture(autouse=True)
def _fail_on_unexpected_warnings():
    """Coarse-grid warnings are opt-in per test; everything else surfaces."""
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        warnings.filterwarnings("ignore", message="grid spacing .* is coarse")
        yield
