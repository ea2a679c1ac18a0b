import warnings

import numpy as np
import pytest

from rescount.errors import PrecisionWarning


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _quiet_precision_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        yield
