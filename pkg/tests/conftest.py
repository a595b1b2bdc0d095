import os

import numpy as np
import pytest


@pytest.fixture(scope="session", autouse=True)
def kernel_cache(tmp_path_factory):
    """Keep kernel caches out of the user's home directory during tests."""
    path = tmp_path_factory.mktemp("kernel-cache")
    old = os.environ.get("CWW_CACHE_DIR")
    os.environ["CWW_CACHE_DIR"] = str(path)
    yield path
    if old is None:
        os.environ.pop("CWW_CACHE_DIR", None)
    else:
        os.environ["CWW_CACHE_DIR"] = old


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
