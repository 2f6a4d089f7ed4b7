import functools

import pytest

from lemniscate.catalog import get_example
from lemniscate.centers import lemniscatic_data
from lemniscate.preimage import analyze
from lemniscate.walshmap import make_context


@functools.lru_cache(maxsize=None)
def preimage_of(key, alpha=None, beta=None):
    return analyze(get_example(key).polynomial(alpha=alpha, beta=beta))


@functools.lru_cache(maxsize=None)
def context_of(key, alpha=None, beta=None):
    pre = preimage_of(key, alpha, beta)
    lem, _, _ = lemniscatic_data(pre)
    return make_context(pre, lem)


@pytest.fixture
def pre_for():
    return preimage_of


@pytest.fixture
def ctx_for():
    return context_of
