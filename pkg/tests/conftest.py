"""Shared hypothesis strategies for the test suite.

Logit draws stay in a moderate range so softmax never saturates to exact 0/1
and finite-difference comparisons stay meaningful; tests that care about the
extremes construct them explicitly.
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

finite_floats = st.floats(
    min_value=-30.0, max_value=30.0, allow_nan=False, allow_infinity=False
)


@st.composite
def logit_vectors(draw, min_k: int = 2, max_k: int = 8):
    k = draw(st.integers(min_k, max_k))
    return np.array(draw(st.lists(finite_floats, min_size=k, max_size=k)))


@st.composite
def labeled_logits(draw, min_k: int = 2, max_k: int = 8):
    x = draw(logit_vectors(min_k, max_k))
    y = draw(st.integers(0, x.size - 1))
    return x, y


@st.composite
def prob_vectors(draw, min_k: int = 2, max_k: int = 8):
    # strictly positive weights keep every component off zero after normalizing
    k = draw(st.integers(min_k, max_k))
    w = np.array(draw(st.lists(st.floats(1e-3, 1.0), min_size=k, max_size=k)))
    return w / w.sum()


amplifications = st.sampled_from([0.0, 0.5, 1.0, 10.0, 100.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
