import numpy as np
import pytest
from hypothesis import strategies as st

from sspmsrk.methods import MSRKMethod


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def random_valid_method(rng, s, k):
    """A structurally valid method with nonnegative random coefficients."""
    D = np.zeros((s, k))
    D[0, -1] = 1.0
    if s > 1:
        raw = rng.uniform(0.1, 1.0, size=(s - 1, k))
        D[1:] = raw / raw.sum(axis=1, keepdims=True)
    Ahat = np.zeros((s, k - 1))
    if s > 1 and k > 1:
        Ahat[1:] = rng.uniform(0.0, 0.5, size=(s - 1, k - 1))
    A = np.tril(rng.uniform(0.0, 0.5, size=(s, s)), -1)
    A[0] = 0.0
    raw = rng.uniform(0.1, 1.0, size=k)
    theta = raw / raw.sum()
    bhat = rng.uniform(0.0, 0.5, size=k - 1)
    b = rng.uniform(0.0, 0.5, size=s)
    return MSRKMethod(s=s, k=k, D=D, Ahat=Ahat, A=A, theta=theta, bhat=bhat, b=b)


@st.composite
def method_shapes(draw):
    s = draw(st.integers(min_value=1, max_value=4))
    k = draw(st.integers(min_value=1, max_value=4))
    return s, k


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
