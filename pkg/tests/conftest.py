import sys

import numpy as np
import pytest

from unigrav import Elasticities


def random_instance(rng, n=None, theta=None, psi=None, imbalance=(0.75, 1.33)):
    """Unbalanced gravity-shaped flows with a random shock matrix."""
    n = int(rng.integers(2, 21)) if n is None else n
    theta = rng.uniform(1, 8) if theta is None else theta
    psi = rng.uniform(0, 3) if psi is None else psi
    size = rng.lognormal(0, 1, n)
    X = np.outer(size, size) * rng.uniform(0.2, 1.0, (n, n)) * rng.uniform(*imbalance, n)[None, :]
    X[np.diag_indices(n)] *= rng.uniform(2, 8, n)
    B = rng.uniform(0.5, 2, (n, n))
    return X, B, Elasticities(theta, psi)


def symmetric_pair(beta=2.0):
    X = np.array([[10.0, 10.0], [10.0, 10.0]])
    B = np.array([[1.0, beta], [beta, 1.0]])
    return X, B


def psi0_reference(X, B, theta, c_hat, tol=1e-13):
    """Constant-deficit equilibrium with zero supply elasticity, written in
    terms of income changes with an explicit world-income renormalization."""
    Y, E = X.sum(1), X.sum(0)
    D = E - Y
    p = np.ones(len(Y))
    P = np.ones(len(Y))
    for _ in range(100_000):
        Yp = c_hat * p * Y
        Ep = Yp + D
        demand = (X * B) @ (P**theta * Ep / E)
        p_new = (demand / (c_hat * Y)) ** (1 / (1 + theta))
        P_new = ((X * B / E).T @ p_new ** (-theta)) ** (-1 / theta)
        s = X.sum() / np.sum(c_hat * p_new * Y)
        p_new, P_new = p_new * s, P_new * s
        done = np.max(np.abs(p_new - p)) < tol
        p, P = p_new, P_new
        if done:
            break
    Yp = c_hat * p * Y
    return p, P, (Yp + D) / E


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = getattr(sys.modules.get("test_acceptance"), "REPORT", None)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
