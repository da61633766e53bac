"""Counterfactual changes derived from solved price changes.

Output, wages and welfare follow the roundabout-production model; other
universal gravity models share the price, flow, income and expenditure
results but may differ for welfare. Nominal wages inherit the common world
income normalization and should be read with that in mind.
"""

from __future__ import annotations

import numpy as np

from .domain import ShiftVectors, Solution, StaticsBundle
from .errors import UndefinedForExplicitCError


def income_hat(sol: Solution, c_hat, psi: float) -> np.ndarray:
    p, P = sol.p_hat, sol.P_hat
    return c_hat * p * (p / P) ** psi


def expenditure_hat(Y_hat, xi_hat_effective, Xi_hat: float) -> np.ndarray:
    return Xi_hat * np.asarray(xi_hat_effective) * np.asarray(Y_hat)


def flows_hat(sol: Solution, B, E_hat, theta: float, X=None):
    """Return ``(X_hat, X_prime)``; ``X_prime`` is None when ``X`` is omitted."""
    B = np.asarray(B, dtype=float)
    X_hat = B * (sol.p_hat[:, None] / sol.P_hat[None, :]) ** (-theta) * np.asarray(E_hat)[None, :]
    X_prime = None if X is None else X_hat * np.asarray(X, dtype=float)
    return X_hat, X_prime


def output_hat(sol: Solution, c_hat, psi: float) -> np.ndarray:
    return np.asarray(c_hat) * (sol.p_hat / sol.P_hat) ** psi


def welfare_hat(sol: Solution, shifts: ShiftVectors, psi: float):
    """Welfare change, or None when supply shifters were given directly."""
    if shifts.c_is_explicit:
        return None
    return sol.Xi_hat * sol.xi_hat_effective * shifts.a_hat * (sol.p_hat / sol.P_hat) ** (1 + psi)


def wage_hats(sol: Solution, shifts: ShiftVectors, psi: float):
    """Return ``(real_wage_hat, nominal_wage_hat)``."""
    if shifts.c_is_explicit:
        raise UndefinedForExplicitCError("wages are undefined when c_hat is given explicitly")
    p, P = sol.p_hat, sol.P_hat
    rw = shifts.a_hat * (p / P) ** (1 + psi)
    nw = shifts.a_hat * p ** (1 + psi) / P**psi
    return rw, nw


def compute_statics(X, B, elasticities, shifts: ShiftVectors, sol: Solution) -> StaticsBundle:
    X = np.asarray(X, dtype=float)
    psi, theta = elasticities.psi, elasticities.theta
    Y_hat = income_hat(sol, shifts.c_hat, psi)
    E_hat = expenditure_hat(Y_hat, sol.xi_hat_effective, sol.Xi_hat)
    X_hat, X_prime = flows_hat(sol, B, E_hat, theta, X)
    Q_hat = output_hat(sol, shifts.c_hat, psi)
    W_hat = welfare_hat(sol, shifts, psi)
    if shifts.c_is_explicit:
        rw = nw = None
    else:
        rw, nw = wage_hats(sol, shifts, psi)
    return StaticsBundle(
        Y_hat=Y_hat, E_hat=E_hat, Q_hat=Q_hat, W_hat=W_hat, rw_hat=rw, nw_hat=nw,
        rp=sol.p_hat / sol.P_hat, X_hat=X_hat, X_prime=X_prime,
        Y_prime=Y_hat * X.sum(axis=1), E_prime=E_hat * X.sum(axis=0),
        welfare_defined=W_hat is not None,
    )
