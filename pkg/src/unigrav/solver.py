"""Fixed-point solver for changes in output prices and price indices.

The unknowns are the vectors ``p_hat`` (output prices) and ``P_hat`` (price
indices) plus the scalar ``Xi_hat`` that keeps world expenditure equal to
world income. Each pass updates ``Xi_hat`` from the current prices, then
``p_hat`` from the previous ``P_hat``, then ``P_hat`` from the new ``p_hat``;
convergence is the sup-norm change in ``p_hat``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .domain import (
    Elasticities,
    Marginals,
    Mode,
    Problem,
    ShiftVectors,
    Solution,
    SolverConfig,
    check_trade_matrix,
    validate_inputs,
)
from .errors import DegenerateDeficitError, NonFiniteError, NotConvergedError

log = logging.getLogger(__name__)


@dataclass
class IterationState:
    p_hat: np.ndarray
    P_hat: np.ndarray
    Xi_hat: float
    xi_hat_current: np.ndarray
    iter: int = 0


def compute_marginals(X) -> Marginals:
    X = check_trade_matrix(X)
    Y = X.sum(axis=1)
    E = X.sum(axis=0)
    D = E - Y
    return Marginals(Y=Y, E=E, Ybar=float(X.sum()), delta=D / Y, D=D)


def step_xi_hat(delta, c_hat, p_hat, P_hat, Xi_hat, psi):
    """Endogenous deficit-parameter change that holds nominal deficits fixed."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta == -1):
        raise DegenerateDeficitError("delta_i = -1 (zero expenditure) is not allowed")
    inv_y_hat = P_hat**psi / (c_hat * p_hat ** (1 + psi))
    return (1 + delta / (1 + delta) * (inv_y_hat - 1)) / Xi_hat


def step_Xi_hat(xi_hat, c_hat, p_hat, P_hat, E, Ybar, psi):
    return Ybar / np.sum(xi_hat * c_hat * p_hat * (p_hat / P_hat) ** psi * E)


def step_p_hat(state: IterationState, X, B, Y, elasticities: Elasticities, xi_hat, c_hat):
    theta, psi = elasticities.theta, elasticities.psi
    p, P = state.p_hat, state.P_hat
    weights = xi_hat * c_hat * P ** (theta - psi) * p ** (1 + psi)
    inner = ((X / Y[:, None]) * B) @ weights
    return (state.Xi_hat * P**psi / c_hat * inner) ** (1 / (1 + theta + psi))


def step_P_hat(p_hat_next, X, B, E, theta):
    inner = ((X / E[None, :]) * B).T @ p_hat_next ** (-theta)
    return inner ** (-1 / theta)


def _check_positive(name, v, it, allow_nonpositive=False):
    v = np.atleast_1d(v)
    bad = ~np.isfinite(v) if allow_nonpositive else ~np.isfinite(v) | (v <= 0)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise NonFiniteError(
            f"{name} became non-finite or non-positive at iteration {it}, index {idx}",
            iteration=it, index=idx)


def solve_problem(problem: Problem, raise_on_failure: bool = True) -> Solution:
    X, B = problem.X, problem.B
    el, sv, cfg = problem.elasticities, problem.shifts, problem.config
    m = compute_marginals(X)
    n = problem.n
    c_hat = sv.c_hat
    xi_hat = np.ones(n) if cfg.mode is Mode.MULTIPLICATIVE else sv.xi_hat.copy()
    state = IterationState(np.ones(n), np.ones(n), 1.0, xi_hat)
    lam = cfg.damping
    crit = np.inf
    converged = False

    for it in range(1, cfg.max_iter + 1):
        state.iter = it
        if cfg.mode is Mode.DEFAULT:
            state.xi_hat_current = step_xi_hat(m.delta, c_hat, state.p_hat, state.P_hat,
                                               state.Xi_hat, el.psi)
            # xi_hat can dip through zero for a pass or two when a surplus
            # location's income overshoots downward; only the converged value
            # has to be positive, and p_hat, P_hat, Xi_hat are checked below
            _check_positive("xi_hat", state.xi_hat_current, it, allow_nonpositive=True)
        state.Xi_hat = float(step_Xi_hat(state.xi_hat_current, c_hat, state.p_hat, state.P_hat,
                                         m.E, m.Ybar, el.psi))
        _check_positive("Xi_hat", state.Xi_hat, it)
        p_next = step_p_hat(state, X, B, m.Y, el, state.xi_hat_current, c_hat)
        if lam != 1.0:
            p_next = state.p_hat ** (1 - lam) * p_next**lam
        _check_positive("p_hat", p_next, it)
        P_next = step_P_hat(p_next, X, B, m.E, el.theta)
        _check_positive("P_hat", P_next, it)
        crit = float(np.max(np.abs(p_next - state.p_hat)))
        state.p_hat, state.P_hat = p_next, P_next
        if crit < cfg.tol:
            converged = True
            break

    if converged and np.any(state.xi_hat_current <= 0):
        idx = int(np.flatnonzero(state.xi_hat_current <= 0)[0])
        raise NonFiniteError(
            f"iteration settled on xi_hat <= 0 at index {idx}: income would fall below the "
            "trade surplus, so no equilibrium keeps deficits constant",
            iteration=state.iter, index=idx)
    Xi_solved = state.Xi_hat
    Xi_hat = 1.0 if cfg.mode is Mode.MULTIPLICATIVE else Xi_solved
    sol = Solution(
        p_hat=state.p_hat, P_hat=state.P_hat, Xi_hat=Xi_hat,
        xi_hat_effective=np.asarray(state.xi_hat_current, dtype=float),
        n_iter=state.iter, crit=crit, converged=converged, mode=cfg.mode,
        Xi_hat_solved=Xi_solved,
    )
    if not converged:
        log.warning("no convergence after %d iterations (crit=%g)", state.iter, crit)
        if raise_on_failure:
            raise NotConvergedError(
                f"not converged after {state.iter} iterations (crit={crit:.3g})", solution=sol)
    return sol


def solve(X, B, elasticities: Elasticities, shifts: ShiftVectors | None = None,
          config: SolverConfig | None = None, raise_on_failure: bool = True) -> Solution:
    X = np.asarray(X, dtype=float)
    if shifts is None:
        shifts = ShiftVectors.ones(X.shape[0])
    if config is None:
        config = SolverConfig()
    problem = validate_inputs(X, B, elasticities, shifts, config)
    return solve_problem(problem, raise_on_failure=raise_on_failure)


def residuals(X, B, elasticities: Elasticities, shifts: ShiftVectors, sol: Solution):
    """Evaluate the equilibrium equations directly at ``sol``.

    Uses the deficit parameters the solver iterated with, so for the
    multiplicative mode the pre-reset ``Xi_hat`` is plugged in.
    """
    X = np.asarray(X, dtype=float)
    B = np.asarray(B, dtype=float)
    theta, psi = elasticities.theta, elasticities.psi
    m = compute_marginals(X)
    p, P = sol.p_hat, sol.P_hat
    Xi = sol.Xi_hat_solved
    xi = sol.xi_hat_effective
    c = shifts.c_hat
    supply = xi * c * p * (p / P) ** psi
    r1 = p ** (1 + theta + psi) * P ** (-psi) * c - Xi * ((X / m.Y[:, None]) * B) @ (P**theta * supply)
    r2 = P ** (-theta) - ((X / m.E[None, :]) * B).T @ p ** (-theta)
    r3 = Xi * np.sum(supply * m.E / m.Ybar) - 1
    return r1, r2, float(r3)
