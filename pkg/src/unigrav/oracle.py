"""Forward model of the roundabout-production economy in levels.

Given primitives (trade costs, productivity, labor, deficit parameters,
labor share, substitution elasticity) this module solves for equilibrium
price levels directly, without hat algebra. Ratios of two such equilibria
give an independent check on :func:`unigrav.solver.solve`.

Units are chosen so that every proportionality constant in the pricing and
supply relations is one; only ratios are ever compared.

Primitives file format (``load_primitives`` / ``dump_primitives``)::

    # comment lines start with '#'
    sigma = 5.0
    zeta = 0.5
    Ybar = 100
    labels = A B C
    A = 1 1.2 0.9
    L = 1 1 1
    xi = 1 1 1
    Z = 1 1 1
    [tau]
    1 1.5 2
    1.5 1 1.8
    2 1.8 1

Vector keys may be omitted (defaulting to ones); ``[tau]`` is required and
holds N whitespace-separated rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import Elasticities, LocationIndex, Mode, ShiftVectors, SolverConfig
from .errors import DimensionMismatchError, NotConvergedError, ValidationError
from .solver import solve
from .statics import compute_statics


@dataclass(frozen=True)
class Primitives:
    tau: np.ndarray
    A: np.ndarray
    L: np.ndarray
    xi: np.ndarray
    Z: np.ndarray
    zeta: float
    sigma: float
    Ybar: float = 1.0
    labels: tuple = field(default=())

    def __post_init__(self):
        tau = np.array(self.tau, dtype=float)
        n = tau.shape[0]
        if tau.shape != (n, n) or n < 2:
            raise DimensionMismatchError(f"tau must be square with N>=2, got {tau.shape}")
        if not np.all(np.isfinite(tau)):
            raise ValidationError("infinite trade costs are not supported by the oracle")
        if np.any(tau <= 0):
            raise ValidationError("trade costs must be strictly positive")
        object.__setattr__(self, "tau", tau)
        for name in ("A", "L", "xi", "Z"):
            v = np.array(getattr(self, name), dtype=float)
            if v.shape != (n,):
                raise DimensionMismatchError(f"{name} must have length {n}")
            if not np.all(np.isfinite(v)) or np.any(v <= 0):
                raise ValidationError(f"{name} must be strictly positive")
            object.__setattr__(self, name, v)
        if not (0 < self.zeta <= 1):
            raise ValidationError("zeta must lie in (0, 1]")
        if not (self.sigma > 1):
            raise ValidationError("sigma must exceed 1")
        if not (self.Ybar > 0):
            raise ValidationError("Ybar must be positive")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"L{i:02d}" for i in range(n)))

    @property
    def n(self) -> int:
        return self.tau.shape[0]

    @property
    def theta(self) -> float:
        return self.sigma - 1

    @property
    def psi(self) -> float:
        return (1 - self.zeta) / self.zeta

    @property
    def elasticities(self) -> Elasticities:
        return Elasticities(self.theta, self.psi)

    @property
    def c_bar(self) -> np.ndarray:
        return self.A * self.L * self.Z ** (1 + self.psi)

    def replace(self, **kw) -> "Primitives":
        d = {k: getattr(self, k) for k in
             ("tau", "A", "L", "xi", "Z", "zeta", "sigma", "Ybar", "labels")}
        d.update(kw)
        return Primitives(**d)


@dataclass(frozen=True)
class Equilibrium:
    p: np.ndarray
    P: np.ndarray
    w: np.ndarray
    Q: np.ndarray
    Y: np.ndarray
    E: np.ndarray
    Xi: float
    xi: np.ndarray
    X: np.ndarray
    n_iter: int = 0


def _price_index(T, p, theta):
    return (T.T @ p ** (-theta)) ** (-1 / theta)


def solve_primitives(prim: Primitives, tol: float = 1e-14, max_iter: int = 200_000,
                     fixed_deficits=None) -> Equilibrium:
    """Solve the level equilibrium by staggered fixed-point iteration.

    ``fixed_deficits`` holds nominal deficits ``D_i`` to keep constant; the
    deficit parameters are then backed out each pass as ``1 + D_i / Y_i``.
    Otherwise ``prim.xi`` is used as given.
    """
    theta, psi = prim.theta, prim.psi
    T = prim.tau ** (-theta)
    cbar = prim.c_bar
    n = prim.n
    p = np.ones(n)
    P = _price_index(T, p, theta)
    lam = prim.Ybar / np.sum(cbar * p ** (1 + psi) / P**psi)
    p, P = p * lam, P * lam
    xi = prim.xi
    for it in range(1, max_iter + 1):
        Yv = cbar * p ** (1 + psi) / P**psi
        if fixed_deficits is not None:
            xi = 1 + np.asarray(fixed_deficits) / Yv
            if np.any(xi <= 0):
                raise ValidationError("deficits too large for positive expenditure")
        Xi = Yv.sum() / np.sum(xi * Yv)
        E = Xi * xi * Yv
        rhs = T @ (P**theta * E)
        p_new = (rhs * P**psi / cbar) ** (1 / (1 + theta + psi))
        P_new = _price_index(T, p_new, theta)
        lam = prim.Ybar / np.sum(cbar * p_new ** (1 + psi) / P_new**psi)
        p_new, P_new = p_new * lam, P_new * lam
        crit = np.max(np.abs(p_new / p - 1))
        p, P = p_new, P_new
        if crit < tol:
            break
    else:
        raise NotConvergedError(f"level system not converged after {max_iter} iterations")

    Q = cbar * (p / P) ** psi
    Yv = p * Q
    if fixed_deficits is not None:
        xi = 1 + np.asarray(fixed_deficits) / Yv
    Xi = float(Yv.sum() / np.sum(xi * Yv))
    E = Xi * xi * Yv
    X = (prim.tau * p[:, None]) ** (-theta) * P[None, :] ** theta * E[None, :]
    return Equilibrium(p=p, P=P, w=Yv / prim.L, Q=Q, Y=Yv, E=E, Xi=Xi,
                       xi=np.asarray(xi, dtype=float), X=X, n_iter=it)


def level_residuals(prim: Primitives, eq: Equilibrium) -> dict:
    """Relative violations of the equilibrium conditions in levels."""
    theta, psi = prim.theta, prim.psi
    T = prim.tau ** (-theta)
    lhs = eq.p ** (1 + theta) * prim.c_bar * (eq.p / eq.P) ** psi
    rhs = T @ (eq.P**theta * eq.Xi * eq.xi * eq.p * prim.c_bar * (eq.p / eq.P) ** psi)
    pidx = _price_index(T, eq.p, theta)

    def rel(a, b):
        return float(np.max(np.abs(a - b) / np.abs(b)))

    return {
        "market_clearing": rel(lhs, rhs),
        "price_index": rel(eq.P, pidx),
        "normalization": abs(eq.Y.sum() / prim.Ybar - 1),
    }


def property_checks(prim: Primitives, eq: Equilibrium) -> dict:
    """Relative errors of each defining property of the equilibrium."""
    theta = prim.theta
    p_ij = prim.tau * eq.p[:, None]

    def rel(a, b):
        return float(np.max(np.abs(np.asarray(a) - b) / np.abs(b)))

    shares = p_ij ** (-theta) / np.sum(p_ij ** (-theta), axis=0)[None, :]
    pricing = (eq.w / prim.A) ** prim.zeta * eq.P ** (1 - prim.zeta) / prim.Z
    return {
        "arbitrage_demand": rel(eq.X, shares * eq.E[None, :]),
        "expenditure_adds_up": rel(eq.X.sum(axis=0), eq.E),
        "supply": rel(eq.Q, prim.c_bar * (eq.p / eq.P) ** prim.psi),
        "market_clearing": rel(eq.X.sum(axis=1), eq.Y),
        "deficits": rel(eq.E, eq.Xi * eq.xi * eq.Y),
        "normalization": abs(eq.Y.sum() / prim.Ybar - 1),
        "zero_profit_pricing": rel(eq.p, pricing),
        "income_is_wages": rel(eq.Y, eq.w * prim.L),
    }


@dataclass(frozen=True)
class Hats:
    p_hat: np.ndarray
    P_hat: np.ndarray
    Y_hat: np.ndarray
    E_hat: np.ndarray
    Q_hat: np.ndarray
    W_hat: np.ndarray
    X_hat: np.ndarray
    Xi_hat: float
    xi_hat: np.ndarray
    w_hat: np.ndarray
    rw_hat: np.ndarray


def welfare(eq: Equilibrium) -> np.ndarray:
    return eq.Xi * eq.xi * eq.w / eq.P


def hats_from_equilibria(base: Equilibrium, cf: Equilibrium) -> Hats:
    if base.p.shape != cf.p.shape:
        raise DimensionMismatchError("equilibria have different numbers of locations")
    return Hats(
        p_hat=cf.p / base.p, P_hat=cf.P / base.P, Y_hat=cf.Y / base.Y, E_hat=cf.E / base.E,
        Q_hat=cf.Q / base.Q, W_hat=welfare(cf) / welfare(base), X_hat=cf.X / base.X,
        Xi_hat=cf.Xi / base.Xi, xi_hat=cf.xi / base.xi, w_hat=cf.w / base.w,
        rw_hat=(cf.w / cf.P) / (base.w / base.P),
    )


def counterfactual_primitives(prim: Primitives, B, shifts: ShiftVectors,
                              mode: Mode = Mode.UNIVERSAL) -> Primitives:
    tau_hat = np.asarray(B, dtype=float) ** (-1 / prim.theta)
    # explicit c_hat is loaded onto productivity; welfare is not compared then
    A_hat = shifts.c_hat if shifts.c_is_explicit else shifts.a_hat
    xi = prim.xi * shifts.xi_hat if Mode(mode) is Mode.UNIVERSAL else prim.xi
    return prim.replace(tau=prim.tau * tau_hat, A=prim.A * A_hat, L=prim.L * shifts.l_hat, xi=xi)


def crosscheck(prim: Primitives, B, shifts: ShiftVectors | None = None,
               mode: Mode = Mode.UNIVERSAL, detail: bool = False, tol: float = 1e-12):
    """Max relative deviation between hat-solver output and level ratios.

    Supports the universal and default (constant deficits) modes. In default
    mode only the product ``Xi_hat * xi_hat`` is identified, so that product
    is compared instead of each factor.
    """
    mode = Mode(mode)
    if mode is Mode.MULTIPLICATIVE:
        raise ValidationError("the oracle has no multiplicative-deficit counterpart")
    if shifts is None:
        shifts = ShiftVectors.ones(prim.n)
    base = solve_primitives(prim)
    cf_prim = counterfactual_primitives(prim, B, shifts, mode)
    if mode is Mode.DEFAULT:
        cf = solve_primitives(cf_prim, fixed_deficits=base.E - base.Y)
    else:
        cf = solve_primitives(cf_prim)
    ref = hats_from_equilibria(base, cf)

    el = prim.elasticities
    sol = solve(base.X, B, el, shifts, SolverConfig(mode=mode, tol=tol))
    st = compute_statics(base.X, B, el, shifts, sol)

    def rel(a, b):
        return float(np.max(np.abs(np.asarray(a) - b) / np.abs(b)))

    dev = {
        "p_hat": rel(sol.p_hat, ref.p_hat),
        "P_hat": rel(sol.P_hat, ref.P_hat),
        "Y_hat": rel(st.Y_hat, ref.Y_hat),
        "E_hat": rel(st.E_hat, ref.E_hat),
        "Q_hat": rel(st.Q_hat, ref.Q_hat),
        "X_hat": rel(st.X_hat, ref.X_hat),
        "rp": rel(st.rp, ref.p_hat / ref.P_hat),
    }
    if mode is Mode.UNIVERSAL:
        dev["Xi_hat"] = rel(sol.Xi_hat, ref.Xi_hat)
        dev["xi_hat"] = rel(sol.xi_hat_effective, ref.xi_hat)
    else:
        dev["Xi_xi_hat"] = rel(sol.Xi_hat * sol.xi_hat_effective, ref.Xi_hat * ref.xi_hat)
    if st.welfare_defined:
        dev["W_hat"] = rel(st.W_hat, ref.W_hat)
        dev["rw_hat"] = rel(st.rw_hat, ref.rw_hat)
        dev["nw_hat"] = rel(st.nw_hat, ref.w_hat)
    worst = max(dev.values())
    return (worst, dev) if detail else worst


def load_primitives(path) -> Primitives:
    kv: dict = {}
    tau_rows: list = []
    in_tau = False
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.lower() == "[tau]":
                in_tau = True
                continue
            if in_tau:
                tau_rows.append([float(x) for x in line.split()])
                continue
            if "=" not in line:
                raise ValidationError(f"{path}: cannot parse line {raw.rstrip()!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            kv[key] = val
    if not tau_rows:
        raise ValidationError(f"{path}: missing [tau] block")
    tau = np.array(tau_rows, dtype=float)
    n = tau.shape[0]

    def vec(key):
        return np.array([float(x) for x in kv[key].split()]) if key in kv else np.ones(n)

    labels = tuple(kv["labels"].split()) if "labels" in kv else ()
    return Primitives(tau=tau, A=vec("A"), L=vec("L"), xi=vec("xi"), Z=vec("Z"),
                      zeta=float(kv.get("zeta", 1.0)), sigma=float(kv["sigma"]),
                      Ybar=float(kv.get("Ybar", 1.0)), labels=labels)


def dump_primitives(prim: Primitives, path) -> None:
    def fmt(v):
        return " ".join(repr(float(x)) for x in v)

    lines = [f"sigma = {prim.sigma!r}", f"zeta = {prim.zeta!r}", f"Ybar = {prim.Ybar!r}",
             "labels = " + " ".join(prim.labels)]
    lines += [f"{k} = {fmt(getattr(prim, k))}" for k in ("A", "L", "xi", "Z")]
    lines.append("[tau]")
    lines += [fmt(row) for row in prim.tau]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def random_primitives(rng: np.random.Generator, n: int, zeta: float, sigma: float,
                      unbalanced: bool = True) -> Primitives:
    """Well-behaved random primitives for tests and benchmarks."""
    tau = 1 + rng.uniform(0.1, 1.5, size=(n, n))
    np.fill_diagonal(tau, 1.0)
    return Primitives(
        tau=tau, A=rng.uniform(0.5, 2, n), L=rng.uniform(0.5, 3, n),
        xi=rng.uniform(0.8, 1.25, n) if unbalanced else np.ones(n),
        Z=rng.uniform(0.8, 1.2, n), zeta=zeta, sigma=sigma,
        Ybar=float(rng.uniform(10, 1000)), labels=LocationIndex.from_unsorted(
            [f"C{i:02d}" for i in range(n)]).labels)
