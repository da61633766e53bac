"""Core types for the counterfactual solver.

Matrices follow the exporter-in-rows, importer-in-columns convention and are
aligned to a :class:`LocationIndex`. Arrays stored on the frozen dataclasses
below are made read-only so validated objects can be shared freely.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BadElasticityError,
    ConflictingShiftersError,
    DimensionMismatchError,
    MissingValueError,
    NonPositiveShockError,
    ValidationError,
    XiWithoutUniversalError,
    ZeroMarginalError,
)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 1_000_000


def _frozen(a, ndim=None) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise DimensionMismatchError(f"expected {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class Mode(str, enum.Enum):
    DEFAULT = "default"
    UNIVERSAL = "universal"
    MULTIPLICATIVE = "multiplicative"


@dataclass(frozen=True)
class LocationIndex:
    labels: tuple

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(labels) < 2:
            raise ValidationError("need at least two locations")
        if any(lab == "" for lab in labels):
            raise ValidationError("empty location label")
        if len(set(labels)) != len(labels):
            raise ValidationError("duplicate location labels")
        if list(labels) != sorted(labels):
            raise ValidationError("labels must be sorted ascending")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_unsorted(cls, labels: Sequence[str]) -> "LocationIndex":
        return cls(tuple(sorted(set(str(x) for x in labels))))

    def __len__(self):
        return len(self.labels)

    def position(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class Marginals:
    Y: np.ndarray
    E: np.ndarray
    Ybar: float
    delta: np.ndarray
    D: np.ndarray


@dataclass(frozen=True)
class Elasticities:
    theta: float
    psi: float = 0.0

    def __post_init__(self):
        theta, psi = float(self.theta), float(self.psi)
        if not np.isfinite(theta) or theta <= 0:
            raise BadElasticityError(f"theta must be strictly positive, got {self.theta}")
        if not np.isfinite(psi) or psi < 0:
            raise BadElasticityError(f"psi must be nonnegative, got {self.psi}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "psi", psi)


@dataclass(frozen=True)
class ShiftVectors:
    """Relative changes in deficit parameters and supply shifters.

    Build instances with :meth:`build`; it fills defaults and enforces that
    an explicit ``c_hat`` is never combined with ``a_hat`` or ``l_hat``.
    """

    xi_hat: np.ndarray
    c_hat: np.ndarray
    a_hat: np.ndarray
    l_hat: np.ndarray
    c_is_explicit: bool = False

    def __post_init__(self):
        for name in ("xi_hat", "c_hat", "a_hat", "l_hat"):
            arr = _frozen(getattr(self, name), ndim=1)
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValidationError(f"{name} must be finite and strictly positive")
            object.__setattr__(self, name, arr)
        n = {self.xi_hat.size, self.c_hat.size, self.a_hat.size, self.l_hat.size}
        if len(n) != 1:
            raise DimensionMismatchError("shift vectors differ in length")
        if self.c_is_explicit:
            if np.any(self.a_hat != 1) or np.any(self.l_hat != 1):
                raise ConflictingShiftersError("c_hat cannot be combined with a_hat or l_hat")
        elif not np.allclose(self.c_hat, self.a_hat * self.l_hat, rtol=1e-15, atol=0):
            raise ValidationError("c_hat must equal a_hat * l_hat")

    @classmethod
    def build(cls, n: int, *, xi_hat=None, c_hat=None, a_hat=None, l_hat=None) -> "ShiftVectors":
        if c_hat is not None and (a_hat is not None or l_hat is not None):
            raise ConflictingShiftersError("c_hat cannot be combined with a_hat or l_hat")
        ones = np.ones(n)
        xi = ones if xi_hat is None else np.asarray(xi_hat, dtype=float)
        if c_hat is not None:
            return cls(xi, np.asarray(c_hat, dtype=float), ones, ones, c_is_explicit=True)
        a = ones if a_hat is None else np.asarray(a_hat, dtype=float)
        l = ones if l_hat is None else np.asarray(l_hat, dtype=float)
        return cls(xi, a * l, a, l, c_is_explicit=False)

    @classmethod
    def ones(cls, n: int) -> "ShiftVectors":
        return cls.build(n)

    def __len__(self):
        return self.xi_hat.size


@dataclass(frozen=True)
class SolverConfig:
    mode: Mode = Mode.DEFAULT
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    # p <- p**(1 - damping) * p_next**damping; 1 means the plain iteration
    damping: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not (self.tol > 0):
            raise ValidationError("tol must be strictly positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValidationError("max_iter must be a positive integer")
        if not (0 < self.damping <= 1):
            raise ValidationError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class Solution:
    p_hat: np.ndarray
    P_hat: np.ndarray
    Xi_hat: float
    xi_hat_effective: np.ndarray
    n_iter: int
    crit: float
    converged: bool
    mode: Mode = Mode.DEFAULT
    # Xi_hat as iterated; differs from Xi_hat only after the multiplicative reset
    Xi_hat_solved: Optional[float] = None

    def __post_init__(self):
        if self.Xi_hat_solved is None:
            object.__setattr__(self, "Xi_hat_solved", float(self.Xi_hat))


@dataclass(frozen=True)
class StaticsBundle:
    Y_hat: np.ndarray
    E_hat: np.ndarray
    Q_hat: np.ndarray
    W_hat: Optional[np.ndarray]
    rw_hat: Optional[np.ndarray]
    nw_hat: Optional[np.ndarray]
    rp: np.ndarray
    X_hat: np.ndarray
    X_prime: np.ndarray
    Y_prime: np.ndarray
    E_prime: np.ndarray
    welfare_defined: bool = field(default=True)


@dataclass(frozen=True)
class Problem:
    """A validated (X, B, elasticities, shifts, config) bundle."""

    X: np.ndarray
    B: np.ndarray
    elasticities: Elasticities
    shifts: ShiftVectors
    config: SolverConfig

    @property
    def n(self) -> int:
        return self.X.shape[0]


def check_trade_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionMismatchError(f"trade matrix must be square, got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValidationError("need at least two locations")
    if np.any(np.isnan(X)):
        raise MissingValueError("trade matrix contains missing values")
    if not np.all(np.isfinite(X)) or np.any(X < 0):
        raise ValidationError("trade flows must be finite and nonnegative")
    Y, E = X.sum(axis=1), X.sum(axis=0)
    if np.any(Y <= 0) or np.any(E <= 0):
        bad = np.flatnonzero((Y <= 0) | (E <= 0))
        raise ZeroMarginalError(f"zero income or expenditure at positions {bad.tolist()}")
    return _frozen(X)


def check_shock_matrix(B, n: int) -> np.ndarray:
    B = np.asarray(B, dtype=np.float64)
    if B.shape != (n, n):
        raise DimensionMismatchError(f"shock matrix shape {B.shape} != ({n}, {n})")
    if not np.all(np.isfinite(B)) or np.any(B <= 0):
        raise NonPositiveShockError("shock matrix entries must be finite and strictly positive")
    return _frozen(B)


def validate_inputs(X, B, elasticities: Elasticities, shifts: ShiftVectors,
                    config: SolverConfig) -> Problem:
    X = check_trade_matrix(X)
    n = X.shape[0]
    B = check_shock_matrix(B, n)
    if not isinstance(elasticities, Elasticities):
        raise BadElasticityError("elasticities must be an Elasticities instance")
    if len(shifts) != n:
        raise DimensionMismatchError(f"shift vectors have length {len(shifts)}, expected {n}")
    if config.mode is not Mode.UNIVERSAL and np.any(shifts.xi_hat != 1):
        raise XiWithoutUniversalError("xi_hat requires universal mode")
    return Problem(X, B, elasticities, shifts, config)
