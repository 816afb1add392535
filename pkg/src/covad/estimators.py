"""Coordinate-wise descent for the ML, MMV and NNLS activity-detection costs.

All three estimators share one loop: pick a user k, compute the optimal
step ``d`` along ``e_k`` in closed form, clamp it so ``gamma_k`` stays
nonnegative, then apply the rank-1 change ``Sigma += d a_k a_k^H`` and
the matching Sherman-Morrison update of ``Sigma^{-1}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .model import ConfigError, hermitize


class EstimatorKind(str, Enum):
    ML = "ml"
    MMV = "mmv"
    NNLS = "nnls"

    @classmethod
    def parse(cls, value) -> "EstimatorKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigError(f"unknown estimator kind {value!r}") from None


class CoordinateOrder(str, Enum):
    RANDOM = "random_permutation_per_sweep"
    CYCLIC = "cyclic"


class NumericalFault(ArithmeticError):
    """The rank-1 update would destroy positive definiteness."""


# Sherman-Morrison denominators below this are treated as a breakdown.
DENOM_FLOOR = 1e-12
ROUNDOFF = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class SolverOptions:
    estimator_kind: EstimatorKind = EstimatorKind.ML
    max_sweeps: int = 1000
    tol: float | None = None  # None means 1e-6 * sigma2
    coordinate_order: CoordinateOrder = CoordinateOrder.RANDOM
    rho: float | None = None  # MMV regularizer, None means sigma2
    reinversion_period: int = 1
    seed: int = 0  # drives the random coordinate order

    def __post_init__(self):
        object.__setattr__(self, "estimator_kind", EstimatorKind.parse(self.estimator_kind))
        try:
            object.__setattr__(self, "coordinate_order", CoordinateOrder(self.coordinate_order))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be >= 1")
        if self.tol is not None and self.tol < 0:
            raise ConfigError("tol must be nonnegative")
        if self.rho is not None and not self.rho > 0:
            raise ConfigError("rho must be positive")
        if self.reinversion_period < 1:
            raise ConfigError("reinversion_period must be >= 1")

    @property
    def kind(self) -> EstimatorKind:
        return self.estimator_kind

    def resolved(self, sigma2: float) -> "SolverOptions":
        """Fill the sigma2-dependent defaults."""
        return replace(
            self,
            tol=1e-6 * sigma2 if self.tol is None else self.tol,
            rho=sigma2 if self.rho is None else self.rho,
        )

    def base(self, sigma2: float) -> float:
        """Diagonal loading of Sigma: rho for MMV, sigma2 otherwise."""
        if self.estimator_kind is EstimatorKind.MMV:
            return sigma2 if self.rho is None else self.rho
        return sigma2

    def to_dict(self) -> dict:
        return {
            "estimator_kind": self.estimator_kind.value,
            "max_sweeps": self.max_sweeps,
            "tol": self.tol,
            "coordinate_order": self.coordinate_order.value,
            "rho": self.rho,
            "reinversion_period": self.reinversion_period,
            "seed": self.seed,
        }


# --------------------------------------------------------------------------
# cost functions


def _model_cov(gamma, A, base):
    S = (A * np.asarray(gamma, dtype=float)) @ A.conj().T
    S[np.diag_indices_from(S)] += base
    return hermitize(S)


def _logdet_and_trace(S, sigma_hat):
    L = np.linalg.cholesky(S)
    logdet = 2.0 * np.sum(np.log(np.real(np.diag(L))))
    X = np.linalg.solve(L, sigma_hat)
    tr = np.real(np.trace(np.linalg.solve(L.conj().T, X)))
    return logdet, tr


def ml_cost(gamma, A, sigma2: float, sigma_hat) -> float:
    """log|A G A^H + s2 I| + tr((A G A^H + s2 I)^{-1} Sigma_hat)."""
    try:
        logdet, tr = _logdet_and_trace(_model_cov(gamma, A, sigma2), sigma_hat)
    except np.linalg.LinAlgError:
        raise NumericalFault("model covariance is not positive definite") from None
    return float(logdet + tr)


def mmv_cost(gamma, A, rho: float, sigma_hat) -> float:
    """tr(G) + tr((A G A^H + rho I)^{-1} Sigma_hat)."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    try:
        _, tr = _logdet_and_trace(_model_cov(gamma, A, rho), sigma_hat)
    except np.linalg.LinAlgError:
        raise NumericalFault("model covariance is not positive definite") from None
    return float(np.sum(gamma) + tr)


def nnls_cost(gamma, A, sigma2: float, sigma_hat) -> float:
    """||Sigma_hat - A G A^H - s2 I||_F^2."""
    R = sigma_hat - _model_cov(gamma, A, sigma2)
    return float(np.sum(np.abs(R) ** 2))


def cost(kind, gamma, A, sigma2: float, sigma_hat, rho: float | None = None) -> float:
    kind = EstimatorKind.parse(kind)
    if kind is EstimatorKind.ML:
        return ml_cost(gamma, A, sigma2, sigma_hat)
    if kind is EstimatorKind.MMV:
        return mmv_cost(gamma, A, sigma2 if rho is None else rho, sigma_hat)
    return nnls_cost(gamma, A, sigma2, sigma_hat)


# --------------------------------------------------------------------------
# state and single-coordinate update


def rank1_update_inverse(Sigma_inv, a, d: float, u=None):
    """Sherman-Morrison: inverse of ``Sigma + d a a^H`` from ``Sigma^{-1}``.

    ``u = Sigma_inv @ a`` may be passed when already available.
    """
    if d == 0:
        return Sigma_inv
    if u is None:
        u = Sigma_inv @ a
    denom = 1.0 + d * np.real(np.vdot(a, u))
    if denom <= DENOM_FLOOR:
        raise NumericalFault(f"Sherman-Morrison denominator {denom:.3e} is not positive")
    return Sigma_inv - (d / denom) * np.outer(u, u.conj())


@dataclass
class EstimatorState:
    """Iterate of the coordinate descent plus the maintained model covariance.

    ``Sigma = A diag(gamma_hat) A^H + base I`` and ``Sigma_inv`` is kept in
    step with it through rank-1 updates; ``cost`` is updated in closed form
    after every coordinate step.
    """

    gamma_hat: np.ndarray
    Sigma: np.ndarray
    Sigma_inv: np.ndarray
    base: float
    cost: float = float("nan")
    sweep_count: int = 0
    updates: int = 0
    refreshes: int = 0

    @classmethod
    def initial(cls, A, sigma_hat, kind, sigma2: float, rho=None, gamma0=None):
        kind = EstimatorKind.parse(kind)
        base = rho if (kind is EstimatorKind.MMV and rho is not None) else sigma2
        K = A.shape[1]
        gamma = np.zeros(K) if gamma0 is None else np.array(gamma0, dtype=float)
        if gamma.shape != (K,) or np.any(gamma < 0):
            raise ValueError("warm start must be a nonnegative vector of length K_c")
        state = cls(gamma, np.empty(0), np.empty(0), base)
        state.refresh(A)
        state.cost = cost(kind, gamma, A, sigma2, sigma_hat, rho=base)
        return state

    def refresh(self, A) -> None:
        """Recompute Sigma and Sigma_inv from gamma_hat."""
        self.Sigma = _model_cov(self.gamma_hat, A, self.base)
        self.Sigma_inv = hermitize(np.linalg.inv(self.Sigma))
        self.refreshes += 1

    def inverse_residual(self) -> float:
        """||Sigma Sigma_inv - I||_F."""
        n = self.Sigma.shape[0]
        return float(np.linalg.norm(self.Sigma @ self.Sigma_inv - np.eye(n)))


def _snap(num, scale):
    # numerators within round-off of zero come from exact cancellation
    return 0.0 if abs(num) <= ROUNDOFF * scale else num


def closed_form_step(kind, state: EstimatorState, a, sigma_hat):
    """Unclamped optimal step along e_k together with its ingredients.

    Returns ``(d, u, p, q)`` with ``u = Sigma^{-1} a``, ``p = a^H u`` and
    ``q = u^H Sigma_hat u`` for ML/MMV, or ``q = a^H (Sigma_hat - Sigma) a``
    for NNLS.
    """
    u = state.Sigma_inv @ a
    p = np.real(np.vdot(a, u))
    if kind is EstimatorKind.NNLS:
        t_hat = np.real(np.vdot(a, sigma_hat @ a))
        t_mod = np.real(np.vdot(a, state.Sigma @ a))
        r = _snap(t_hat - t_mod, max(abs(t_hat), abs(t_mod)))
        a2 = np.real(np.vdot(a, a))
        return r / (a2 * a2), u, p, r
    q = np.real(np.vdot(u, sigma_hat @ u))
    if kind is EstimatorKind.ML:
        return _snap(q - p, max(abs(q), p)) / (p * p), u, p, q
    root = np.sqrt(max(q, 0.0))
    return _snap(root - 1.0, max(root, 1.0)) / p, u, p, q


def _cost_change(kind, d, p, q, a):
    """Exact change of the objective for a step d along e_k."""
    if kind is EstimatorKind.NNLS:
        a2 = np.real(np.vdot(a, a))
        return -2.0 * d * q + d * d * a2 * a2
    t = 1.0 + d * p
    delta = -q * d / t
    if kind is EstimatorKind.ML:
        return delta + np.log(t)
    return delta + d


def coord_update(state: EstimatorState, k: int, A, sigma_hat, opts: SolverOptions):
    """Minimize the objective along coordinate k in place.

    Returns ``(d_star, state)``.  A breakdown of the Sherman-Morrison
    denominator falls back to a full re-inversion.
    """
    kind = opts.estimator_kind
    a = A[:, k]
    d, u, p, q = closed_form_step(kind, state, a, sigma_hat)
    gk = state.gamma_hat[k]
    if d <= -gk:
        d = -gk
    if d == 0:
        return 0.0, state
    state.cost += _cost_change(kind, d, p, q, a)
    state.gamma_hat[k] = 0.0 if d == -gk else gk + d
    state.Sigma += d * np.outer(a, a.conj())
    try:
        state.Sigma_inv = rank1_update_inverse(state.Sigma_inv, a, d, u=u)
    except NumericalFault:
        state.refresh(A)
    state.updates += 1
    return float(d), state


# --------------------------------------------------------------------------
# driver


@dataclass
class Diagnostics:
    kind: EstimatorKind
    cost_trace: list = field(default_factory=list)  # cost after each sweep
    max_step_trace: list = field(default_factory=list)
    final_cost: float = float("nan")
    sweeps: int = 0
    converged: bool = False
    updates: int = 0
    gamma_hat: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "converged": self.converged,
            "sweeps": self.sweeps,
            "updates": self.updates,
            "final_cost": self.final_cost,
            "cost_trace": [float(c) for c in self.cost_trace],
            "max_step_trace": [float(c) for c in self.max_step_trace],
            "gamma_hat": None if self.gamma_hat is None else [float(g) for g in self.gamma_hat],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def run_coordinate_descent(
    sigma_hat,
    A,
    sigma2: float,
    opts: SolverOptions = SolverOptions(),
    gamma0=None,
    callback=None,
):
    """Estimate the activity pattern from the sample covariance.

    Sweeps over all users until the largest step of a sweep drops below
    ``opts.tol`` or ``opts.max_sweeps`` is reached.  ``callback(state, k, d)``
    is called after every coordinate step.  Returns ``(gamma_hat, diagnostics)``;
    non-convergence is reported through ``diagnostics.converged``.
    """
    sigma_hat = np.asarray(sigma_hat)
    D, K = A.shape
    if sigma_hat.shape != (D, D):
        raise ValueError(f"sigma_hat has shape {sigma_hat.shape}, expected {(D, D)}")
    opts = opts.resolved(sigma2)
    kind = opts.estimator_kind
    state = EstimatorState.initial(A, sigma_hat, kind, sigma2, rho=opts.rho, gamma0=gamma0)
    rng = np.random.default_rng(opts.seed)
    diag = Diagnostics(kind)
    order = np.arange(K)
    for sweep in range(opts.max_sweeps):
        if opts.coordinate_order is CoordinateOrder.RANDOM:
            order = rng.permutation(K)
        max_step = 0.0
        for k in order:
            d, _ = coord_update(state, k, A, sigma_hat, opts)
            if callback is not None:
                callback(state, k, d)
            max_step = max(max_step, abs(d))
        state.sweep_count = sweep + 1
        if state.sweep_count % opts.reinversion_period == 0:
            state.refresh(A)
        # exact cost once per sweep; the running value only drifts by round-off
        state.cost = cost(kind, state.gamma_hat, A, sigma2, sigma_hat, rho=opts.rho)
        diag.cost_trace.append(state.cost)
        diag.max_step_trace.append(max_step)
        if max_step < opts.tol:
            diag.converged = True
            break
    diag.sweeps = state.sweep_count
    diag.final_cost = state.cost
    diag.updates = state.updates
    diag.gamma_hat = state.gamma_hat.copy()
    return diag.gamma_hat, diag


def write_gamma_csv(path, gamma_hat) -> None:
    with open(path, "w") as fh:
        fh.write("index,value\n")
        for i, g in enumerate(np.asarray(gamma_hat, dtype=float)):
            fh.write(f"{i},{g:.17g}\n")
