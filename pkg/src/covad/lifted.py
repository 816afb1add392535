"""Lifted (vectorized) NNLS formulation, reference solvers and recovery-bound evaluators.

``vec`` stacks columns (column-major), so ``vec(S)[i + D*j] == S[i, j]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def vec(S: np.ndarray) -> np.ndarray:
    return np.asarray(S).reshape(-1, order="F")


def unvec(v: np.ndarray, D: int) -> np.ndarray:
    return np.asarray(v).reshape((D, D), order="F")


def build_lifted_matrix(A: np.ndarray) -> np.ndarray:
    """``(D_c^2, K_c)`` matrix whose column k is vec(a_k a_k^H)."""
    D, K = A.shape
    # outer[i, j, k] = a_{i,k} conj(a_{j,k}); column-major vec puts i fastest
    outer = A[:, None, :] * A.conj()[None, :, :]
    return outer.reshape(D * D, K, order="F")


def nnls_cost_vectorized(gamma, lifted, sigma2: float, sigma_hat) -> float:
    """||vec(Sigma_hat) - L gamma - sigma2 vec(I)||^2."""
    D = int(round(math.sqrt(lifted.shape[0])))
    r = vec(sigma_hat) - lifted @ np.asarray(gamma, dtype=float) - sigma2 * vec(np.eye(D))
    return float(np.vdot(r, r).real)


def complex_rank(M: np.ndarray, rel_tol: float = 1e-8) -> int:
    """Number of singular values above ``rel_tol * sigma_max``."""
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def generic_lifted_rank(D_c: int, K_c: int) -> int:
    """Rank of the lifted matrix for generic unit-modulus pilots.

    The D_c diagonal rows are all ones, leaving D_c(D_c - 1) + 1 degrees of freedom.
    """
    return min(K_c, D_c * (D_c - 1) + 1)


@dataclass
class OracleResult:
    x: np.ndarray
    iterations: int
    converged: bool
    residual: float  # norm of the gradient mapping at exit


def _to_real(L: np.ndarray, b: np.ndarray):
    # gamma is real, so min ||b - L gamma|| is a real least-squares problem
    return np.vstack([L.real, L.imag]), np.concatenate([b.real, b.imag])


def nnls_oracle(sigma_hat_vec, lifted, sigma2: float, iters: int = 200_000, tol: float = 1e-10):
    """Accelerated projected gradient for min_{gamma >= 0} ||sigma_hat_vec - L gamma - s2 vec(I)||^2.

    Fixed step 1/Lip with Lip = ||L||_2^2; the gradient mapping norm
    ``Lip * ||x - P(x - grad/Lip)||`` certifies optimality.
    """
    D = int(round(math.sqrt(lifted.shape[0])))
    b = np.asarray(sigma_hat_vec) - sigma2 * vec(np.eye(D))
    Lr, br = _to_real(lifted, b)
    G = Lr.T @ Lr
    c = Lr.T @ br
    lip = np.linalg.norm(lifted, 2) ** 2
    K = lifted.shape[1]
    x = np.zeros(K)
    y = x.copy()
    t = 1.0
    res = np.inf
    for it in range(1, iters + 1):
        grad_y = G @ y - c
        x_new = np.maximum(y - grad_y / lip, 0.0)
        # gradient mapping at the current iterate, used as the stopping certificate
        gm = lip * np.linalg.norm(x_new - y)
        # restart momentum when it points uphill
        if np.dot(y - x_new, x_new - x) > 0:
            t = 1.0
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
        if gm <= tol:
            res = float(np.linalg.norm(lip * (x - np.maximum(x - (G @ x - c) / lip, 0.0))))
            if res <= tol * 10:
                return OracleResult(x, it, True, res)
    res = float(np.linalg.norm(lip * (x - np.maximum(x - (G @ x - c) / lip, 0.0))))
    return OracleResult(x, iters, res <= tol * 10, res)


def group_shrink(V: np.ndarray, thresh: float) -> np.ndarray:
    """Row-wise soft thresholding, the prox of ``thresh * ||.||_{2,1}``."""
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    scale = np.maximum(1.0 - thresh / np.maximum(norms, 1e-300), 0.0)
    return V * scale


@dataclass
class GroupLassoResult:
    X: np.ndarray
    gamma: np.ndarray  # row norms of X divided by sqrt(M)
    iterations: int
    converged: bool
    residual: float


def l21_group_lasso_oracle(Y, A, rho: float, iters: int = 100_000, tol: float = 1e-10):
    """Solve min_X 0.5 ||A X - Y||_F^2 + rho sqrt(M) ||X||_{2,1} by accelerated proximal gradient.

    Returns the minimizer and ``||X_{i,:}|| / sqrt(M)`` per row.  Stops when the
    gradient mapping norm relative to ``||A^H Y||_F`` falls below ``tol``.
    """
    Y = np.asarray(Y)
    M = Y.shape[1]
    lam = rho * math.sqrt(M)
    lip = np.linalg.norm(A, 2) ** 2
    AhA = A.conj().T @ A
    AhY = A.conj().T @ Y
    scale = max(np.linalg.norm(AhY), 1e-300)
    X = np.zeros((A.shape[1], M), dtype=complex)
    Z = X.copy()
    t = 1.0
    res = np.inf
    converged = False
    it = 0
    for it in range(1, iters + 1):
        grad = AhA @ Z - AhY
        X_new = group_shrink(Z - grad / lip, lam / lip)
        gm = lip * np.linalg.norm(X_new - Z) / scale
        if np.real(np.vdot(Z - X_new, X_new - X)) > 0:
            t = 1.0
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        Z = X_new + ((t - 1.0) / t_new) * (X_new - X)
        X, t = X_new, t_new
        if gm <= tol:
            P = group_shrink(X - (AhA @ X - AhY) / lip, lam / lip)
            res = float(lip * np.linalg.norm(X - P) / scale)
            if res <= 10 * tol:
                converged = True
                break
    else:
        P = group_shrink(X - (AhA @ X - AhY) / lip, lam / lip)
        res = float(lip * np.linalg.norm(X - P) / scale)
        converged = res <= 10 * tol
    gamma = np.linalg.norm(X, axis=1) / math.sqrt(M)
    return GroupLassoResult(X, gamma, it, converged, res)


# --------------------------------------------------------------------------
# recovery guarantee for NNLS


RIP_DELTA_MAX = 4.0 / math.sqrt(41.0)


@dataclass(frozen=True)
class TheoremParams:
    """RIP level ``delta`` and the unspecified absolute constants ``c_prime`` and ``lambda_const``.

    ``s`` is the sparsity order of the guarantee.  The derived null-space
    constants follow the standard RIP-to-NSP conversion.
    """

    delta: float = 0.5
    c_prime: float = 1.0
    s: int = 1
    lambda_const: float = 1.0

    def __post_init__(self):
        if not 0 < self.delta < RIP_DELTA_MAX:
            raise ValueError(f"delta must lie in (0, 4/sqrt(41)), got {self.delta}")
        if self.c_prime <= 0 or self.lambda_const <= 0:
            raise ValueError("c_prime and lambda_const must be positive")
        if self.s < 1:
            raise ValueError("sparsity s must be >= 1")

    @property
    def _den(self) -> float:
        return math.sqrt(1.0 - self.delta**2) - self.delta / 4.0

    @property
    def rho(self) -> float:
        return self.delta / self._den

    @property
    def tau_prime(self) -> float:
        return math.sqrt(1.0 + self.delta) / self._den

    @property
    def C(self) -> float:
        return (1.0 + self.rho) ** 2 / (1.0 - self.rho)

    @property
    def D(self) -> float:
        return (3.0 + self.rho) / (1.0 - self.rho)

    def delta_admissible(self, K_c: int) -> bool:
        """Whether delta lies in [8/K_c, 4/sqrt(41))."""
        return 8.0 / K_c <= self.delta < RIP_DELTA_MAX

    def constants(self) -> dict:
        return {"rho": self.rho, "tau_prime": self.tau_prime, "C": self.C, "D": self.D}


def scaling_law_check(D_c: int, K_c: int, s: int, params: TheoremParams):
    """Sampling condition D_c(D_c-1) >= c' delta^-2 s log^2(e K_c / s).

    Returns ``(satisfied, lhs, rhs)``.
    """
    lhs = D_c * (D_c - 1)
    rhs = params.c_prime * params.delta**-2 * s * math.log(math.e * K_c / s) ** 2
    return lhs >= rhs, int(lhs), float(rhs)


def best_s_term_tail(gamma, s: int) -> float:
    """l1 norm of ``gamma`` after removing its s largest-magnitude entries."""
    mags = np.sort(np.abs(np.asarray(gamma, dtype=float)))
    return float(np.sum(mags[: max(mags.size - s, 0)]))


def error_bound_rhs(gamma_true, d_norm: float, p: float, params: TheoremParams, D_c: int) -> float:
    """Right-hand side of the l_p recovery guarantee for NNLS, 1 <= p <= 2."""
    if not 1 <= p <= 2:
        raise ValueError("p must lie in [1, 2]")
    if D_c <= 1:
        raise ValueError("D_c must exceed 1")
    s = params.s
    tail = best_s_term_tail(gamma_true, s)
    noise_gain = 1.0 + params.lambda_const * params.tau_prime * math.sqrt(D_c) / math.sqrt(D_c - 1)
    return (
        2.0 * params.C / s ** (1.0 - 1.0 / p) * tail
        + 2.0 * params.D / s ** (0.5 - 1.0 / p) * noise_gain * d_norm / D_c
    )


def covariance_error_prediction(Sigma_y, M: int) -> float:
    """Predicted ||Sigma_hat - Sigma_y||_F for M Gaussian samples: tr(Sigma_y)/sqrt(M)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return float(np.real(np.trace(Sigma_y)) / math.sqrt(M))


def theory_report(D_c: int, K_c: int, s: int, params: TheoremParams) -> list[str]:
    """``key=value`` lines describing the sampling condition and derived constants."""
    ok, lhs, rhs = scaling_law_check(D_c, K_c, s, params)
    lines = [
        f"D_c={D_c}",
        f"K_c={K_c}",
        f"s={s}",
        f"delta={params.delta!r}",
        f"c_prime={params.c_prime!r}",
        f"lambda={params.lambda_const!r}",
        f"delta_admissible={str(params.delta_admissible(K_c)).lower()}",
        f"lhs={lhs!r}",
        f"rhs={rhs!r}",
        f"satisfied={str(ok).lower()}",
    ]
    lines += [f"{k}={v!r}" for k, v in params.constants().items()]
    lines.append(f"generic_lifted_rank={generic_lifted_rank(D_c, K_c)}")
    return lines
