"""Reachability Gramian of a stable discrete-time bilinear system.

The Gramian W is the unique PSD solution of the generalized Lyapunov
equation

    A W A^T - W + sum_j F_j W F_j^T + B B^T = 0,

which exists iff rho(A(x)A + sum_j F_j(x)F_j) < 1.  Two routes are provided:
a direct vectorized solve (the reference) and the Volterra-type series
W = W_1 + W_2 + ... where each term solves an ordinary Lyapunov equation
driven by the previous one.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numerics
from .errors import ExistenceError, StabilityError, TruncationError
from .system import existence_matrix, gramian_exists

SERIES_TOL = 1e-12
SERIES_MAX_ORDER = 200


@dataclass(frozen=True)
class GramianResult:
    W: np.ndarray
    method: str
    truncation_order: Optional[int]
    residual: float
    existence_rho: float

    def to_dict(self):
        return {
            "W": self.W.tolist(),
            "method": self.method,
            "truncation_order": self.truncation_order,
            "residual": self.residual,
            "existence_rho": self.existence_rho,
        }


def _sym(M):
    return 0.5 * (M + M.T)


def _check_existence(sys):
    ok, rho = gramian_exists(sys)
    if not ok:
        raise ExistenceError(
            f"Gramian does not exist: rho(A(x)A + sum F(x)F) = {rho:.6g} >= 1", rho=rho
        )
    return rho


def gramian_vec_solve(sys):
    """Solve (I - A(x)A - sum F_j(x)F_j) vec(W) = vec(B B^T)."""
    rho = _check_existence(sys)
    n = sys.n
    K = np.eye(n * n) - existence_matrix(sys)
    rhs = numerics.vec_stack(sys.B @ sys.B.T)
    W = _sym(numerics.unvec(numerics.solve_linear(K, rhs), n, n))
    return GramianResult(W, "vec_solve", None, lyapunov_residual(sys, W), rho)


def discrete_lyapunov_solve(A, Q):
    """Solve A X A^T - X + Q = 0 through the n^2 vectorized system."""
    A = numerics.as_matrix(A, "A")
    Q = numerics.symmetrize(Q, "Q")
    stable_rho = numerics.spectral_radius(A)
    if not stable_rho < 1.0:
        raise StabilityError(f"A is not Schur stable (rho = {stable_rho:.6g})", rho=stable_rho)
    n = A.shape[0]
    if not np.any(Q):
        return np.zeros((n, n))
    K = np.eye(n * n) - numerics.kron(A, A)
    X = numerics.unvec(numerics.solve_linear(K, numerics.vec_stack(Q)), n, n)
    return _sym(X)


def gramian_series(sys, max_order=SERIES_MAX_ORDER, tol=SERIES_TOL):
    """Sum W_1 + W_2 + ... until ||W_L|| <= tol * ||sum||.

    W_1 solves A W_1 A^T - W_1 + B B^T = 0 and, for i >= 2, W_i solves
    A W_i A^T - W_i + sum_j F_j W_{i-1} F_j^T = 0.
    """
    rho = _check_existence(sys)
    n = sys.n
    # one factorization of I - A(x)A reused for every order
    solve = numerics.factorized(np.eye(n * n) - numerics.kron(sys.A, sys.A))

    def lyap(Q):
        return _sym(numerics.unvec(solve(numerics.vec_stack(Q)), n, n))

    term = lyap(sys.B @ sys.B.T)
    total = term.copy()
    active = [Fj for Fj in sys.F if np.any(Fj)]
    order = 1
    while True:
        total_norm = numerics.spectral_norm(total)
        term_norm = numerics.spectral_norm(term)
        if term_norm <= tol * total_norm or not active:
            break
        if order >= max_order:
            raise TruncationError(
                f"series did not converge in {max_order} orders (last term norm {term_norm:.3g})",
                last_norm=term_norm,
            )
        rhs = np.zeros((n, n))
        for Fj in active:
            rhs += Fj @ term @ Fj.T
        term = lyap(rhs)
        total += term
        order += 1
    W = _sym(total)
    return GramianResult(W, "series", order, lyapunov_residual(sys, W), rho)


def lyapunov_residual(sys, W):
    """||A W A^T - W + sum F_j W F_j^T + B B^T|| / max(1, ||W||), spectral norms."""
    W = np.asarray(W, dtype=float)
    R = sys.A @ W @ sys.A.T - W + sys.B @ sys.B.T
    for Fj in sys.F:
        R = R + Fj @ W @ Fj.T
    return numerics.spectral_norm(R) / max(1.0, numerics.spectral_norm(W))


def linear_gramian_k_step(A, B, K):
    """K-step linear Gramian sum_{k<K} A^k B B^T (A^T)^k."""
    if K < 1:
        raise ValueError("K must be >= 1")
    A = numerics.as_matrix(A, "A")
    B = numerics.as_matrix(B, "B")
    W = np.zeros((A.shape[0], A.shape[0]))
    AkB = B
    for _ in range(K):
        W += AkB @ AkB.T
        AkB = A @ AkB
    return _sym(W)


def linear_gramian(A, B):
    """Infinite-horizon linear Gramian W_1."""
    B = numerics.as_matrix(B, "B")
    return discrete_lyapunov_solve(A, B @ B.T)


def compute_gramian(sys, method="vec_solve", max_order=SERIES_MAX_ORDER, tol=SERIES_TOL):
    if method in ("vec", "vec_solve"):
        return gramian_vec_solve(sys)
    if method == "series":
        return gramian_series(sys, max_order=max_order, tol=tol)
    raise ValueError(f"unknown Gramian method {method!r}")
