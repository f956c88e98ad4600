"""Discrete-time bilinear control systems.

    x(k+1) = A x(k) + sum_j (F_j x(k) + B_j) u_j(k)
"""

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from . import numerics
from .errors import DivergenceError, ShapeError

DIVERGENCE_NORM = 1e12
KERNEL_RTOL = 1e-9


@dataclass(frozen=True)
class BilinearSystem:
    """The triple (A, F, B).

    ``F`` is a tuple of ``m`` n-by-n matrices and ``B`` is n-by-m; column
    ``j`` of ``B`` and ``F[j]`` share the input ``u_j``.
    """

    A: np.ndarray
    F: tuple
    B: np.ndarray

    def __post_init__(self):
        A = numerics.as_matrix(self.A, "A")
        if A.shape[0] != A.shape[1]:
            raise ShapeError(f"A must be square, got {A.shape}")
        n = A.shape[0]
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(n, -1) if B.size % n == 0 and B.size else B.reshape(-1, 1)
        B = numerics.as_matrix(B, "B")
        if B.shape[0] != n:
            raise ShapeError(f"B must have {n} rows, got {B.shape}")
        m = B.shape[1]
        F = tuple(numerics.as_matrix(Fj, f"F[{j}]") for j, Fj in enumerate(self.F))
        if len(F) != m:
            raise ShapeError(f"expected {m} bilinear matrices (one per column of B), got {len(F)}")
        for j, Fj in enumerate(F):
            if Fj.shape != (n, n):
                raise ShapeError(f"F[{j}] must be {n}x{n}, got {Fj.shape}")
        for arr in (A, B, *F):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "F", F)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def is_linear(self):
        return not any(np.any(Fj) for Fj in self.F)

    @classmethod
    def linear(cls, A, B):
        A = np.asarray(A, dtype=float)
        B = numerics.as_matrix(B, "B")
        n = A.shape[0]
        return cls(A, tuple(np.zeros((n, n)) for _ in range(B.shape[1])), B)

    def with_linear_part(self):
        """Same (A, B) with every F_j set to zero."""
        return BilinearSystem.linear(self.A, self.B)


@dataclass(frozen=True)
class GeneralBilinearSystem:
    """x(k+1) = A x + sum_{j<p} Fbar_j x v_j + Bbar w, with separate input families."""

    A: np.ndarray
    Fbar: tuple
    Bbar: np.ndarray

    def __post_init__(self):
        A = numerics.as_matrix(self.A, "A")
        n = A.shape[0]
        Bbar = np.asarray(self.Bbar, dtype=float)
        if Bbar.size == 0:
            Bbar = np.zeros((n, 0))
        elif Bbar.ndim == 1:
            Bbar = Bbar.reshape(-1, 1)
        if Bbar.ndim != 2 or Bbar.shape[0] != n:
            raise ShapeError(f"Bbar must have {n} rows, got {Bbar.shape}")
        Fbar = tuple(numerics.as_matrix(Fj, f"Fbar[{j}]") for j, Fj in enumerate(self.Fbar))
        for j, Fj in enumerate(Fbar):
            if Fj.shape != (n, n):
                raise ShapeError(f"Fbar[{j}] must be {n}x{n}, got {Fj.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Bbar", Bbar)
        object.__setattr__(self, "Fbar", Fbar)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return len(self.Fbar)

    @property
    def q(self):
        return self.Bbar.shape[1]

    def step(self, x, v, w):
        x = np.asarray(x, dtype=float)
        out = self.A @ x + self.Bbar @ np.asarray(w, dtype=float).reshape(self.q)
        for Fj, vj in zip(self.Fbar, np.asarray(v, dtype=float).reshape(self.p)):
            out = out + (Fj @ x) * vj
        return out


def canonicalize(g):
    """Rewrite a general system with inputs u = [v; w] in the (A, F, B) form."""
    n, p, q = g.n, g.p, g.q
    if p + q == 0:
        raise ShapeError("system has no inputs")
    F = list(g.Fbar) + [np.zeros((n, n)) for _ in range(q)]
    B = np.hstack([np.zeros((n, p)), g.Bbar])
    return BilinearSystem(g.A, tuple(F), B)


@dataclass
class Trajectory:
    states: np.ndarray  # (K+1, n)
    inputs: np.ndarray  # (K, m)
    cumulative_energy: np.ndarray = field(default=None)  # (K,), entry k = sum_{i<=k} |u(i)|^2

    @property
    def K(self):
        return self.inputs.shape[0]

    @property
    def final_state(self):
        return self.states[-1]


def _as_vector(x, size, name):
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size != size:
        raise ShapeError(f"{name} must have length {size}, got {arr.size}")
    return arr


def step(sys, x, u):
    x = _as_vector(x, sys.n, "x")
    u = _as_vector(u, sys.m, "u")
    out = sys.A @ x + sys.B @ u
    for Fj, uj in zip(sys.F, u):
        if uj != 0.0:
            out = out + (Fj @ x) * uj
    return out


def simulate(sys, u_seq, x0=None):
    """Iterate :func:`step` over ``u_seq`` (K rows of m inputs).

    ``cumulative_energy[k]`` is the energy spent by inputs ``u(0..k)``,
    i.e. the energy paired with state ``x(k+1)``.
    """
    x = np.zeros(sys.n) if x0 is None else _as_vector(x0, sys.n, "x0")
    U = np.asarray(u_seq, dtype=float)
    if U.size == 0:
        U = np.zeros((0, sys.m))
    elif U.ndim == 1:
        U = U.reshape(-1, sys.m) if sys.m > 1 else U.reshape(-1, 1)
    if U.shape[1] != sys.m:
        raise ShapeError(f"inputs must have {sys.m} columns, got {U.shape[1]}")
    states = np.empty((U.shape[0] + 1, sys.n))
    states[0] = x
    for k, u in enumerate(U):
        x = step(sys, x, u)
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > DIVERGENCE_NORM:
            raise DivergenceError(f"state diverged at step {k + 1}", index=k + 1)
        states[k + 1] = x
    energy = np.cumsum(np.sum(U * U, axis=1)) if U.shape[0] else np.zeros(0)
    return Trajectory(states, U, energy)


def schur_stable(A):
    """Return ``(stable, rho)`` with stable iff rho(A) < 1 strictly."""
    rho = numerics.spectral_radius(A)
    return rho < 1.0, rho


def existence_matrix(sys):
    K = numerics.kron(sys.A, sys.A)
    for Fj in sys.F:
        if np.any(Fj):
            K = K + numerics.kron(Fj, Fj)
    return K


def gramian_exists(sys):
    """Return ``(exists, rho)`` for rho(A(x)A + sum_j F_j(x)F_j) < 1."""
    rho = numerics.spectral_radius(existence_matrix(sys))
    return rho < 1.0, rho


def kernel_basis(W, tol=KERNEL_RTOL):
    """Orthonormal eigenvectors of W with eigenvalue <= tol * lambda_max(W)."""
    res = numerics.sym_eig(W)
    scale = max(abs(res.max), 0.0)
    mask = res.eigenvalues <= tol * scale if scale > 0 else np.ones(res.eigenvalues.size, bool)
    return res.eigenvectors[:, mask]


def image_invariance_check(sys, W, tol=KERNEL_RTOL):
    """Check that Ker(W) is mapped into Ker(W) by A^T and every F_j^T, and B^T kills it.

    Equivalent to Im(W) being invariant under the dynamics for every input.
    """
    N = kernel_basis(W, tol)
    if N.shape[1] == 0:
        return True
    P_out = np.eye(sys.n) - N @ N.T  # projector onto Im(W)
    scale = max(1.0, numerics.spectral_norm(sys.A), *(numerics.spectral_norm(F) for F in sys.F))
    atol = tol * scale
    for v in N.T:
        if np.linalg.norm(P_out @ (sys.A.T @ v)) > atol:
            return False
        if any(np.linalg.norm(P_out @ (Fj.T @ v)) > atol for Fj in sys.F):
            return False
        if np.linalg.norm(sys.B.T @ v) > tol * max(1.0, numerics.spectral_norm(sys.B)):
            return False
    return True


def kernel_component(W, x, tol=KERNEL_RTOL):
    """Norm of the component of ``x`` lying in Ker(W)."""
    N = kernel_basis(W, tol)
    if N.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(N.T @ np.asarray(x, dtype=float)))


def stack_inputs(v_seq, w_seq):
    """Interleave general-form inputs into canonical rows u(k) = [v(k); w(k)]."""
    return np.hstack([np.atleast_2d(np.asarray(v_seq, float)), np.atleast_2d(np.asarray(w_seq, float))])


def random_system(rng, n, m, rho_target=0.9, linear=False):
    """Random system rescaled so that the existence spectral radius equals ``rho_target``."""
    A = rng.standard_normal((n, n))
    F = [np.zeros((n, n)) if linear else rng.standard_normal((n, n)) for _ in range(m)]
    B = rng.standard_normal((n, m))
    sys = BilinearSystem(A, tuple(F), B)
    _, rho = gramian_exists(sys)
    # rho(A(x)A + sum F(x)F) is homogeneous of degree 2 in (A, F)
    scale = np.sqrt(rho_target / rho)
    return BilinearSystem(A * scale, tuple(Fj * scale for Fj in F), B)
