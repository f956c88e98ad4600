"""Gramian-based lower bounds on the input energy of a bilinear system.

With V(x) = x^T W^{-1} x, every step with ||u(k)||_inf below the cap
satisfies V(x(k+1)) - V(x(k)) <= u(k)^T u(k), so starting from the origin
the energy spent up to step K is at least x(K)^T W^{-1} x(K).
"""

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np
import scipy.linalg

from . import numerics
from .errors import DiscriminantError, RankDeficiencyError, SingularMatrixError
from .gramian import gramian_vec_solve
from .system import BilinearSystem, simulate

RANK_RTOL = 1e-12
SLACK_RTOL = 1e-9


class _PDFactor:
    """Cholesky factor of W reused for every W^{-1} product."""

    def __init__(self, W):
        W = numerics.symmetrize(W, "W")
        ev = np.linalg.eigvalsh(W)
        if not ev[-1] > 0 or ev[0] <= RANK_RTOL * ev[-1]:
            raise RankDeficiencyError(
                f"Gramian is (numerically) singular: lambda_min = {ev[0]:.3g}, "
                f"lambda_max = {ev[-1]:.3g}; see image_invariance_check"
            )
        self.W = W
        self.cho = scipy.linalg.cho_factor(W, lower=True, check_finite=False)

    def solve(self, X):
        return scipy.linalg.cho_solve(self.cho, X, check_finite=False)

    def inverse(self):
        Wi = self.solve(np.eye(self.W.shape[0]))
        return 0.5 * (Wi + Wi.T)


@dataclass
class EnergyBound:
    Psi: np.ndarray
    beta: float
    input_cap: float
    G_negdef: bool
    G_lambda_max: float
    cross_norm_sum: float
    linear_norm_sum: float

    def to_dict(self, emit_psi=False):
        out = {
            "beta": self.beta,
            "input_cap": self.input_cap,
            "G_negdef": self.G_negdef,
            "G_lambda_max": self.G_lambda_max,
            "cross_norm_sum": self.cross_norm_sum,
            "linear_norm_sum": self.linear_norm_sum,
        }
        if emit_psi:
            out["Psi"] = self.Psi.tolist()
        return out


def compute_psi(sys, W, _factor=None):
    """Psi = W^{-1} - W^{-1} B (B^T W^{-1} B - I)^{-1} B^T W^{-1}."""
    fac = _factor or _PDFactor(W)
    Wi = fac.inverse()
    if not np.any(sys.B):
        return Wi
    WiB = fac.solve(sys.B)
    Phi22 = sys.B.T @ WiB - np.eye(sys.m)
    try:
        middle = numerics.solve_linear(Phi22, WiB.T)
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            f"B^T W^-1 B - I is singular: {exc}", cond=exc.cond
        ) from exc
    Psi = Wi - WiB @ middle
    return 0.5 * (Psi + Psi.T)


def gap_matrix(sys, W, Psi, _factor=None):
    """G = A^T Psi A - W^{-1}."""
    fac = _factor or _PDFactor(W)
    G = sys.A.T @ Psi @ sys.A - fac.inverse()
    return 0.5 * (G + G.T)


def gap_matrix_negdef(sys, W, Psi, _factor=None):
    """Return ``(negative_definite, lambda_max(G))``."""
    lam = numerics.lambda_max(gap_matrix(sys, W, Psi, _factor))
    return lam < 0.0, lam


def _norm_sums(sys, Psi):
    s = sum(
        numerics.spectral_norm(sys.A.T @ Psi @ Fj + Fj.T @ Psi @ sys.A) for Fj in sys.F
    )
    c = sum(numerics.spectral_norm(Fj.T @ Psi @ Fi) for Fj in sys.F for Fi in sys.F)
    return float(s), float(c)


def compute_beta(sys, W, Psi, _factor=None):
    """beta = -s + sqrt(s^2 - 4 c lambda_max(A^T Psi A - W^{-1})).

    ``s`` sums ||A^T Psi F_j + F_j^T Psi A|| over j and ``c`` sums
    ||F_j^T Psi F_i|| over all (i, j).  Raises :class:`DiscriminantError`
    when the square root is of a negative number.
    """
    s, c = _norm_sums(sys, Psi)
    _, lam = gap_matrix_negdef(sys, W, Psi, _factor)
    disc = s * s - 4.0 * c * lam
    if disc < 0.0:
        raise DiscriminantError(
            f"negative discriminant {disc:.3g} (lambda_max(G) = {lam:.3g}); input cap undefined"
        )
    return -s + math.sqrt(disc)


def input_cap(sys, W=None):
    """Assemble Psi, beta and the infinity-norm input cap beta / (2 c).

    A linear system (all F_j zero) gets an infinite cap.  A nonpositive cap
    is returned as is; it coincides with G failing to be negative definite.
    """
    if W is None:
        W = gramian_vec_solve(sys).W
    fac = _PDFactor(W)
    Psi = compute_psi(sys, W, fac)
    negdef, lam = gap_matrix_negdef(sys, W, Psi, fac)
    s, c = _norm_sums(sys, Psi)
    if c == 0.0:
        return EnergyBound(Psi, math.inf, math.inf, negdef, lam, c, s)
    beta = compute_beta(sys, W, Psi, fac)
    return EnergyBound(Psi, beta, beta / (2.0 * c), negdef, lam, c, s)


def energy_lower_bound(W, x_f):
    """x_f^T W^{-1} x_f, via a Cholesky solve."""
    x = np.asarray(x_f, dtype=float).ravel()
    if not np.any(x):
        return 0.0
    fac = _PDFactor(W)
    return float(x @ fac.solve(x))


def phi_matrix(sys, W, u, _factor=None):
    """Symmetric (n+m)x(n+m) matrix Phi(u) with

        V(x+) - V(x) - u^T u = [x; u]^T Phi(u) [x; u],   V(x) = x^T W^{-1} x.

    Blocks: Phi11 = A_u^T W^{-1} A_u - W^{-1}, Phi21 = B^T W^{-1} A_u,
    Phi22 = B^T W^{-1} B - I, where A_u = A + sum_j u_j F_j (expanding A_u
    gives the quadratic-in-u form of Phi11).
    """
    fac = _factor or _PDFactor(W)
    u = np.asarray(u, dtype=float).ravel()
    Wi = fac.inverse()
    Au = sys.A + sum(uj * Fj for uj, Fj in zip(u, sys.F))
    WiAu = Wi @ Au
    Phi11 = Au.T @ WiAu - Wi
    Phi21 = sys.B.T @ WiAu
    Phi22 = sys.B.T @ Wi @ sys.B - np.eye(sys.m)
    Phi = np.block([[Phi11, Phi21.T], [Phi21, Phi22]])
    return 0.5 * (Phi + Phi.T)


@dataclass
class EnergyRecord:
    k: int
    energy: float
    bound: float
    slack: float


@dataclass
class EnergyReport:
    records: List[EnergyRecord]
    cap: float
    cap_satisfied: bool
    inequality_held: bool
    max_abs_input: float = 0.0

    def rows(self):
        return [(r.k, r.energy, r.bound, r.slack) for r in self.records]


def verify_energy_inequality(sys, u_seq, W, cap=None, x0=None):
    """Simulate from the origin and compare energy with x(k)^T W^{-1} x(k) at every k.

    The check is informational when the cap is violated: the report still
    carries every slack.  ``cap`` defaults to :func:`input_cap`.
    """
    if cap is None:
        try:
            cap = input_cap(sys, W).input_cap
        except DiscriminantError:
            cap = -math.inf
    traj = simulate(sys, u_seq, x0)
    fac = _PDFactor(W)
    max_abs = float(np.max(np.abs(traj.inputs))) if traj.inputs.size else 0.0
    records = [EnergyRecord(0, 0.0, float(traj.states[0] @ fac.solve(traj.states[0])), 0.0)]
    records[0].slack = -records[0].bound
    for k in range(1, traj.K + 1):
        x = traj.states[k]
        bound = float(x @ fac.solve(x))
        energy = float(traj.cumulative_energy[k - 1])
        records.append(EnergyRecord(k, energy, bound, energy - bound))
    held = all(r.slack >= -SLACK_RTOL * (1.0 + r.bound) for r in records)
    return EnergyReport(records, cap, max_abs <= cap, held, max_abs)


def scalar_input_cap(a, f):
    """Admissible interval for u in the scalar case: |u + a/f| <= sqrt(a^2/f^2 + 1)."""
    if f == 0:
        return (-math.inf, math.inf)
    center = -a / f
    r = math.sqrt(a * a / (f * f) + 1.0)
    return (center - r, center + r)


def scalar_gramian(a, f, b):
    """Closed form W = b^2 / (1 - a^2 - f^2) for a scalar system."""
    return b * b / (1.0 - a * a - f * f)


@dataclass
class Witness:
    a: float
    f: float
    w: float
    u0: float
    u1: float
    x_f: float
    energy: float
    ratio: float
    verified: bool = field(default=False)

    def to_dict(self):
        return {k: getattr(self, k) for k in ("a", "f", "w", "u0", "u1", "x_f", "energy", "ratio", "verified")}


def unbounded_ratio_witness(a, f, w):
    """Two-step inputs for x(k+1) = a x + f x u + u with energy / x_f^2 < 1/w.

    u(1) is an integer with (a + f u(1))^2 > w.  Writing x_f = M u(1) and
    g = a + f u(1), the ratio equals (c (M - 1)^2 + 1) / M^2 with c = g^-2,
    whose exact minimizer M = (1 + c) / c gives the ratio c / (1 + c) < 1/w.
    The result is replayed through the dynamics before returning.
    """
    if f == 0:
        raise ValueError("f must be nonzero")
    if not w > 0:
        raise ValueError("w must be positive")
    k = math.floor((math.sqrt(w) - a) / abs(f)) + 2
    u1 = float(math.copysign(k, f))
    g = a + f * u1
    c = 1.0 / (g * g)
    M = (1.0 + c) / c
    x_f = M * u1
    u0 = (x_f - u1) / g
    sys = BilinearSystem(np.array([[a]]), (np.array([[f]]),), np.array([[1.0]]))
    traj = simulate(sys, np.array([[u0], [u1]]))
    reached = float(traj.final_state[0])
    energy = u0 * u0 + u1 * u1
    ratio = energy / (reached * reached)
    verified = abs(reached - x_f) <= 1e-9 * abs(x_f) and ratio < 1.0 / w
    return Witness(a, f, w, u0, u1, reached, energy, ratio, verified)
