"""Network families and scaling analyses.

Covers line networks with homogeneous self-loop modulation (F = alpha I),
line networks with subdiagonal interconnection modulation, the upper bound
on lambda_min(W) for self-loop modulated symmetric networks, and the
expansion of a bilinear network into a linear one with extra canonical
inputs.
"""

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import numerics
from .errors import BilinearError, ExistenceError, InputError
from .gramian import gramian_vec_solve, linear_gramian
from .system import BilinearSystem, existence_matrix, gramian_exists, simulate, step


class FamilyKind(str, enum.Enum):
    LINE_SELFLOOP = "line-selfloop"
    LINE_SUBDIAG = "line-subdiag"


@dataclass(frozen=True)
class NetworkFamily:
    kind: FamilyKind
    coupling: float = 0.25
    m: int = 3
    trace_budget: float = 0.9
    placement: str = "optimal_exhaustive"  # or "first_nodes"

    @classmethod
    def example5(cls):
        return cls(FamilyKind.LINE_SELFLOOP, coupling=0.25, m=3, trace_budget=0.9)

    @classmethod
    def example7(cls):
        return cls(FamilyKind.LINE_SUBDIAG, coupling=0.05, m=1, trace_budget=0.0, placement="first_nodes")


@dataclass
class SweepRecord:
    n: int
    lambda_min_bilinear: Optional[float]
    lambda_min_linear: Optional[float]
    theorem8_bound: Optional[float]
    assumptions_hold: bool
    placement: tuple = ()
    T_m: Optional[int] = None
    note: str = ""

    def to_dict(self):
        return {
            "n": self.n,
            "lambda_min_bilinear": self.lambda_min_bilinear,
            "lambda_min_linear": self.lambda_min_linear,
            "theorem8_bound": self.theorem8_bound,
            "assumptions_hold": self.assumptions_hold,
            "placement": list(self.placement),
            "T_m": self.T_m,
        }


def line_network(n, a):
    """Symmetric tridiagonal matrix with every diagonal and first off-diagonal entry equal to ``a``."""
    if n < 1:
        raise InputError("n must be >= 1")
    return a * (np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1))


def selfloop_modulated_system(A, alpha, B):
    """x+ = (A + alpha v I) x + B u as a canonical system with inputs [v, u].

    Input 0 is the bilinear channel (F = alpha I, zero B column); the
    remaining m inputs are linear.
    """
    A = numerics.as_matrix(A, "A")
    if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
        raise InputError("A must be symmetric")
    B = numerics.as_matrix(B, "B")
    n = A.shape[0]
    F = (alpha * np.eye(n),) + tuple(np.zeros((n, n)) for _ in range(B.shape[1]))
    return BilinearSystem(A, F, np.hstack([np.zeros((n, 1)), B]))


def tm(n, m):
    """ceil(n/m) - 1."""
    if n < 1 or m < 1:
        raise InputError("n and m must be >= 1")
    return -(-n // m) - 1


def theorem8_hypotheses(rhoA, alpha, T_m):
    return T_m >= 1 and rhoA < math.sqrt(1.0 - 1.0 / T_m) and T_m * alpha * alpha < 1.0


def theorem8_bound(rhoA, alpha, T_m):
    """Upper bound on lambda_min(W) for self-loop modulated symmetric networks.

        (1 - T_m alpha^2)^-1 / (1 - rho^2 - 1/T_m) * rho^(2 T_m)

    Returns ``None`` when the hypotheses rho < sqrt(1 - 1/T_m) and
    T_m alpha^2 < 1 do not hold.
    """
    if not theorem8_hypotheses(rhoA, alpha, T_m):
        return None
    return theorem8_prefactor(rhoA, alpha, T_m) * rhoA ** (2 * T_m)


def theorem8_prefactor(rhoA, alpha, T_m):
    return 1.0 / ((1.0 - T_m * alpha * alpha) * (1.0 - rhoA * rhoA - 1.0 / T_m))


def subdiag_modulated_system(n, coupling=0.05):
    """Line network A(n) with entries ``coupling``, B = e_1 and F with ones on the subdiagonal."""
    if n < 2:
        raise InputError("n must be >= 2")
    A = line_network(n, coupling)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    sys = BilinearSystem(A, (np.eye(n, k=-1),), B)
    ok, rho = gramian_exists(sys)
    if not ok:
        raise ExistenceError(f"Gramian does not exist at n={n} (rho = {rho:.6g})", rho=rho)
    return sys


def _best_placement(A, alpha, n, m):
    """Canonical-vector placement maximizing lambda_min(W), searched exhaustively.

    The bilinear channel carries no B column and the other inputs no F, so
    vec(W) is linear in B B^T: one factorization gives each node's Gramian
    and a placement's Gramian is the sum over its nodes.
    """
    k = min(m, n)
    op = np.eye(n * n) - numerics.kron(A, A) - alpha * alpha * np.eye(n * n)
    solve = numerics.factorized(op)
    node_W = []
    for i in range(n):
        Q = np.zeros((n, n))
        Q[i, i] = 1.0
        W = numerics.unvec(solve(numerics.vec_stack(Q)), n, n)
        node_W.append(0.5 * (W + W.T))
    best, best_val = None, -math.inf
    for P in itertools.combinations(range(n), k):
        val = numerics.lambda_min(sum(node_W[i] for i in P))
        if val > best_val:
            best, best_val = P, val
    return best


def canonical_columns(n, placement):
    B = np.zeros((n, len(placement)))
    for c, i in enumerate(placement):
        B[i, c] = 1.0
    return B


def _selfloop_record(family, n):
    A = line_network(n, family.coupling)
    alpha = family.trace_budget / n
    rhoA = numerics.spectral_radius(A)
    k = min(family.m, n)
    if family.placement == "optimal_exhaustive":
        placement = _best_placement(A, alpha, n, family.m)
    else:
        placement = tuple(range(k))
    B = canonical_columns(n, placement)
    sys = selfloop_modulated_system(A, alpha, B)
    T_m = tm(n, family.m)
    try:
        W = gramian_vec_solve(sys).W
        lam_bl = numerics.lambda_min(W)
    except BilinearError as exc:
        return SweepRecord(n, None, None, None, False, placement, T_m, str(exc))
    lam_lin = numerics.lambda_min(linear_gramian(A, B))
    bound = theorem8_bound(rhoA, alpha, T_m) if T_m >= 1 else None
    return SweepRecord(n, lam_bl, lam_lin, bound, bound is not None, placement, T_m)


def _subdiag_record(family, n):
    try:
        sys = subdiag_modulated_system(n, family.coupling)
        W = gramian_vec_solve(sys).W
    except BilinearError as exc:
        return SweepRecord(n, None, None, None, False, (0,), None, str(exc))
    lam_lin = numerics.lambda_min(linear_gramian(sys.A, sys.B))
    return SweepRecord(n, numerics.lambda_min(W), lam_lin, None, True, (0,), None)


def dtc_sweep(family, n_from, n_to):
    """One record per n in [n_from, n_to], sorted by n.

    A failure at some n is recorded on that row and the sweep continues.
    """
    if n_from > n_to or n_from < 1:
        raise InputError(f"invalid range {n_from}..{n_to}")
    kind = FamilyKind(family.kind)
    if kind is FamilyKind.LINE_SUBDIAG and n_from < 2:
        raise InputError("line-subdiag needs n >= 2")
    builder = _selfloop_record if kind is FamilyKind.LINE_SELFLOOP else _subdiag_record
    return [builder(family, n) for n in range(n_from, n_to + 1)]


@dataclass
class LinearExpansion:
    A: np.ndarray
    B: np.ndarray  # original input columns
    B_ext: np.ndarray  # [B | appended canonical columns]
    column_map: List[dict] = field(default_factory=list)

    @property
    def M_F(self):
        return len(self.column_map)

    @property
    def system(self):
        return BilinearSystem.linear(self.A, self.B_ext)

    def to_dict(self):
        return {
            "A": self.A.tolist(),
            "B_ext": self.B_ext.tolist(),
            "m": int(self.B.shape[1]),
            "M_F": self.M_F,
            "column_map": self.column_map,
        }


def expand_to_linear(sys):
    """Split every F_j into single-entry matrices and give each its own input column e_row.

    F_j x v_j restricted to the entry (row, col, weight) equals
    e_row * (weight * x_col * v_j), so the bilinear dynamics are reproduced
    by the linear system (A, [B | e_rows]) under a state-dependent input.
    """
    cols, cmap = [], []
    for j, Fj in enumerate(sys.F):
        rows, colidx = np.nonzero(Fj)
        for r, c in zip(rows, colidx):
            e = np.zeros(sys.n)
            e[r] = 1.0
            cols.append(e)
            cmap.append({"input": j, "row": int(r), "col": int(c), "weight": float(Fj[r, c])})
    B_ext = np.hstack([sys.B, np.column_stack(cols)]) if cols else sys.B.copy()
    return LinearExpansion(sys.A.copy(), sys.B.copy(), B_ext, cmap)


def replay_expansion(expansion, u_seq, x0=None):
    """Drive the expanded linear system with u and the substituted inputs.

    Appended input c at step k is weight * x_col(k) * u_input(k); the
    resulting trajectory should coincide with the bilinear one.
    """
    lin = expansion.system
    n = lin.n
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    U = np.atleast_2d(np.asarray(u_seq, dtype=float))
    states = [x]
    for u in U:
        extra = [e["weight"] * x[e["col"]] * u[e["input"]] for e in expansion.column_map]
        x = step(lin, x, np.concatenate([u, extra]))
        states.append(x)
    return np.array(states)
