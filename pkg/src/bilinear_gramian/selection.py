"""Actuator selection by Gramian-based reachability metrics.

A library holds candidate actuators (F_i, b_i) sharing the dynamics A.  A
subset S assembles the system (A, F_S, B_S) with its Gramian W(S), and the
set function S -> W(S) has increasing returns in the PSD order.
"""

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import numerics
from .errors import BudgetError, BilinearError, InputError
from .gramian import gramian_vec_solve, linear_gramian
from .system import BilinearSystem

EXHAUSTIVE_BUDGET = 100_000


class MetricKind(str, enum.Enum):
    TRACE = "trace"
    LAMBDA_MIN = "lambda_min"
    LOG_DET = "log_det"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"trace": cls.TRACE, "tr": cls.TRACE, "lmin": cls.LAMBDA_MIN,
                   "lambda_min": cls.LAMBDA_MIN, "logdet": cls.LOG_DET, "log_det": cls.LOG_DET,
                   "det": cls.LOG_DET}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise InputError(f"unknown metric {value!r}") from None


@dataclass(frozen=True)
class ActuatorLibrary:
    A: np.ndarray
    F: tuple  # per candidate, n x n
    b: tuple  # per candidate, length n

    def __post_init__(self):
        A = numerics.as_matrix(self.A, "A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise InputError(f"A must be square, got {A.shape}")
        if len(self.F) != len(self.b):
            raise InputError("every candidate needs both F and B")
        F, b = [], []
        for i, (Fi, bi) in enumerate(zip(self.F, self.b)):
            Fi = numerics.as_matrix(Fi, f"candidate {i} F")
            bi = np.asarray(bi, dtype=float).ravel()
            if Fi.shape != (n, n) or bi.size != n:
                raise InputError(f"candidate {i} has inconsistent dimensions")
            F.append(Fi)
            b.append(bi)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "F", tuple(F))
        object.__setattr__(self, "b", tuple(b))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def size(self):
        return len(self.F)

    def permuted(self, order):
        """Library whose candidate ``i`` is this library's candidate ``order[i]``."""
        return ActuatorLibrary(self.A, tuple(self.F[i] for i in order), tuple(self.b[i] for i in order))


def _check_subset(lib, S, allow_empty=False):
    S = list(S)
    if len(set(S)) != len(S):
        raise InputError(f"duplicate index in {S}")
    for i in S:
        if not (isinstance(i, (int, np.integer)) and 0 <= i < lib.size):
            raise InputError(f"index {i} out of range 0..{lib.size - 1}")
    if not S and not allow_empty:
        raise InputError("actuator set must be nonempty")
    return tuple(sorted(int(i) for i in S))


def assemble(lib, S):
    S = _check_subset(lib, S)
    B = np.column_stack([lib.b[i] for i in S])
    return BilinearSystem(lib.A, tuple(lib.F[i] for i in S), B)


def subset_gramian(lib, S):
    """W(S), with W(empty) = 0."""
    S = _check_subset(lib, S, allow_empty=True)
    if not S:
        return np.zeros((lib.n, lib.n))
    return gramian_vec_solve(assemble(lib, S)).W


def metric(W, kind):
    kind = MetricKind.parse(kind)
    if kind is MetricKind.TRACE:
        return float(np.trace(W))
    if kind is MetricKind.LAMBDA_MIN:
        return numerics.lambda_min(W)
    return numerics.log_det_pd(W)


def all_metrics(W):
    """trace, lambda_min, log_det and det (None when not representable or W singular)."""
    out = {"trace": metric(W, MetricKind.TRACE), "lambda_min": metric(W, MetricKind.LAMBDA_MIN)}
    try:
        ld = numerics.log_det_pd(W)
    except BilinearError:
        out["log_det"] = None
        out["det"] = None
        return out
    out["log_det"] = ld
    det = math.exp(ld) if ld < math.log(1e300) else None
    out["det"] = det
    return out


@dataclass
class Selection:
    S: Tuple[int, ...]
    metric_kind: MetricKind
    value: float
    per_singleton_values: Dict[int, float]
    method: str = "greedy"
    excluded: List[int] = field(default_factory=list)
    table: List[dict] = field(default_factory=list)

    def to_dict(self):
        return {
            "S": list(self.S),
            "metric": self.metric_kind.value,
            "method": self.method,
            "value": self.value,
            "singletons": {str(k): v for k, v in sorted(self.per_singleton_values.items())},
            "excluded": list(self.excluded),
            "table": self.table,
        }


def _singleton_values(lib, kind):
    values, excluded = {}, []
    for s in range(lib.size):
        try:
            values[s] = metric(subset_gramian(lib, [s]), kind)
        except BilinearError as exc:
            warnings.warn(f"candidate {s} skipped: {exc}")
            excluded.append(s)
    return values, excluded


def greedy_select(lib, m, kind):
    """Rank candidates by their individual metric and keep the top ``m``.

    This is singleton ranking, not marginal-gain greedy: each f(W({s})) is
    computed once and ties go to the smaller index.
    """
    kind = MetricKind.parse(kind)
    if not 1 <= m <= lib.size:
        raise InputError(f"m must be in 1..{lib.size}, got {m}")
    values, excluded = _singleton_values(lib, kind)
    ranked = sorted(values, key=lambda s: (-values[s], s))
    if len(ranked) < m:
        raise InputError(f"only {len(ranked)} candidates have a Gramian; cannot choose {m}")
    S = tuple(sorted(ranked[:m]))
    value = metric(subset_gramian(lib, S), kind)
    return Selection(S, kind, value, values, "greedy", excluded)


def exhaustive_select(lib, m, kind, budget=EXHAUSTIVE_BUDGET):
    """Maximize f(W(S)) over every m-subset; ties go to the lexicographically smallest S."""
    kind = MetricKind.parse(kind)
    if not 1 <= m <= lib.size:
        raise InputError(f"m must be in 1..{lib.size}, got {m}")
    count = math.comb(lib.size, m)
    if count > budget:
        raise BudgetError(f"C({lib.size}, {m}) = {count} subsets exceeds budget {budget}; use greedy")
    values, excluded = _singleton_values(lib, kind)
    best, best_val = None, -math.inf
    for S in itertools.combinations(range(lib.size), m):
        try:
            val = metric(subset_gramian(lib, S), kind)
        except BilinearError:
            continue
        if val > best_val:
            best, best_val = S, val
    if best is None:
        raise InputError("no subset of the requested size has a valid Gramian")
    return Selection(best, kind, best_val, values, "exhaustive", excluded)


def metrics_table(lib, subsets):
    """Table-style rows of all metrics for each listed subset."""
    rows = []
    for S in subsets:
        row = {"S": list(_check_subset(lib, S))}
        row.update(all_metrics(subset_gramian(lib, S)))
        rows.append(row)
    return rows


def increasing_returns_check(lib, S1, S2, s):
    """PSD test of [W(S2+s) - W(S2)] - [W(S1+s) - W(S1)].

    Returns ``(is_psd, lambda_min)`` of the difference.
    """
    S1 = _check_subset(lib, S1, allow_empty=True)
    S2 = _check_subset(lib, S2, allow_empty=True)
    if not set(S1) <= set(S2):
        raise InputError(f"{S1} is not a subset of {S2}")
    if s in S2 or not 0 <= s < lib.size:
        raise InputError(f"s = {s} must be a candidate outside {S2}")
    D = (subset_gramian(lib, S2 + (s,)) - subset_gramian(lib, S2)) - (
        subset_gramian(lib, S1 + (s,)) - subset_gramian(lib, S1)
    )
    D = 0.5 * (D + D.T)
    return numerics.is_psd(D), numerics.lambda_min(D)


def _check_partition(S, parts):
    flat = [i for P in parts for i in P]
    if any(len(P) == 0 for P in parts) or len(flat) != len(set(flat)) or set(flat) != set(S):
        raise InputError(f"{parts} is not a partition of {sorted(S)}")


def superposition_bound_check(lib, S, partition, kind):
    """Compare f(W(S)) with sum_i f(W(S_i)) over a partition of S.

    For log_det the comparison is made on det itself (the bound is additive
    in det), using exp of each log-determinant.
    """
    kind = MetricKind.parse(kind)
    S = _check_subset(lib, S)
    parts = [_check_subset(lib, P) for P in partition]
    _check_partition(S, parts)
    if kind is MetricKind.LOG_DET:
        lhs = math.exp(metric(subset_gramian(lib, S), kind))
        rhs = sum(math.exp(metric(subset_gramian(lib, P), kind)) for P in parts)
    else:
        lhs = metric(subset_gramian(lib, S), kind)
        rhs = sum(metric(subset_gramian(lib, P), kind) for P in parts)
    return lhs, rhs, lhs >= rhs - 1e-9 * (1.0 + abs(lhs))


def w1_additivity_check(lib, S):
    """Linear-part Gramian is additive: W_1(S) = sum_{s in S} W_1(s)."""
    S = _check_subset(lib, S)
    whole = linear_gramian(lib.A, np.column_stack([lib.b[i] for i in S]))
    parts = sum(linear_gramian(lib.A, lib.b[i].reshape(-1, 1)) for i in S)
    dev = numerics.spectral_norm(whole - parts)
    return dev <= 1e-10 * max(numerics.spectral_norm(whole), 1e-300), dev


def set_partitions(items):
    """All partitions of ``items`` into nonempty blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def random_library(rng, n, size, rho_target=0.9):
    """Random library whose full-set Gramian exists (existence rho of V = rho_target)."""
    from .system import gramian_exists

    A = rng.standard_normal((n, n))
    F = [rng.standard_normal((n, n)) for _ in range(size)]
    b = [rng.standard_normal(n) for _ in range(size)]
    full = BilinearSystem(A, tuple(F), np.column_stack(b))
    _, rho = gramian_exists(full)
    scale = math.sqrt(rho_target / rho)
    return ActuatorLibrary(A * scale, tuple(Fi * scale for Fi in F), tuple(b))
