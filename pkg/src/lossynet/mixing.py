"""Row-stochastic mixing matrices of the convergent protocol.

Each iteration of the convergent robust push-sum moves mass between the m
augmented nodes (agents plus per-edge buffers) linearly: stacking values as a
row vector v, one round is v <- v @ M[t].  This module builds M[t] from a
failure schedule, forms window products, and certifies the two facts the
convergence argument rests on, a positive lower bound on every entry of long
enough products and geometric decay of the column spread.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .consensus import ConsensusTrace, _input_matrix, contraction_constants
from .errors import (
    IterationOutOfRangeError,
    NotRowStochasticError,
    WindowTooShortError,
)
from .graphs import AugmentedGraph
from .schedules import FailureSchedule

__all__ = [
    "iteration_matrix",
    "matrix_product",
    "evolve_by_matrices",
    "delta_coefficient",
    "lambda_coefficient",
    "certify_entry_lower_bound",
    "certify_contraction",
    "EntryBoundReport",
    "ContractionReport",
]

ROW_SUM_TOL = 1e-8


def iteration_matrix(ag: AugmentedGraph, schedule: FailureSchedule, t: int) -> np.ndarray:
    """The m x m matrix M[t] with M[source, destination] entries.

    Row p says how node p + 1 splits its mass this round.  An agent keeps
    1/(d+1)^2 of what it had (it shares over d+1 recipients twice within one
    round), delivered links carry shares onward, and a dropped link leaves
    the edge's buffer holding its own mass plus the sender's fresh share.
    """
    g = ag.base
    if schedule.graph != g:
        raise ValueError("schedule was built for a different graph")
    delivered = schedule.delivered(t).astype(float)
    n, m = g.n, ag.m
    D = (g.out_degrees + 1).astype(float)
    M = np.zeros((m, m))
    M[np.arange(n), np.arange(n)] = 1.0 / D**2
    src, dst = g.edge_sources, g.edge_destinations
    for k in range(g.num_edges):
        i, j = int(src[k]), int(dst[k])
        p = n + k
        b = delivered[k]
        M[i, j] = b / (D[i] * D[j])
        M[p, j] = b / D[j]
        M[i, p] = 1.0 / D[i] ** 2 + (1.0 - b) / D[i]
        M[p, p] = 1.0 - b
        # Mass arriving at the sender i this round is re-shared immediately,
        # so anything delivered into i also reaches i's outgoing buffers.
        for f in g.incoming_edge_indices[i]:
            bf = delivered[f]
            M[int(src[f]), p] = bf / (D[int(src[f])] * D[i])
            M[n + int(f), p] = bf / D[i]
    return M


def matrix_product(
    ag: AugmentedGraph, schedule: FailureSchedule, r: int, t: int
) -> np.ndarray:
    """M[r] @ M[r+1] @ ... @ M[t]; the identity when r == t + 1."""
    if r < 1 or t > schedule.horizon or r > t + 1:
        raise IterationOutOfRangeError(
            f"window [{r}, {t}] invalid for horizon {schedule.horizon}"
        )
    product = np.eye(ag.m)
    for k in range(r, t + 1):
        product = product @ iteration_matrix(ag, schedule, k)
    return product


def evolve_by_matrices(
    ag: AugmentedGraph, schedule: FailureSchedule, y, T: int
) -> ConsensusTrace:
    """Run the matrix recursion v[t] = v[t-1] @ M[t] from the standard start
    (inputs and unit weights on agents, empty buffers).

    Must reproduce :func:`~lossynet.consensus.run_convergent_robust_push_sum`
    up to floating-point noise; the simulation and the matrices are two
    independent encodings of the same round.
    """
    if T < 0:
        raise ValueError(f"horizon must be >= 0, got {T}")
    if schedule.horizon < T:
        raise IterationOutOfRangeError(
            f"schedule covers {schedule.horizon} iterations, run needs {T}"
        )
    g = ag.base
    inputs = _input_matrix(y, g.n)
    n, d = inputs.shape
    values = np.zeros((T + 1, ag.m, d))
    weights = np.zeros((T + 1, ag.m))
    values[0, :n] = inputs
    weights[0, :n] = 1.0
    for t in range(1, T + 1):
        M = iteration_matrix(ag, schedule, t)
        values[t] = M.T @ values[t - 1]
        weights[t] = M.T @ weights[t - 1]
    return ConsensusTrace(ag, inputs, values, weights)


def _check_row_stochastic(A: np.ndarray, tol: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotRowStochasticError(f"expected a square matrix, got shape {A.shape}")
    if A.size and (A.min() < -tol or np.abs(A.sum(axis=1) - 1.0).max() > tol):
        raise NotRowStochasticError(
            "matrix is not row stochastic within tolerance "
            f"{tol} (min entry {A.min()}, worst row-sum error "
            f"{np.abs(A.sum(axis=1) - 1.0).max()})"
        )
    return A


def delta_coefficient(A, tol: float = ROW_SUM_TOL) -> float:
    """Largest spread within any column, max_j (max_i A_ij - min_i A_ij).

    Zero exactly when all rows are identical; at most 1 for row-stochastic
    input.
    """
    A = _check_row_stochastic(A, tol)
    return float((A.max(axis=0) - A.min(axis=0)).max())


def lambda_coefficient(A, tol: float = ROW_SUM_TOL) -> float:
    """1 minus the smallest overlap between any two rows.

    The overlap of rows a and b is sum_j min(a_j, b_j); disjoint supports give
    coefficient 1, identical rows give 0.  Products contract column spread at
    least this fast.
    """
    A = _check_row_stochastic(A, tol)
    overlaps = np.minimum(A[:, None, :], A[None, :, :]).sum(axis=2)
    return float(1.0 - overlaps.min())


@dataclass(frozen=True)
class EntryBoundReport:
    """Positive lower bound check on every entry of a window product."""

    window: tuple[int, int]
    min_entry: float
    bound: float
    passed: bool


def certify_entry_lower_bound(
    ag: AugmentedGraph,
    schedule: FailureSchedule,
    r: int,
    t: int,
    B: int,
    slack: float = 1e-12,
) -> EntryBoundReport:
    """Every entry of M[r] ... M[t] is at least beta**(n B + 1) once the
    window spans at least n B + 1 iterations of a B-window schedule."""
    beta, _, block = contraction_constants(ag.base, B)
    if t - r + 1 < block:
        raise WindowTooShortError(
            f"window [{r}, {t}] spans {t - r + 1} < {block} iterations"
        )
    product = matrix_product(ag, schedule, r, t)
    min_entry = float(product.min())
    bound = beta**block
    return EntryBoundReport((r, t), min_entry, bound, min_entry >= bound - slack)


@dataclass(frozen=True)
class ContractionReport:
    """Column-spread decay check for a window product."""

    window: tuple[int, int]
    delta: float
    lambda_product: float
    gamma_bound: float
    passed: bool


def certify_contraction(
    ag: AugmentedGraph,
    schedule: FailureSchedule,
    r: int,
    t: int,
    B: int,
    slack: float = 1e-10,
) -> ContractionReport:
    """Check both contraction certificates on M[r] ... M[t]:

    delta(product) <= prod_k lambda(M[k]) and
    delta(product) <= gamma**floor(window / (n B + 1)).
    """
    if r > t:
        raise IterationOutOfRangeError(f"window [{r}, {t}] is empty")
    _, gamma, block = contraction_constants(ag.base, B)
    product = matrix_product(ag, schedule, r, t)
    delta = delta_coefficient(product)
    lam = 1.0
    for k in range(r, t + 1):
        lam *= lambda_coefficient(iteration_matrix(ag, schedule, k))
    gamma_bound = gamma ** ((t - r + 1) // block)
    passed = delta <= lam + slack and delta <= gamma_bound + slack
    return ContractionReport((r, t), delta, lam, gamma_bound, passed)
