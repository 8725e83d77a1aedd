"""Fixed-point iteration of the opinion update and its error bounds."""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph_core import WeightedGraph
from .polynomial import DenseOperator, OpinionState
from .sparsifier import SparsifierOutput

log = logging.getLogger(__name__)


@dataclass
class IterationConfig:
    max_iters: int = 100
    stop_tol: float | None = None
    track_trace: bool = False

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.stop_tol is not None and self.stop_tol <= 0:
            raise ValueError("stop_tol must be positive")


@dataclass
class SparseTransition:
    """``P_tilde = I - D^-1 L_tilde`` with ``D`` the original graph's degrees."""

    matrix: sp.csr_matrix
    negative_entry_count: int = 0


@dataclass
class ErrorBoundInputs:
    epsilon: float
    alpha_min: float
    n: int
    t: int

    def __post_init__(self):
        if not 0 < self.alpha_min <= 1:
            raise ValueError("alpha_min must lie in (0, 1]")
        if self.epsilon < 0 or self.t < 0 or self.n < 1:
            raise ValueError("epsilon, t must be non-negative and n positive")


def build_sparse_transition(g: WeightedGraph, sparsifier) -> SparseTransition:
    """Accepts a :class:`SparsifierOutput` or a bare sparse Laplacian."""
    L = sparsifier.laplacian if isinstance(sparsifier, SparsifierOutput) else sparsifier
    if L.shape != (g.n, g.n):
        raise ValueError(f"laplacian shape {L.shape} does not match n={g.n}")
    P = (sp.identity(g.n, format="csr") - sp.diags(1.0 / g.degree) @ sp.csr_matrix(L)).tocsr()
    P.eliminate_zeros()
    neg = int((P.data < 0).sum())
    if neg:
        warnings.warn(f"P_tilde has {neg} negative entries; the error bounds do not apply",
                      RuntimeWarning, stacklevel=2)
    return SparseTransition(P, neg)


def _operator(P_op):
    if isinstance(P_op, (SparseTransition, DenseOperator)):
        return P_op.matrix
    return P_op


def iterate_opinions(P_op, state: OpinionState, cfg: IterationConfig | None = None,
                     observer=None):
    """Run ``x <- alpha*s + (1-alpha) * P x`` from ``x = s``.

    ``observer(t, x)`` is called for ``t = 0`` and after every step. Returns
    ``(x, trace)`` where ``trace`` lists the max-norm change of each step
    (empty unless ``cfg.track_trace``).
    """
    cfg = cfg or IterationConfig()
    P = _operator(P_op)
    a_s = state.alpha * state.s
    damp = 1.0 - state.alpha
    x = state.s.copy()
    trace = []
    if observer is not None:
        observer(0, x)
    for t in range(1, cfg.max_iters + 1):
        x_new = a_s + damp * (P @ x)
        delta = float(np.abs(x_new - x).max())
        x = x_new
        if cfg.track_trace:
            trace.append(delta)
        if observer is not None:
            observer(t, x)
        if cfg.stop_tol is not None and delta < cfg.stop_tol:
            log.debug("stopped after %d iterations (delta=%g)", t, delta)
            break
    state.x = x
    return x, trace


def iteration_error_bound(alpha_min: float, t: int) -> float:
    """``(1-alpha_min)^t / alpha_min``: distance of the exact iteration from equilibrium."""
    return (1 - alpha_min) ** t / alpha_min


def sparsification_error_bound(epsilon: float, n: int, alpha_min: float, t: int) -> float:
    """Max-norm gap between the sparsified and exact iterations after ``t`` steps."""
    q = 1 - alpha_min
    return 4 * epsilon * math.sqrt(n) * q * (1 - q ** t) / alpha_min


def theorem9_bound(inp: ErrorBoundInputs) -> float:
    """Distance of the sparsified iteration from the exact equilibrium after ``inp.t`` steps."""
    return (sparsification_error_bound(inp.epsilon, inp.n, inp.alpha_min, inp.t)
            + iteration_error_bound(inp.alpha_min, inp.t))


def contraction_check(P_op, state: OpinionState, steps: int, z_star=None) -> bool:
    """True if ``max|x(t) - z*|`` strictly drops at every one of ``steps`` steps.

    Once the error reaches round-off level (or zero, as when every alpha is 1)
    there is nothing left to contract and the remaining steps pass.
    """
    P = _operator(P_op)
    if z_star is None:
        dense = P.toarray() if sp.issparse(P) else np.asarray(P)
        M = np.eye(len(state.s)) - (1 - state.alpha)[:, None] * dense
        z_star = np.linalg.solve(M, state.alpha * state.s)
    floor = 64 * np.finfo(float).eps * max(1.0, float(np.abs(z_star).max()))
    errs = []
    iterate_opinions(P, state, IterationConfig(max_iters=steps),
                     observer=lambda t, x: errs.append(float(np.abs(x - z_star).max())))
    for prev, cur in zip(errs[:-1], errs[1:]):
        if prev <= floor:
            continue
        if not cur < prev:
            return False
    return True


def write_trace_csv(trace, path, bound: ErrorBoundInputs | None = None) -> None:
    """Columns ``step, max_delta, bound_value`` (bound left blank when not supplied)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "max_delta", "bound_value"])
        for step, delta in enumerate(trace, start=1):
            b = ""
            if bound is not None:
                b = theorem9_bound(ErrorBoundInputs(bound.epsilon, bound.alpha_min, bound.n, step))
            w.writerow([step, f"{delta:.17g}", b])
