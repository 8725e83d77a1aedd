"""Dense random-walk matrix polynomials and the exact equilibrium solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graph_core import WeightedGraph

DENSE_NODE_CAP = 20_000


class DenseSizeError(RuntimeError):
    """The graph is too large for dense construction."""


@dataclass(frozen=True)
class PolynomialSpec:
    """Coefficients ``beta[r-1]`` weighting ``r``-step walks, ``r = 1..T``."""

    beta: tuple

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta)
        object.__setattr__(self, "beta", beta)
        if not beta:
            raise ValueError("beta must be non-empty")
        if any(b < 0 for b in beta):
            raise ValueError(f"beta entries must be non-negative: {beta}")
        if abs(sum(beta) - 1.0) > 1e-9:
            raise ValueError(f"beta must sum to 1, got {sum(beta)}")

    @property
    def T(self) -> int:
        return len(self.beta)

    @classmethod
    def parse(cls, text: str) -> "PolynomialSpec":
        return cls(tuple(float(x) for x in text.replace(" ", "").split(",") if x))


@dataclass
class DenseOperator:
    """An ``n x n`` matrix tagged ``transition``, ``laplacian`` or ``system``."""

    matrix: np.ndarray
    kind: str

    def check(self, tol: float = 1e-9) -> None:
        a = self.matrix
        if self.kind == "transition":
            if np.abs(a.sum(axis=1) - 1).max() > tol:
                raise AssertionError("transition rows do not sum to 1")
            if a.min() < -1e-12 or a.max() > 1 + 1e-12:
                raise AssertionError("transition entries outside [0, 1]")
        elif self.kind == "laplacian":
            if np.abs(a - a.T).max() > tol:
                raise AssertionError("laplacian is not symmetric")
            if np.abs(a.sum(axis=1)).max() > tol:
                raise AssertionError("laplacian rows do not sum to 0")
            off = a - np.diag(np.diag(a))
            if off.max() > 1e-12:
                raise AssertionError("laplacian has positive off-diagonal entries")


@dataclass
class OpinionState:
    """Innate opinions ``s``, resistances ``alpha`` and current opinions ``x``."""

    s: np.ndarray
    alpha: np.ndarray
    x: np.ndarray | None = None

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.alpha = np.asarray(self.alpha, dtype=float)
        if self.s.shape != self.alpha.shape or self.s.ndim != 1:
            raise ValueError("s and alpha must be 1-d vectors of equal length")
        if self.s.min() < 0 or self.s.max() > 1:
            raise ValueError("innate opinions must lie in [0, 1]")
        if self.alpha.min() <= 0 or self.alpha.max() > 1:
            raise ValueError("resistance parameters must lie in (0, 1]")
        if self.x is None:
            self.x = self.s.copy()

    @property
    def n(self) -> int:
        return len(self.s)


def _check_cap(g: WeightedGraph, max_nodes: int) -> None:
    if g.n > max_nodes:
        raise DenseSizeError(
            f"n={g.n} exceeds the dense cap of {max_nodes} nodes; "
            "use the sparsifier path (build_sparsifier + iterate_opinions) instead"
        )


def build_transition_polynomial(g: WeightedGraph, spec: PolynomialSpec,
                                max_nodes: int = DENSE_NODE_CAP) -> DenseOperator:
    """``P* = sum_r beta_r P^r`` by repeated multiplication."""
    _check_cap(g, max_nodes)
    P = g.transition().toarray()
    last = max(r for r, b in enumerate(spec.beta, start=1) if b > 0)
    acc = P
    out = spec.beta[0] * P
    for r in range(2, last + 1):
        acc = acc @ P
        if spec.beta[r - 1] > 0:
            out += spec.beta[r - 1] * acc
    return DenseOperator(out, "transition")


def build_polynomial_laplacian(g: WeightedGraph, spec: PolynomialSpec,
                               max_nodes: int = DENSE_NODE_CAP,
                               transition: DenseOperator | None = None) -> DenseOperator:
    """``L_beta = D - sum_r beta_r D (D^-1 A)^r = D (I - P*)``."""
    if transition is None:
        transition = build_transition_polynomial(g, spec, max_nodes)
    L = -g.degree[:, None] * transition.matrix
    L[np.diag_indices_from(L)] += g.degree
    return DenseOperator(L, "laplacian")


def solve_equilibrium_exact(g: WeightedGraph, spec: PolynomialSpec, state: OpinionState,
                            transition: DenseOperator | None = None,
                            max_nodes: int = DENSE_NODE_CAP) -> np.ndarray:
    """Solve ``(I - (I - diag(alpha)) P*) z = diag(alpha) s`` by LU factorisation.

    Pass a prebuilt ``transition`` to reuse ``P*`` across opinion vectors.
    """
    if transition is None:
        transition = build_transition_polynomial(g, spec, max_nodes)
    if len(state.s) != g.n:
        raise ValueError("opinion vector length does not match the graph")
    M = -(1.0 - state.alpha)[:, None] * transition.matrix
    M[np.diag_indices_from(M)] += 1.0
    rhs = state.alpha * state.s
    try:
        z = scipy.linalg.solve(M, rhs, check_finite=False)
    except scipy.linalg.LinAlgError as exc:  # unreachable when alpha > 0
        raise RuntimeError("equilibrium system is singular") from exc
    return z


def mean_absolute_error(z_exact, z_approx) -> float:
    z_exact = np.asarray(z_exact, dtype=float)
    z_approx = np.asarray(z_approx, dtype=float)
    if z_exact.shape != z_approx.shape:
        raise ValueError(f"length mismatch: {z_exact.shape} vs {z_approx.shape}")
    return float(np.abs(z_exact - z_approx).mean())
