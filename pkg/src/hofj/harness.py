"""Experiment drivers behind the command-line interface."""

from __future__ import annotations

import contextlib
import dataclasses
import json
import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dynamics import IterationConfig, build_sparse_transition, iterate_opinions
from .graph_core import WeightedGraph, largest_connected_component, load_edge_list
from .opinions import GENERATOR, GenSpec, generate_innate, generate_resistance
from .polynomial import (
    DENSE_NODE_CAP,
    OpinionState,
    PolynomialSpec,
    build_transition_polynomial,
    mean_absolute_error,
    solve_equilibrium_exact,
)
from .sparsifier import SparsifierConfig, build_sparsifier

log = logging.getLogger(__name__)

DEFAULT_BETA = (0.5, 0.5)
M_GRID = (1, 10, 100, 200, 500, 1000, 2000)


@dataclass
class ExperimentReport:
    dataset: str
    n: int
    m: int
    distribution: str
    beta: list
    solver: str
    seed: int
    wall_time_seconds: float
    M: int | None = None
    k: float | None = None
    iterations: int | None = None
    sampling_mode: str | None = None
    x_min: float | None = None
    mae_sigma: float | None = None
    sparsifier: dict | None = None
    negative_entry_count: int | None = None
    note: str | None = None
    generator: str = GENERATOR
    tool_version: str = __version__

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)


@contextlib.contextmanager
def single_thread(enabled: bool = True):
    """Limit BLAS/OpenMP pools to one thread for the duration of the block."""
    if not enabled:
        yield
        return
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=1):
        yield


# -- datasets ---------------------------------------------------------------

def prepare(path, directed: bool = False) -> tuple[WeightedGraph, dict]:
    g0 = load_edge_list(path, directed=directed)
    g = largest_connected_component(g0)
    stats = {
        "dataset": str(path),
        "n_raw": g0.n,
        "m_raw": g0.m,
        "n": g.n,
        "m": g.m,
        "self_loops_dropped": g0.self_loops_dropped,
        "duplicates_merged": g0.duplicates_merged,
    }
    return g, stats


def make_state(n: int, distribution: str, seed: int, x_min: float = 1.0) -> OpinionState:
    s = generate_innate(GenSpec(distribution, n, seed=seed, x_min=x_min))
    return OpinionState(s, generate_resistance(n, seed))


# -- solvers ----------------------------------------------------------------

def run_approx(g, spec, state, M, iters=100, mode="literal-uniform", seed=0, observer=None):
    """Sparsify, build ``P_tilde`` and iterate; returns ``(x, sparsifier, transition)``."""
    sp_out = build_sparsifier(g, spec, SparsifierConfig(M=M, sampling_mode=mode, seed=seed))
    Pt = build_sparse_transition(g, sp_out)
    x, _ = iterate_opinions(Pt, state, IterationConfig(max_iters=iters), observer=observer)
    return x, sp_out, Pt


def _warm_up(g, spec, mode):
    # untimed; a tiny sparsifier often has negative entries, which is irrelevant here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        run_approx(g, spec, make_state(g.n, "uniform", 0), max(1, g.m), iters=1, mode=mode)


def budget(g: WeightedGraph, spec: PolynomialSpec, k: float) -> int:
    return max(1, int(round(k * spec.T * g.m)))


def compare(g, spec, *, dataset="graph", distribution="uniform", k=10, iters=100, seeds=(0,),
            mode="literal-uniform", x_min=1.0, max_nodes=DENSE_NODE_CAP, states=None,
            threads_single=True):
    """Exact vs approximate equilibrium on identical inputs; one report per (seed, solver)."""
    reports = []
    M = budget(g, spec, k)
    run_exact = g.n <= max_nodes
    base = dict(dataset=dataset, n=g.n, m=g.m, distribution=distribution, beta=list(spec.beta),
                x_min=x_min if distribution != "uniform" else None)
    with single_thread(threads_single):
        _warm_up(g, spec, mode)
        Pstar, build_time = None, 0.0
        if run_exact:
            t0 = time.perf_counter()
            Pstar = build_transition_polynomial(g, spec, max_nodes)
            build_time = time.perf_counter() - t0
        for i, seed in enumerate(seeds):
            state = states[i] if states is not None else make_state(g.n, distribution, seed, x_min)
            z = None
            if run_exact:
                t0 = time.perf_counter()
                z = solve_equilibrium_exact(g, spec, state, transition=Pstar)
                t_exact = time.perf_counter() - t0 + build_time
            t0 = time.perf_counter()
            x, sp_out, Pt = run_approx(g, spec, state, M, iters, mode, seed)
            t_approx = time.perf_counter() - t0
            sigma = mean_absolute_error(z, x) if z is not None else None
            if run_exact:
                reports.append(ExperimentReport(**base, solver="exact", seed=seed,
                                                wall_time_seconds=t_exact, mae_sigma=sigma))
            reports.append(ExperimentReport(
                **base, solver="approx", seed=seed, wall_time_seconds=t_approx, M=M, k=k,
                iterations=iters, sampling_mode=mode, mae_sigma=sigma,
                sparsifier=sp_out.diagnostics(), negative_entry_count=Pt.negative_entry_count,
                note=None if run_exact else f"exact skipped: n={g.n} exceeds dense cap {max_nodes}",
            ))
    return reports


def sweep_M(g, spec, *, ks=M_GRID, seeds=range(5), dataset="graph", iters=100,
            mode="literal-uniform", distribution="uniform", threads_single=True):
    """MAE and wall time of the approximation for every budget multiplier ``k``.

    Returns ``(reports, medians)`` with ``medians[k] = (median sigma, median seconds)``.
    """
    reports = []
    with single_thread(threads_single):
        Pstar = build_transition_polynomial(g, spec)
        states = [make_state(g.n, distribution, s) for s in seeds]
        exact = [solve_equilibrium_exact(g, spec, st, transition=Pstar) for st in states]
        _warm_up(g, spec, mode)
        for k in ks:
            M = budget(g, spec, k)
            for seed, st, z in zip(seeds, states, exact):
                t0 = time.perf_counter()
                x, sp_out, Pt = run_approx(g, spec, st, M, iters, mode, seed)
                dt = time.perf_counter() - t0
                reports.append(ExperimentReport(
                    dataset=dataset, n=g.n, m=g.m, distribution=distribution, beta=list(spec.beta),
                    solver="approx", seed=seed, wall_time_seconds=dt, M=M, k=k, iterations=iters,
                    sampling_mode=mode, mae_sigma=mean_absolute_error(z, x),
                    sparsifier=sp_out.diagnostics(), negative_entry_count=Pt.negative_entry_count,
                ))
    medians = {}
    for k in ks:
        rows = [r for r in reports if r.k == k]
        medians[k] = (float(np.median([r.mae_sigma for r in rows])),
                      float(np.median([r.wall_time_seconds for r in rows])))
    return reports, medians


def non_increasing(values, slack: float = 0.0) -> bool:
    return all(b <= a + slack for a, b in zip(values[:-1], values[1:]))


def sweep_iters(g, spec, *, grid=(0, 1, 2, 5, 10, 20, 50, 100), seeds=range(5), k=10,
                mode="literal-uniform", distribution="uniform"):
    """MAE after each iteration count in ``grid``; returns rows ``{seed, t, sigma}``."""
    rows = []
    grid = sorted(set(grid))
    Pstar = build_transition_polynomial(g, spec)
    for seed in seeds:
        st = make_state(g.n, distribution, seed)
        z = solve_equilibrium_exact(g, spec, st, transition=Pstar)
        wanted = set(grid)

        def observe(t, x, seed=seed, z=z):
            if t in wanted:
                rows.append({"seed": seed, "t": t, "sigma": mean_absolute_error(z, x)})

        run_approx(g, spec, st, budget(g, spec, k), iters=grid[-1], mode=mode, seed=seed,
                   observer=observe)
    return rows


def model_difference(g, seed=0, threshold=0.01, distribution="uniform") -> dict:
    """Compare classic (beta=(1,0)) and second-order (beta=(0,1)) equilibria."""
    st = make_state(g.n, distribution, seed)
    z1 = solve_equilibrium_exact(g, PolynomialSpec((1.0, 0.0)), st)
    z2 = solve_equilibrium_exact(g, PolynomialSpec((0.0, 1.0)), st)
    diff = np.abs(z1 - z2)
    return {
        "n": g.n,
        "seed": seed,
        "fraction_above": float((diff > threshold).mean()),
        "threshold": threshold,
        "fraction_above_0.1": float((diff > 0.1).mean()),
        "max_diff": float(diff.max()),
    }


def linear_fit_r2(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = ((y - y.mean()) ** 2).sum()
    return float(1 - (resid ** 2).sum() / ss_tot) if ss_tot > 0 else 1.0


# -- the ten-node tree -------------------------------------------------------

TREE_CASES = {
    "classic": ((1.0, 0.0), (1.0, 0.181, 0.179), 2.617),
    "second-order": ((0.0, 1.0), (1.0, 0.0, 0.971), 6.826),
    "hybrid": ((0.5, 0.5), (1.0, 0.142, 0.351), 3.532),
}
TREE_COUNTS = (1, 3, 6)


def tree_graph() -> WeightedGraph:
    """Centre 0, middle ring 1..3, two leaves under each middle node."""
    src, dst = [], []
    for y in (1, 2, 3):
        src.append(0)
        dst.append(y)
        for j in range(2):
            src.append(y)
            dst.append(4 + 2 * (y - 1) + j)
    return WeightedGraph.from_edges(10, src, dst)


def tree_state(all_stubborn: bool = False) -> OpinionState:
    s = np.zeros(10)
    s[0] = 1.0
    alpha = np.r_[1.0, [0.6] * 3, [0.01] * 6]
    if all_stubborn:
        alpha = np.ones(10)
    return OpinionState(s, alpha)


@dataclass
class TreeCaseResult:
    name: str
    beta: tuple
    per_class: tuple
    expected: tuple
    total: float
    displayed_total: float
    expected_total: float
    iterative_gap: float
    tol: float = 1e-3
    diffs: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.diffs


def example_tree(tol: float = 1e-3, iters: int = 100) -> list[TreeCaseResult]:
    """Equilibria of the ten-node tree for the three reference beta settings.

    ``displayed_total`` adds up the per-class opinions after rounding to three
    decimals, which is how the reference totals were formed; ``total`` is the
    unrounded sum and is reported alongside.
    """
    g = tree_graph()
    out = []
    for name, (beta, expected, expected_total) in TREE_CASES.items():
        spec = PolynomialSpec(beta)
        st = tree_state()
        z = solve_equilibrium_exact(g, spec, st)
        per_class = (z[0], z[1:4].mean(), z[4:].mean())
        shown = sum(c * round(v, 3) for c, v in zip(TREE_COUNTS, per_class))
        x, _ = iterate_opinions(build_transition_polynomial(g, spec), st, IterationConfig(iters))
        res = TreeCaseResult(name, beta, tuple(float(v) for v in per_class), expected,
                             float(z.sum()), float(shown), expected_total,
                             float(np.abs(x - z).max()), tol)
        for label, got, want in zip(("red", "yellow", "blue"), per_class, expected):
            if abs(got - want) > tol:
                res.diffs.append(f"{label}: got {got:.6f}, expected {want}")
        if abs(shown - expected_total) > tol:
            res.diffs.append(f"sum: got {shown:.6f}, expected {expected_total}")
        for lo, hi in ((1, 4), (4, 10)):
            if np.ptp(z[lo:hi]) > 1e-12:
                res.diffs.append("nodes in the same ring disagree")
        out.append(res)
    return out
