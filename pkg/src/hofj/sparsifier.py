"""Path-sampling sparsifier for random-walk matrix polynomials.

Each sample picks an edge ``e``, a walk length ``r`` and a split point ``k``,
extends ``e`` into a length-``r`` path by walking ``k-1`` steps from one end
and ``r-k`` from the other, and adds an edge between the path endpoints.
With ``Z = sum 2/a`` over the path edges, the added weights are chosen so that
``E[L_tilde] = L_beta``:

* ``literal-uniform``: ``e`` uniform over edges, ``r`` uniform over ``1..T``,
  weight ``2 r m T beta_r / (M Z)``. The factor ``T`` undoes the ``1/T``
  probability of drawing ``r``.
* ``weight-proportional``: ``e`` drawn with probability ``w_e / W``, ``r``
  with probability ``beta_r``, weight ``W / M``. On unweighted graphs this
  equals ``2 r m / (M Z)``.

Samples whose endpoints coincide add nothing to a Laplacian; they are only
counted.
"""

from __future__ import annotations

import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph_core import WeightedGraph, derive_rng, random_walk, sample_neighbors
from .polynomial import DENSE_NODE_CAP, DenseOperator, DenseSizeError, PolynomialSpec

log = logging.getLogger(__name__)

MODES = ("literal-uniform", "weight-proportional")
CHUNK = 1 << 18


@dataclass
class SparsifierConfig:
    M: int
    sampling_mode: str = "literal-uniform"
    seed: int = 0
    record_diagnostics: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("edge budget M must be at least 1")
        if self.sampling_mode not in MODES:
            raise ValueError(f"unknown sampling mode {self.sampling_mode!r}; choose from {MODES}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class SparsifierOutput:
    laplacian: sp.csr_matrix
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    self_loop_samples: int
    per_r_counts: np.ndarray
    config: SparsifierConfig
    sampled_weight: float = 0.0
    epsilon_estimate: float | None = None

    @property
    def merged_edge_count(self) -> int:
        return len(self.src)

    def diagnostics(self) -> dict:
        return {
            "M": self.config.M,
            "mode": self.config.sampling_mode,
            "seed": self.config.seed,
            "workers": self.config.workers,
            "merged_edge_count": self.merged_edge_count,
            "self_loop_samples": self.self_loop_samples,
            "per_r_counts": [int(c) for c in self.per_r_counts],
            "sampled_weight": self.sampled_weight,
            "epsilon_estimate": self.epsilon_estimate,
        }


@dataclass
class SampledPath:
    nodes: list
    r: int
    Z: float
    k: int = field(default=1)

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.nodes[0], self.nodes[-1]


def _pick_edge(g: WeightedGraph, mode: str, rng: np.random.Generator) -> int:
    if mode == "literal-uniform":
        return int(rng.integers(g.m))
    cum = np.cumsum(g.weight)
    return int(min(np.searchsorted(cum, rng.random() * cum[-1], side="right"), g.m - 1))


def path_sample(g: WeightedGraph, r: int, rng: np.random.Generator,
                mode: str = "literal-uniform", edge: int | None = None) -> SampledPath:
    """Sample one length-``r`` path through a randomly picked edge.

    Scalar reference version of the batched sampler in :func:`build_sparsifier`.
    """
    if r < 1:
        raise ValueError("path length r must be >= 1")
    e = _pick_edge(g, mode, rng) if edge is None else edge
    u, v = int(g.src[e]), int(g.dst[e])
    k = int(rng.integers(1, r + 1))
    _, left = random_walk(g, u, k - 1, rng, return_path=True)
    _, right = random_walk(g, v, r - k, rng, return_path=True)
    nodes = left[::-1] + right
    Z = sum(2.0 / g.edge_weight(a, b) for a, b in zip(nodes[:-1], nodes[1:]))
    return SampledPath(nodes=nodes, r=r, Z=float(Z), k=k)


def _sample_batch(g, beta, mode, count, rng):
    """Draw ``count`` samples; returns endpoints, lengths and per-sample weights (unscaled by M)."""
    T = len(beta)
    beta = np.asarray(beta)
    if mode == "literal-uniform":
        e = rng.integers(g.m, size=count)
        r = rng.integers(1, T + 1, size=count)
    else:
        cw = np.cumsum(g.weight)
        e = np.minimum(np.searchsorted(cw, rng.random(count) * cw[-1], side="right"), g.m - 1)
        cb = np.cumsum(beta)
        r = np.minimum(np.searchsorted(cb, rng.random(count) * cb[-1], side="right"), T - 1) + 1
    k = rng.integers(1, r + 1)
    u = g.src[e].copy()
    v = g.dst[e].copy()
    Z = 2.0 / g.weight[e]
    for step in range(T - 1):
        left = np.flatnonzero(k - 1 > step)
        if len(left):
            u[left], w = sample_neighbors(g, u[left], rng)
            Z[left] += 2.0 / w
        right = np.flatnonzero(r - k > step)
        if len(right):
            v[right], w = sample_neighbors(g, v[right], rng)
            Z[right] += 2.0 / w
    if mode == "literal-uniform":
        wt = 2.0 * r * g.m * T * beta[r - 1] / Z
    else:
        wt = np.full(count, g.total_weight)
    return u, v, r, wt


def _run_share(g, spec, mode, count, rng):
    n = g.n
    keys, sums = [], []
    loops = 0
    per_r = np.zeros(spec.T, dtype=np.int64)
    total = 0.0
    done = 0
    while done < count:
        c = min(CHUNK, count - done)
        u, v, r, wt = _sample_batch(g, spec.beta, mode, c, rng)
        done += c
        per_r += np.bincount(r - 1, minlength=spec.T)
        total += wt.sum()
        same = u == v
        loops += int(same.sum())
        keep = ~same & (wt > 0)
        lo = np.minimum(u[keep], v[keep])
        hi = np.maximum(u[keep], v[keep])
        key, inv = np.unique(lo * n + hi, return_inverse=True)
        keys.append(key)
        sums.append(np.bincount(inv, weights=wt[keep], minlength=len(key)))
    return keys, sums, loops, per_r, total


def build_sparsifier(g: WeightedGraph, spec: PolynomialSpec, cfg: SparsifierConfig) -> SparsifierOutput:
    """Sample ``cfg.M`` paths and merge the resulting edges into a Laplacian.

    Output is a deterministic function of ``(seed, workers)``: worker ``i``
    draws ``M // workers`` (+1 for the first ``M % workers``) samples from
    substream ``i`` and edges are merged in sorted endpoint-pair order.
    """
    if not any(b > 0 for b in spec.beta):
        raise ValueError("beta is all zero")
    shares = [cfg.M // cfg.workers + (i < cfg.M % cfg.workers) for i in range(cfg.workers)]
    jobs = [(g, spec, cfg.sampling_mode, c, derive_rng(cfg.seed, i)) for i, c in enumerate(shares)]
    if cfg.workers == 1:
        results = [_run_share(*jobs[0])]
    else:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(lambda a: _run_share(*a), jobs))

    keys = np.concatenate([k for res in results for k in res[0]])
    sums = np.concatenate([s for res in results for s in res[1]])
    key, inv = np.unique(keys, return_inverse=True)
    w = np.bincount(inv, weights=sums, minlength=len(key)) / cfg.M
    src, dst = key // g.n, key % g.n

    W = sp.coo_matrix((np.r_[w, w], (np.r_[src, dst], np.r_[dst, src])), shape=(g.n, g.n)).tocsr()
    L = (sp.diags(np.asarray(W.sum(axis=1)).ravel()) - W).tocsr()
    out = SparsifierOutput(
        laplacian=L,
        src=src,
        dst=dst,
        weight=w,
        self_loop_samples=sum(res[2] for res in results),
        per_r_counts=sum(res[3] for res in results),
        config=cfg,
        sampled_weight=sum(res[4] for res in results) / cfg.M,
    )
    log.debug("sparsifier: %s", out.diagnostics())
    return out


def export_sparsifier(out: SparsifierOutput, path) -> None:
    """Write ``u v w`` lines (sorted) to ``path`` and the diagnostics to ``path + '.json'``."""
    with open(path, "w") as fh:
        for a, b, w in zip(out.src, out.dst, out.weight):
            fh.write(f"{a} {b} {w:.17g}\n")
    with open(f"{path}.json", "w") as fh:
        json.dump(out.diagnostics(), fh, indent=2)


def _as_array(L):
    if isinstance(L, DenseOperator):
        return L.matrix
    return L


def spectral_similarity_check(L_dense, L_tilde, trials: int, rng: np.random.Generator,
                              output: SparsifierOutput | None = None) -> tuple[float, float]:
    """Extremes of ``x'L x / x'L_tilde x`` over random ``x`` orthogonal to the all-ones vector.

    If ``output`` is given, its ``epsilon_estimate`` is set to
    ``max(max_ratio - 1, 1 - min_ratio)``. A vanishing denominator (a
    disconnected sparsifier) gives an infinite ratio and a warning.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    A = _as_array(L_dense)
    B = _as_array(L_tilde)
    if A.shape != B.shape:
        raise ValueError("dimension mismatch")
    X = rng.standard_normal((A.shape[0], trials))
    X -= X.mean(axis=0)
    num = np.einsum("ij,ij->j", X, np.asarray(A @ X))
    den = np.einsum("ij,ij->j", X, np.asarray(B @ X))
    scale = np.abs(num).max() if num.size else 1.0
    degenerate = den <= 1e-12 * max(scale, 1.0)
    if degenerate.any():
        warnings.warn(f"{int(degenerate.sum())} test vectors have x'L_tilde x = 0; "
                      "the sparsifier is probably disconnected", RuntimeWarning, stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(degenerate, np.inf, num / np.where(degenerate, 1.0, den))
    hi, lo = float(ratios.max()), float(ratios.min())
    if output is not None:
        output.epsilon_estimate = max(hi - 1.0, 1.0 - lo)
    return hi, lo


def singular_gap_estimate(g: WeightedGraph, L_beta, L_tilde, max_nodes: int = DENSE_NODE_CAP) -> float:
    """Largest singular value of ``D^-1 (L_tilde - L_beta)``."""
    if g.n > max_nodes:
        raise DenseSizeError(f"n={g.n} exceeds the dense cap of {max_nodes} nodes")
    A = _as_array(L_beta)
    B = _as_array(L_tilde)
    B = B.toarray() if sp.issparse(B) else np.asarray(B)
    diff = (B - A) / g.degree[:, None]
    return float(np.linalg.norm(diff, 2))
