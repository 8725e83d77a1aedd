"""Weighted undirected graphs, edge-list ingestion and weighted random walks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

log = logging.getLogger(__name__)


class EdgeListError(ValueError):
    """Raised for unreadable or semantically invalid edge-list input."""


def derive_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    """PCG64 generator for ``seed``; ``stream`` selects an independent substream.

    Substreams come from ``SeedSequence(seed, spawn_key=(stream,))`` so walkers
    running side by side never share state.
    """
    if stream is None:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    ss = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(eq=False)
class WeightedGraph:
    """Simple undirected graph with positive weights over nodes ``0..n-1``.

    Edges are stored once each with ``src < dst``. The adjacency is also kept
    in CSR form (rows sorted by neighbour id) together with ``cum_weight``, the
    running total of CSR weights; row ``i`` owns the slice
    ``cum_weight[indptr[i]:indptr[i+1]+1]``, which is the cumulative-weight
    prefix used for O(log d) neighbour draws.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    labels: list = field(default_factory=list)
    self_loops_dropped: int = 0
    duplicates_merged: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise EdgeListError("graph has no nodes")
        if np.any(self.weight <= 0) or not np.all(np.isfinite(self.weight)):
            raise EdgeListError("edge weights must be finite and strictly positive")
        if not self.labels:
            self.labels = list(range(self.n))
        rows = np.concatenate([self.src, self.dst])
        cols = np.concatenate([self.dst, self.src])
        vals = np.concatenate([self.weight, self.weight])
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(self.indptr, rows + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.indices = cols.astype(np.int64)
        self.nbr_weight = vals.astype(float)
        self.cum_weight = np.concatenate([[0.0], np.cumsum(self.nbr_weight)])
        self.degree = np.bincount(rows, weights=vals, minlength=self.n).astype(float)

    @classmethod
    def from_edges(cls, n, src, dst, weight=None, labels=None) -> "WeightedGraph":
        """Build a simple graph, summing duplicate/reciprocal edges and dropping self-loops."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        w = np.ones(len(src)) if weight is None else np.asarray(weight, dtype=float)
        if not (len(src) == len(dst) == len(w)):
            raise EdgeListError("src, dst and weight lengths differ")
        if len(src) and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n):
            raise EdgeListError("node id out of range")
        if np.any(w <= 0):
            raise EdgeListError("edge weights must be strictly positive")
        loops = src == dst
        src, dst, w = src[~loops], dst[~loops], w[~loops]
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        key = lo * n + hi
        uniq, inv = np.unique(key, return_inverse=True)
        merged_w = np.bincount(inv, weights=w, minlength=len(uniq))
        return cls(
            n=int(n),
            src=uniq // n,
            dst=uniq % n,
            weight=merged_w,
            labels=list(labels) if labels is not None else [],
            self_loops_dropped=int(loops.sum()),
            duplicates_merged=int(len(key) - len(uniq)),
        )

    @property
    def m(self) -> int:
        return len(self.src)

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def edge_weight(self, u: int, v: int) -> float:
        """``w_uv``, or 0.0 when ``u`` and ``v`` are not adjacent."""
        lo, hi = self.indptr[u], self.indptr[u + 1]
        k = lo + int(np.searchsorted(self.indices[lo:hi], v))
        return float(self.nbr_weight[k]) if k < hi and self.indices[k] == v else 0.0

    def adjacency(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.nbr_weight, self.indices, self.indptr), shape=(self.n, self.n))

    def transition(self) -> sp.csr_matrix:
        """Row-stochastic ``D^-1 A``."""
        return sp.diags(1.0 / self.degree) @ self.adjacency()

    def laplacian(self) -> sp.csr_matrix:
        return (sp.diags(self.degree) - self.adjacency()).tocsr()

    def is_connected(self) -> bool:
        ncomp, _ = connected_components(self.adjacency(), directed=False)
        return ncomp == 1

    def subgraph(self, nodes: Sequence[int]) -> "WeightedGraph":
        """Induced subgraph; ``nodes`` is sorted and relabelled ``0..k-1`` in that order."""
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        keep = (remap[self.src] >= 0) & (remap[self.dst] >= 0)
        return WeightedGraph(
            n=len(nodes),
            src=remap[self.src[keep]],
            dst=remap[self.dst[keep]],
            weight=self.weight[keep].copy(),
            labels=[self.labels[i] for i in nodes],
            self_loops_dropped=self.self_loops_dropped,
            duplicates_merged=self.duplicates_merged,
        )


def _compact_ids(tokens: list[str]) -> tuple[dict, list]:
    try:
        ints = [int(t) for t in tokens]
    except ValueError:
        labels = list(dict.fromkeys(tokens))
        return {t: i for i, t in enumerate(labels)}, labels
    labels = sorted(set(ints))
    index = {lab: i for i, lab in enumerate(labels)}
    return {t: index[v] for t, v in zip(tokens, ints)}, labels


def load_edge_list(path, directed: bool = False) -> WeightedGraph:
    """Read a whitespace-delimited ``u v [w]`` edge list.

    Lines starting with ``#`` or ``%`` are comments. Node ids are compacted to
    ``0..n-1`` (numerically sorted when every id is an integer, otherwise in
    order of first appearance); the original ids are kept in ``labels``.

    Repeated and reciprocal lines are summed into one undirected edge. With
    ``directed=True`` the file is read as arcs: arcs in the same direction are
    summed, and a reciprocal pair ``u->v``, ``v->u`` becomes one edge carrying
    the larger of the two directional weights, so files that list every
    undirected tie in both directions are not double counted.
    """
    us, vs, ws = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text[0] in "#%":
                continue
            parts = text.split()
            if len(parts) not in (2, 3):
                raise EdgeListError(f"{path}:{lineno}: expected 'u v' or 'u v w', got {text!r}")
            w = 1.0
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise EdgeListError(f"{path}:{lineno}: bad weight {parts[2]!r}") from None
                if not np.isfinite(w) or w <= 0:
                    raise EdgeListError(f"{path}:{lineno}: weight must be positive, got {parts[2]}")
            us.append(parts[0])
            vs.append(parts[1])
            ws.append(w)
    if not us:
        raise EdgeListError(f"{path}: no edges found")

    mapping, labels = _compact_ids(us + vs)
    src = np.array([mapping[t] for t in us], dtype=np.int64)
    dst = np.array([mapping[t] for t in vs], dtype=np.int64)
    w = np.array(ws)
    n = len(labels)

    if directed:
        loops = src == dst
        arcs = sp.coo_matrix((w[~loops], (src[~loops], dst[~loops])), shape=(n, n)).tocsr()
        sym = arcs.maximum(arcs.T).tocoo()
        upper = sym.row < sym.col
        g = WeightedGraph.from_edges(n, sym.row[upper], sym.col[upper], sym.data[upper], labels)
        g.self_loops_dropped = int(loops.sum())
        g.duplicates_merged = int(len(src) - loops.sum() - g.m)
    else:
        g = WeightedGraph.from_edges(n, src, dst, w, labels)
    if g.m == 0:
        raise EdgeListError(f"{path}: graph is empty after dropping self-loops")
    if g.self_loops_dropped:
        log.info("%s: dropped %d self-loops", path, g.self_loops_dropped)
    if g.duplicates_merged:
        log.info("%s: merged %d duplicate or reciprocal edges", path, g.duplicates_merged)
    return g


def write_id_map(g: WeightedGraph, path) -> None:
    """Two columns: compacted id, original id."""
    with open(path, "w") as fh:
        for i, lab in enumerate(g.labels):
            fh.write(f"{i} {lab}\n")


def largest_connected_component(g: WeightedGraph) -> WeightedGraph:
    """Induced subgraph on the largest component.

    Equal-size components are ranked by their smallest node id; compaction
    keeps numeric id order, so this is the smallest original id too.
    """
    _, comp = connected_components(g.adjacency(), directed=False)
    sizes = np.bincount(comp)
    # first occurrence scanning ids upward = smallest id per component
    first = np.full(len(sizes), g.n, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(g.n))
    best = min(range(len(sizes)), key=lambda c: (-sizes[c], first[c]))
    return g.subgraph(np.flatnonzero(comp == best))


def sample_neighbor(g: WeightedGraph, u: int, rng: np.random.Generator) -> int:
    """Neighbour ``v`` of ``u`` with probability ``w_uv / d_u`` (binary search on the prefix)."""
    lo, hi = g.indptr[u], g.indptr[u + 1]
    if lo == hi:
        raise ValueError(f"node {u} is isolated")
    base = g.cum_weight[lo]
    target = base + rng.random() * (g.cum_weight[hi] - base)
    k = int(np.searchsorted(g.cum_weight[lo + 1:hi + 1], target, side="right"))
    return int(g.indices[lo + min(k, hi - lo - 1)])


def sample_neighbors(g: WeightedGraph, nodes: np.ndarray, rng: np.random.Generator):
    """Vectorised :func:`sample_neighbor`; returns ``(next_nodes, traversed_edge_weights)``."""
    lo = g.indptr[nodes]
    hi = g.indptr[nodes + 1]
    base = g.cum_weight[lo]
    target = base + rng.random(len(nodes)) * (g.cum_weight[hi] - base)
    k = np.searchsorted(g.cum_weight[1:], target, side="right")
    k = np.clip(k, lo, hi - 1)
    return g.indices[k], g.nbr_weight[k]


def random_walk(g: WeightedGraph, start: int, steps: int, rng: np.random.Generator,
                return_path: bool = False):
    """Endpoint of a ``steps``-step weighted walk from ``start`` (plus the visited path if asked)."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    path = [int(start)]
    cur = int(start)
    for _ in range(steps):
        cur = sample_neighbor(g, cur, rng)
        path.append(cur)
    return (cur, path) if return_path else cur


@dataclass
class RandomWalkState:
    """A walker owning its own random stream."""

    graph: WeightedGraph
    current: int
    rng: np.random.Generator

    def __post_init__(self):
        if not 0 <= self.current < self.graph.n:
            raise ValueError(f"invalid node id {self.current}")

    def step(self) -> int:
        self.current = sample_neighbor(self.graph, self.current, self.rng)
        return self.current
