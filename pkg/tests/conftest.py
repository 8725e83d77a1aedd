import os
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from hofj import WeightedGraph
from hofj.harness import tree_graph


def random_connected_graph(n, p, seed, weighted=False):
    """G(n, p) redrawn until connected; optional weights in [0.5, 3)."""
    rng = np.random.default_rng(seed)
    while True:
        G = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
        if nx.is_connected(G):
            break
    e = np.array(G.edges())
    w = rng.uniform(0.5, 3.0, len(e)) if weighted else None
    return WeightedGraph.from_edges(n, e[:, 0], e[:, 1], w)


def nx_transition(g):
    """Dense D^-1 A straight from a networkx rebuild of ``g``, independent of WeightedGraph's CSR."""
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    for a, b, w in zip(g.src, g.dst, g.weight):
        G.add_edge(int(a), int(b), weight=float(w))
    A = nx.to_numpy_array(G, nodelist=range(g.n), weight="weight")
    return A / A.sum(axis=1, keepdims=True)


def chung_lu_edges(n, m, seed, gamma=2.5):
    """Power-law expected-degree graph with roughly ``m`` edges."""
    i = np.arange(1, n + 1)
    w = i ** (-1.0 / (gamma - 1))
    w *= 2 * m / w.sum()
    return nx.expected_degree_graph(list(w), seed=seed, selfloops=False).edges()


def surrogate_edges(n_target, m_target, seed):
    """Chung-Lu edges whose largest component has at least ``n_target`` nodes."""
    n, m = n_target, m_target
    while True:
        edges = chung_lu_edges(n, m, seed)
        G = nx.Graph(edges)
        lcc = max(nx.connected_components(G), key=len)
        if len(lcc) >= n_target:
            return G.subgraph(lcc).edges()
        grow = n_target / len(lcc)
        n, m = int(np.ceil(n * grow)), int(np.ceil(m * grow))


def write_edges(edges, path):
    with open(path, "w") as fh:
        fh.write("% surrogate corpus\n")
        for a, b in edges:
            fh.write(f"{a} {b}\n")
    return path


# (n', m') of the small rows used as surrogate targets
SURROGATES = {
    "hamsterster-friends": (1788, 12476),
    "hamsterster-full": (2000, 16098),
    "pages-tvshow": (3892, 17239),
}


@pytest.fixture(scope="session")
def corpus_paths(tmp_path_factory):
    """Real corpora from $HOFJ_CORPORA if set, otherwise surrogate edge lists."""
    root = os.environ.get("HOFJ_CORPORA")
    if root:
        return {p.name: p for p in sorted(Path(root).iterdir()) if p.is_file()}
    d = tmp_path_factory.mktemp("corpora")
    return {
        name: write_edges(surrogate_edges(n, m, seed=i), d / f"{name}.txt")
        for i, (name, (n, m)) in enumerate(SURROGATES.items())
    }


@pytest.fixture
def tree():
    return tree_graph()


@pytest.fixture
def triangle():
    return WeightedGraph.from_edges(3, [0, 1, 0], [1, 2, 2])
