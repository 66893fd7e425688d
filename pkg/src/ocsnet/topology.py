"""Matchings and concrete topologies for the three switch families.

The rotor family is the cyclic-shift decomposition of the complete
digraph; the static family is the union of independently sampled
fixed-point-free random permutations, giving a random regular expander.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


@dataclass(frozen=True)
class Matching:
    """A fixed-point-free permutation mapping input port i to output port perm[i]."""

    perm: tuple

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        n = len(perm)
        if sorted(perm) != list(range(n)):
            raise ValueError("matching must be a permutation of 0..n-1")
        if any(p == i for i, p in enumerate(perm)):
            raise ValueError("matching must be fixed-point free")
        object.__setattr__(self, "perm", perm)

    def __len__(self):
        return len(self.perm)

    def __getitem__(self, i):
        return self.perm[i]


def rotor_cycle(n) -> list[Matching]:
    """The n-1 cyclic-shift matchings; their union covers every ordered pair once."""
    if n < 2:
        raise ValueError(f"rotor cycle needs n >= 2, got {n}")
    return [Matching(tuple((i + t) % n for i in range(n))) for t in range(1, n)]


@dataclass(frozen=True)
class ExpanderGraph:
    """Union of ``degree`` fixed-point-free random matchings on n nodes.

    Multi-edges across matchings are kept (``multiplicity``) and count as
    parallel capacity; path computations treat them as one edge.
    """

    n: int
    degree: int
    seed: int
    matchings: tuple

    @property
    def multiplicity(self) -> np.ndarray:
        mult = np.zeros((self.n, self.n), dtype=np.int64)
        for m in self.matchings:
            mult[np.arange(self.n), m.perm] += 1
        return mult

    def adjacency(self) -> np.ndarray:
        return self.multiplicity > 0

    def distances(self) -> np.ndarray:
        """All-pairs unweighted shortest-path hop counts (directed)."""
        graph = csr_matrix(self.adjacency())
        return shortest_path(graph, method="D", unweighted=True, directed=True)

    def is_connected(self) -> bool:
        d = self.distances()
        return bool(np.isfinite(d).all())


def _random_derangement(n, rng):
    # resample until fixed-point free; expected O(e) tries
    while True:
        perm = rng.permutation(n)
        if not (perm == np.arange(n)).any():
            return Matching(tuple(int(p) for p in perm))


def build_expander(n, k_s, seed) -> ExpanderGraph:
    """Union of k_s independently sampled random derangements, reproducible per seed."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if k_s < 1:
        raise ValueError(f"k_s must be >= 1, got {k_s}")
    rng = np.random.default_rng(seed)
    matchings = tuple(_random_derangement(n, rng) for _ in range(k_s))
    return ExpanderGraph(n=n, degree=k_s, seed=seed, matchings=matchings)


def expected_path_length(graph: ExpanderGraph) -> float:
    """Mean shortest-path hop count over all ordered pairs (u, v), u != v.

    Raises on a disconnected graph, naming an unreachable pair.
    """
    d = graph.distances()
    np.fill_diagonal(d, 0.0)
    bad = np.argwhere(~np.isfinite(d))
    if len(bad):
        u, v = bad[0]
        raise ValueError(f"graph is disconnected: no path from {u} to {v}")
    n = graph.n
    return float(d.sum() / (n * (n - 1)))


def mean_expected_path_length(n, k_s, seeds) -> float:
    """epl averaged over freshly built expanders, one per seed."""
    vals = [expected_path_length(build_expander(n, k_s, s)) for s in seeds]
    return float(np.mean(vals))


def write_edge_list(graph: ExpanderGraph, path):
    """Export one ``src dst`` pair per line; multi-edges repeat."""
    with open(path, "w") as fh:
        for m in graph.matchings:
            for src, dst in enumerate(m.perm):
                fh.write(f"{src} {dst}\n")
