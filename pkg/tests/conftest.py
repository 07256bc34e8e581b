"""Shared fixtures and oracle helpers.

BLAS threading is pinned to one thread before numpy loads so that repeated
runs produce bit-identical floating point results.
"""

from __future__ import annotations

import itertools
import os

for _var in ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "OMP_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

from comdet.graph import Graph, Partition


@pytest.fixture
def triangle() -> Graph:
    return Graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def two_triangles_bridge() -> Graph:
    """Two triangles joined by a single bridge edge (nodes 0-2 and 3-5)."""
    return Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


@pytest.fixture
def two_cliques_bridge() -> Graph:
    """Two 4-cliques joined by one bridge edge (nodes 0-3 and 4-7)."""
    edges = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    edges += [(a + 4, b + 4) for a, b in [(a, b) for a in range(4) for b in range(a + 1, 4)]]
    edges.append((3, 4))
    return Graph(8, edges)


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    """Erdos-Renyi style graph, edges drawn independently."""
    mask = rng.random((n, n)) < p
    iu = np.triu_indices(n, k=1)
    keep = mask[iu]
    edges = np.stack([iu[0][keep], iu[1][keep]], axis=1)
    return Graph(n, edges)


def random_connected_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    """Random graph made connected by threading a random spanning path first."""
    perm = rng.permutation(n)
    edges = {(min(int(a), int(b)), max(int(a), int(b)))
             for a, b in zip(perm[:-1], perm[1:])}
    mask = rng.random((n, n)) < p
    iu = np.triu_indices(n, k=1)
    keep = mask[iu]
    edges.update((int(a), int(b)) for a, b in zip(iu[0][keep], iu[1][keep]))
    return Graph(n, sorted(edges))


def random_partition(rng: np.random.Generator, n: int, k: int) -> Partition:
    """Uniform random assignment with every community guaranteed occupied."""
    a = rng.integers(0, k, size=n)
    a[rng.permutation(n)[:k]] = np.arange(k)
    return Partition(Partition.from_labels(a.tolist()).assignment)


def modularity_double_sum(g: Graph, cs: Partition) -> float:
    """O(n^2) oracle: the textbook double sum over all ordered node pairs."""
    if g.m == 0:
        return 0.0
    a = np.zeros((g.n, g.n))
    a[g.edge_u, g.edge_v] = 1.0
    a[g.edge_v, g.edge_u] = 1.0
    k = g.degrees.astype(np.float64)
    two_m = 2.0 * g.m
    same = cs.assignment[:, None] == cs.assignment[None, :]
    return float(np.sum((a - np.outer(k, k) / two_m) * same) / two_m)


def all_partitions(n: int):
    """Every set partition of range(n) as an assignment list (Bell-number many)."""
    if n == 0:
        yield []
        return
    for smaller in all_partitions(n - 1):
        k = max(smaller) + 1 if smaller else 0
        for c in range(k + 1):
            yield smaller + [c]


def pair_set(p: Partition) -> set[tuple[int, int]]:
    """Unordered co-assigned node pairs, the pairwise-metric oracle."""
    out = set()
    for members in p.communities():
        out.update(itertools.combinations(sorted(int(x) for x in members), 2))
    return out
