"""Undirected graph container, node partitions, and component utilities."""

from __future__ import annotations

from collections import deque

import numpy as np


class Graph:
    """Immutable simple undirected graph over nodes ``0..n-1``.

    Self-loops and duplicate edges in the input are dropped; the counts are
    kept in ``dropped_self_loops`` and ``dropped_duplicates`` so loaders can
    report them. Adjacency is stored CSR-style (``indptr``/``indices``) with
    neighbor lists sorted ascending, plus canonical edge arrays
    ``edge_u < edge_v`` for vectorized edge scans.
    """

    def __init__(self, n: int, edges=()) -> None:
        if n < 0:
            raise ValueError(f"node count must be >= 0, got {n}")
        self.n = int(n)

        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("edges must be pairs of node indices")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            bad = arr[(arr < 0).any(axis=1) | (arr >= n).any(axis=1)]
            raise ValueError(f"edge endpoints out of range [0, {n}): {bad[:5].tolist()}")

        loops = arr[:, 0] == arr[:, 1]
        self.dropped_self_loops = int(loops.sum())
        arr = arr[~loops]

        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        if lo.size:
            codes = lo * np.int64(n) + hi
            uniq, idx = np.unique(codes, return_index=True)
            self.dropped_duplicates = int(codes.size - uniq.size)
            order = np.sort(idx)
            # keep first occurrences, then order canonically by (u, v)
            lo, hi = lo[order], hi[order]
            perm = np.lexsort((hi, lo))
            lo, hi = lo[perm], hi[perm]
        else:
            self.dropped_duplicates = 0

        self.edge_u = lo
        self.edge_v = hi
        self.m = int(lo.size)

        heads = np.concatenate([lo, hi])
        tails = np.concatenate([hi, lo])
        perm = np.lexsort((tails, heads))
        self.indices = tails[perm]
        counts = np.bincount(heads, minlength=n)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.degrees = counts.astype(np.int64)
        assert int(self.degrees.sum()) == 2 * self.m

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted neighbor indices of node ``i`` (a view, do not mutate)."""
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degree(self, i: int) -> int:
        return int(self.degrees[i])

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class Partition:
    """Dense community assignment over nodes ``0..n-1``.

    Community ids must occupy ``0..k-1`` with no gaps. Instances are value
    objects: equality compares assignment arrays, ``equivalent_to`` compares
    co-membership structure regardless of labeling.
    """

    def __init__(self, assignment) -> None:
        a = np.asarray(assignment, dtype=np.int64).copy()
        if a.ndim != 1:
            raise ValueError("assignment must be a 1-d sequence")
        if a.size:
            if a.min() < 0:
                raise ValueError("community ids must be non-negative")
            k = int(a.max()) + 1
            occupied = np.bincount(a, minlength=k)
            if (occupied == 0).any():
                missing = np.flatnonzero(occupied == 0)
                raise ValueError(f"community ids not dense, missing {missing[:5].tolist()}")
        else:
            k = 0
        a.flags.writeable = False
        self.assignment = a
        self.k = k

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Build from arbitrary hashable labels, relabeled densely in first-occurrence order."""
        seen: dict = {}
        out = np.empty(len(labels), dtype=np.int64)
        for i, lab in enumerate(labels):
            if lab not in seen:
                seen[lab] = len(seen)
            out[i] = seen[lab]
        return cls(out)

    @property
    def n(self) -> int:
        return int(self.assignment.size)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def communities(self) -> list[np.ndarray]:
        """Member index arrays per community id, each sorted ascending."""
        order = np.argsort(self.assignment, kind="stable")
        bounds = np.cumsum(self.sizes())
        return [np.sort(chunk) for chunk in np.split(order, bounds[:-1])]

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == c)

    def canonical(self) -> "Partition":
        """Relabel to dense ids in first-occurrence order."""
        return Partition(canonical_labels(self.assignment))

    def equivalent_to(self, other: "Partition") -> bool:
        """True when both partitions induce the same co-membership relation."""
        if self.n != other.n or self.k != other.k:
            return False
        return np.array_equal(canonical_labels(self.assignment),
                              canonical_labels(other.assignment))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    def __hash__(self) -> int:
        return hash(self.assignment.tobytes())

    def __repr__(self) -> str:
        return f"Partition(n={self.n}, k={self.k})"


def canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel an integer label array to dense 0..k-1 in first-occurrence order."""
    labels = np.asarray(labels, dtype=np.int64)
    uniq, inverse = np.unique(labels, return_inverse=True)
    # np.unique sorts; remap so ids follow first occurrence instead
    first = np.full(uniq.size, labels.size, dtype=np.int64)
    np.minimum.at(first, inverse, np.arange(labels.size, dtype=np.int64))
    rank = np.empty(uniq.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(uniq.size)
    return rank[inverse]


def connected_components(g: Graph, nodes=None) -> Partition:
    """BFS components of ``g`` restricted to ``nodes`` (all nodes when None).

    Returns a partition aligned with the given node order (position ``i`` of
    the result is the component of ``nodes[i]``); component ids are dense in
    order of first discovery.
    """
    if nodes is None:
        nodes = np.arange(g.n, dtype=np.int64)
    else:
        nodes = np.asarray(nodes, dtype=np.int64)
        if nodes.size and (nodes.min() < 0 or nodes.max() >= g.n):
            raise ValueError("subset node out of range")
        if np.unique(nodes).size != nodes.size:
            raise ValueError("subset nodes must be distinct")
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[nodes] = np.arange(nodes.size)
    comp = np.full(nodes.size, -1, dtype=np.int64)
    next_id = 0
    for i in range(nodes.size):
        if comp[i] >= 0:
            continue
        comp[i] = next_id
        q = deque([int(nodes[i])])
        while q:
            u = q.popleft()
            for v in g.neighbors(u):
                j = pos[v]
                if j >= 0 and comp[j] < 0:
                    comp[j] = next_id
                    q.append(int(v))
        next_id += 1
    return Partition(comp)


def induced_subgraph(g: Graph, nodes) -> tuple[Graph, dict[int, int]]:
    """Subgraph on ``nodes`` plus the old-to-new index map.

    New indices follow the order of ``nodes``, so the map is a bijection onto
    ``0..len(nodes)-1``.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size and (nodes.min() < 0 or nodes.max() >= g.n):
        raise ValueError("subset node out of range")
    if np.unique(nodes).size != nodes.size:
        raise ValueError("subset nodes must be distinct")
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[nodes] = np.arange(nodes.size)
    edges = []
    for u in nodes:
        for v in g.neighbors(int(u)):
            if u < v and pos[v] >= 0:
                edges.append((int(pos[u]), int(pos[v])))
    sub = Graph(int(nodes.size), edges)
    index_map = {int(old): int(new) for new, old in enumerate(nodes)}
    return sub, index_map


def merge_partitions(outer: Partition, inners) -> Partition:
    """Compose an outer partition with one inner partition per outer community.

    ``inners[c]`` must partition the members of outer community ``c`` taken in
    ascending node order; the result places two nodes together exactly when
    they share both the outer community and the inner community.
    """
    inners = list(inners)
    if len(inners) != outer.k:
        raise ValueError(f"expected {outer.k} inner partitions, got {len(inners)}")
    out = np.full(outer.n, -1, dtype=np.int64)
    offset = 0
    for c in range(outer.k):
        members = np.flatnonzero(outer.assignment == c)
        inner = inners[c]
        if inner.n != members.size:
            raise ValueError(
                f"inner partition {c} covers {inner.n} nodes, community has {members.size}")
        out[members] = offset + inner.assignment
        offset += inner.k
    return Partition(out)


def split_into_components(g: Graph, cs: Partition) -> Partition:
    """Split every community of ``cs`` into its connected components."""
    if cs.n != g.n:
        raise ValueError("partition size does not match graph")
    inners = [connected_components(g, np.flatnonzero(cs.assignment == c))
              for c in range(cs.k)]
    return merge_partitions(cs, inners)
