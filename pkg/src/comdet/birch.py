"""Single-pass CF-tree clustering of embedding rows.

Builds the classic insertion-phase tree: points descend to the leaf whose
centroid is nearest, are absorbed into an existing subcluster when the merged
radius stays under the threshold, and otherwise open a new subcluster. Nodes
that outgrow the branching factor split around their farthest pair of
centroids. The leaf subclusters, read off in depth-first order, are the final
communities — no global reclustering pass, so the number of communities falls
out of the data rather than being chosen up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Partition

__all__ = ["BirchConfig", "ClusteringFeature", "birch_cluster"]


@dataclass
class ClusteringFeature:
    """Sufficient statistics of a cluster: count, linear sum, squared sum."""

    n: int
    ls: np.ndarray
    ss: float

    @classmethod
    def from_point(cls, x: np.ndarray) -> "ClusteringFeature":
        return cls(1, np.array(x, dtype=np.float64), float(x @ x))

    def __add__(self, other: "ClusteringFeature") -> "ClusteringFeature":
        return ClusteringFeature(self.n + other.n, self.ls + other.ls,
                                 self.ss + other.ss)

    def add_inplace(self, other: "ClusteringFeature") -> None:
        self.n += other.n
        self.ls += other.ls
        self.ss += other.ss

    @property
    def centroid(self) -> np.ndarray:
        return self.ls / self.n

    @property
    def radius(self) -> float:
        c = self.ls / self.n
        var = self.ss / self.n - float(c @ c)
        return math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class BirchConfig:
    threshold_radius: float = 0.5
    branching_factor: int = 50

    def __post_init__(self) -> None:
        if not self.threshold_radius > 0:
            raise ValueError(f"threshold_radius must be > 0, got {self.threshold_radius}")
        if self.branching_factor < 2:
            raise ValueError(f"branching_factor must be >= 2, got {self.branching_factor}")


@dataclass
class _Entry:
    """Leaf subcluster: its statistics plus the rows it has absorbed."""

    cf: ClusteringFeature
    rows: list[int]


@dataclass
class _Node:
    leaf: bool
    cf: ClusteringFeature
    entries: list[_Entry] = field(default_factory=list)
    children: list["_Node"] = field(default_factory=list)


def _nearest(point: np.ndarray, cfs: list[ClusteringFeature]) -> int:
    """Index of the CF whose centroid is closest (first wins ties)."""
    best, best_d = 0, math.inf
    for i, cf in enumerate(cfs):
        diff = point - cf.centroid
        d = float(diff @ diff)
        if d < best_d:
            best, best_d = i, d
    return best


def _farthest_pair(cfs: list[ClusteringFeature]) -> tuple[int, int]:
    cents = np.array([cf.centroid for cf in cfs])
    best = (0, 1)
    best_d = -1.0
    for i in range(len(cfs)):
        diff = cents[i + 1:] - cents[i]
        if diff.size == 0:
            continue
        d = (diff * diff).sum(axis=1)
        j = int(np.argmax(d))
        if d[j] > best_d:
            best_d = float(d[j])
            best = (i, i + 1 + j)
    return best


def _split(node: _Node) -> tuple[_Node, _Node]:
    """Divide an overfull node around its two most distant members."""
    items: list = node.entries if node.leaf else node.children
    cfs = [it.cf for it in items]
    a, b = _farthest_pair(cfs)
    groups: tuple[list, list] = ([], [])
    ca, cb = cfs[a].centroid, cfs[b].centroid
    for i, it in enumerate(items):
        if i == a:
            groups[0].append(it)
        elif i == b:
            groups[1].append(it)
        else:
            c = cfs[i].centroid
            da = float((c - ca) @ (c - ca))
            db = float((c - cb) @ (c - cb))
            groups[0 if da <= db else 1].append(it)
    halves = []
    for grp in groups:
        total = grp[0].cf
        for it in grp[1:]:
            total = total + it.cf
        if node.leaf:
            halves.append(_Node(True, total, entries=grp))
        else:
            halves.append(_Node(False, total, children=grp))
    return halves[0], halves[1]


def _insert(node: _Node, cf: ClusteringFeature, row: int,
            cfg: BirchConfig) -> tuple[_Node, _Node] | None:
    """Insert one point; returns the two halves if this node had to split."""
    point = cf.centroid
    if node.leaf:
        if node.entries:
            i = _nearest(point, [e.cf for e in node.entries])
            if (node.entries[i].cf + cf).radius <= cfg.threshold_radius:
                node.entries[i].cf.add_inplace(cf)
                node.entries[i].rows.append(row)
                node.cf.add_inplace(cf)
                return None
        node.entries.append(_Entry(cf, [row]))
        node.cf.add_inplace(cf)
        if len(node.entries) > cfg.branching_factor:
            return _split(node)
        return None

    i = _nearest(point, [c.cf for c in node.children])
    spill = _insert(node.children[i], cf, row, cfg)
    node.cf.add_inplace(cf)
    if spill is not None:
        node.children[i:i + 1] = list(spill)
        if len(node.children) > cfg.branching_factor:
            return _split(node)
    return None


def _leaf_entries(node: _Node) -> list[_Entry]:
    if node.leaf:
        return list(node.entries)
    out: list[_Entry] = []
    for child in node.children:
        out.extend(_leaf_entries(child))
    return out


def birch_cluster(x_e: np.ndarray, cfg: BirchConfig | None = None) -> Partition:
    """Cluster embedding rows; returns one community per leaf subcluster."""
    if cfg is None:
        cfg = BirchConfig()
    x = np.asarray(x_e, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"need a 2-d array with at least one row, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("embedding rows must be finite")

    root = _Node(True, ClusteringFeature(0, np.zeros(x.shape[1]), 0.0))
    for row in range(x.shape[0]):
        spill = _insert(root, ClusteringFeature.from_point(x[row]), row, cfg)
        if spill is not None:
            cf = spill[0].cf + spill[1].cf
            root = _Node(False, cf, children=list(spill))

    assignment = np.empty(x.shape[0], dtype=np.int64)
    for cid, entry in enumerate(_leaf_entries(root)):
        assignment[entry.rows] = cid
    return Partition(assignment)
