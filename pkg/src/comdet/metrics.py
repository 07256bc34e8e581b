"""Partition quality metrics: modularity, NMI, conductance, pairwise F1, connectivity."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Graph, Partition, connected_components


@dataclass(frozen=True)
class ConfusionMatrix:
    """Contingency counts between two partitions of the same node set."""

    counts: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    n: int

    @classmethod
    def from_partitions(cls, c: Partition, d: Partition) -> "ConfusionMatrix":
        if c.n != d.n:
            raise ValueError(f"partition sizes differ: {c.n} vs {d.n}")
        counts = np.zeros((c.k, d.k), dtype=np.int64)
        np.add.at(counts, (c.assignment, d.assignment), 1)
        return cls(counts=counts,
                   row_sums=counts.sum(axis=1),
                   col_sums=counts.sum(axis=0),
                   n=c.n)


def modularity(g: Graph, cs: Partition) -> float:
    """Newman modularity of ``cs`` on ``g`` (resolution 1, per-community form).

    An edgeless graph has no structure to score; returns 0.0 with a warning.
    """
    if cs.n != g.n:
        raise ValueError("partition size does not match graph")
    if g.m == 0:
        warnings.warn("modularity of an edgeless graph is defined as 0", stacklevel=2)
        return 0.0
    a = cs.assignment
    m = float(g.m)
    same = a[g.edge_u] == a[g.edge_v]
    intra = np.bincount(a[g.edge_u][same], minlength=cs.k).astype(np.float64)
    deg = np.bincount(a, weights=g.degrees, minlength=cs.k)
    return float(np.sum(intra / m - (deg / (2.0 * m)) ** 2))


def nmi(c: Partition, d: Partition) -> float:
    """Normalized mutual information (natural log) between two partitions.

    Zero-count cells contribute nothing. When both partitions carry no
    information (zero total entropy), returns 1.0 for identical partitions
    and 0.0 otherwise.
    """
    cm = ConfusionMatrix.from_partitions(c, d)
    n = float(cm.n)
    counts = cm.counts.astype(np.float64)
    ri = cm.row_sums.astype(np.float64)
    cj = cm.col_sums.astype(np.float64)

    denom = 0.0
    for s in (ri, cj):
        nz = s > 0
        denom += float(np.sum(s[nz] * np.log(s[nz] / n)))
    if denom == 0.0:
        return 1.0 if c.equivalent_to(d) else 0.0

    nz = counts > 0
    outer = ri[:, None] * cj[None, :]
    numer = -2.0 * float(np.sum(counts[nz] * np.log(counts[nz] * n / outer[nz])))
    return numer / denom


def conductance(g: Graph, cs: Partition) -> tuple[np.ndarray, float]:
    """Per-community conductance values and their mean.

    Conductance of a community is the cut size divided by the smaller of the
    two side volumes; a zero-volume side makes the value 0 with a warning.
    """
    if cs.n != g.n:
        raise ValueError("partition size does not match graph")
    a = cs.assignment
    cross = a[g.edge_u] != a[g.edge_v]
    cut = (np.bincount(a[g.edge_u][cross], minlength=cs.k)
           + np.bincount(a[g.edge_v][cross], minlength=cs.k)).astype(np.float64)
    vol = np.bincount(a, weights=g.degrees, minlength=cs.k)
    other = 2.0 * g.m - vol
    small = np.minimum(vol, other)
    phis = np.zeros(cs.k, dtype=np.float64)
    ok = small > 0
    phis[ok] = cut[ok] / small[ok]
    if (~ok).any():
        warnings.warn(f"{int((~ok).sum())} communities have a zero-volume side; "
                      "their conductance is defined as 0", stacklevel=2)
    return phis, float(phis.mean()) if cs.k else 0.0


def f1_score(c: Partition, d: Partition) -> float:
    """Pairwise F1 of predicted partition ``c`` against reference ``d``.

    Precision and recall are computed over unordered co-assigned node pairs;
    returns 0 when precision + recall is 0.
    """
    cm = ConfusionMatrix.from_partitions(c, d)

    def pairs(x: np.ndarray) -> float:
        x = x.astype(np.float64)
        return float(np.sum(x * (x - 1.0) / 2.0))

    tp = pairs(cm.counts.ravel())
    pred = pairs(cm.row_sums)
    ref = pairs(cm.col_sums)
    precision = tp / pred if pred > 0 else 0.0
    recall = tp / ref if ref > 0 else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def connectivity_score(g: Graph, cs: Partition) -> float:
    """Mean number of connected components per community (1.0 = all connected)."""
    if cs.n != g.n:
        raise ValueError("partition size does not match graph")
    if cs.k == 0:
        raise ValueError("partition has no communities")
    total = 0
    for c in range(cs.k):
        members = np.flatnonzero(cs.assignment == c)
        total += connected_components(g, members).k
    return total / cs.k
