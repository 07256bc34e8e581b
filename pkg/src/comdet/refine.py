"""Refine labeled communities into connected, modularity-improving sub-communities.

Each label's induced sub-network is partitioned by the best of several Leiden
runs, then sub-communities are merged back greedily, one pair per step, always
taking the pair whose merge raises global modularity the most. Merging stops
at the component-count threshold and never joins two sub-communities that
share no edge, so every refined community stays internally connected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .graph import (
    Graph,
    Partition,
    canonical_labels,
    connected_components,
    induced_subgraph,
    merge_partitions,
)
from .leiden import LeidenConfig, best_of_runs
from .metrics import modularity


class ThresholdRule(str, Enum):
    """Per-label merge floor: half the component count, or the full count."""

    HALF_COMPONENTS = "half-components"
    ALL_COMPONENTS = "all-components"


@dataclass
class RefineConfig:
    leiden_runs: int = 10
    threshold_rule: ThresholdRule = ThresholdRule.HALF_COMPONENTS
    seed: int = 0
    leiden: LeidenConfig | None = None  # template for per-label runs (seed ignored)


def refine_labels(g: Graph, labels: Partition, config: RefineConfig | None = None) -> Partition:
    """Split every labeled community into connected sub-communities.

    Returns a refinement of ``labels``: no refined community crosses a label
    boundary, every refined community is connected, and global modularity
    never drops below that of ``labels``.
    """
    cfg = config if config is not None else RefineConfig()
    if labels.n != g.n:
        raise ValueError("labels do not cover the graph")
    template = cfg.leiden if cfg.leiden is not None else LeidenConfig()
    inners = []
    for c in range(labels.k):
        members = np.flatnonzero(labels.assignment == c)
        sub, _ = induced_subgraph(g, members)
        comp_count = connected_components(sub).k
        if sub.m == 0:
            part = Partition(np.arange(sub.n))
        else:
            seeds = [np.random.SeedSequence(entropy=cfg.seed, spawn_key=(c, i))
                     for i in range(cfg.leiden_runs)]
            part = best_of_runs(sub, cfg.leiden_runs,
                                lambda p: modularity(sub, p),
                                seeds=seeds, config=template)
        inners.append(_merge_down(g, members, sub, part, comp_count, cfg.threshold_rule))
    return merge_partitions(labels, inners)


def _merge_down(g: Graph, members: np.ndarray, sub: Graph, part: Partition,
                comp_count: int, rule: ThresholdRule) -> Partition:
    """Greedy pair merging of one label's sub-communities.

    Gains are compared as integers (delta-Q times 2*m^2 equals
    2*m*e_ij - deg_i*deg_j on the full graph), ties go to the
    lexicographically smallest pair, and pairs without a connecting edge are
    never merged.
    """
    k = part.k
    if rule is ThresholdRule.HALF_COMPONENTS:
        threshold = comp_count / 2.0
    else:
        threshold = float(comp_count)
    target = max(math.ceil(threshold), 1)

    assign = part.assignment.copy()
    deg = [int(g.degrees[members[assign == i]].sum()) for i in range(k)]
    pair_e: dict[tuple[int, int], int] = {}
    for a, b in zip(sub.edge_u.tolist(), sub.edge_v.tolist()):
        ca, cb = int(assign[a]), int(assign[b])
        if ca != cb:
            key = (ca, cb) if ca < cb else (cb, ca)
            pair_e[key] = pair_e.get(key, 0) + 1

    m = g.m
    count = k
    while count > target:
        best_gain = None
        best_pair = None
        for pair in sorted(pair_e):
            e = pair_e[pair]
            if e <= 0:
                continue
            i, j = pair
            gain = 2 * m * e - deg[i] * deg[j]
            if best_gain is None or gain > best_gain:
                best_gain, best_pair = gain, pair
        if best_pair is None:
            break  # only disconnected pairs remain
        i, j = best_pair
        assign[assign == j] = i
        deg[i] += deg[j]
        folded: dict[tuple[int, int], int] = {}
        for (a, b), e in pair_e.items():
            a2 = i if a == j else a
            b2 = i if b == j else b
            if a2 == b2:
                continue  # the merged pair's own edges became internal
            key = (a2, b2) if a2 < b2 else (b2, a2)
            folded[key] = folded.get(key, 0) + e
        pair_e = folded
        count -= 1
    return Partition(canonical_labels(assign))


def merge_step(g: Graph, current: Partition, candidates=None) -> Partition:
    """Merge the one pair of communities whose merged partition scores highest.

    Considers every candidate pair (including pairs without connecting edges;
    their gain is negative but still comparable), holding all other
    communities fixed. Ties go to the lexicographically smallest (i, j).
    """
    if candidates is None:
        cand = list(range(current.k))
    else:
        cand = sorted(set(int(c) for c in candidates))
        if any(c < 0 or c >= current.k for c in cand):
            raise ValueError("candidate community id out of range")
    if len(cand) < 2:
        raise ValueError("need at least two communities to merge")
    if current.n != g.n:
        raise ValueError("partition size does not match graph")

    a = current.assignment
    deg = np.bincount(a, weights=g.degrees, minlength=current.k).astype(np.int64)
    pair_e: dict[tuple[int, int], int] = {}
    for u, v in zip(g.edge_u.tolist(), g.edge_v.tolist()):
        cu, cv = int(a[u]), int(a[v])
        if cu != cv:
            key = (cu, cv) if cu < cv else (cv, cu)
            pair_e[key] = pair_e.get(key, 0) + 1

    m = g.m
    best_gain = None
    best_pair = None
    for x in range(len(cand)):
        for y in range(x + 1, len(cand)):
            i, j = cand[x], cand[y]
            gain = 2 * m * pair_e.get((i, j), 0) - int(deg[i]) * int(deg[j])
            if best_gain is None or gain > best_gain:
                best_gain, best_pair = gain, (i, j)
    i, j = best_pair
    merged = a.copy()
    merged[merged == j] = i
    return Partition(canonical_labels(merged))
