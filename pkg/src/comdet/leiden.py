"""Leiden community detection: queue-based local moving, refinement, aggregation.

Communities returned by :func:`leiden` are always internally connected, and at
convergence no single-node move can increase modularity. Both guarantees come
from the outer loop: each pass reruns the full multilevel procedure from the
flattened partition of the previous pass, any disconnected community is split
into its components after every pass, and the loop stops only when an entire
pass changes nothing. Move gains are compared in exact integer arithmetic
(gain scaled by 4*m^2 is an integer on integer-weighted graphs), so runs are
bit-deterministic for a given seed.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .graph import Graph, Partition, canonical_labels, split_into_components


@dataclass
class LeidenConfig:
    """Knobs for :func:`leiden`. Quality is fixed to modularity at resolution 1."""

    seed: int | np.random.SeedSequence | None = 0
    max_passes: int = 20
    theta: float = 0.01


class _LevelGraph:
    """Weighted aggregate graph for one level of the hierarchy.

    ``self_w[v]`` holds the total weight of edges contracted inside ``v``;
    ``strength[v]`` is the weighted degree including twice the self weight,
    so ``sum(strength) == two_m`` at every level.
    """

    __slots__ = ("n", "nbrs", "ws", "strength", "self_w", "two_m")

    def __init__(self, n, nbrs, ws, strength, self_w, two_m):
        self.n = n
        self.nbrs = nbrs
        self.ws = ws
        self.strength = strength
        self.self_w = self_w
        self.two_m = two_m

    @classmethod
    def from_graph(cls, g: Graph) -> "_LevelGraph":
        nbrs = [g.neighbors(v).tolist() for v in range(g.n)]
        ws = [[1] * len(a) for a in nbrs]
        strength = [int(d) for d in g.degrees]
        return cls(g.n, nbrs, ws, strength, [0] * g.n, 2 * g.m)


def _local_move(lg: _LevelGraph, comm: list[int], rng: np.random.Generator) -> bool:
    """Move nodes to strictly better communities until none exists.

    After the FIFO queue drains, full sweeps re-check every node: a move
    changes sigma_tot of two communities, which can flip the best choice of
    nodes that are not adjacent to the mover, so queue exhaustion alone does
    not certify the fixpoint. Returns True when any node moved.
    """
    n = lg.n
    if n == 0:
        return False
    two_m = lg.two_m
    strength = lg.strength
    nbrs, ws = lg.nbrs, lg.ws

    k = max(comm) + 1
    sigma_tot = [0] * n
    for v in range(n):
        sigma_tot[comm[v]] += strength[v]
    free = list(range(n - 1, k - 1, -1))  # pop() hands out unused labels ascending

    queue = deque(rng.permutation(n).tolist())
    in_queue = [True] * n
    moved_any = False

    def attempt(v: int) -> bool:
        cv = comm[v]
        kv = strength[v]
        w: dict[int, int] = {}
        for u, wt in zip(nbrs[v], ws[v]):
            cu = comm[u]
            w[cu] = w.get(cu, 0) + wt
        sigma_tot[cv] -= kv
        best_c = cv
        best_gain = w.get(cv, 0) * two_m - sigma_tot[cv] * kv
        for c in sorted(w):
            if c == cv:
                continue
            gain = w[c] * two_m - sigma_tot[c] * kv
            if gain > best_gain:
                best_gain, best_c = gain, c
        if best_gain < 0 and sigma_tot[cv] > 0:
            best_c = free.pop()  # a fresh singleton (gain 0) beats every option
        comm[v] = best_c
        sigma_tot[best_c] += kv
        if best_c == cv:
            return False
        if sigma_tot[cv] == 0:
            free.append(cv)
        for u in nbrs[v]:
            if comm[u] != best_c and not in_queue[u]:
                queue.append(u)
                in_queue[u] = True
        return True

    while True:
        while queue:
            v = queue.popleft()
            in_queue[v] = False
            if attempt(v):
                moved_any = True
        improved = False
        for v in range(n):
            if attempt(v):
                moved_any = True
                improved = True
        if not improved and not queue:
            return moved_any


def _refine(lg: _LevelGraph, comm: list[int], rng: np.random.Generator,
            theta: float) -> list[int]:
    """Sub-partition each community by merging singleton nodes into neighbors.

    Only nodes still alone are candidates, merges stay inside the node's
    community, require a connecting edge, and must not decrease modularity.
    Among admissible targets one is drawn with probability proportional to
    exp(gain/theta), which keeps better merges likely while letting the
    aggregation explore slightly different groupings per seed.
    """
    n = lg.n
    two_m = lg.two_m
    strength = lg.strength
    nbrs, ws = lg.nbrs, lg.ws
    scale = 2.0 / float(two_m) ** 2 if two_m else 0.0

    ref = list(range(n))
    ref_sigma = list(strength)
    ref_size = [1] * n

    for v in rng.permutation(n).tolist():
        if ref_size[ref[v]] != 1:
            continue
        cv = comm[v]
        rv = ref[v]
        w: dict[int, int] = {}
        for u, wt in zip(nbrs[v], ws[v]):
            if comm[u] == cv and ref[u] != rv:
                s = ref[u]
                w[s] = w.get(s, 0) + wt
        if not w:
            continue
        kv = strength[v]
        cands: list[int] = []
        gains: list[float] = []
        for s in sorted(w):
            gain = w[s] * two_m - ref_sigma[s] * kv
            if gain >= 0:
                cands.append(s)
                gains.append(float(gain) * scale)
        if not cands:
            continue
        if len(cands) == 1:
            target = cands[0]
        else:
            logits = np.asarray(gains) / theta
            p = np.exp(logits - logits.max())
            target = cands[int(rng.choice(len(cands), p=p / p.sum()))]
        ref[v] = target
        ref_sigma[target] += kv
        ref_sigma[rv] -= kv
        ref_size[target] += 1
        ref_size[rv] -= 1
    return ref


def _aggregate(lg: _LevelGraph, ref: np.ndarray,
               comm: list[int]) -> tuple[_LevelGraph, list[int]]:
    """Contract each refined group to one node; multiplicities become weights."""
    r_count = int(ref.max()) + 1
    pair_w: dict[tuple[int, int], int] = {}
    self_w = [0] * r_count
    for v in range(lg.n):
        a = int(ref[v])
        self_w[a] += lg.self_w[v]
        for u, wt in zip(lg.nbrs[v], lg.ws[v]):
            if u < v:
                continue
            b = int(ref[u])
            if a == b:
                self_w[a] += wt
            else:
                key = (a, b) if a < b else (b, a)
                pair_w[key] = pair_w.get(key, 0) + wt

    nbrs: list[list[int]] = [[] for _ in range(r_count)]
    ws: list[list[int]] = [[] for _ in range(r_count)]
    for (a, b) in sorted(pair_w):
        wt = pair_w[(a, b)]
        nbrs[a].append(b)
        ws[a].append(wt)
        nbrs[b].append(a)
        ws[b].append(wt)

    strength = [0] * r_count
    new_comm = [0] * r_count
    for v in range(lg.n):
        a = int(ref[v])
        strength[a] += lg.strength[v]
        new_comm[a] = comm[v]
    new_lg = _LevelGraph(r_count, nbrs, ws, strength, self_w, lg.two_m)
    return new_lg, new_comm


def _one_pass(g: Graph, start: np.ndarray, rng: np.random.Generator,
              theta: float) -> np.ndarray:
    """One full multilevel pass starting from the given flat partition."""
    lg = _LevelGraph.from_graph(g)
    comm = canonical_labels(start).tolist()
    leaf = np.arange(g.n, dtype=np.int64)
    while lg.n:
        _local_move(lg, comm, rng)
        dense = canonical_labels(np.asarray(comm, dtype=np.int64))
        comm = dense.tolist()
        if int(dense.max()) + 1 == lg.n:
            break
        ref = canonical_labels(np.asarray(_refine(lg, comm, rng, theta), dtype=np.int64))
        if int(ref.max()) + 1 == lg.n:
            break  # nothing merged; aggregation would be the identity
        lg, comm = _aggregate(lg, ref, comm)
        leaf = ref[leaf]
    flat = np.asarray(comm, dtype=np.int64)[leaf] if g.n else np.empty(0, dtype=np.int64)
    return canonical_labels(flat)


def leiden(g: Graph, config: LeidenConfig | None = None) -> Partition:
    """Detect communities by modularity optimization.

    Deterministic for a given seed. Edgeless graphs come back as singletons.
    """
    cfg = config if config is not None else LeidenConfig()
    rng = np.random.default_rng(cfg.seed)
    comm = np.arange(g.n, dtype=np.int64)
    prev = comm.copy()
    for _ in range(cfg.max_passes):
        comm = _one_pass(g, comm, rng, cfg.theta)
        comm = split_into_components(g, Partition(comm)).assignment
        comm = canonical_labels(comm)
        if np.array_equal(comm, prev):
            break
        prev = comm.copy()
    return Partition(comm)


def _run_one(args) -> Partition:
    g, cfg = args
    return leiden(g, cfg)


def best_of_runs(g: Graph, runs: int, score, seeds=None,
                 config: LeidenConfig | None = None, parallel: int = 1) -> Partition:
    """Best scoring partition over ``runs`` seeded Leiden runs.

    ``score`` maps a partition to a real number; ties go to the lowest run
    index. When ``seeds`` is omitted they are spawned deterministically from
    the config seed, so repeated calls reproduce the same winner.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    cfg = config if config is not None else LeidenConfig()
    if seeds is None:
        base = cfg.seed if isinstance(cfg.seed, int) else 0
        seeds = [np.random.SeedSequence(entropy=base, spawn_key=(i,)) for i in range(runs)]
    else:
        seeds = list(seeds)
        if len(seeds) != runs:
            raise ValueError(f"expected {runs} seeds, got {len(seeds)}")
    configs = [replace(cfg, seed=s) for s in seeds]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            parts = list(pool.map(_run_one, [(g, c) for c in configs]))
    else:
        parts = [leiden(g, c) for c in configs]
    scores = np.asarray([float(score(p)) for p in parts])
    return parts[int(np.argmax(scores))]
