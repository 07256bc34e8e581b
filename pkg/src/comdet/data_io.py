"""Dataset loading, validation, synthetic generation, and result files.

All on-disk formats are plain text (see docs/FORMATS.md): whitespace edge
lists over arbitrary string ids, dense CSV or sparse-triplet attributes,
"id label" ground-truth files, and JSON for metric/config records. The label
file defines the node universe and its order; the other files must agree
with it exactly, and any mismatch is a hard error naming the offenders.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, Partition, canonical_labels, connected_components

__all__ = [
    "DataError",
    "DatasetBundle",
    "SyntheticSpec",
    "adjacency_as_features",
    "generate_synthetic",
    "load_dataset",
    "load_partition",
    "write_bundle",
    "write_results",
]

_MAX_LISTED = 5  # offenders shown in error messages before truncating


class DataError(Exception):
    """Malformed or inconsistent input data (CLI exit code 2)."""


@dataclass
class DatasetBundle:
    """A network, its node attributes, and its human-labeled communities."""

    graph: Graph
    attributes: np.ndarray
    labels: Partition
    node_ids: list[str]
    name: str = "unnamed"
    notes: list[str] = field(default_factory=list)
    planted: Partition | None = None  # synthetic blocks before any uniting

    def __post_init__(self) -> None:
        n = self.graph.n
        if self.attributes.ndim != 2 or self.attributes.shape[0] != n:
            raise DataError(
                f"attribute matrix has shape {self.attributes.shape}, expected ({n}, T)")
        if self.labels.n != n:
            raise DataError(f"labels cover {self.labels.n} nodes, graph has {n}")
        if len(self.node_ids) != n:
            raise DataError(f"{len(self.node_ids)} node ids for {n} nodes")
        if not np.all(np.isfinite(self.attributes)):
            raise DataError("attribute matrix contains non-finite values")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def t(self) -> int:
        return int(self.attributes.shape[1])


def _read_lines(path) -> list[list[str]]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {p}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append(stripped.split())
    return rows


def _listed(items) -> str:
    items = list(items)
    shown = ", ".join(repr(s) for s in items[:_MAX_LISTED])
    extra = len(items) - _MAX_LISTED
    return shown + (f" (+{extra} more)" if extra > 0 else "")


def _load_labels(path) -> tuple[list[str], dict[str, int], np.ndarray]:
    """Node universe and dense label codes, both in file order."""
    node_ids: list[str] = []
    index: dict[str, int] = {}
    label_codes: dict[str, int] = {}
    codes: list[int] = []
    for row in _read_lines(path):
        if len(row) != 2:
            raise DataError(f"{path}: label lines must be 'id label', got {row!r}")
        node, label = row
        if node in index:
            raise DataError(f"{path}: duplicate node id {node!r}")
        index[node] = len(node_ids)
        node_ids.append(node)
        codes.append(label_codes.setdefault(label, len(label_codes)))
    if not node_ids:
        raise DataError(f"{path}: no labeled nodes")
    return node_ids, index, np.array(codes, dtype=np.int64)


def _load_edges(path, index: dict[str, int], n: int) -> tuple[Graph, list[str]]:
    pairs: list[tuple[int, int]] = []
    unknown: list[str] = []
    for row in _read_lines(path):
        if len(row) != 2:
            raise DataError(f"{path}: edge lines must be 'u v', got {row!r}")
        miss = [tok for tok in row if tok not in index]
        if miss:
            unknown.extend(miss)
            continue
        pairs.append((index[row[0]], index[row[1]]))
    if unknown:
        raise DataError(
            f"{path}: edge endpoints missing from the label file: {_listed(dict.fromkeys(unknown))}")
    g = Graph(n, pairs)
    notes = []
    if g.dropped_self_loops:
        notes.append(f"dropped {g.dropped_self_loops} self-loop(s)")
    if g.dropped_duplicates:
        notes.append(f"dropped {g.dropped_duplicates} duplicate edge(s)")
    return g, notes


def _load_attributes(path, index: dict[str, int], n: int) -> np.ndarray:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    # dense CSV rows carry commas; sparse triplet rows are whitespace-only
    dense = "," in raw
    seen: set[int] = set()
    if dense:
        width = None
        rows: dict[int, np.ndarray] = {}
        unknown: list[str] = []
        for lineno, line in enumerate(raw.splitlines(), 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            cells = [c.strip() for c in stripped.split(",")]
            node = cells[0]
            if node not in index:
                unknown.append(node)
                continue
            try:
                values = np.array([float(c) for c in cells[1:]])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad attribute value ({exc})") from exc
            if width is None:
                width = values.size
            elif values.size != width:
                raise DataError(
                    f"{path}:{lineno}: row has {values.size} values, expected {width}")
            i = index[node]
            if i in seen:
                raise DataError(f"{path}: duplicate attribute row for id {node!r}")
            seen.add(i)
            rows[i] = values
        if unknown:
            raise DataError(
                f"{path}: attribute ids missing from the label file: "
                f"{_listed(dict.fromkeys(unknown))}")
        if width is None or width == 0:
            raise DataError(f"{path}: no attribute columns found")
        x = np.zeros((n, width))
        for i, values in rows.items():
            x[i] = values
    else:
        triplets: list[tuple[int, int, float]] = []
        unknown = []
        t = 0
        for row in _read_lines(path):
            if len(row) != 3:
                raise DataError(
                    f"{path}: sparse attribute lines must be 'id index value', got {row!r}")
            node, idx_s, val_s = row
            if node not in index:
                unknown.append(node)
                continue
            try:
                j = int(idx_s)
                v = float(val_s)
            except ValueError as exc:
                raise DataError(f"{path}: bad triplet {row!r} ({exc})") from exc
            if j < 0:
                raise DataError(f"{path}: negative attribute index in {row!r}")
            i = index[node]
            seen.add(i)
            triplets.append((i, j, v))
            t = max(t, j + 1)
        if unknown:
            raise DataError(
                f"{path}: attribute ids missing from the label file: "
                f"{_listed(dict.fromkeys(unknown))}")
        if not triplets:
            raise DataError(f"{path}: no attribute entries found")
        x = np.zeros((n, t))
        for i, j, v in triplets:
            x[i, j] = v
    missing = [i for i in range(n) if i not in seen]
    if missing:
        raise DataError(
            f"{path}: nodes without any attribute row: "
            f"{_listed(str(i) for i in missing)}")
    if not np.all(np.isfinite(x)):
        raise DataError(f"{path}: attribute matrix contains non-finite values")
    return x


def load_dataset(edge_path, attr_path, label_path, name: str | None = None) -> DatasetBundle:
    """Load a bundle; the label file defines the node universe and order."""
    node_ids, index, codes = _load_labels(label_path)
    g, notes = _load_edges(edge_path, index, len(node_ids))
    if attr_path is None:
        x = adjacency_as_features(g)
        notes.append("no attribute file; using adjacency rows as features")
    else:
        x = _load_attributes(attr_path, index, len(node_ids))
    return DatasetBundle(g, x, Partition(codes), node_ids,
                         name=name or Path(label_path).stem, notes=notes)


def load_partition(path, node_ids: list[str]) -> Partition:
    """Read an 'id community' file covering exactly the given universe."""
    index = {s: i for i, s in enumerate(node_ids)}
    codes = np.full(len(node_ids), -1, dtype=np.int64)
    label_codes: dict[str, int] = {}
    unknown: list[str] = []
    for row in _read_lines(path):
        if len(row) != 2:
            raise DataError(f"{path}: assignment lines must be 'id community', got {row!r}")
        node, label = row
        if node not in index:
            unknown.append(node)
            continue
        if codes[index[node]] != -1:
            raise DataError(f"{path}: duplicate assignment for id {node!r}")
        codes[index[node]] = label_codes.setdefault(label, len(label_codes))
    if unknown:
        raise DataError(
            f"{path}: assignment ids missing from the label file: {_listed(dict.fromkeys(unknown))}")
    if (codes == -1).any():
        missing = [node_ids[i] for i in np.flatnonzero(codes == -1)]
        raise DataError(f"{path}: nodes without an assignment: {_listed(missing)}")
    return Partition(codes)


def adjacency_as_features(g: Graph) -> np.ndarray:
    """Dense 0/1 adjacency rows for attribute-free runs."""
    if g.n > 5000:
        warnings.warn(f"materializing a dense {g.n}x{g.n} adjacency as features",
                      stacklevel=2)
    x = np.zeros((g.n, g.n))
    x[g.edge_u, g.edge_v] = 1.0
    x[g.edge_v, g.edge_u] = 1.0
    return x


@dataclass(frozen=True)
class SyntheticSpec:
    """Planted-partition generator settings."""

    n: int = 300
    k: int = 6
    p_in: float = 0.3
    p_out: float = 0.01
    t: int = 24
    s: float = 0.8
    disconnect_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1 or self.k < 1 or self.k > self.n:
            raise DataError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")
        if not (0.0 <= self.p_out < self.p_in <= 1.0):
            raise DataError(
                f"need 0 <= p_out < p_in <= 1, got p_in={self.p_in}, p_out={self.p_out}")
        if not 0.0 <= self.s <= 1.0:
            raise DataError(f"signal strength must be in [0, 1], got {self.s}")
        if not 0.0 <= self.disconnect_fraction <= 1.0:
            raise DataError(
                f"disconnect_fraction must be in [0, 1], got {self.disconnect_fraction}")
        if self.t < self.k:
            raise DataError(
                f"need at least one signature column per community: t={self.t} < k={self.k}")


def _block_sizes(n: int, k: int) -> list[int]:
    base, extra = divmod(n, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


def generate_synthetic(spec: SyntheticSpec) -> DatasetBundle:
    """Planted-partition bundle with per-block attribute signatures.

    Each block gets an internal spanning path so it is connected by
    construction. When ``disconnect_fraction`` > 0, the first
    ``min(round(f*k), k//2)`` pairs of blocks are united under a single label
    with all edges between the paired blocks suppressed — the united labels
    are then disconnected with exactly two components each. The pre-uniting
    block structure is kept in ``bundle.planted``.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    n, k = spec.n, spec.k
    sizes = _block_sizes(n, k)
    block = np.repeat(np.arange(k), sizes)

    same = block[:, None] == block[None, :]
    prob = np.where(same, spec.p_in, spec.p_out)

    npairs = min(int(round(spec.disconnect_fraction * k)), k // 2)
    label_of_block = np.arange(k)
    for p in range(npairs):
        a, b = 2 * p, 2 * p + 1
        label_of_block[b] = label_of_block[a]
        # suppress edges between united blocks so the label is disconnected
        mask = (block[:, None] == a) & (block[None, :] == b)
        prob[mask | mask.T] = 0.0
    # squeeze label ids dense after uniting
    labels = Partition(canonical_labels(label_of_block[block]))

    draw = rng.random((n, n))
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    adj = upper & (draw < prob)
    edges = [(int(u), int(v)) for u, v in zip(*np.nonzero(adj))]
    # spanning path per block keeps every block internally connected
    start = 0
    for size in sizes:
        for v in range(start, start + size - 1):
            edges.append((v, v + 1))
        start += size
    g = Graph(n, edges)

    csizes = _block_sizes(spec.t, k)
    col_block = np.repeat(np.arange(k), csizes)
    owns = block[:, None] == col_block[None, :]
    p_attr = np.where(owns, 0.5 + spec.s / 2.0, 0.5 - spec.s / 2.0)
    x = (rng.random((n, spec.t)) < p_attr).astype(np.float64)

    notes = [f"planted partition p_in={spec.p_in} p_out={spec.p_out}"]
    if npairs:
        notes.append(f"united {npairs} block pair(s) into disconnected labels")
    return DatasetBundle(g, x, labels, [str(i) for i in range(n)],
                         name=f"synthetic-n{n}-k{k}-seed{spec.seed}",
                         notes=notes, planted=Partition(block))


def _json_text(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def write_results(out_dir, partition: Partition, metrics: dict, config: dict,
                  node_ids: list[str] | None = None,
                  timings: dict | None = None) -> dict[str, Path]:
    """Emit assignment.tsv, metrics.json, config.json (and timings.json)."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    ids = node_ids if node_ids is not None else [str(i) for i in range(partition.n)]
    if len(ids) != partition.n:
        raise DataError(f"{len(ids)} node ids for a partition over {partition.n} nodes")

    paths = {
        "assignment": out / "assignment.tsv",
        "metrics": out / "metrics.json",
        "config": out / "config.json",
    }
    lines = "".join(f"{ids[i]}\t{partition.assignment[i]}\n" for i in range(partition.n))
    _write_text(paths["assignment"], lines)
    _write_text(paths["metrics"], _json_text(metrics))
    _write_text(paths["config"], _json_text(config))
    if timings is not None:
        paths["timings"] = out / "timings.json"
        _write_text(paths["timings"], _json_text(timings))
    return paths


def _format_value(v: float) -> str:
    return repr(float(v))


def write_bundle(bundle: DatasetBundle, out_dir) -> dict[str, Path]:
    """Write a bundle as edges.tsv / attrs.csv / labels.tsv (+ planted.tsv)."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    g, ids = bundle.graph, bundle.node_ids
    paths = {
        "edges": out / "edges.tsv",
        "attrs": out / "attrs.csv",
        "labels": out / "labels.tsv",
    }
    _write_text(paths["edges"], "".join(
        f"{ids[u]}\t{ids[v]}\n" for u, v in zip(g.edge_u, g.edge_v)))
    _write_text(paths["attrs"], "".join(
        ids[i] + "," + ",".join(_format_value(v) for v in bundle.attributes[i]) + "\n"
        for i in range(bundle.n)))
    _write_text(paths["labels"], "".join(
        f"{ids[i]}\t{bundle.labels.assignment[i]}\n" for i in range(bundle.n)))
    if bundle.planted is not None:
        paths["planted"] = out / "planted.tsv"
        _write_text(paths["planted"], "".join(
            f"{ids[i]}\t{bundle.planted.assignment[i]}\n" for i in range(bundle.n)))
    return paths


def load_cora_content(content_path, cites_path) -> tuple[Path, Path, Path]:
    """Convert the public two-file citation layout into this tool's formats.

    ``content_path`` lines are "id w_1 ... w_T class"; ``cites_path`` lines
    are "cited citing". Writes edges.tsv / attrs.csv / labels.tsv next to the
    content file and returns their paths.
    """
    content = Path(content_path)
    cites = Path(cites_path)
    out = content.parent
    ids: list[str] = []
    attr_lines: list[str] = []
    label_lines: list[str] = []
    for row in _read_lines(content):
        if len(row) < 3:
            raise DataError(f"{content}: content lines need id, features, class")
        node, *feats, label = row
        ids.append(node)
        attr_lines.append(node + "," + ",".join(
            _format_value(float(f)) for f in feats) + "\n")
        label_lines.append(f"{node}\t{label}\n")
    known = set(ids)
    edge_lines = []
    for row in _read_lines(cites):
        if len(row) != 2:
            raise DataError(f"{cites}: cite lines must be 'cited citing'")
        if row[0] in known and row[1] in known:
            edge_lines.append(f"{row[0]}\t{row[1]}\n")
    paths = (out / "edges.tsv", out / "attrs.csv", out / "labels.tsv")
    _write_text(paths[0], "".join(edge_lines))
    _write_text(paths[1], "".join(attr_lines))
    _write_text(paths[2], "".join(label_lines))
    return paths


def component_counts(g: Graph, p: Partition) -> np.ndarray:
    """Connected components inside each community (reused by reports)."""
    return np.array([connected_components(g, p.members(c)).k for c in range(p.k)])
