"""Bipartite aggregation of primary themes versus segment-level labels.

Left nodes are per-document primary assignments, right nodes are per-segment
label occurrences; one edge exists for every (segment, label) pair. The
adjacency matrix counts edges from primary theme (row) to segment label
(column); Other occupies the final row/column like any theme.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnassignedDocument
from .primary import ThemeRegistry
from .secondary import SegmentLabelSet


@dataclass(frozen=True)
class Edge:
    doc_id: str
    segment_index: int
    primary_label: int
    secondary_label: int


@dataclass
class BipartiteGraph:
    edges: list[Edge]
    theme_ids: list[int]  # dense global ids 1..n* followed by the Other id

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def left_nodes(self) -> set[int]:
        return {e.primary_label for e in self.edges}

    def right_nodes(self) -> set[int]:
        return {e.secondary_label for e in self.edges}


@dataclass
class AdjacencyMatrix:
    counts: np.ndarray  # (dim, dim) int64, rows = primary, cols = secondary
    theme_ids: list[int]
    _index: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (len(self.theme_ids), len(self.theme_ids)):
            raise ValueError("counts shape must match theme id count")
        if (self.counts < 0).any():
            raise ValueError("counts must be nonnegative")
        self._index = {tid: i for i, tid in enumerate(self.theme_ids)}

    @property
    def dim(self) -> int:
        return len(self.theme_ids)

    def total(self) -> int:
        return int(self.counts.sum())

    def cell(self, row_id: int, col_id: int) -> int:
        return int(self.counts[self._index[row_id], self._index[col_id]])

    def row_sum(self, theme_id: int) -> int:
        return int(self.counts[self._index[theme_id], :].sum())

    def col_sum(self, theme_id: int) -> int:
        return int(self.counts[:, self._index[theme_id]].sum())


def registry_theme_ids(registry: ThemeRegistry) -> list[int]:
    return [e.global_id for e in registry.entries] + [registry.other_id]


def reorder_matrix(matrix: AdjacencyMatrix, theme_order: list[int]) -> AdjacencyMatrix:
    """Permute rows and columns into an explicit theme ordering (for display)."""
    if sorted(theme_order) != sorted(matrix.theme_ids):
        raise ValueError("theme_order must be a permutation of the matrix theme ids")
    idx = {tid: i for i, tid in enumerate(matrix.theme_ids)}
    perm = [idx[t] for t in theme_order]
    return AdjacencyMatrix(counts=matrix.counts[np.ix_(perm, perm)], theme_ids=list(theme_order))


def build_bipartite(registry: ThemeRegistry, label_sets: list[SegmentLabelSet]) -> BipartiteGraph:
    edges = []
    for ls in label_sets:
        if ls.doc_id not in registry.assignments:
            raise UnassignedDocument(ls.doc_id)
        primary = registry.assignments[ls.doc_id]
        for label in sorted(ls.labels):
            edges.append(Edge(ls.doc_id, ls.segment_index, primary, label))
    return BipartiteGraph(edges=edges, theme_ids=registry_theme_ids(registry))


def adjacency_matrix(graph: BipartiteGraph) -> AdjacencyMatrix:
    index = {tid: i for i, tid in enumerate(graph.theme_ids)}
    counts = np.zeros((len(graph.theme_ids), len(graph.theme_ids)), dtype=np.int64)
    for e in graph.edges:
        counts[index[e.primary_label], index[e.secondary_label]] += 1
    return AdjacencyMatrix(counts=counts, theme_ids=list(graph.theme_ids))


@dataclass
class NormalizedMatrix:
    values: np.ndarray  # row-stochastic (zero rows stay zero)
    display: np.ndarray  # values with cells below the floor blanked to NaN
    theme_ids: list[int]
    blanked: list[tuple[int, int, float]]  # (row id, col id, hidden value)
    zero_rows: list[int]

    @property
    def blank_count(self) -> int:
        return len(self.blanked)


def normalize_rows(matrix: AdjacencyMatrix, floor: float = 0.01) -> NormalizedMatrix:
    """Row-normalize to proportions; hide (but record) cells below the floor."""
    counts = matrix.counts.astype(np.float64)
    sums = counts.sum(axis=1)
    values = np.zeros_like(counts)
    zero_rows = []
    for i, s in enumerate(sums):
        if s > 0:
            values[i] = counts[i] / s
        else:
            zero_rows.append(matrix.theme_ids[i])
    display = values.copy()
    blanked = []
    for i in range(matrix.dim):
        for j in range(matrix.dim):
            if 0.0 < values[i, j] < floor:
                blanked.append((matrix.theme_ids[i], matrix.theme_ids[j], float(values[i, j])))
                display[i, j] = np.nan
    return NormalizedMatrix(
        values=values, display=display, theme_ids=list(matrix.theme_ids), blanked=blanked, zero_rows=zero_rows
    )


@dataclass(frozen=True)
class FlowRow:
    theme_id: int
    same: int
    to_other: int
    gained: int
    corpus_share: float


def flow_summary(matrix: AdjacencyMatrix, registry: ThemeRegistry | None = None) -> list[FlowRow]:
    """Per-theme self-retention, outflow, influx, and share of all classifications.

    same = diagonal cell; to_other = row sum minus diagonal (labels that left
    the parent theme); gained = column sum minus diagonal (labels flowing in
    from other parents); corpus_share = (same + gained) / grand total.
    """
    total = matrix.total()
    rows = []
    for tid in matrix.theme_ids:
        same = matrix.cell(tid, tid)
        to_other = matrix.row_sum(tid) - same
        gained = matrix.col_sum(tid) - same
        share = (same + gained) / total if total else 0.0
        rows.append(FlowRow(theme_id=tid, same=same, to_other=to_other, gained=gained, corpus_share=share))
    return rows
