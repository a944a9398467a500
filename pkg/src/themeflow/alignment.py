"""Alignment of derived themes with editorial dual-classification labels.

For each theme: precision is the fraction of its documents carrying two
editorial category labels, recall is that count over all dually labeled
documents, and lift is precision over the corpus-wide baseline rate.
Commentary/perspective documents are excluded before counting.
"""
from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus
from .errors import EmptyCorpus, EmptyTheme
from .primary import ThemeRegistry

TIER_VERY_HIGH = "Very High"
TIER_HIGH = "High"
TIER_LOW = "Low"
TIER_VERY_LOW = "Very Low"

DEFAULT_TIER_BOUNDS = (1.5, 1.0, 0.5)


@dataclass
class AlignmentCounts:
    per_theme: dict[int, tuple[int, int]]  # theme id -> (n_class, n_dual)
    total_docs: int
    total_dual: int

    def __post_init__(self) -> None:
        if any(nd > nc for nc, nd in self.per_theme.values()):
            raise ValueError("n_dual cannot exceed n_class")
        if sum(nc for nc, _ in self.per_theme.values()) != self.total_docs:
            raise ValueError("per-theme counts must partition the corpus")


def build_alignment_counts(corpus: Corpus, registry: ThemeRegistry) -> AlignmentCounts:
    """Tally per-theme document and dual-label counts, skipping commentary."""
    per_theme: dict[int, list[int]] = {}
    total_docs = 0
    total_dual = 0
    for doc in corpus.research_documents():
        gid = registry.assignments.get(doc.id)
        if gid is None:
            continue
        bucket = per_theme.setdefault(gid, [0, 0])
        bucket[0] += 1
        total_docs += 1
        if doc.is_dual_classified:
            bucket[1] += 1
            total_dual += 1
    return AlignmentCounts(
        per_theme={gid: (nc, nd) for gid, (nc, nd) in per_theme.items()},
        total_docs=total_docs,
        total_dual=total_dual,
    )


def baseline_rate(counts: AlignmentCounts) -> float:
    if counts.total_docs == 0:
        raise EmptyCorpus("no documents to compute a baseline over")
    return counts.total_dual / counts.total_docs


def theme_metrics(counts: AlignmentCounts, theme_id: int) -> tuple[float, float, float | None]:
    """(precision, recall, lift); lift is None when the baseline is zero."""
    if theme_id not in counts.per_theme or counts.per_theme[theme_id][0] == 0:
        raise EmptyTheme(f"theme {theme_id} has no documents")
    n_class, n_dual = counts.per_theme[theme_id]
    precision = n_dual / n_class
    recall = n_dual / counts.total_dual if counts.total_dual else 0.0
    base = baseline_rate(counts)
    lift = precision / base if base > 0 else None
    return precision, recall, lift


def duality_tier(lift: float, bounds: tuple[float, float, float] = DEFAULT_TIER_BOUNDS) -> str:
    if lift < 0:
        raise ValueError("lift must be nonnegative")
    very_high, high, low = bounds
    if lift >= very_high:
        return TIER_VERY_HIGH
    if lift >= high:
        return TIER_HIGH
    if lift >= low:
        return TIER_LOW
    return TIER_VERY_LOW


@dataclass(frozen=True)
class AlignmentRow:
    theme_id: int
    title: str
    n_class: int
    n_dual: int
    precision: float
    recall: float
    lift: float | None
    tier: str


@dataclass
class AlignmentReport:
    rows: list[AlignmentRow]
    baseline: float
    total_docs: int
    total_dual: int


def alignment_report(
    counts: AlignmentCounts,
    registry: ThemeRegistry | None = None,
    bounds: tuple[float, float, float] = DEFAULT_TIER_BOUNDS,
) -> AlignmentReport:
    rows = []
    for gid in sorted(counts.per_theme):
        precision, recall, lift = theme_metrics(counts, gid)
        rows.append(
            AlignmentRow(
                theme_id=gid,
                title=registry.title(gid) if registry is not None else str(gid),
                n_class=counts.per_theme[gid][0],
                n_dual=counts.per_theme[gid][1],
                precision=precision,
                recall=recall,
                lift=lift,
                tier=duality_tier(lift, bounds) if lift is not None else "~",
            )
        )
    return AlignmentReport(
        rows=rows,
        baseline=baseline_rate(counts),
        total_docs=counts.total_docs,
        total_dual=counts.total_dual,
    )
