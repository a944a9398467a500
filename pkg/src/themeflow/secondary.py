"""Multi-label classification of full-text segments against the frozen registry.

Segments are evaluated once per born-iteration group of stable themes, with
Other available as the fallback in every pass; the union of specific answers
across passes forms the segment's label set. A segment whose passes all come
back Other keeps a lone Other label.
"""
from __future__ import annotations

import logging
import random
import statistics
from dataclasses import dataclass

from .corpus import Segment
from .errors import EmptyInput
from .primary import ThemeRegistry, classify_batch, consensus_classify
from .synthesis import Theme, ThemeSet, OTHER_DESCRIPTION, OTHER_TITLE

log = logging.getLogger(__name__)

CASE_SINGLE_SPECIFIC = "SingleSpecific"
CASE_INDEFINITE_OTHER = "IndefiniteOther"
CASE_MULTI_TOPIC = "MultiTopic"

AMBIGUITY_LABEL_COUNT = 4  # more labels than this flags the segment


@dataclass(frozen=True)
class SegmentLabelSet:
    doc_id: str
    segment_index: int
    labels: frozenset[int]  # global theme ids; the Other id only ever appears alone
    case: str
    flagged_ambiguous: bool = False

    def __post_init__(self) -> None:
        if not self.labels:
            raise ValueError("labels must be non-empty")

    @classmethod
    def from_labels(cls, doc_id: str, segment_index: int, labels: set[int], other_id: int) -> "SegmentLabelSet":
        specific = {l for l in labels if l != other_id}
        final = specific if specific else {other_id}
        if final == {other_id}:
            case = CASE_INDEFINITE_OTHER
        elif len(final) == 1:
            case = CASE_SINGLE_SPECIFIC
        else:
            case = CASE_MULTI_TOPIC
        return cls(
            doc_id=doc_id,
            segment_index=segment_index,
            labels=frozenset(final),
            case=case,
            flagged_ambiguous=len(final) > AMBIGUITY_LABEL_COUNT,
        )


@dataclass(frozen=True)
class SecondaryConfig:
    single_shot: bool = False  # one pass over every theme instead of per-iteration groups
    consensus_runs: int = 0  # 0 disables segment-level consensus
    classify_batch_size: int = 25


@dataclass
class CaseSummary:
    n_single_specific: int
    n_indefinite_other: int
    n_multi_topic: int
    mean_labels_per_multi: float
    std_labels_per_multi: float

    @property
    def total(self) -> int:
        return self.n_single_specific + self.n_indefinite_other + self.n_multi_topic


def _partition_theme_sets(registry: ThemeRegistry, single_shot: bool) -> list[ThemeSet]:
    """Theme groups for incremental evaluation, keyed by global id, plus Other."""
    if registry.n_themes == 0:
        raise EmptyInput("registry holds no stable themes")
    groups: list[list] = (
        [[e for e in registry.entries]] if single_shot else [g for _, g in registry.iteration_groups()]
    )
    out = []
    for entries in groups:
        themes = [
            Theme(
                local_id=e.global_id,
                title=e.theme.title,
                description=e.theme.description,
                keywords=e.theme.keywords,
                born_iteration=e.born_iteration,
            )
            for e in entries
        ]
        other = Theme(local_id=registry.other_id, title=OTHER_TITLE, description=OTHER_DESCRIPTION)
        out.append(ThemeSet(themes=themes + [other], includes_other=True))
    return out


def classify_segments_multilabel(
    segments: list[Segment],
    registry: ThemeRegistry,
    provider,
    rng: random.Random,
    provider_config,
    config: SecondaryConfig | None = None,
) -> list[SegmentLabelSet]:
    config = config or SecondaryConfig()
    theme_sets = _partition_theme_sets(registry, config.single_shot)
    keyed = {f"s{i}": seg for i, seg in enumerate(segments)}
    texts = [(key, seg.text) for key, seg in keyed.items()]
    other_id = registry.other_id

    union: dict[str, set[int]] = {key: set() for key in keyed}
    for themes in theme_sets:
        pass_rng = random.Random(rng.getrandbits(64))
        if config.consensus_runs >= 3:
            records = consensus_classify(
                texts, themes, provider, pass_rng, provider_config,
                runs=config.consensus_runs, min_agree=(config.consensus_runs // 2) + 1,
                batch_size=config.classify_batch_size,
            )
            labels = {r.doc_id: (r.final_label if r.final_label is not None else other_id) for r in records}
        else:
            labels = classify_batch(
                texts, themes, provider, pass_rng, provider_config, batch_size=config.classify_batch_size
            )
        for key, label in labels.items():
            if label != other_id:
                union[key].add(label)

    out = []
    for key, seg in keyed.items():
        out.append(SegmentLabelSet.from_labels(seg.doc_id, seg.index_in_doc, union[key], other_id))
    out.sort(key=lambda s: (s.doc_id, s.segment_index))
    return out


def case_partition(label_sets: list[SegmentLabelSet]) -> CaseSummary:
    """Disjoint, exhaustive case counts plus label-count statistics for Case 3."""
    n_single = sum(1 for s in label_sets if s.case == CASE_SINGLE_SPECIFIC)
    n_other = sum(1 for s in label_sets if s.case == CASE_INDEFINITE_OTHER)
    multi_sizes = [len(s.labels) for s in label_sets if s.case == CASE_MULTI_TOPIC]
    mean = statistics.fmean(multi_sizes) if multi_sizes else 0.0
    std = statistics.pstdev(multi_sizes) if multi_sizes else 0.0
    return CaseSummary(
        n_single_specific=n_single,
        n_indefinite_other=n_other,
        n_multi_topic=len(multi_sizes),
        mean_labels_per_multi=mean,
        std_labels_per_multi=std,
    )
