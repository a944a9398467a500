"""Recursive primary classification of abstracts.

Each iteration clusters the working set, synthesizes themes for the clusters,
consensus-classifies every working document five times against those themes,
and gates clusters on their agreement score. Documents whose consensus label
lands in a stable cluster are assigned to that theme's global registry entry;
everything else (labels in unstable clusters, Other, or unresolved consensus)
is carried into the next iteration. The loop stops once the carry-over falls
below the configured fraction of the initial working set, the remainder is
too small to cluster, or the iteration bound is hit.
"""
from __future__ import annotations

import hashlib
import logging
import random
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .errors import EmptyInput, MissingConsensus, MissingIds, TooFewVectors
from .providers import EmbeddingCache, ProviderConfig, chat_complete_structured, embed_texts, parsed_chunks
from .synthesis import Theme, ThemeSet, build_classify_prompt, synthesize_themes
from .vectors import ClusterAssignment, kmeans, top_representatives

log = logging.getLogger(__name__)


def derive_seed(seed: int, label: str) -> int:
    """Stage-scoped deterministic sub-seed from a single recorded root seed."""
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class LoopConfig:
    k: int = 7
    tau: float = 0.60
    delta: float = 0.10
    runs: int = 5
    consensus_min: int = 3
    max_iterations: int = 25
    rng_seed: int = 0
    representatives_per_cluster: int | None = None  # defaults to k
    classify_batch_size: int = 25
    kmeans_max_iter: int = 100

    def __post_init__(self) -> None:
        if not (0 < self.tau <= 1):
            raise ValueError("tau must lie in (0, 1]")
        if not (0 < self.delta < 1):
            raise ValueError("delta must lie in (0, 1)")
        if self.consensus_min > self.runs:
            raise ValueError("consensus_min cannot exceed runs")


@dataclass(frozen=True)
class ConsensusRecord:
    doc_id: str
    run_labels: tuple[int, ...]
    final_label: int | None  # None = unresolved
    agree_count: int

    def __post_init__(self) -> None:
        counts = Counter(self.run_labels)
        if self.agree_count != max(counts.values()):
            raise ValueError("agree_count must equal the max label multiplicity")
        if self.final_label is not None and counts[self.final_label] < 3:
            raise ValueError("final_label requires multiplicity >= 3")


@dataclass
class IterationState:
    t: int
    working_ids: list[str]
    assignment: ClusterAssignment
    themes: ThemeSet
    agreement: dict[int, float]
    stable_ids: list[int]
    unstable_ids: list[int]
    consensus: list[ConsensusRecord] = field(default_factory=list)
    assigned: dict[str, int] = field(default_factory=dict)  # doc -> global id


@dataclass(frozen=True)
class RegistryEntry:
    global_id: int
    theme: Theme
    born_iteration: int
    source_cluster: int


class ThemeRegistry:
    """Stable themes remapped to dense global indices, plus the final Other slot."""

    def __init__(self):
        self.entries: list[RegistryEntry] = []
        self.assignments: dict[str, int] = {}

    @property
    def n_themes(self) -> int:
        return len(self.entries)

    @property
    def other_id(self) -> int:
        return len(self.entries) + 1

    def add_theme(self, theme: Theme, born_iteration: int, source_cluster: int) -> int:
        gid = len(self.entries) + 1
        self.entries.append(RegistryEntry(gid, theme, born_iteration, source_cluster))
        return gid

    def assign(self, doc_id: str, global_id: int) -> None:
        if not (1 <= global_id <= self.n_themes):
            raise ValueError(f"global id {global_id} outside registry range")
        if doc_id in self.assignments:
            raise ValueError(f"document {doc_id!r} already assigned")
        self.assignments[doc_id] = global_id

    def assign_other(self, doc_id: str) -> None:
        if doc_id in self.assignments:
            raise ValueError(f"document {doc_id!r} already assigned")
        self.assignments[doc_id] = self.other_id

    def entry(self, global_id: int) -> RegistryEntry:
        return self.entries[global_id - 1]

    def title(self, global_id: int) -> str:
        if global_id == self.other_id:
            return "Other"
        return self.entry(global_id).theme.title

    def iteration_groups(self) -> list[tuple[int, list[RegistryEntry]]]:
        groups: dict[int, list[RegistryEntry]] = {}
        for e in self.entries:
            groups.setdefault(e.born_iteration, []).append(e)
        return sorted(groups.items())


@dataclass
class PipelineProviders:
    provider_config: ProviderConfig
    chat: object  # .complete(prompt) -> str
    embed_transport: object  # .embed(texts, model) -> list of vectors
    cache: EmbeddingCache = field(default_factory=EmbeddingCache)


@dataclass
class PipelineResult:
    registry: ThemeRegistry
    iterations: list[IterationState]
    converged: bool
    stop_reason: str  # delta | exhausted | max_iterations


# -- classification ------------------------------------------------------------


def classify_batch(
    texts: list[tuple[str, str]],
    themes: ThemeSet,
    provider,
    rng: random.Random,
    config: ProviderConfig,
    batch_size: int = 25,
) -> dict[str, int]:
    """One classification pass: shuffled order, chunked prompts, complete id map."""
    if not themes.specific:
        raise EmptyInput("theme set has no specific themes")
    if not texts:
        return {}
    categories = [(str(t.local_id), t.title, t.description) for t in themes.themes]
    valid = {str(t.local_id): t.local_id for t in themes.themes}
    other = themes.other_local_id
    wanted = {tid for tid, _ in texts}

    result: dict[str, int] = {}

    def ask(batch: list[tuple[str, str]]) -> None:
        prompt = build_classify_prompt(categories, batch)
        exchange = chat_complete_structured(prompt, config, "classifications", provider)
        for tid, cls in parsed_chunks(exchange.parsed_payload):
            if tid not in wanted:
                log.warning("reply names unknown id %r; ignored", tid)
                continue
            if tid in result:
                continue
            if cls in valid:
                result[tid] = valid[cls]
            else:
                log.warning("reply maps %r to unknown class %r; treated as Other", tid, cls)
                result[tid] = other

    order = list(texts)
    rng.shuffle(order)
    for start in range(0, len(order), batch_size):
        ask(order[start : start + batch_size])

    missing = [(tid, body) for tid, body in texts if tid not in result]
    if missing:
        ask(missing)  # one corrective re-ask
        still = sorted(tid for tid, _ in texts if tid not in result)
        if still:
            raise MissingIds(still)
    return {tid: result[tid] for tid, _ in texts}


def consensus_classify(
    texts: list[tuple[str, str]],
    themes: ThemeSet,
    provider,
    rng: random.Random,
    config: ProviderConfig,
    runs: int = 5,
    min_agree: int = 3,
    batch_size: int = 25,
) -> list[ConsensusRecord]:
    """Run the full classification `runs` times and take per-document majorities."""
    run_maps = []
    for _ in range(runs):
        sub_rng = random.Random(rng.getrandbits(64))
        run_maps.append(classify_batch(texts, themes, provider, sub_rng, config, batch_size))
    records = []
    for tid, _ in texts:
        labels = tuple(m[tid] for m in run_maps)
        label, count = Counter(labels).most_common(1)[0]
        final = label if count >= min_agree else None
        records.append(ConsensusRecord(doc_id=tid, run_labels=labels, final_label=final, agree_count=count))
    return records


def consensus_label(
    doc_id: str,
    text: str,
    themes: ThemeSet,
    provider,
    rng: random.Random,
    config: ProviderConfig,
    runs: int = 5,
    min_agree: int = 3,
) -> ConsensusRecord:
    return consensus_classify([(doc_id, text)], themes, provider, rng, config, runs, min_agree)[0]


# -- gating ---------------------------------------------------------------------


def agreement_scores(
    assignment: ClusterAssignment,
    doc_ids: list[str],
    consensus: list[ConsensusRecord],
) -> dict[int, float]:
    """Per-cluster fraction of members whose consensus label equals the cluster id."""
    by_doc = {r.doc_id: r for r in consensus}
    scores: dict[int, float] = {}
    for j in range(assignment.k):
        members = [doc_ids[i] for i in assignment.members(j)]
        hits = 0
        for d in members:
            if d not in by_doc:
                raise MissingConsensus(d)
            if by_doc[d].final_label == j:
                hits += 1
        scores[j] = hits / len(members) if members else 0.0
    return scores


def partition_stable(agreement: dict[int, float], tau: float) -> tuple[list[int], list[int]]:
    """Clusters at or above tau are stable; the boundary is inclusive."""
    stable = sorted(j for j, a in agreement.items() if a >= tau)
    unstable = sorted(j for j, a in agreement.items() if a < tau)
    return stable, unstable


def delta_reached(carry_size: int, initial_size: int, delta: float) -> bool:
    """Termination test: the carry-over must fall strictly below delta * |X^1|."""
    return carry_size < delta * initial_size


def gate_and_assign(
    doc_ids: list[str],
    final_label_of: dict[str, int | None],
    stable_ids: set[int],
    other_local_id: int,
) -> tuple[dict[str, int], list[str]]:
    """Split the working set into theme assignments and the carry-over.

    A document is assigned iff its consensus label names a stable cluster;
    labels pointing at unstable clusters, the Other category, or unresolved
    consensus are carried into the next iteration.
    """
    assigned: dict[str, int] = {}
    carried: list[str] = []
    for d in doc_ids:
        label = final_label_of.get(d)
        if label is not None and label != other_local_id and label in stable_ids:
            assigned[d] = label
        else:
            carried.append(d)
    return assigned, carried


# -- the loop ---------------------------------------------------------------------


def run_primary_pipeline(corpus: Corpus, config: LoopConfig, providers: PipelineProviders) -> PipelineResult:
    docs = corpus.documents
    if len(docs) < config.k:
        raise TooFewVectors(config.k, len(docs))
    pc = providers.provider_config
    text_of = {d.id: d.abstract_text for d in docs}
    all_ids = [d.id for d in docs]

    vectors = embed_texts([text_of[i] for i in all_ids], pc, providers.cache, providers.embed_transport)
    emb = {i: np.asarray(v, dtype=np.float64) for i, v in zip(all_ids, vectors)}

    registry = ThemeRegistry()
    iterations: list[IterationState] = []
    working = list(all_ids)
    x1_size = len(working)
    m_reps = config.representatives_per_cluster or config.k
    stop_reason = "max_iterations"

    for t in range(1, config.max_iterations + 1):
        assignment = kmeans(
            [emb[i] for i in working],
            config.k,
            derive_seed(config.rng_seed, f"kmeans:{t}"),
            max_iter=config.kmeans_max_iter,
        )
        clusters = []
        for j in range(config.k):
            member_ids = [working[i] for i in assignment.members(j)]
            rep_ids = top_representatives([(i, emb[i]) for i in member_ids], assignment.centroids[j], m_reps)
            clusters.append((j, [text_of[i] for i in rep_ids]))

        themes = synthesize_themes(clusters, providers.chat, pc, born_iteration=t)
        rng_t = random.Random(derive_seed(config.rng_seed, f"consensus:{t}"))
        consensus = consensus_classify(
            [(i, text_of[i]) for i in working],
            themes,
            providers.chat,
            rng_t,
            pc,
            runs=config.runs,
            min_agree=config.consensus_min,
            batch_size=config.classify_batch_size,
        )
        agreement = agreement_scores(assignment, working, consensus)
        stable, unstable = partition_stable(agreement, config.tau)

        gids = {j: registry.add_theme(themes.by_local_id(j), t, j) for j in stable}
        final_of = {r.doc_id: r.final_label for r in consensus}
        assigned_local, carried = gate_and_assign(working, final_of, set(stable), themes.other_local_id)
        assigned_global = {d: gids[j] for d, j in assigned_local.items()}
        for d, gid in assigned_global.items():
            registry.assign(d, gid)

        iterations.append(
            IterationState(
                t=t,
                working_ids=list(working),
                assignment=assignment,
                themes=themes,
                agreement=agreement,
                stable_ids=stable,
                unstable_ids=unstable,
                consensus=consensus,
                assigned=assigned_global,
            )
        )
        working = carried
        if delta_reached(len(working), x1_size, config.delta):
            stop_reason = "delta"
            break
        if len(working) < config.k:
            stop_reason = "exhausted"
            break

    for d in working:
        registry.assign_other(d)

    assert len(registry.assignments) == x1_size, "every document must receive one assignment"
    return PipelineResult(
        registry=registry,
        iterations=iterations,
        converged=stop_reason != "max_iterations",
        stop_reason=stop_reason,
    )
