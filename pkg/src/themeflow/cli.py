"""Command-line orchestration: ingest, classify-primary, classify-secondary, analyze, report.

Configuration lives in one TOML file; --stub, --seed, and --out override it.
Exit codes: 0 success, 1 usage/config error, 2 provider failure,
3 primary loop hit its iteration bound (partial outputs still written).
"""
from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import reports
from .alignment import alignment_report, build_alignment_counts
from .corpus import Corpus, SegmentationPolicy, attach_fulltexts, ingest_corpus, segment_fulltext
from .errors import ProviderError, ThemeflowError
from .graph import adjacency_matrix, build_bipartite, flow_summary, normalize_rows, reorder_matrix
from .lexical import LexicalOptions, bow, ctfidf, five_year_bucket, zipf_profile
from .primary import LoopConfig, PipelineProviders, derive_seed, run_primary_pipeline
from .providers import (
    EmbeddingCache,
    HttpChatTransport,
    HttpEmbeddingTransport,
    LexicalStubChat,
    LexicalStubEmbeddingTransport,
    ProviderConfig,
)
from .secondary import SecondaryConfig, case_partition, classify_segments_multilabel

VERSION = "0.1.0"

SNAPSHOT = "corpus_snapshot.jsonl"
REGISTRY = "registry.json"
TRACE = "trace.json"
CACHE = "embedding_cache.jsonl"
SEGMENT_LABELS = "segment_labels.csv"


class ConfigError(ThemeflowError):
    pass


@dataclass
class RunConfig:
    corpus_path: Path
    corpus_format: str
    out_dir: Path
    provider: ProviderConfig
    loop: LoopConfig
    policy: SegmentationPolicy
    secondary: SecondaryConfig
    lexical_min_doc_freq: int = 5
    lexical_max_doc_fraction: float = 0.80
    top_terms_per_class: int = 12
    normalize_floor: float = 0.01
    heatmap_order: list[int] | None = None
    tier_bounds: tuple[float, float, float] = (1.5, 1.0, 0.5)
    fulltext_dir: Path | None = None
    converter_command: str = ""
    stub_mode: bool = False
    seed: int = 0
    raw: dict | None = None


def load_run_config(path: Path, stub: bool | None, seed: int | None, out: Path | None) -> RunConfig:
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}")

    def section(name: str) -> dict:
        value = raw.get(name, {})
        if not isinstance(value, dict):
            raise ConfigError(f"config section [{name}] must be a table")
        return value

    corpus_sec = section("corpus")
    if "path" not in corpus_sec:
        raise ConfigError("config is missing corpus.path")
    run_sec = section("run")
    effective_seed = seed if seed is not None else int(run_sec.get("seed", 0))
    stub_mode = stub if stub is not None else bool(run_sec.get("stub", False))

    provider_sec = section("provider")
    try:
        provider = ProviderConfig(
            base_url=provider_sec.get("base_url", "https://api.openai.com/v1"),
            api_key_env=provider_sec.get("api_key_env", "THEMEFLOW_API_KEY"),
            embed_model_name=provider_sec.get("embed_model_name", "text-embedding-3-small"),
            chat_model_name=provider_sec.get("chat_model_name", "gpt-4o-mini"),
            embed_dim=int(provider_sec.get("embed_dim", 1536)),
            max_retries=int(provider_sec.get("max_retries", 3)),
            request_timeout=float(provider_sec.get("request_timeout", 60.0)),
            temperature=float(provider_sec.get("temperature", 0.0)),
            embed_batch_size=int(provider_sec.get("embed_batch_size", 128)),
        )
        loop_sec = section("loop")
        loop = LoopConfig(
            k=int(loop_sec.get("k", 7)),
            tau=float(loop_sec.get("tau", 0.60)),
            delta=float(loop_sec.get("delta", 0.10)),
            runs=int(loop_sec.get("runs", 5)),
            consensus_min=int(loop_sec.get("consensus_min", 3)),
            max_iterations=int(loop_sec.get("max_iterations", 25)),
            rng_seed=effective_seed,
            representatives_per_cluster=loop_sec.get("representatives_per_cluster"),
            classify_batch_size=int(loop_sec.get("classify_batch_size", 25)),
        )
        seg_sec = section("segmentation")
        policy = SegmentationPolicy(
            max_chars_per_segment=int(seg_sec.get("max_chars", 2400)),
            min_chars_per_segment=int(seg_sec.get("min_chars", 200)),
        )
        secondary_sec = section("secondary")
        secondary = SecondaryConfig(
            single_shot=bool(secondary_sec.get("single_shot", False)),
            consensus_runs=int(secondary_sec.get("consensus_runs", 0)),
            classify_batch_size=int(secondary_sec.get("classify_batch_size", 25)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid config value: {exc}")

    lex_sec = section("lexical")
    out_sec = section("output")
    align_sec = section("alignment")
    bounds = align_sec.get("tier_bounds", [1.5, 1.0, 0.5])
    if len(bounds) != 3:
        raise ConfigError("alignment.tier_bounds needs exactly three values")
    out_dir = out if out is not None else Path(out_sec.get("dir", "out"))
    return RunConfig(
        corpus_path=Path(corpus_sec["path"]),
        corpus_format=corpus_sec.get("format", "jsonl"),
        out_dir=out_dir,
        provider=provider,
        loop=loop,
        policy=policy,
        secondary=secondary,
        lexical_min_doc_freq=int(lex_sec.get("min_doc_freq", 5)),
        lexical_max_doc_fraction=float(lex_sec.get("max_doc_fraction", 0.80)),
        top_terms_per_class=int(lex_sec.get("top_terms", 12)),
        normalize_floor=float(section("graph").get("floor", 0.01)),
        heatmap_order=[int(t) for t in section("graph")["theme_order"]]
        if "theme_order" in section("graph")
        else None,
        tier_bounds=tuple(float(b) for b in bounds),
        fulltext_dir=Path(corpus_sec["fulltext_dir"]) if "fulltext_dir" in corpus_sec else None,
        converter_command=corpus_sec.get("converter_command", ""),
        stub_mode=stub_mode,
        seed=effective_seed,
        raw=raw,
    )


def _config_snapshot(cfg: RunConfig) -> dict:
    return {
        "corpus_path": str(cfg.corpus_path),
        "out_dir": str(cfg.out_dir),
        "seed": cfg.seed,
        "stub_mode": cfg.stub_mode,
        "raw": cfg.raw or {},
    }


def build_providers(cfg: RunConfig) -> PipelineProviders:
    cache = EmbeddingCache(cfg.out_dir / CACHE)
    if cfg.stub_mode:
        embed = LexicalStubEmbeddingTransport(cfg.provider.embed_dim, derive_seed(cfg.seed, "stub-embed"))
        chat = LexicalStubChat()
    else:
        embed = HttpEmbeddingTransport(cfg.provider)
        chat = HttpChatTransport(cfg.provider)
    return PipelineProviders(provider_config=cfg.provider, chat=chat, embed_transport=embed, cache=cache)


def _require(cfg: RunConfig, name: str) -> Path:
    path = cfg.out_dir / name
    if not path.exists():
        raise ConfigError(f"missing prerequisite artifact {path}; run the earlier stage first")
    return path


def _load_snapshot(cfg: RunConfig) -> Corpus:
    return ingest_corpus(_require(cfg, SNAPSHOT), "jsonl")


def cmd_ingest(cfg: RunConfig) -> int:
    corpus = ingest_corpus(cfg.corpus_path, cfg.corpus_format)
    if cfg.fulltext_dir is not None:
        corpus = attach_fulltexts(corpus, cfg.fulltext_dir, cfg.converter_command)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    reports.write_corpus_snapshot(corpus, cfg.out_dir / SNAPSHOT)
    with_fulltext = sum(1 for d in corpus.documents if d.fulltext)
    coverage = with_fulltext / len(corpus) * 100
    print(f"documents: {len(corpus)}")
    print(f"fulltext coverage: {with_fulltext} ({coverage:.1f}%)")
    reports.update_manifest(cfg.out_dir, "ingest", _config_snapshot(cfg), [SNAPSHOT], version=VERSION)
    return 0


def cmd_classify_primary(cfg: RunConfig) -> int:
    corpus = _load_snapshot(cfg)
    providers = build_providers(cfg)
    result = run_primary_pipeline(corpus, cfg.loop, providers)
    providers.cache.close()
    reports.write_registry_json(result.registry, cfg.out_dir / REGISTRY)
    reports.write_trace_json(result, cfg.out_dir / TRACE)
    reports.write_distribution_csv(result.registry, cfg.out_dir / "primary_distribution.csv")
    reports.write_assignments_csv(result.registry, cfg.out_dir / "assignments.csv")
    files = [REGISTRY, TRACE, "primary_distribution.csv", "assignments.csv", CACHE]
    reports.update_manifest(
        cfg.out_dir,
        "classify-primary",
        _config_snapshot(cfg),
        files,
        provider_models={
            "embed": cfg.provider.embed_model_name if not cfg.stub_mode else "stub",
            "chat": cfg.provider.chat_model_name if not cfg.stub_mode else "stub",
        },
        version=VERSION,
    )
    print(
        f"iterations: {len(result.iterations)}; stable themes: {result.registry.n_themes}; "
        f"stop: {result.stop_reason}"
    )
    if not result.converged:
        print("warning: iteration bound reached before the residual fell below delta", file=sys.stderr)
        return 3
    return 0


def cmd_classify_secondary(cfg: RunConfig) -> int:
    corpus = _load_snapshot(cfg)
    registry = reports.load_registry_json(_require(cfg, REGISTRY))
    segments = []
    for doc in corpus.documents:
        if doc.fulltext:
            segments.extend(segment_fulltext(doc, cfg.policy))
    if not segments:
        raise ConfigError("no documents carry fulltext; nothing to classify")
    providers = build_providers(cfg)
    rng = random.Random(derive_seed(cfg.seed, "secondary"))
    label_sets = classify_segments_multilabel(
        segments, registry, providers.chat, rng, cfg.provider, cfg.secondary
    )
    summary = case_partition(label_sets)
    reports.write_segment_labels_csv(label_sets, cfg.out_dir / SEGMENT_LABELS)
    reports.write_case_summary_json(summary, cfg.out_dir / "case_summary.json")
    reports.update_manifest(
        cfg.out_dir,
        "classify-secondary",
        _config_snapshot(cfg),
        [SEGMENT_LABELS, "case_summary.json"],
        version=VERSION,
    )
    print(
        f"segments: {summary.total}; single: {summary.n_single_specific}; "
        f"other: {summary.n_indefinite_other}; multi: {summary.n_multi_topic}"
    )
    return 0


def cmd_analyze(cfg: RunConfig) -> int:
    corpus = _load_snapshot(cfg)
    registry = reports.load_registry_json(_require(cfg, REGISTRY))
    label_sets = reports.load_segment_labels_csv(_require(cfg, SEGMENT_LABELS))

    graph = build_bipartite(registry, label_sets)
    matrix = adjacency_matrix(graph)
    display_matrix = reorder_matrix(matrix, cfg.heatmap_order) if cfg.heatmap_order else matrix
    norm = normalize_rows(display_matrix, floor=cfg.normalize_floor)
    flows = flow_summary(matrix, registry)

    out = cfg.out_dir
    reports.write_matrix_csv(matrix, out / "adjacency_matrix.csv")
    reports.write_normalized_csv(norm, out / "adjacency_normalized.csv")
    reports.write_heatmap_svg(norm, registry, out / "heatmap.svg")
    reports.write_flow_csv(flows, registry, out / "flow_summary.csv")
    reports.write_distribution_rings_csv(registry, label_sets, out / "distribution_rings.csv")

    lex_options = LexicalOptions(
        keep_bigrams=True,
        min_doc_freq=cfg.lexical_min_doc_freq,
        max_doc_fraction=cfg.lexical_max_doc_fraction,
    )
    class_docs: dict[str, list[str]] = {}
    row_names: list[str] = []
    buckets: set[str] = set()
    for doc in corpus.documents:
        gid = registry.assignments.get(doc.id)
        if gid is None:
            continue
        title = registry.title(gid)
        bucket = five_year_bucket(doc.year) if doc.year is not None else "undated"
        buckets.add(bucket)
        if title not in row_names:
            row_names.append(title)
        class_docs.setdefault(f"{title}|{bucket}", []).append(doc.abstract_text)
    table = ctfidf(class_docs, lex_options)
    reports.write_ctfidf_csv(table, out / "ctfidf_terms.csv", cfg.top_terms_per_class)
    reports.write_term_grid_svg(table, sorted(row_names), sorted(buckets), out / "term_grid.svg")

    profile = zipf_profile(bow([d.abstract_text for d in corpus.documents]))
    reports.write_zipf_csv(profile, out / "zipf_profile.csv")
    reports.write_zipf_summary_json(profile, out / "zipf_summary.json")

    counts = build_alignment_counts(corpus, registry)
    report = alignment_report(counts, registry, bounds=cfg.tier_bounds)
    reports.write_alignment_csv(report, out / "alignment_report.csv")

    files = [
        "adjacency_matrix.csv",
        "adjacency_normalized.csv",
        "heatmap.svg",
        "flow_summary.csv",
        "distribution_rings.csv",
        "ctfidf_terms.csv",
        "term_grid.svg",
        "zipf_profile.csv",
        "zipf_summary.json",
        "alignment_report.csv",
    ]
    reports.update_manifest(cfg.out_dir, "analyze", _config_snapshot(cfg), files, version=VERSION)
    print(f"edges: {graph.edge_count}; matrix total: {matrix.total()}")
    return 0


def cmd_report(cfg: RunConfig) -> int:
    cmd_ingest(cfg)
    primary_code = cmd_classify_primary(cfg)
    if primary_code not in (0, 3):
        return primary_code
    code = cmd_classify_secondary(cfg)
    if code != 0:
        return code
    code = cmd_analyze(cfg)
    if code != 0:
        return code
    return primary_code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="themeflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("ingest", "classify-primary", "classify-secondary", "analyze", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--stub", action="store_true", default=None, help="use offline stub providers")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=Path, default=None)
    return parser


_COMMANDS = {
    "ingest": cmd_ingest,
    "classify-primary": cmd_classify_primary,
    "classify-secondary": cmd_classify_secondary,
    "analyze": cmd_analyze,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_run_config(args.config, args.stub, args.seed, args.out)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg)
    except ProviderError as exc:
        print(f"provider failure: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ThemeflowError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
