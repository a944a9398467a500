"""Report emission: CSV tables, JSON artifacts, simple SVG charts, run manifest.

Every emitter is deterministic for identical inputs (stable ordering, fixed
float formatting, no timestamps inside CSV/SVG bodies), so repeated runs with
the same seed produce byte-identical files. The manifest carries timestamps
and is always written last.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .alignment import AlignmentReport
from .corpus import Corpus
from .graph import AdjacencyMatrix, FlowRow, NormalizedMatrix
from .lexical import CtfidfTable, ZipfProfile, top_terms
from .primary import PipelineResult, ThemeRegistry
from .secondary import CaseSummary, SegmentLabelSet
from .synthesis import Theme

MANIFEST_NAME = "manifest.json"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_corpus_snapshot(corpus: Corpus, path: Path) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for d in corpus.documents:
            fh.write(
                json.dumps(
                    {
                        "id": d.id,
                        "abstract": d.abstract_text,
                        "title": d.title,
                        "fulltext": d.fulltext,
                        "year": d.year,
                        "editorial_labels": list(d.editorial_labels),
                        "keywords": list(d.author_keywords),
                    }
                )
                + "\n"
            )


def write_registry_json(registry: ThemeRegistry, path: Path) -> None:
    payload = {
        "themes": [
            {
                "global_id": e.global_id,
                "title": e.theme.title,
                "description": e.theme.description,
                "keywords": list(e.theme.keywords),
                "born_iteration": e.born_iteration,
                "source_cluster": e.source_cluster,
            }
            for e in registry.entries
        ],
        "other_id": registry.other_id,
        "assignments": dict(sorted(registry.assignments.items())),
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_registry_json(path: Path) -> ThemeRegistry:
    payload = json.loads(path.read_text(encoding="utf-8"))
    registry = ThemeRegistry()
    for t in sorted(payload["themes"], key=lambda t: t["global_id"]):
        gid = registry.add_theme(
            Theme(
                local_id=t["source_cluster"],
                title=t["title"],
                description=t["description"],
                keywords=tuple(t["keywords"]),
                born_iteration=t["born_iteration"],
            ),
            born_iteration=t["born_iteration"],
            source_cluster=t["source_cluster"],
        )
        assert gid == t["global_id"]
    for doc_id, gid in payload["assignments"].items():
        if gid == registry.other_id:
            registry.assign_other(doc_id)
        else:
            registry.assign(doc_id, gid)
    return registry


def write_trace_json(result: PipelineResult, path: Path) -> None:
    iterations = []
    for it in result.iterations:
        sizes = {str(j): len(it.assignment.members(j)) for j in range(it.assignment.k)}
        iterations.append(
            {
                "t": it.t,
                "working_size": len(it.working_ids),
                "cluster_sizes": sizes,
                "agreement": {str(j): it.agreement[j] for j in sorted(it.agreement)},
                "stable": it.stable_ids,
                "unstable": it.unstable_ids,
                "themes": [
                    {"local_id": t.local_id, "title": t.title, "description": t.description}
                    for t in it.themes.themes
                ],
                "assigned_count": len(it.assigned),
                "resolved_count": sum(1 for r in it.consensus if r.final_label is not None),
            }
        )
    payload = {
        "iterations": iterations,
        "converged": result.converged,
        "stop_reason": result.stop_reason,
        "n_themes": result.registry.n_themes,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def write_assignments_csv(registry: ThemeRegistry, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["doc_id", "theme_id", "title"])
        for doc_id, gid in sorted(registry.assignments.items()):
            w.writerow([doc_id, gid, registry.title(gid)])


def write_distribution_csv(registry: ThemeRegistry, path: Path) -> None:
    """Primary distribution (the outer ring of the two-ring chart)."""
    counts = {gid: 0 for gid in [e.global_id for e in registry.entries] + [registry.other_id]}
    for gid in registry.assignments.values():
        counts[gid] += 1
    total = sum(counts.values()) or 1
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theme_id", "title", "n_docs", "share"])
        for gid in sorted(counts):
            w.writerow([gid, registry.title(gid), counts[gid], _fmt(counts[gid] / total)])


def write_distribution_rings_csv(
    registry: ThemeRegistry, label_sets: list[SegmentLabelSet], path: Path
) -> None:
    """Outer ring: abstract themes; inner ring: segment label occurrences."""
    outer = {gid: 0 for gid in [e.global_id for e in registry.entries] + [registry.other_id]}
    for gid in registry.assignments.values():
        outer[gid] += 1
    inner = {gid: 0 for gid in outer}
    for ls in label_sets:
        for label in ls.labels:
            inner[label] += 1
    n_outer = sum(outer.values()) or 1
    n_inner = sum(inner.values()) or 1
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["ring", "theme_id", "title", "count", "share"])
        for gid in sorted(outer):
            w.writerow(["abstracts", gid, registry.title(gid), outer[gid], _fmt(outer[gid] / n_outer)])
        for gid in sorted(inner):
            w.writerow(["segments", gid, registry.title(gid), inner[gid], _fmt(inner[gid] / n_inner)])


def write_segment_labels_csv(label_sets: list[SegmentLabelSet], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["doc_id", "segment_index", "labels", "case"])
        for ls in sorted(label_sets, key=lambda s: (s.doc_id, s.segment_index)):
            w.writerow([ls.doc_id, ls.segment_index, "|".join(str(l) for l in sorted(ls.labels)), ls.case])


def load_segment_labels_csv(path: Path) -> list[SegmentLabelSet]:
    out = []
    with path.open(newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            labels = frozenset(int(p) for p in rec["labels"].split("|"))
            out.append(
                SegmentLabelSet(
                    doc_id=rec["doc_id"],
                    segment_index=int(rec["segment_index"]),
                    labels=labels,
                    case=rec["case"],
                    flagged_ambiguous=len(labels) > 4,
                )
            )
    return out


def write_case_summary_json(summary: CaseSummary, path: Path) -> None:
    path.write_text(json.dumps(asdict(summary), indent=2) + "\n", encoding="utf-8")


def write_matrix_csv(matrix: AdjacencyMatrix, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theme_id"] + [str(t) for t in matrix.theme_ids])
        for i, tid in enumerate(matrix.theme_ids):
            w.writerow([tid] + [int(v) for v in matrix.counts[i]])


def load_matrix_csv(path: Path) -> AdjacencyMatrix:
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    theme_ids = [int(v) for v in rows[0][1:]]
    counts = np.array([[int(v) for v in row[1:]] for row in rows[1:]], dtype=np.int64)
    return AdjacencyMatrix(counts=counts, theme_ids=theme_ids)


def write_normalized_csv(norm: NormalizedMatrix, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theme_id"] + [str(t) for t in norm.theme_ids])
        for i, tid in enumerate(norm.theme_ids):
            w.writerow(
                [tid] + ["" if np.isnan(v) else _fmt(v) for v in norm.display[i]]
            )


def write_flow_csv(rows: list[FlowRow], registry: ThemeRegistry | None, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theme_id", "title", "same", "to_other", "gained", "corpus_share"])
        for r in rows:
            title = registry.title(r.theme_id) if registry is not None else str(r.theme_id)
            w.writerow([r.theme_id, title, r.same, r.to_other, r.gained, _fmt(r.corpus_share)])


def write_zipf_csv(profile: ZipfProfile, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "term", "frequency", "normalized"])
        for e in profile.entries:
            w.writerow([e.rank, e.term, e.frequency, _fmt(e.normalized)])


def write_zipf_summary_json(profile: ZipfProfile, path: Path) -> None:
    path.write_text(
        json.dumps(
            {
                "total_tokens": profile.total_tokens,
                "vocabulary_size": profile.vocabulary_size,
                "pareto_cutoff_rank": profile.pareto_cutoff_rank,
                "pareto_fraction": profile.pareto_fraction,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )


def write_ctfidf_csv(table: CtfidfTable, path: Path, n_terms: int = 12) -> None:
    """Ranked term scores per class; class names look like 'title|bucket'."""
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["class", "rank", "term", "score"])
        for name in table.class_names:
            for rank, (term, score) in enumerate(top_terms(table, name, n_terms), start=1):
                w.writerow([name, rank, term, _fmt(score)])


def write_alignment_csv(report: AlignmentReport, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theme_id", "title", "n_class", "n_dual", "precision", "recall", "lift", "tier"])
        for r in report.rows:
            w.writerow(
                [
                    r.theme_id,
                    r.title,
                    r.n_class,
                    r.n_dual,
                    _fmt(r.precision),
                    _fmt(r.recall),
                    _fmt(r.lift) if r.lift is not None else "",
                    r.tier,
                ]
            )
        w.writerow(
            ["baseline", "Baseline", report.total_docs, report.total_dual, _fmt(report.baseline), _fmt(1.0), _fmt(1.0), "~"]
        )


# -- SVG ------------------------------------------------------------------------

def _ramp(v: float) -> str:
    """Linear white -> dark blue ramp over [0, 1]."""
    v = min(max(v, 0.0), 1.0)
    r = round(255 + (31 - 255) * v)
    g = round(255 + (78 - 255) * v)
    b = round(255 + (121 - 255) * v)
    return f"rgb({r},{g},{b})"


def write_heatmap_svg(norm: NormalizedMatrix, registry: ThemeRegistry | None, path: Path, cell: int = 28) -> None:
    n = len(norm.theme_ids)
    left, top = 180, 40
    width, height = left + n * cell + 20, top + n * cell + 20
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="10">'
    ]
    with np.errstate(all="ignore"):
        vmax = float(np.nanmax(norm.display)) if n and not np.isnan(norm.display).all() else 1.0
    vmax = vmax if np.isfinite(vmax) and vmax > 0 else 1.0
    for i, row_id in enumerate(norm.theme_ids):
        label = registry.title(row_id) if registry is not None else str(row_id)
        parts.append(
            f'<text x="{left - 6}" y="{top + i * cell + cell * 0.65}" text-anchor="end">{_esc(label[:28])}</text>'
        )
        for j in range(n):
            v = norm.display[i, j]
            fill = "#ffffff" if np.isnan(v) else _ramp(float(v) / vmax)
            parts.append(
                f'<rect x="{left + j * cell}" y="{top + i * cell}" width="{cell}" height="{cell}" '
                f'fill="{fill}" stroke="#dddddd"/>'
            )
    for j, col_id in enumerate(norm.theme_ids):
        parts.append(
            f'<text x="{left + j * cell + cell / 2}" y="{top - 8}" text-anchor="middle">{col_id}</text>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_term_grid_svg(
    table: CtfidfTable,
    row_names: list[str],
    col_names: list[str],
    path: Path,
    n_terms: int = 8,
) -> None:
    """Term grid: rows are themes, columns are time buckets, font size tracks score."""
    cell_w, cell_h, left, top = 170, 14 * n_terms + 10, 180, 30
    width = left + len(col_names) * cell_w + 20
    height = top + len(row_names) * cell_h + 20
    all_scores = [s for cls in table.scores.values() for s in cls.values()]
    smax = max(all_scores) if all_scores else 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif">'
    ]
    for j, col in enumerate(col_names):
        parts.append(
            f'<text x="{left + j * cell_w + cell_w / 2}" y="{top - 10}" text-anchor="middle" '
            f'font-size="11">{_esc(col)}</text>'
        )
    for i, row in enumerate(row_names):
        parts.append(
            f'<text x="{left - 6}" y="{top + i * cell_h + 14}" text-anchor="end" font-size="11">'
            f"{_esc(row[:28])}</text>"
        )
        for j, col in enumerate(col_names):
            name = f"{row}|{col}"
            if name not in table.scores:
                continue
            for r, (term, score) in enumerate(top_terms(table, name, n_terms)):
                rel = score / smax if smax else 0.0
                size = 7 + round(6 * rel)
                opacity = 0.45 + 0.55 * rel
                parts.append(
                    f'<text x="{left + j * cell_w + 4}" y="{top + i * cell_h + 14 + r * 13}" '
                    f'font-size="{size}" opacity="{opacity:.2f}">{_esc(term)}</text>'
                )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


# -- manifest ---------------------------------------------------------------------

def update_manifest(
    out_dir: Path,
    command: str,
    config_snapshot: dict,
    new_files: list[str],
    provider_models: dict | None = None,
    version: str = "",
) -> Path:
    """Merge this stage's outputs into the run manifest; written after the files."""
    path = out_dir / MANIFEST_NAME
    if path.exists():
        manifest = json.loads(path.read_text(encoding="utf-8"))
    else:
        manifest = {"stages": [], "files": [], "created": datetime.now(timezone.utc).isoformat()}
    files = set(manifest.get("files", []))
    files.update(new_files)
    files.add(MANIFEST_NAME)
    manifest["files"] = sorted(files)
    manifest["stages"].append(
        {
            "command": command,
            "finished": datetime.now(timezone.utc).isoformat(),
            "config": config_snapshot,
            "models": provider_models or {},
            "outputs": sorted(new_files),
        }
    )
    if version:
        manifest["version"] = version
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
