"""Corpus data model: documents, full-text segments, and plain-text ingestion.

A corpus is an ordered list of documents, each carrying an abstract and an
optional fulltext. Editorial labels hold the source's category strings
(at most two per document); the special values "commentary" and
"perspective" flag article kind so downstream alignment can exclude them.
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DegenerateText,
    DuplicateId,
    FileUnreadable,
    NoFulltext,
    SchemaViolation,
)

KIND_LABELS = frozenset({"commentary", "perspective"})


@dataclass(frozen=True)
class Document:
    id: str
    abstract_text: str
    title: str = ""
    fulltext: str | None = None
    year: int | None = None
    editorial_labels: tuple[str, ...] = ()
    author_keywords: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("document id must be non-empty")
        if not self.abstract_text or not self.abstract_text.strip():
            raise ValueError(f"document {self.id!r}: abstract_text must be non-empty")
        category_labels = [l for l in self.editorial_labels if l.lower() not in KIND_LABELS]
        if len(category_labels) > 2:
            raise ValueError(f"document {self.id!r}: at most 2 editorial category labels")

    @property
    def is_commentary(self) -> bool:
        return any(l.lower() in KIND_LABELS for l in self.editorial_labels)

    @property
    def category_labels(self) -> tuple[str, ...]:
        return tuple(l for l in self.editorial_labels if l.lower() not in KIND_LABELS)

    @property
    def is_dual_classified(self) -> bool:
        return len(self.category_labels) == 2


@dataclass(frozen=True)
class Segment:
    doc_id: str
    index_in_doc: int
    text: str

    def __post_init__(self) -> None:
        if self.index_in_doc < 0:
            raise ValueError("segment index must be >= 0")
        if not self.text:
            raise ValueError("segment text must be non-empty")


@dataclass
class Corpus:
    documents: list[Document]
    provenance: str = ""
    _by_id: dict[str, Document] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.documents:
            raise ValueError("corpus must contain at least one document")
        self._by_id = {}
        for doc in self.documents:
            if doc.id in self._by_id:
                raise DuplicateId(doc.id)
            self._by_id[doc.id] = doc

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def by_id(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    def research_documents(self) -> list[Document]:
        """Documents that are not flagged commentary/perspective."""
        return [d for d in self.documents if not d.is_commentary]


@dataclass(frozen=True)
class SegmentationPolicy:
    max_chars_per_segment: int = 2400
    min_chars_per_segment: int = 200
    # First marker separates paragraphs; later markers split oversized pieces.
    split_markers: tuple[str, ...] = (r"\n\s*\n", r"(?<=[.!?])\s+")

    def __post_init__(self) -> None:
        if self.max_chars_per_segment <= 0 or self.min_chars_per_segment <= 0:
            raise ValueError("segment character budgets must be positive")
        if self.min_chars_per_segment >= self.max_chars_per_segment:
            raise ValueError("min_chars_per_segment must be < max_chars_per_segment")
        if not self.split_markers:
            raise ValueError("at least one split marker is required")


# -- ingestion ---------------------------------------------------------------

_REQUIRED_KEYS = ("id", "abstract")
_LIST_SEP = ";"


def _coerce_labels(value) -> tuple[str, ...]:
    if value is None or value == "":
        return ()
    if isinstance(value, str):
        return tuple(p.strip() for p in value.split(_LIST_SEP) if p.strip())
    return tuple(str(p).strip() for p in value if str(p).strip())


def _record_to_document(record: dict, row: int) -> Document:
    for key in _REQUIRED_KEYS:
        if key not in record or record[key] in (None, ""):
            raise SchemaViolation(row, key, "missing required value")
    year = record.get("year")
    if year in ("", None):
        year = None
    else:
        try:
            year = int(year)
        except (TypeError, ValueError):
            raise SchemaViolation(row, "year", f"not an integer: {year!r}")
    fulltext = record.get("fulltext") or None
    try:
        return Document(
            id=str(record["id"]),
            abstract_text=str(record["abstract"]),
            title=str(record.get("title") or ""),
            fulltext=fulltext,
            year=year,
            editorial_labels=_coerce_labels(record.get("editorial_labels")),
            author_keywords=_coerce_labels(record.get("keywords")),
        )
    except ValueError as exc:
        raise SchemaViolation(row, "document", str(exc))


def ingest_corpus(path: str | Path, format: str = "jsonl") -> Corpus:
    """Load a corpus from a JSON-lines or CSV file, preserving input order."""
    path = Path(path)
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unsupported corpus format {format!r}")
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}")

    documents: list[Document] = []
    seen: set[str] = set()
    if format == "jsonl":
        for row, line in enumerate(raw.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(row, "<line>", f"invalid JSON: {exc}")
            if not isinstance(record, dict):
                raise SchemaViolation(row, "<line>", "expected a JSON object")
            doc = _record_to_document(record, row)
            if doc.id in seen:
                raise DuplicateId(doc.id)
            seen.add(doc.id)
            documents.append(doc)
    else:
        reader = csv.DictReader(raw.splitlines())
        if reader.fieldnames is None or "id" not in reader.fieldnames:
            raise SchemaViolation(1, "id", "missing header row with an 'id' column")
        for row, record in enumerate(reader, start=2):
            doc = _record_to_document(record, row)
            if doc.id in seen:
                raise DuplicateId(doc.id)
            seen.add(doc.id)
            documents.append(doc)

    if not documents:
        raise SchemaViolation(0, "<file>", "no documents found")
    return Corpus(documents=documents, provenance=str(path))


# -- segmentation ------------------------------------------------------------

def _hard_split(piece: str, max_chars: int) -> list[str]:
    """Cut an oversized whitespace-free-ish piece at word boundaries, then hard."""
    out = []
    rest = piece
    while len(rest) > max_chars:
        window = rest[: max_chars + 1]
        cut = window.rfind(" ")
        if cut <= 0:
            cut = max_chars
        out.append(rest[:cut].strip())
        rest = rest[cut:].strip()
    if rest:
        out.append(rest)
    return [p for p in out if p]


def _pack_sentences(sentences: list[str], max_chars: int) -> list[str]:
    """Next-fit packing of sentence pieces into segments of at most max_chars."""
    packed: list[str] = []
    cur = ""
    for s in sentences:
        if cur and len(cur) + 1 + len(s) <= max_chars:
            cur = cur + " " + s
        else:
            if cur:
                packed.append(cur)
            cur = s
    if cur:
        packed.append(cur)
    return packed


def segment_fulltext(doc: Document, policy: SegmentationPolicy | None = None) -> list[Segment]:
    """Split a document's fulltext into classifiable chunks.

    Paragraph-first: blank lines bound segments; oversized paragraphs are
    split at sentence boundaries and repacked; undersized segments are merged
    into the preceding one when the merge stays within the character budget.
    Joining the returned texts reproduces the fulltext modulo whitespace.
    """
    policy = policy or SegmentationPolicy()
    if doc.fulltext is None or doc.fulltext == "":
        raise NoFulltext(doc.id)
    if not doc.fulltext.strip():
        raise DegenerateText(f"document {doc.id!r}: fulltext is all whitespace")

    max_chars = policy.max_chars_per_segment
    min_chars = policy.min_chars_per_segment
    para_re = re.compile(policy.split_markers[0])
    sentence_re = re.compile(policy.split_markers[1]) if len(policy.split_markers) > 1 else None

    paragraphs = [p.strip() for p in para_re.split(doc.fulltext) if p.strip()]
    pieces: list[str] = []
    for para in paragraphs:
        if len(para) <= max_chars:
            pieces.append(para)
            continue
        if sentence_re is not None:
            sentences = [s.strip() for s in sentence_re.split(para) if s.strip()]
        else:
            sentences = [para]
        flat: list[str] = []
        for s in sentences:
            flat.extend(_hard_split(s, max_chars) if len(s) > max_chars else [s])
        pieces.extend(_pack_sentences(flat, max_chars))

    merged: list[str] = []
    for piece in pieces:
        if merged and len(piece) < min_chars and len(merged[-1]) + 2 + len(piece) <= max_chars:
            merged[-1] = merged[-1] + "\n\n" + piece
        else:
            merged.append(piece)

    return [Segment(doc_id=doc.id, index_in_doc=i, text=t) for i, t in enumerate(merged)]


def squeeze_whitespace(text: str) -> str:
    """Remove all whitespace; used to check content-preserving reassembly."""
    return re.sub(r"\s+", "", text)


def attach_fulltexts(corpus: Corpus, fulltext_dir: str | Path, converter_command: str = "") -> Corpus:
    """Attach per-document fulltext from <dir>/<id>.txt files.

    When a .txt file is missing but another <id>.* source exists and a
    converter command template (with {source} and {target} markers) is
    configured, the converter is invoked once to produce the .txt. Documents
    without any matching file keep fulltext=None.
    """
    import dataclasses
    import shlex
    import subprocess

    fulltext_dir = Path(fulltext_dir)
    documents = []
    for doc in corpus.documents:
        if doc.fulltext:
            documents.append(doc)
            continue
        target = fulltext_dir / f"{doc.id}.txt"
        if not target.exists() and converter_command:
            sources = sorted(p for p in fulltext_dir.glob(f"{doc.id}.*") if p.suffix != ".txt")
            if sources:
                cmd = [
                    part.replace("{source}", str(sources[0])).replace("{target}", str(target))
                    for part in shlex.split(converter_command)
                ]
                subprocess.run(cmd, check=False, capture_output=True)
        if target.exists():
            text = target.read_text(encoding="utf-8")
            if text.strip():
                doc = dataclasses.replace(doc, fulltext=text)
        documents.append(doc)
    return Corpus(documents=documents, provenance=corpus.provenance)
