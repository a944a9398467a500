"""Frequency-based validation of theme structure.

Covers tokenization with a bundled stopword list, dictionary lemmatization
(lookup only, unknown tokens pass through unchanged), bag-of-words counts,
rank-frequency profiles with the 80% cumulative cutoff, standard TF-IDF, and
the class-based TF-IDF variant with square-root term-frequency scaling:

    score(x, c) = sqrt(tf(x, c)) * ln(1 + A / df(x))

where A is the average token count per class and df(x) the number of source
documents containing x (class-level df available as an option).
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .errors import EmptyClass, UnknownClass, UnknownTerm

_EDGE_PUNCT = "\"'`.,;:!?()[]{}<>~^*_|/\\«»“”‘’–—=+%&#@"
_NUMERIC_RE = re.compile(r"^\d[\d.,:%/\-]*$")


@lru_cache(maxsize=1)
def load_stopwords() -> frozenset[str]:
    text = resources.files("themeflow.assets").joinpath("stopwords.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


@lru_cache(maxsize=1)
def load_lemma_table() -> dict[str, str]:
    text = resources.files("themeflow.assets").joinpath("lemmas.tsv").read_text(encoding="utf-8")
    table = {}
    for line in text.splitlines():
        if line.strip():
            form, base = line.split("\t")
            table[form] = base
    return table


@dataclass(frozen=True)
class LexicalOptions:
    stopwords: frozenset[str] | None = None  # None -> bundled list
    keep_bigrams: bool = False
    min_doc_freq: int = 5
    max_doc_fraction: float = 0.80
    strip_numeric: bool = True
    class_level_df: bool = False

    def __post_init__(self) -> None:
        if not (0 < self.max_doc_fraction <= 1):
            raise ValueError("max_doc_fraction must lie in (0, 1]")
        if self.min_doc_freq < 1:
            raise ValueError("min_doc_freq must be >= 1")

    def stopword_set(self) -> frozenset[str]:
        return self.stopwords if self.stopwords is not None else load_stopwords()


def tokenize(text: str, options: LexicalOptions | None = None) -> list[str]:
    """Whitespace split, lowercase, edge punctuation stripped, stopwords and
    (optionally) numeric tokens removed; bigrams joined with a space when kept."""
    options = options or LexicalOptions()
    stop = options.stopword_set()
    unigrams = []
    for raw in text.lower().split():
        token = raw.strip(_EDGE_PUNCT)
        if not token or token in stop:
            continue
        if options.strip_numeric and _NUMERIC_RE.match(token):
            continue
        unigrams.append(token)
    if not options.keep_bigrams:
        return unigrams
    bigrams = [f"{a} {b}" for a, b in zip(unigrams, unigrams[1:])]
    return unigrams + bigrams


def lemmatize(token: str, table: dict[str, str] | None = None) -> str:
    """Dictionary lookup; unknown tokens pass through unchanged, never truncated."""
    table = table if table is not None else load_lemma_table()
    return table.get(token, token)


@dataclass
class TermFrequencyTable:
    counts: Counter
    total_tokens: int

    def __post_init__(self) -> None:
        if any(c < 1 for c in self.counts.values()):
            raise ValueError("term counts must be >= 1")
        if sum(self.counts.values()) != self.total_tokens:
            raise ValueError("counts must sum to total_tokens")

    @property
    def vocabulary_size(self) -> int:
        return len(self.counts)


def bow(documents: list[str], options: LexicalOptions | None = None) -> TermFrequencyTable:
    """Lemmatized unigram counts over a document set (bigrams always decomposed)."""
    if not documents:
        raise ValueError("documents must be non-empty")
    options = options or LexicalOptions()
    unigram_options = LexicalOptions(
        stopwords=options.stopwords,
        keep_bigrams=False,
        min_doc_freq=options.min_doc_freq,
        max_doc_fraction=options.max_doc_fraction,
        strip_numeric=options.strip_numeric,
        class_level_df=options.class_level_df,
    )
    table = load_lemma_table()
    counts: Counter = Counter()
    for doc in documents:
        counts.update(lemmatize(t, table) for t in tokenize(doc, unigram_options))
    return TermFrequencyTable(counts=counts, total_tokens=sum(counts.values()))


@dataclass(frozen=True)
class RankedTerm:
    rank: int
    term: str
    frequency: int
    normalized: float  # frequency / max frequency


@dataclass
class ZipfProfile:
    entries: list[RankedTerm]
    total_tokens: int
    pareto_cutoff_rank: int
    pareto_fraction: float

    @property
    def vocabulary_size(self) -> int:
        return len(self.entries)


def zipf_profile(table: TermFrequencyTable, pareto_share: float = 0.80) -> ZipfProfile:
    """Rank terms by descending frequency (ties lexicographic) and locate the
    smallest rank whose cumulative frequency reaches the pareto share."""
    if not table.counts:
        raise ValueError("cannot profile an empty table")
    ordered = sorted(table.counts.items(), key=lambda p: (-p[1], p[0]))
    fmax = ordered[0][1]
    entries = [
        RankedTerm(rank=i, term=t, frequency=f, normalized=f / fmax)
        for i, (t, f) in enumerate(ordered, start=1)
    ]
    threshold = pareto_share * table.total_tokens
    acc = 0
    cutoff = len(entries)
    for e in entries:
        acc += e.frequency
        if acc >= threshold:
            cutoff = e.rank
            break
    return ZipfProfile(
        entries=entries,
        total_tokens=table.total_tokens,
        pareto_cutoff_rank=cutoff,
        pareto_fraction=cutoff / len(entries),
    )


def tfidf(term: str, doc_tokens: list[str], corpus_tokens: list[list[str]]) -> float:
    """Standard tf * ln(N / df) over tokenized documents."""
    df = sum(1 for tokens in corpus_tokens if term in tokens)
    if df == 0:
        raise UnknownTerm(f"term {term!r} does not occur in the corpus")
    tf = doc_tokens.count(term)
    return tf * math.log(len(corpus_tokens) / df)


@dataclass
class CtfidfTable:
    scores: dict[str, dict[str, float]]  # class -> term -> score
    avg_tokens_per_class: float
    df: dict[str, int]
    n_documents: int
    class_names: list[str] = field(default_factory=list)


def ctfidf(class_documents: dict[str, list[str]], options: LexicalOptions | None = None) -> CtfidfTable:
    """Class-based TF-IDF with sqrt-scaled term frequency.

    Term frequencies are counted over each class's concatenated token stream
    (unigrams plus bigrams, no lemmatization); terms outside the document
    frequency band [min_doc_freq, max_doc_fraction * N] are dropped before
    scoring. A is the average raw token count per class.
    """
    if not class_documents:
        raise ValueError("need at least one class")
    options = options or LexicalOptions(keep_bigrams=True)
    class_names = list(class_documents.keys())
    doc_token_sets: list[set[str]] = []
    class_tokens: dict[str, list[str]] = {}
    class_doc_sets: dict[str, set[str]] = {}
    for name in class_names:
        docs = class_documents[name]
        if not docs:
            raise EmptyClass(str(name))
        tokens: list[str] = []
        union: set[str] = set()
        for doc in docs:
            toks = tokenize(doc, options)
            tokens.extend(toks)
            doc_token_sets.append(set(toks))
            union.update(toks)
        class_tokens[name] = tokens
        class_doc_sets[name] = union

    n_documents = len(doc_token_sets)
    if options.class_level_df:
        df = Counter()
        for union in class_doc_sets.values():
            df.update(union)
        n_units = len(class_names)
    else:
        df = Counter()
        for s in doc_token_sets:
            df.update(s)
        n_units = n_documents

    avg_tokens = sum(len(t) for t in class_tokens.values()) / len(class_names)
    allowed = {
        term
        for term, d in df.items()
        if d >= options.min_doc_freq and d / n_units <= options.max_doc_fraction
    }

    scores: dict[str, dict[str, float]] = {}
    for name in class_names:
        tf = Counter(class_tokens[name])
        scores[name] = {
            term: math.sqrt(count) * math.log(1 + avg_tokens / df[term])
            for term, count in tf.items()
            if term in allowed
        }
    return CtfidfTable(
        scores=scores,
        avg_tokens_per_class=avg_tokens,
        df={t: df[t] for t in allowed},
        n_documents=n_documents,
        class_names=class_names,
    )


def top_terms(table: CtfidfTable, class_name: str, n: int) -> list[tuple[str, float]]:
    """Highest-scoring terms for a class, descending; ties break lexicographically."""
    if class_name not in table.scores:
        raise UnknownClass(f"no class {class_name!r} in the table")
    ranked = sorted(table.scores[class_name].items(), key=lambda p: (-p[1], p[0]))
    return ranked[:n]


def five_year_bucket(year: int) -> str:
    """Half-open five-year bucket label, anchored at multiples of five."""
    start = (year // 5) * 5
    return f"{start}-{start + 4}"
