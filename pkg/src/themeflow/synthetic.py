"""Synthetic corpora and cooperative offline providers for end-to-end runs.

A planted corpus gives every document a hidden topic with its own vocabulary.
The matching embedding transport maps each document near its topic's anchor
direction (tight bundles, separable by construction), and the planted chat
provider answers classification prompts with the text's planted topic at a
configurable consistency rate, scattering errors uniformly over the other
categories. Everything is deterministic given the seeds.
"""
from __future__ import annotations

import json
import random
import re
from collections import Counter

import numpy as np

from .corpus import Corpus, Document
from .providers import stub_embedding
from .errors import StubExhausted

PLANTED_PREFIX = "topic"
_MARKER_RE = re.compile(rf"\b{PLANTED_PREFIX}(\d+)[a-z]+\b")

_FILLER = (
    "study results analysis approach measurements experiments data moreover "
    "observed reported significant novel proposed demonstrates findings"
).split()


def planted_vocabulary(topic: int, size: int = 24) -> list[str]:
    """Content words owned by one planted topic, e.g. topic3alpha."""
    suffixes = (
        "alpha beta gamma delta epsilon zeta eta iota kappa lam mu nu xi omicron "
        "pi rho sigma tau upsilon phi chi psi omega core"
    ).split()
    return [f"{PLANTED_PREFIX}{topic}{s}" for s in suffixes[:size]]


def planted_title(topic: int) -> str:
    return f"Planted Domain {topic}"


def planted_topic_counts(text: str) -> Counter:
    """Marker-token occurrences per planted topic index."""
    return Counter(int(m) for m in _MARKER_RE.findall(text))


def planted_topic_of(text: str) -> int | None:
    """Recover the dominant planted topic index from marker tokens."""
    hits = planted_topic_counts(text)
    if not hits:
        return None
    return min(hits, key=lambda t: (-hits[t], t))


def make_planted_corpus(
    n_docs: int = 300,
    n_topics: int = 4,
    seed: int = 0,
    words_per_abstract: int = 40,
    with_fulltext: bool = False,
    dual_label_rates: list[float] | None = None,
) -> tuple[Corpus, dict[str, int]]:
    """Corpus of n_docs documents split evenly over n_topics planted topics."""
    rng = random.Random(seed)
    docs = []
    truth: dict[str, int] = {}
    for i in range(n_docs):
        topic = i % n_topics
        vocab = planted_vocabulary(topic)
        words = []
        for _ in range(words_per_abstract):
            pool = vocab if rng.random() < 0.85 else _FILLER
            words.append(rng.choice(pool))
        doc_id = f"doc{i:04d}"
        labels: tuple[str, ...] = ("planted",)
        if dual_label_rates is not None and rng.random() < dual_label_rates[topic]:
            labels = ("planted", "crossover")
        fulltext = None
        if with_fulltext:
            paras = []
            for _ in range(3):
                body = [rng.choice(vocab if rng.random() < 0.85 else _FILLER) for _ in range(60)]
                paras.append(" ".join(body) + ".")
            fulltext = "\n\n".join(paras)
        docs.append(
            Document(
                id=doc_id,
                abstract_text=" ".join(words) + ".",
                title=f"Synthetic article {i}",
                fulltext=fulltext,
                year=2005 + (i % 20),
                editorial_labels=labels,
            )
        )
        truth[doc_id] = topic
    return Corpus(documents=docs, provenance=f"planted(n={n_docs}, topics={n_topics}, seed={seed})"), truth


class PlantedEmbeddingTransport:
    """Embeddings bundled tightly around one anchor axis per planted topic."""

    def __init__(self, dim: int, seed: int = 0, spread: float = 0.05):
        if dim < 8:
            raise ValueError("dim must be >= 8 to hold the topic anchors")
        self.dim = dim
        self.seed = seed
        self.spread = spread

    def embed(self, texts: list[str], model: str) -> list[list[float]]:
        out = []
        for text in texts:
            topic = planted_topic_of(text)
            noise = np.asarray(stub_embedding(text, self.dim, self.seed))
            if topic is None:
                vec = noise
            else:
                anchor = np.zeros(self.dim)
                anchor[topic % self.dim] = 1.0
                vec = (1.0 - self.spread) * anchor + self.spread * noise
            vec = vec / np.linalg.norm(vec)
            out.append([float(v) for v in vec])
        return out


class PlantedChatProvider:
    """Cooperative chat stand-in with a configurable per-call consistency rate.

    Summarize prompts are answered with the dominant planted topic's title and
    vocabulary. Classify prompts answer each text's planted category with
    probability `consistency` (drawn from a per-(text id, call number) seeded
    stream so results do not depend on call order), otherwise a uniformly
    random different category.
    """

    def __init__(self, consistency: float = 1.0, seed: int = 0):
        self.consistency = consistency
        self.seed = seed
        self._calls: Counter = Counter()
        self.prompts: list[str] = []

    @staticmethod
    def _between(prompt: str, start: str, end: str) -> str:
        i = prompt.index(start) + len(start)
        j = prompt.index(end, i)
        return prompt[i:j]

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if "distill them into a comprehensive summary" in prompt:
            return self._summarize(prompt)
        if "based on the following titles and keywords" in prompt:
            return self._classes(prompt)
        if "multi-class text classification" in prompt:
            return self._classify(prompt)
        raise StubExhausted("planted chat provider cannot interpret this prompt")

    def _summarize(self, prompt: str) -> str:
        quoted = self._between(prompt, "Quotes: ", "\n\nTake these")
        topic = planted_topic_of(quoted)
        if topic is None:
            return json.dumps(
                {"summary": "Mixed content.", "title": "Assorted Findings", "keywords": ["misc"] * 5}
            )
        vocab = planted_vocabulary(topic)[:5]
        return json.dumps(
            {
                "summary": f"Texts centered on {planted_title(topic)}.",
                "title": planted_title(topic),
                "keywords": vocab,
            }
        )

    def _classes(self, prompt: str) -> str:
        listing = json.loads(self._between(prompt, "Titles and Keywords: ", "\n\nEach class"))
        classes = []
        for i, entry in enumerate(listing):
            classes.append(
                {
                    "class": str(i),
                    "title": entry["title"],
                    "desc": f"Work in the area of {entry['title']}.",
                }
            )
        return json.dumps({"classes": classes})

    def _classify(self, prompt: str) -> str:
        categories = json.loads(self._between(prompt, "Categories: ", "\n\nProvided Text: "))["classes"]
        texts = json.loads(self._between(prompt, "Provided Text: ", "\n\nReport your output"))
        title_to_cid = {c["title"]: c["class"] for c in categories}
        other_cids = [c["class"] for c in categories if c["title"].strip().lower() == "other"]
        other_cid = other_cids[0] if other_cids else categories[-1]["class"]
        chunks = []
        for entry in texts:
            self._calls[entry["id"]] += 1
            rng = random.Random(f"{self.seed}:{entry['id']}:{self._calls[entry['id']]}")
            # best planted topic among the categories actually on offer
            hits = planted_topic_counts(entry["text"])
            offered = [t for t in hits if planted_title(t) in title_to_cid]
            if offered:
                best = min(offered, key=lambda t: (-hits[t], t))
                right = title_to_cid[planted_title(best)]
            else:
                right = other_cid
            if rng.random() < self.consistency:
                answer = right
            else:
                alternatives = [c["class"] for c in categories if c["class"] != right]
                answer = rng.choice(alternatives)
            chunks.append({"id": entry["id"], "class": answer})
        return json.dumps({"chunks": chunks})


def majority_probability(p: float, runs: int = 5, need: int = 3) -> float:
    """P(a label with per-run probability p reaches `need` of `runs` matches)."""
    from math import comb

    return sum(comb(runs, m) * p**m * (1 - p) ** (runs - m) for m in range(need, runs + 1))


def zipf_tokens(n_tokens: int, vocab_size: int, exponent: float = 1.0, seed: int = 0):
    """Multinomial sample from a Zipf(exponent) distribution.

    Vocabulary terms are named so lexicographic order equals probability
    order; returns (tokens, probabilities, vocabulary).
    """
    ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
    probs = ranks**-exponent
    probs /= probs.sum()
    vocab = [f"t{r:05d}" for r in range(1, vocab_size + 1)]
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n_tokens, probs)
    tokens: list[str] = []
    for term, c in zip(vocab, counts):
        tokens.extend([term] * int(c))
    rng.shuffle(tokens)  # type: ignore[arg-type]
    return tokens, probs.tolist(), vocab
