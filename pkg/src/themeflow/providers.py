"""Uniform access to embedding and chat-completion services.

Speaks an OpenAI-compatible REST shape (POST /embeddings, POST
/chat/completions) with bearer auth, retry with backoff, and a JSON-lines
embedding cache consulted before any network call. Fully deterministic
offline stubs cover both services so the whole pipeline runs without a
network.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    AuthFailure,
    DimensionMismatch,
    MalformedReply,
    RateLimited,
    StubExhausted,
    TransportError,
)


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str = "https://api.openai.com/v1"
    api_key_env: str = "THEMEFLOW_API_KEY"
    embed_model_name: str = "text-embedding-3-small"
    chat_model_name: str = "gpt-4o-mini"
    embed_dim: int = 1536
    max_retries: int = 3
    request_timeout: float = 60.0
    temperature: float = 0.0
    embed_batch_size: int = 128

    def __post_init__(self) -> None:
        if self.embed_dim < 2:
            raise ValueError("embed_dim must be >= 2")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass
class ChatExchange:
    prompt_text: str
    raw_reply: str
    parsed_payload: object
    attempt_count: int

    def __post_init__(self) -> None:
        if self.attempt_count < 1:
            raise ValueError("attempt_count must be >= 1")


# -- embedding cache ---------------------------------------------------------

def _content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class EmbeddingCache:
    """(model name, content hash) -> vector, persisted as JSON lines.

    Loads eagerly, appends on every put; a hit returns the stored float64
    values bit-identically (JSON round-trips Python floats exactly).
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[tuple[str, str], list[float]] = {}
        self._handle = None
        if self.path is not None and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    self._entries[(rec["model"], rec["sha"])] = [float(v) for v in rec["values"]]

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, model: str, text: str) -> list[float] | None:
        return self._entries.get((model, _content_hash(text)))

    def put(self, model: str, text: str, values: list[float]) -> None:
        key = (model, _content_hash(text))
        if key in self._entries:
            return
        self._entries[key] = list(values)
        if self.path is not None:
            if self._handle is None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                self._handle = self.path.open("a", encoding="utf-8")
            self._handle.write(json.dumps({"model": key[0], "sha": key[1], "values": list(values)}) + "\n")
            self._handle.flush()

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None


# -- deterministic stub embedding --------------------------------------------

def stub_embedding(text: str, dim: int, seed: int) -> list[float]:
    """Pure unit-norm vector derived from sha256 of (seed, dim, text).

    Blocks of the keyed digest stream are read as big-endian uint64 and
    mapped affinely onto [-1, 1); the result is L2-normalized.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    base = hashlib.sha256(f"{seed}:{dim}:".encode("utf-8") + text.encode("utf-8")).digest()
    vals: list[float] = []
    counter = 0
    while len(vals) < dim:
        block = hashlib.sha256(base + counter.to_bytes(8, "big")).digest()
        for off in range(0, 32, 8):
            vals.append(int.from_bytes(block[off : off + 8], "big") / 2.0**64 * 2.0 - 1.0)
        counter += 1
    vals = vals[:dim]
    norm = sum(v * v for v in vals) ** 0.5
    return [v / norm for v in vals]


# -- transports ----------------------------------------------------------------

def _backoff_seconds(attempt: int) -> float:
    return min(0.5 * (2**attempt), 8.0)


class _HttpBase:
    def __init__(self, config: ProviderConfig, session=None, sleeper=time.sleep):
        self.config = config
        self.sleeper = sleeper
        if session is None:
            import requests

            session = requests.Session()
        self.session = session

    def _headers(self) -> dict:
        key = os.environ.get(self.config.api_key_env)
        if not key:
            raise AuthFailure(f"environment variable {self.config.api_key_env} is not set")
        return {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    def _post(self, endpoint: str, payload: dict) -> dict:
        url = self.config.base_url.rstrip("/") + endpoint
        headers = self._headers()
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                resp = self.session.post(url, json=payload, headers=headers, timeout=self.config.request_timeout)
            except Exception as exc:  # connection-level failure
                last_error = TransportError(f"request to {url} failed: {exc}")
                self.sleeper(_backoff_seconds(attempt))
                continue
            status = getattr(resp, "status_code", 0)
            if status in (401, 403):
                raise AuthFailure(f"provider rejected credentials (HTTP {status})")
            if status == 429:
                last_error = RateLimited("provider rate limit (HTTP 429)")
                retry_after = None
                headers_obj = getattr(resp, "headers", {}) or {}
                if "Retry-After" in headers_obj:
                    try:
                        retry_after = float(headers_obj["Retry-After"])
                    except (TypeError, ValueError):
                        retry_after = None
                self.sleeper(retry_after if retry_after is not None else _backoff_seconds(attempt))
                continue
            if 500 <= status < 600:
                last_error = TransportError(f"provider error HTTP {status}")
                self.sleeper(_backoff_seconds(attempt))
                continue
            if status != 200:
                raise TransportError(f"unexpected HTTP {status} from {url}")
            try:
                return resp.json()
            except Exception as exc:
                raise TransportError(f"non-JSON response body: {exc}")
        raise last_error if last_error is not None else TransportError("request never completed")


class HttpEmbeddingTransport(_HttpBase):
    def embed(self, texts: list[str], model: str) -> list[list[float]]:
        body = self._post("/embeddings", {"model": model, "input": list(texts)})
        try:
            data = sorted(body["data"], key=lambda d: d["index"])
            return [[float(v) for v in d["embedding"]] for d in data]
        except (KeyError, TypeError) as exc:
            raise TransportError(f"malformed embeddings response: {exc}")


class HttpChatTransport(_HttpBase):
    def complete(self, prompt: str) -> str:
        body = self._post(
            "/chat/completions",
            {
                "model": self.config.chat_model_name,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": self.config.temperature,
            },
        )
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed chat response: {exc}")


class StubEmbeddingTransport:
    """Offline embedding service backed by stub_embedding."""

    def __init__(self, dim: int, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self.calls = 0

    def embed(self, texts: list[str], model: str) -> list[list[float]]:
        self.calls += 1
        return [stub_embedding(t, self.dim, self.seed) for t in texts]


class LexicalStubEmbeddingTransport:
    """Offline embedding that reflects token overlap, not just text identity.

    A text's vector is the normalized sum of one pseudo-random unit vector per
    token, so documents sharing vocabulary land near each other and cluster
    meaningfully without a network.
    """

    def __init__(self, dim: int, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self.calls = 0
        self._token_cache: dict[str, list[float]] = {}

    def _token_vector(self, token: str) -> list[float]:
        vec = self._token_cache.get(token)
        if vec is None:
            vec = stub_embedding(token, self.dim, self.seed)
            self._token_cache[token] = vec
        return vec

    def embed(self, texts: list[str], model: str) -> list[list[float]]:
        self.calls += 1
        out = []
        for text in texts:
            tokens = [t for t in text.lower().split() if t.strip(".,;:!?()")]
            if not tokens:
                out.append(stub_embedding(text, self.dim, self.seed))
                continue
            acc = [0.0] * self.dim
            for tok in tokens:
                for i, v in enumerate(self._token_vector(tok.strip(".,;:!?()"))):
                    acc[i] += v
            norm = sum(v * v for v in acc) ** 0.5
            if norm < 1e-12:
                out.append(stub_embedding(text, self.dim, self.seed))
            else:
                out.append([v / norm for v in acc])
        return out


class ScriptedChatStub:
    """Chat stand-in: a queue of replies consumed in order, then substring rules."""

    def __init__(self, replies: list[str] | None = None, rules: dict[str, str] | None = None):
        self.queue = list(replies or [])
        self.rules = dict(rules or {})
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if self.queue:
            return self.queue.pop(0)
        for needle, reply in self.rules.items():
            if needle in prompt:
                return reply
        raise StubExhausted("scripted chat stub has no reply for this prompt")


# -- operations ---------------------------------------------------------------

def embed_texts(texts: list[str], config: ProviderConfig, cache: EmbeddingCache, transport) -> list[list[float]]:
    """One vector per input text, order-aligned; cache consulted first."""
    if not texts:
        raise ValueError("texts must be non-empty")
    if any(not t for t in texts):
        raise ValueError("every text must be non-empty")
    out: list[list[float] | None] = [None] * len(texts)
    misses: list[int] = []
    for i, t in enumerate(texts):
        hit = cache.get(config.embed_model_name, t)
        if hit is not None:
            out[i] = hit
        else:
            misses.append(i)
    for start in range(0, len(misses), config.embed_batch_size):
        batch = misses[start : start + config.embed_batch_size]
        vectors = transport.embed([texts[i] for i in batch], config.embed_model_name)
        if len(vectors) != len(batch):
            raise TransportError(f"asked for {len(batch)} embeddings, got {len(vectors)}")
        for i, vec in zip(batch, vectors):
            if len(vec) != config.embed_dim:
                raise DimensionMismatch(config.embed_dim, len(vec))
            cache.put(config.embed_model_name, texts[i], vec)
            out[i] = vec
    return [v for v in out]  # type: ignore[misc]


_FENCE_RE = re.compile(r"```[a-zA-Z]*\n?|```")


def recover_json(raw: str):
    """Tolerant JSON extraction: strip code fences, take the outermost braces."""
    candidate = _FENCE_RE.sub("", raw).strip()
    start = candidate.find("{")
    end = candidate.rfind("}")
    if start == -1 or end == -1 or end <= start:
        return None
    try:
        return json.loads(candidate[start : end + 1])
    except json.JSONDecodeError:
        return None


def _chunk_key(entry: dict, names: tuple[str, ...]):
    for name in names:
        if name in entry:
            return entry[name]
    return None


def _valid_shape(payload, schema_hint: str) -> bool:
    if not isinstance(payload, dict):
        return False
    if schema_hint == "themes":
        return (
            isinstance(payload.get("title"), str)
            and payload["title"].strip() != ""
            and isinstance(payload.get("summary"), str)
            and isinstance(payload.get("keywords"), list)
            and len(payload["keywords"]) >= 1
            and all(isinstance(k, str) for k in payload["keywords"])
        )
    if schema_hint == "classes":
        classes = payload.get("classes")
        if not isinstance(classes, list) or not classes:
            return False
        return all(
            isinstance(c, dict)
            and isinstance(c.get("title"), str)
            and isinstance(c.get("desc"), str)
            and "class" in c
            for c in classes
        )
    if schema_hint == "classifications":
        chunks = payload.get("chunks")
        if not isinstance(chunks, list):
            return False
        return all(
            isinstance(c, dict)
            and _chunk_key(c, ("id", "{id}")) is not None
            and _chunk_key(c, ("class", "{class}")) is not None
            for c in chunks
        )
    raise ValueError(f"unknown schema hint {schema_hint!r}")


def parsed_chunks(payload: dict) -> list[tuple[str, str]]:
    """Normalize a classifications payload to (id, class) string pairs."""
    out = []
    for c in payload["chunks"]:
        cid = _chunk_key(c, ("id", "{id}"))
        cls = _chunk_key(c, ("class", "{class}"))
        out.append((str(cid), str(cls)))
    return out


def chat_complete_structured(prompt: str, config: ProviderConfig, schema_hint: str, transport) -> ChatExchange:
    """Send a prompt, recover the JSON payload, retry the same prompt on parse failure."""
    if not prompt:
        raise ValueError("prompt must be non-empty")
    raw = ""
    for attempt in range(1, config.max_retries + 2):
        raw = transport.complete(prompt)
        payload = recover_json(raw)
        if payload is not None and _valid_shape(payload, schema_hint):
            return ChatExchange(prompt_text=prompt, raw_reply=raw, parsed_payload=payload, attempt_count=attempt)
    raise MalformedReply(
        f"no parseable {schema_hint} payload after {config.max_retries + 1} attempts", raw_reply=raw
    )


# -- lexical offline chat (stub mode) -----------------------------------------

_WORD_RE = re.compile(r"[a-z][a-z0-9_-]{2,}")
_STUB_STOP = frozenset(
    "the and for with that this from are was were been being have has had can could "
    "may might will would our their its those these such than then into over under "
    "between through using use based new more most other others also however".split()
)


def _stub_tokens(text: str) -> list[str]:
    return [w for w in _WORD_RE.findall(text.lower()) if w not in _STUB_STOP]


class LexicalStubChat:
    """Deterministic offline chat provider driven by token statistics.

    Summarize prompts are answered with the most frequent content words of
    the quoted texts; classify prompts pick the category whose title and
    description share the most tokens with each text, falling back to Other.
    """

    def __init__(self):
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if "distill them into a comprehensive summary" in prompt:
            return self._summarize(prompt)
        if "based on the following titles and keywords" in prompt:
            return self._classes(prompt)
        if "multi-class text classification" in prompt:
            return self._classify(prompt)
        raise StubExhausted("lexical stub cannot interpret this prompt")

    @staticmethod
    def _between(prompt: str, start: str, end: str) -> str:
        i = prompt.index(start) + len(start)
        j = prompt.index(end, i)
        return prompt[i:j]

    def _summarize(self, prompt: str) -> str:
        quoted = self._between(prompt, "Quotes: ", "\n\nTake these")
        counts = Counter(_stub_tokens(quoted))
        top = [w for w, _ in sorted(counts.items(), key=lambda p: (-p[1], p[0]))[:5]]
        while len(top) < 3:
            top.append(f"theme{len(top)}")
        title = " ".join(w.capitalize() for w in top[:2])
        summary = "Texts about " + ", ".join(top) + "."
        return json.dumps({"summary": summary, "title": title, "keywords": top})

    def _classes(self, prompt: str) -> str:
        listing = json.loads(self._between(prompt, "Titles and Keywords: ", "\n\nEach class"))
        classes = []
        for i, entry in enumerate(listing):
            words = entry["title"].split()[:3]
            classes.append(
                {
                    "class": str(i),
                    "title": " ".join(words),
                    "desc": "Research on " + ", ".join(entry.get("keywords", [])[:5]) + ".",
                }
            )
        return json.dumps({"classes": classes})

    def _classify(self, prompt: str) -> str:
        categories = json.loads(self._between(prompt, "Categories: ", "\n\nProvided Text: "))["classes"]
        texts = json.loads(self._between(prompt, "Provided Text: ", "\n\nReport your output"))
        other_ids = [c["class"] for c in categories if c["title"].strip().lower() == "other"]
        other_id = other_ids[0] if other_ids else categories[-1]["class"]
        vocab = {
            c["class"]: set(_stub_tokens(c["title"])) | set(_stub_tokens(c["desc"]))
            for c in categories
        }
        chunks = []
        for entry in texts:
            tokens = Counter(_stub_tokens(entry["text"]))
            best, best_score = other_id, 0
            for c in categories:
                cid = c["class"]
                if cid == other_id:
                    continue
                score = sum(tokens[w] for w in vocab[cid])
                if score > best_score:
                    best, best_score = cid, score
            chunks.append({"id": entry["id"], "class": best})
        return json.dumps({"chunks": chunks})
