"""Exception taxonomy shared across the pipeline."""
from __future__ import annotations


class ThemeflowError(Exception):
    """Base class for everything this package raises on purpose."""


# -- corpus ingestion / segmentation ---------------------------------------

class FileUnreadable(ThemeflowError):
    pass


class SchemaViolation(ThemeflowError):
    def __init__(self, row: int, field: str, detail: str = ""):
        self.row = row
        self.field = field
        super().__init__(f"row {row}: bad field {field!r}" + (f" ({detail})" if detail else ""))


class DuplicateId(ThemeflowError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"duplicate document id {doc_id!r}")


class NoFulltext(ThemeflowError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"document {doc_id!r} has no fulltext")


class DegenerateText(ThemeflowError):
    pass


# -- provider gateway --------------------------------------------------------

class ProviderError(ThemeflowError):
    """Base for failures talking to an embedding or chat service."""


class AuthFailure(ProviderError):
    pass


class RateLimited(ProviderError):
    pass


class TransportError(ProviderError):
    pass


class DimensionMismatch(ProviderError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected embedding dim {expected}, got {got}")


class MalformedReply(ProviderError):
    def __init__(self, detail: str = "", raw_reply: str = ""):
        self.raw_reply = raw_reply
        super().__init__(detail or "chat reply never parsed into the expected shape")


class StubExhausted(ProviderError):
    pass


# -- vector math ---------------------------------------------------------

class ZeroVector(ThemeflowError):
    pass


class TooFewVectors(ThemeflowError):
    def __init__(self, k: int, n: int):
        self.k = k
        self.n = n
        super().__init__(f"need at least k={k} vectors, got {n}")


class EmptyCluster(ThemeflowError):
    pass


# -- theme synthesis / classification ----------------------------------------

class EmptyInput(ThemeflowError):
    pass


class ClusterCountMismatch(ThemeflowError):
    pass


class MissingIds(ThemeflowError):
    def __init__(self, ids: list[str]):
        self.ids = list(ids)
        super().__init__(f"classifier reply never covered ids: {self.ids}")


class MissingConsensus(ThemeflowError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"no consensus record for document {doc_id!r}")


# -- graph aggregation ----------------------------------------------------

class UnassignedDocument(ThemeflowError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"document {doc_id!r} has no primary theme assignment")


# -- lexical validation ----------------------------------------------------

class UnknownTerm(ThemeflowError):
    pass


class UnknownClass(ThemeflowError):
    pass


class EmptyClass(ThemeflowError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"class {name!r} has no documents")


# -- alignment metrics -----------------------------------------------------

class EmptyCorpus(ThemeflowError):
    pass


class EmptyTheme(ThemeflowError):
    pass
