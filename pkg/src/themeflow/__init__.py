"""Two-phase LLM-assisted thematic mapping with lexical and alignment validation."""

__version__ = "0.1.0"
