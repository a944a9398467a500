"""Theme generation: build the two-stage prompts and parse label/description replies.

Stage one summarizes each cluster's representative texts into a title plus
keywords; stage two sends only those titles and keywords (never the full
texts) in a single call that yields the short class titles and one-sentence
descriptions used for classification.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import ClusterCountMismatch, EmptyInput
from .providers import ProviderConfig, chat_complete_structured

OTHER_TITLE = "Other"
OTHER_DESCRIPTION = "None of the other categories fit this text."

REPRESENTATIVE_DELIMITER = "\n---\n"


def _load_asset(name: str) -> str:
    return resources.files("themeflow.assets").joinpath(name).read_text(encoding="utf-8")


SUMMARIZE_TEMPLATE = _load_asset("prompt_summarize_topics.txt")
GENERATE_CLASSES_TEMPLATE = _load_asset("prompt_generate_classes.txt")
CLASSIFY_TEMPLATE = _load_asset("prompt_classify_json.txt")


def fill_template(template: str, substitutions: dict[str, str]) -> str:
    """Splice values into template markers without re-scanning inserted text."""
    positions = sorted((template.index(marker), marker) for marker in substitutions)
    out = []
    cursor = 0
    for pos, marker in positions:
        out.append(template[cursor:pos])
        out.append(substitutions[marker])
        cursor = pos + len(marker)
    out.append(template[cursor:])
    return "".join(out)


@dataclass(frozen=True)
class Theme:
    local_id: int
    title: str
    description: str
    keywords: tuple[str, ...] = ()
    born_iteration: int = 0
    summary: str = ""  # stage-one provenance, not consumed downstream

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise ValueError("theme title must be non-empty")
        if not self.description.strip():
            raise ValueError("theme description must be non-empty")

    @property
    def is_other(self) -> bool:
        return self.title == OTHER_TITLE and self.description == OTHER_DESCRIPTION


@dataclass
class ThemeSet:
    """Themes of one iteration; the reserved Other entry is always last."""

    themes: list[Theme] = field(default_factory=list)
    includes_other: bool = True

    def __post_init__(self) -> None:
        ids = [t.local_id for t in self.themes]
        if len(set(ids)) != len(ids):
            raise ValueError("theme local_ids must be unique")
        if self.includes_other:
            others = [t for t in self.themes if t.is_other]
            if len(others) != 1 or not self.themes[-1].is_other:
                raise ValueError("exactly one reserved Other entry, placed last")

    @property
    def specific(self) -> list[Theme]:
        return [t for t in self.themes if not t.is_other]

    @property
    def other_local_id(self) -> int:
        if not self.includes_other:
            raise ValueError("theme set has no Other entry")
        return self.themes[-1].local_id

    def by_local_id(self, local_id: int) -> Theme:
        for t in self.themes:
            if t.local_id == local_id:
                return t
        raise KeyError(local_id)

    @classmethod
    def with_other(cls, themes: list[Theme]) -> "ThemeSet":
        other_id = max((t.local_id for t in themes), default=-1) + 1
        other = Theme(local_id=other_id, title=OTHER_TITLE, description=OTHER_DESCRIPTION)
        return cls(themes=list(themes) + [other], includes_other=True)


def build_summarize_prompt(representative_texts: list[str]) -> str:
    if not representative_texts:
        raise EmptyInput("need at least one representative text")
    return fill_template(
        SUMMARIZE_TEMPLATE, {"{text}": REPRESENTATIVE_DELIMITER.join(representative_texts)}
    )


def build_generate_classes_prompt(titles_and_keywords: list[tuple[str, list[str]]]) -> str:
    if not titles_and_keywords:
        raise EmptyInput("need at least one (title, keywords) entry")
    listing = [{"title": t, "keywords": list(kw)} for t, kw in titles_and_keywords]
    return fill_template(GENERATE_CLASSES_TEMPLATE, {"{text}": json.dumps(listing)})


def build_classify_prompt(categories: list[tuple[str, str, str]], texts: list[tuple[str, str]]) -> str:
    """Categories are (class id, title, desc); texts are (id, body)."""
    classes_json = json.dumps(
        {"classes": [{"class": cid, "title": title, "desc": desc} for cid, title, desc in categories]}
    )
    texts_json = json.dumps([{"id": tid, "text": body} for tid, body in texts])
    return fill_template(CLASSIFY_TEMPLATE, {"{classes}": classes_json, "{text}": texts_json})


def synthesize_themes(
    clusters: list[tuple[int, list[str]]],
    provider,
    config: ProviderConfig,
    born_iteration: int = 0,
) -> ThemeSet:
    """Summarize each cluster, then derive class titles/descriptions in one call."""
    if not clusters:
        raise EmptyInput("no clusters to synthesize")
    summaries: list[dict] = []
    for cluster_id, reps in clusters:
        if not reps:
            raise EmptyInput(f"cluster {cluster_id} has no representative texts")
        prompt = build_summarize_prompt(reps)
        exchange = chat_complete_structured(prompt, config, "themes", provider)
        payload = exchange.parsed_payload
        summaries.append(
            {
                "cluster_id": cluster_id,
                "title": payload["title"],
                "keywords": [str(k) for k in payload["keywords"]],
                "summary": payload.get("summary", ""),
            }
        )

    classes_prompt = build_generate_classes_prompt([(s["title"], s["keywords"]) for s in summaries])
    exchange = chat_complete_structured(classes_prompt, config, "classes", provider)
    entries = exchange.parsed_payload["classes"]
    if len(entries) != len(summaries):
        raise ClusterCountMismatch(
            f"classes reply has {len(entries)} entries for {len(summaries)} clusters"
        )
    by_position: dict[int, dict] = {}
    for entry in entries:
        try:
            pos = int(str(entry["class"]))
        except ValueError:
            raise ClusterCountMismatch(f"unparseable class id {entry['class']!r}")
        if pos < 0 or pos >= len(summaries) or pos in by_position:
            raise ClusterCountMismatch(f"class id {pos} out of range or repeated")
        by_position[pos] = entry

    themes = [
        Theme(
            local_id=summaries[pos]["cluster_id"],
            title=by_position[pos]["title"],
            description=by_position[pos]["desc"],
            keywords=tuple(summaries[pos]["keywords"]),
            born_iteration=born_iteration,
            summary=summaries[pos]["summary"],
        )
        for pos in range(len(summaries))
    ]
    return ThemeSet.with_other(themes)
