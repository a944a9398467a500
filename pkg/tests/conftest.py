import json
from pathlib import Path

import pytest

from themeflow.providers import ProviderConfig
from themeflow.synthesis import Theme, ThemeSet


@pytest.fixture
def provider_config():
    return ProviderConfig(embed_dim=8, max_retries=2, embed_batch_size=4)


@pytest.fixture
def two_themes():
    return ThemeSet.with_other(
        [
            Theme(local_id=0, title="Alpha Studies", description="Work about alpha things."),
            Theme(local_id=1, title="Beta Methods", description="Work about beta things."),
        ]
    )


def classify_reply(pairs):
    """Build a valid classifications JSON reply from (id, class) pairs."""
    return json.dumps({"chunks": [{"id": str(i), "class": str(c)} for i, c in pairs]})


def write_jsonl(path: Path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
