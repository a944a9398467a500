import json
from pathlib import Path

import pytest

from themeflow.cli import main
from themeflow.reports import write_corpus_snapshot
from themeflow.synthetic import make_planted_corpus

from conftest import write_jsonl


def write_config(
    path: Path,
    corpus: Path,
    out: Path,
    k: int = 3,
    seed: int = 9,
    stub: bool = True,
    max_iterations: int = 5,
    tau: float = 0.6,
    api_key_env: str = "THEMEFLOW_TEST_MISSING_KEY",
) -> Path:
    path.write_text(
        f"""
[corpus]
path = "{corpus}"
format = "jsonl"

[output]
dir = "{out}"

[provider]
embed_dim = 16
max_retries = 2
api_key_env = "{api_key_env}"

[loop]
k = {k}
tau = {tau}
max_iterations = {max_iterations}

[segmentation]
max_chars = 400
min_chars = 60

[lexical]
min_doc_freq = 2
max_doc_fraction = 0.95

[run]
seed = {seed}
stub = {"true" if stub else "false"}
""",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def planted_setup(tmp_path):
    corpus, _ = make_planted_corpus(n_docs=45, n_topics=3, seed=5, with_fulltext=True)
    corpus_path = tmp_path / "corpus.jsonl"
    write_corpus_snapshot(corpus, corpus_path)
    out = tmp_path / "out"
    config = write_config(tmp_path / "run.toml", corpus_path, out)
    return config, out


class TestExitCodes:
    def test_ingest_success(self, planted_setup, capsys):
        config, out = planted_setup
        assert main(["ingest", "--config", str(config)]) == 0
        assert (out / "corpus_snapshot.jsonl").exists()
        captured = capsys.readouterr()
        assert "documents: 45" in captured.out
        assert "fulltext coverage" in captured.out

    def test_missing_config_is_usage_error(self, tmp_path):
        assert main(["ingest", "--config", str(tmp_path / "absent.toml")]) == 1

    def test_bad_flag_is_usage_error(self, planted_setup):
        config, _ = planted_setup
        assert main(["ingest", "--config", str(config), "--no-such-flag"]) == 1

    def test_missing_prerequisite_names_artifact(self, planted_setup, capsys):
        config, out = planted_setup
        code = main(["classify-primary", "--config", str(config)])
        assert code == 1
        assert "corpus_snapshot.jsonl" in capsys.readouterr().err

    def test_full_report_success(self, planted_setup):
        config, out = planted_setup
        assert main(["report", "--config", str(config)]) == 0
        for name in (
            "corpus_snapshot.jsonl",
            "registry.json",
            "trace.json",
            "segment_labels.csv",
            "adjacency_matrix.csv",
            "flow_summary.csv",
            "alignment_report.csv",
            "zipf_profile.csv",
            "ctfidf_terms.csv",
            "heatmap.svg",
            "term_grid.svg",
            "manifest.json",
        ):
            assert (out / name).exists(), name


def test_provider_failure_without_stub(tmp_path, monkeypatch):
    corpus, _ = make_planted_corpus(n_docs=20, n_topics=2, seed=1)
    corpus_path = tmp_path / "c.jsonl"
    write_corpus_snapshot(corpus, corpus_path)
    out = tmp_path / "out"
    config = write_config(tmp_path / "run.toml", corpus_path, out, k=2, stub=False)
    monkeypatch.delenv("THEMEFLOW_TEST_MISSING_KEY", raising=False)
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["classify-primary", "--config", str(config)]) == 2


def test_nonconvergence_exit_three(tmp_path):
    # every document has its own vocabulary: word-overlap classification sends
    # almost everything to Other, no cluster ever reaches tau
    records = [
        {"id": f"d{i}", "abstract": " ".join(f"d{i}w{j}" for j in range(25))} for i in range(30)
    ]
    corpus_path = tmp_path / "c.jsonl"
    write_jsonl(corpus_path, records)
    out = tmp_path / "out"
    config = write_config(tmp_path / "run.toml", corpus_path, out, k=3, max_iterations=2)
    assert main(["ingest", "--config", str(config)]) == 0
    code = main(["classify-primary", "--config", str(config)])
    assert code == 3
    # partial outputs still written
    assert (out / "registry.json").exists()
    trace = json.loads((out / "trace.json").read_text())
    assert trace["converged"] is False
    assert trace["stop_reason"] == "max_iterations"


class TestManifest:
    def test_every_output_file_listed(self, planted_setup):
        config, out = planted_setup
        assert main(["report", "--config", str(config)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        on_disk = {p.name for p in out.iterdir() if p.is_file()}
        assert on_disk <= set(manifest["files"])
        assert "manifest.json" in manifest["files"]
        assert [s["command"] for s in manifest["stages"]] == [
            "ingest",
            "classify-primary",
            "classify-secondary",
            "analyze",
        ]
        assert all("config" in s for s in manifest["stages"])

    def test_manifest_records_seed(self, planted_setup):
        config, out = planted_setup
        assert main(["report", "--config", str(config)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert all(s["config"]["seed"] == 9 for s in manifest["stages"])


class TestReproducibilityAndIsolation:
    def test_same_seed_byte_identical_csvs(self, tmp_path):
        corpus, _ = make_planted_corpus(n_docs=40, n_topics=3, seed=2, with_fulltext=True)
        corpus_path = tmp_path / "c.jsonl"
        write_corpus_snapshot(corpus, corpus_path)
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / f"out_{run}"
            config = write_config(tmp_path / f"run_{run}.toml", corpus_path, out, seed=17)
            assert main(["report", "--config", str(config)]) == 0
            outputs.append(out)
        a, b = outputs
        for csv_file in sorted(a.glob("*.csv")):
            assert csv_file.read_bytes() == (b / csv_file.name).read_bytes(), csv_file.name
        for svg_file in sorted(a.glob("*.svg")):
            assert svg_file.read_bytes() == (b / svg_file.name).read_bytes(), svg_file.name

    def test_analyze_stage_isolated_and_offline(self, planted_setup, monkeypatch):
        config, out = planted_setup
        assert main(["report", "--config", str(config)]) == 0
        analysis_files = [
            "adjacency_matrix.csv",
            "adjacency_normalized.csv",
            "flow_summary.csv",
            "alignment_report.csv",
            "zipf_profile.csv",
            "ctfidf_terms.csv",
            "distribution_rings.csv",
            "heatmap.svg",
            "term_grid.svg",
        ]
        before = {name: (out / name).read_bytes() for name in analysis_files}
        for name in analysis_files:
            (out / name).unlink()
        # any attempt to open a network session would blow up immediately
        import requests

        def boom(*a, **kw):
            raise AssertionError("analyze must not construct HTTP sessions")

        monkeypatch.setattr(requests, "Session", boom)
        assert main(["analyze", "--config", str(config)]) == 0
        for name in analysis_files:
            assert (out / name).read_bytes() == before[name], name


class TestFulltextAttachment:
    def test_fulltext_dir_and_converter(self, tmp_path):
        from themeflow.corpus import attach_fulltexts, ingest_corpus

        write_jsonl(
            tmp_path / "c.jsonl",
            [
                {"id": "a", "abstract": "x"},
                {"id": "b", "abstract": "y"},
                {"id": "c", "abstract": "z"},
            ],
        )
        ft = tmp_path / "texts"
        ft.mkdir()
        (ft / "a.txt").write_text("pre-extracted body for a")
        (ft / "b.raw").write_text("raw body for b")
        corpus = ingest_corpus(tmp_path / "c.jsonl", "jsonl")
        attached = attach_fulltexts(corpus, ft, converter_command="cp {source} {target}")
        assert attached.by_id("a").fulltext == "pre-extracted body for a"
        assert attached.by_id("b").fulltext == "raw body for b"  # converter produced b.txt
        assert attached.by_id("c").fulltext is None
        assert (ft / "b.txt").exists()


def test_ingest_reports_fulltext_coverage_stat(tmp_path, capsys):
    # 1,490 of 1,519 documents carry fulltext -> 98.1% coverage in the stats line
    records = [
        {"id": f"d{i}", "abstract": f"text {i}", "fulltext": ("body " * 30) if i < 1490 else None}
        for i in range(1519)
    ]
    corpus_path = tmp_path / "c.jsonl"
    write_jsonl(corpus_path, records)
    config = write_config(tmp_path / "run.toml", corpus_path, tmp_path / "out")
    assert main(["ingest", "--config", str(config)]) == 0
    out = capsys.readouterr().out
    assert "documents: 1519" in out
    assert "1490 (98.1%)" in out


def test_heatmap_order_config(tmp_path):
    corpus, _ = make_planted_corpus(n_docs=40, n_topics=2, seed=8, with_fulltext=True)
    corpus_path = tmp_path / "c.jsonl"
    write_corpus_snapshot(corpus, corpus_path)
    out = tmp_path / "out"
    config = write_config(tmp_path / "run.toml", corpus_path, out, k=2)
    assert main(["report", "--config", str(config)]) == 0
    n_themes = len(json.loads((out / "registry.json").read_text())["themes"])
    order = list(range(n_themes + 1, 0, -1))  # reversed display order
    config_text = config.read_text() + f"\n[graph]\ntheme_order = {order}\n"
    config.write_text(config_text)
    assert main(["analyze", "--config", str(config)]) == 0
    header = (out / "adjacency_normalized.csv").read_text().splitlines()[0]
    assert header == "theme_id," + ",".join(str(t) for t in order)
