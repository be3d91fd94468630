import json
import shutil

import pytest

from ldatrends import synthetic
from ldatrends.cli import main
from ldatrends.errors import ConfigurationError, StageError
from ldatrends.pipeline import Pipeline, load_config, parse_config, run, sample_config_path

FAST = """
seed = 3
[paths]
records = "data/records.jsonl"
abstracts = "data/abstracts.jsonl"
citations = "data/citations.tsv"
genders = "data/genders.tsv"
output = "out"
[lda]
iterations = 60
burn_in = 30
[tune]
np = 4
generations = 1
k_bounds = [2, 8]
[stability]
m_shuffles = 3
iterations = 40
burn_in = 20
[perplexity]
ks = [2, 5]
folds = 4
iterations = 40
burn_in = 20
[analytics]
resamples = 500
removal_venues = ["SOSYM"]
"""


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("ws")
    synthetic.generate(n_docs=150, seed=2).write(root / "data")
    (root / "fast.toml").write_text(FAST)
    return root


def test_fit_without_prep_names_prep(workspace, tmp_path, capsys):
    code = main(["fit", "--config", str(workspace / "fast.toml"), "--out", str(tmp_path / "o")])
    assert code != 0
    assert "`prep`" in capsys.readouterr().err
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["status"] == "partial" and "prep" in manifest["error"]


def test_stage_error_direct(workspace, tmp_path):
    cfg = load_config(workspace / "fast.toml").with_overrides(output=str(tmp_path))
    with pytest.raises(StageError, match="`ingest`"):
        run("prep", cfg)


def test_all_then_resume(workspace, tmp_path):
    out = tmp_path / "o"
    cfg_path = str(workspace / "fast.toml")
    assert main(["all", "--config", cfg_path, "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "complete" and manifest["seed"] == 3
    for stage_files in Pipeline.PRODUCES.values():
        for name in stage_files:
            assert name in manifest["outputs"], name
    assert all(s["status"] == "done" for s in manifest["stages"])
    assert (out / "topics.tsv").read_text().startswith("# ldatrends")
    assert "seed=3" in (out / "heatmap.tsv").read_text().splitlines()[0]
    assert json.loads((out / "gender.json").read_text())["seed"] == 3

    before = {p.name: p.read_bytes() for p in out.iterdir() if p.is_file() and p.name != "manifest.json"}
    assert main(["all", "--config", cfg_path, "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert all(s["status"] == "skipped" for s in manifest["stages"])
    after = {p.name: p.read_bytes() for p in out.iterdir() if p.is_file() and p.name != "manifest.json"}
    assert before == after

    assert main(["fit", "--config", cfg_path, "--out", str(out), "--force"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert [s["status"] for s in manifest["stages"]] == ["done"]
    assert (out / "model.ldat").read_bytes() == before["model.ldat"]

    # a different seed invalidates every stamp
    assert main(["ingest", "--config", cfg_path, "--out", str(out), "--seed", "4"]) == 0
    assert json.loads((out / "manifest.json").read_text())["stages"][0]["status"] == "done"


def test_config_rejects_unknown_keys(tmp_path):
    with pytest.raises(ConfigurationError, match="bogus"):
        parse_config("seed = 1\n[lda]\nbogus = 2\n")
    with pytest.raises(ConfigurationError, match="nope"):
        parse_config("nope = 1\n")
    with pytest.raises(ConfigurationError):
        parse_config("[lda]\nk = 'five'\n")


def test_missing_input_file(tmp_path):
    cfg = parse_config('[paths]\nrecords = "missing.jsonl"\n', tmp_path).with_overrides(output=str(tmp_path / "o"))
    with pytest.raises(ConfigurationError, match="records"):
        run("ingest", cfg)


def test_sample_config_parses():
    cfg = load_config(sample_config_path())
    assert cfg.stability.m_shuffles == 20 and cfg.analytics.removal_venues == ("SOSYM",)
    for name in ("records", "abstracts", "citations", "genders"):
        assert getattr(cfg.paths, name).endswith(f"{'citations' if name == 'citations' else name}"
                                                 f".{'tsv' if name in ('citations', 'genders') else 'jsonl'}")
