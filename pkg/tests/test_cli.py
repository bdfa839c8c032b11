from __future__ import annotations

import json
from pathlib import Path

import pytest

from solsum.cli import main
from solsum.llmclient import parse_prompt_sections

from conftest import CORPUS_DIR, FIXTURE_DIR


@pytest.fixture()
def repo_dir(tmp_path) -> Path:
    return tmp_path / "repo"


def run(args, capsys):
    code = main([str(a) for a in args])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def ingest_corpus(repo_dir, capsys):
    code, out, _ = run(["--repo", repo_dir, "ingest", CORPUS_DIR], capsys)
    assert code == 0
    code, out, _ = run(["--repo", repo_dir, "--seed", "11", "split",
                        "--ratios", "0.5,0.25,0.25"], capsys)
    assert code == 0


def test_ingest_reports_per_file_and_totals(repo_dir, capsys):
    code, out, err = run(["--repo", repo_dir, "ingest", CORPUS_DIR / "bank.sol"], capsys)
    assert code == 0
    assert "bank.sol: 4 samples" in out
    assert "1 file, 4 samples" in out


def test_ingest_empty_directory(repo_dir, tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    code, out, err = run(["--repo", repo_dir, "ingest", empty], capsys)
    assert code == 0
    assert "0 files, 0 samples" in out


def test_ingest_unreadable_path(repo_dir, capsys):
    code, out, err = run(["--repo", repo_dir, "ingest", "does/not/exist.sol"], capsys)
    assert code != 0
    assert "does/not/exist.sol" in err


def test_split_writes_splits_json(repo_dir, capsys):
    ingest_corpus(repo_dir, capsys)
    splits = json.loads((repo_dir / "splits.json").read_text())
    assert len(splits["train"]) == 8
    assert len(splits["validation"]) == 4
    assert len(splits["test"]) == 4


def test_index_cache_hit_and_rebuild(repo_dir, capsys):
    ingest_corpus(repo_dir, capsys)
    code, out, _ = run(["--repo", repo_dir, "index"], capsys)
    assert code == 0
    assert "built index over 8 train samples" in out
    code, out, _ = run(["--repo", repo_dir, "index"], capsys)
    assert "index cache is current (8 entries)" in out
    # provider change invalidates the cache
    monkey_cfg = repo_dir.parent / "cfg.txt"
    monkey_cfg.write_text("embedder_dims = 128\n")
    code, out, _ = run(["--config", monkey_cfg, "--repo", repo_dir, "index"], capsys)
    assert "built index over 8 train samples" in out


def test_index_without_split_fails(repo_dir, capsys):
    code, out, err = run(["--repo", repo_dir, "ingest", CORPUS_DIR / "bank.sol"], capsys)
    assert code == 0
    code, out, err = run(["--repo", repo_dir, "index"], capsys)
    assert code != 0
    assert "split" in err


def test_summarize_zero_shot_outputs(repo_dir, capsys):
    ingest_corpus(repo_dir, capsys)
    code, out, _ = run(["--repo", repo_dir, "summarize", "--run-id", "r1"], capsys)
    assert code == 0
    outputs = sorted((repo_dir / "runs" / "r1" / "outputs").glob("*.json"))
    assert len(outputs) == 4  # test split size
    record = json.loads(outputs[0].read_text())
    assert set(record) == {"prompt", "summary", "uuid"}
    manifest = json.loads((repo_dir / "runs" / "r1" / "manifest.json").read_text())
    assert manifest["command"] == "summarize"
    assert manifest["config"]["shots"] == 0
    assert "created_utc" in manifest


def test_summarize_rerun_byte_identical(repo_dir, capsys):
    ingest_corpus(repo_dir, capsys)
    run(["--repo", repo_dir, "summarize", "--run-id", "a"], capsys)
    run(["--repo", repo_dir, "summarize", "--run-id", "b"], capsys)
    a_files = sorted((repo_dir / "runs" / "a" / "outputs").glob("*.json"))
    b_files = sorted((repo_dir / "runs" / "b" / "outputs").glob("*.json"))
    assert [f.name for f in a_files] == [f.name for f in b_files]
    for fa, fb in zip(a_files, b_files):
        assert fa.read_bytes() == fb.read_bytes()


def test_summarize_three_shot_prompts_have_three_examples(repo_dir, capsys):
    ingest_corpus(repo_dir, capsys)
    code, _, _ = run(["--repo", repo_dir, "--shots", "3", "summarize",
                      "--run-id", "shots3"], capsys)
    assert code == 0
    for path in (repo_dir / "runs" / "shots3" / "outputs").glob("*.json"):
        prompt = json.loads(path.read_text())["prompt"]
        examples = parse_prompt_sections(prompt)["EXAMPLES"]
        assert examples.count("Example ") == 6  # 3 code blocks + 3 summaries
        assert "Example 3 summary:" in examples


def test_summarize_mask_gates_saved_prompts(repo_dir, capsys):
    ingest_corpus(repo_dir, capsys)
    code, _, _ = run(["--repo", repo_dir, "--mask", "if,idgv", "summarize",
                      "--run-id", "nocfg"], capsys)
    assert code == 0
    for path in (repo_dir / "runs" / "nocfg" / "outputs").glob("*.json"):
        prompt = json.loads(path.read_text())["prompt"]
        assert "[CALL_GRAPH]" not in prompt
        assert "[INNER_FUNCTIONS]" in prompt


def test_evaluate_identity_run_scores_100(repo_dir, capsys):
    ingest_corpus(repo_dir, capsys)
    from solsum.corpus import Repository
    repo = Repository(repo_dir)
    run_dir = repo_dir / "runs" / "ident"
    (run_dir / "outputs").mkdir(parents=True)
    for uuid in repo.splits["test"]:
        sample = repo.load_sample(uuid)
        (run_dir / "outputs" / f"{uuid}.json").write_text(json.dumps(
            {"uuid": uuid, "prompt": "p", "summary": sample.comment}))
    code, out, err = run(["--repo", repo_dir, "evaluate", run_dir], capsys)
    assert code == 0
    report = json.loads((run_dir / "report.json").read_text())
    assert report["corpus"]["bleu4"] == 100.0
    assert report["corpus"]["rouge_l"] == 100.0
    assert (run_dir / "report.txt").exists()


def test_evaluate_missing_reference_warns(repo_dir, capsys):
    ingest_corpus(repo_dir, capsys)
    run_dir = repo_dir / "runs" / "mixed"
    (run_dir / "outputs").mkdir(parents=True)
    from solsum.corpus import Repository
    repo = Repository(repo_dir)
    known = repo.splits["test"][0]
    sample = repo.load_sample(known)
    (run_dir / "outputs" / f"{known}.json").write_text(json.dumps(
        {"uuid": known, "prompt": "p", "summary": sample.comment}))
    (run_dir / "outputs" / "ghost.json").write_text(json.dumps(
        {"uuid": "ghost", "prompt": "p", "summary": "whatever"}))
    code, out, err = run(["--repo", repo_dir, "evaluate", run_dir], capsys)
    assert code == 0
    assert "1 output(s) skipped" in out
    assert "ghost" in err


def test_ablate_emits_five_labeled_rows(repo_dir, capsys):
    ingest_corpus(repo_dir, capsys)
    code, out, _ = run(["--repo", repo_dir, "ablate", "--run-id", "ab",
                        "--select", "split:test"], capsys)
    assert code == 0
    rows = json.loads((repo_dir / "runs" / "ab" / "ablation.json").read_text())["rows"]
    assert [r["component"] for r in rows] == ["ALL", "-CFG", "-IF", "-Id&MGV", "-ALL"]
    for label in ("ALL", "-CFG", "-IF", "-Id&MGV", "-ALL"):
        assert label in out
    by_label = {r["component"]: r for r in rows}
    assert by_label["-ALL"]["rouge_l"] <= by_label["ALL"]["rouge_l"]


def test_calltree_prints_dot(capsys):
    code, out, _ = run(["calltree", FIXTURE_DIR / "table7.sol",
                        "DataController.transferDataOwnership"], capsys)
    assert code == 0
    assert out.startswith("digraph calltree {")
    assert "DataController.transferDataOwnership" in out
    assert "Ownable._transferOwnership" in out


def test_calltree_bare_function_name(capsys):
    code, out, _ = run(["calltree", FIXTURE_DIR / "table7.sol",
                        "transferOwnership"], capsys)
    assert code == 0
    assert "Ownable.transferOwnership" in out


def test_calltree_unknown_function(capsys):
    code, out, err = run(["calltree", FIXTURE_DIR / "table7.sol", "nope"], capsys)
    assert code != 0
    assert "unknown function" in err


def test_retrieve_prints_topk_json(repo_dir, capsys, tmp_path):
    ingest_corpus(repo_dir, capsys)
    from solsum.corpus import Repository
    repo = Repository(repo_dir)
    uuid = repo.splits["train"][0]
    out_file = tmp_path / "res.json"
    code, out, _ = run(["--repo", repo_dir, "retrieve", "--uuid", uuid,
                        "--k", "3", "--out", out_file], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["query_id"] == uuid
    assert len(payload["matches"]) == 3
    assert payload["matches"][0]["uuid"] == uuid  # self-retrieval tops the list
    assert json.loads(out_file.read_text())["matches"] == payload["matches"]


def test_summarize_png_flag_degrades_without_graphviz(repo_dir, capsys, monkeypatch):
    # without a dot binary the flag is a soft no-op: run succeeds, no attachment
    monkeypatch.setattr("solsum.callgraph.shutil.which", lambda _: None)
    ingest_corpus(repo_dir, capsys)
    code, _, _ = run(["--repo", repo_dir, "summarize", "--run-id", "png",
                      "--png"], capsys)
    assert code == 0
    assert len(list((repo_dir / "runs" / "png" / "outputs").glob("*.json"))) == 4
    assert not list((repo_dir / "runs" / "png" / "graphs").glob("*.png"))


def test_calltree_png_warns_without_graphviz(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr("solsum.callgraph.shutil.which", lambda _: None)
    code, out, err = run(["calltree", FIXTURE_DIR / "table7.sol",
                          "transferOwnership", "--png", tmp_path / "g.png"], capsys)
    assert code == 0  # soft warning, not an error
    assert "PNG not rendered" in err
    assert out.startswith("digraph")


def test_config_file_and_env_override(repo_dir, tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "solsum.cfg"
    cfg.write_text("shots = 3\nmax_depth = 4\n# comment\nmask = cfg,if,idgv\n")
    monkeypatch.setenv("SOLSUM_SHOTS", "1")
    ingest_corpus(repo_dir, capsys)
    code, _, _ = run(["--config", cfg, "--repo", repo_dir, "summarize",
                      "--run-id", "envrun"], capsys)
    assert code == 0
    manifest = json.loads((repo_dir / "runs" / "envrun" / "manifest.json").read_text())
    assert manifest["config"]["shots"] == 1  # env beats file
    assert manifest["config"]["max_depth"] == 4


def test_invalid_shots_rejected(repo_dir, capsys):
    cfg_path = repo_dir.parent / "bad.cfg"
    cfg_path.write_text("shots = 2\n")
    code, out, err = run(["--config", cfg_path, "--repo", repo_dir, "index"], capsys)
    assert code != 0
    assert "shots" in err


def test_select_by_uuid_and_glob(repo_dir, capsys):
    ingest_corpus(repo_dir, capsys)
    from solsum.corpus import Repository
    repo = Repository(repo_dir)
    target = repo.splits["test"][0]
    code, _, _ = run(["--repo", repo_dir, "summarize", "--run-id", "one",
                      "--select", f"uuids:{target}"], capsys)
    assert code == 0
    assert len(list((repo_dir / "runs" / "one" / "outputs").glob("*.json"))) == 1
    code, _, _ = run(["--repo", repo_dir, "summarize", "--run-id", "banks",
                      "--select", "glob:*bank.sol"], capsys)
    assert code == 0
    assert len(list((repo_dir / "runs" / "banks" / "outputs").glob("*.json"))) == 4
