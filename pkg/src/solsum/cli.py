"""Batch pipeline command line: ingest .sol files into a repository, split
the dataset, build the retrieval index, generate summaries through a
configured backend, and evaluate them against reference comments.

Every command is rerunnable; with the mock backend, reruns over the same
repository produce byte-identical outputs (manifest timestamps aside).
"""

from __future__ import annotations

import argparse
import fnmatch
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import callgraph, corpus, llmclient, metrics, promptgen, retrieval
from .config import PipelineConfig, config_hash, load_config
from .parser import ParseError, parse_source
from .promptgen import ABLATION_ROWS, AblationMask, build_prompt, render_prompt

INDEX_CACHE_NAME = "index.embeddings.bin"


def _eprint(*args) -> None:
    print(*args, file=sys.stderr)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def make_provider(cfg: PipelineConfig):
    if cfg.embedder == "remote":
        return retrieval.RemoteEmbeddingProvider(
            cfg.embedder_endpoint, dims=cfg.embedder_dims,
            api_key=os.environ.get(cfg.api_key_env))
    return retrieval.LocalHashingProvider(dims=cfg.embedder_dims)


def make_backend(cfg: PipelineConfig):
    if cfg.backend == "remote":
        return llmclient.RemoteChatBackend(
            cfg.llm_endpoint, cfg.model_id,
            api_key=os.environ.get(cfg.api_key_env),
            rate_per_sec=cfg.rate_per_sec or None,
            send_attachment=cfg.send_attachment)
    return llmclient.MockBackend()


def select_targets(repo: corpus.Repository, selector: str) -> list[str]:
    """Resolve a target selector to a sorted uuid list. Forms:
    split:<name>, uuids:<a,b,c>, glob:<source path pattern>."""
    kind, _, arg = selector.partition(":")
    if kind == "split":
        name = arg or "test"
        if name not in repo.splits:
            raise KeyError(f"split '{name}' not found; run the split command first")
        return sorted(repo.splits[name])
    if kind == "uuids":
        wanted = [u.strip() for u in arg.split(",") if u.strip()]
        missing = [u for u in wanted if u not in repo.uuids()]
        if missing:
            raise KeyError(f"unknown uuids: {', '.join(missing)}")
        return sorted(wanted)
    if kind == "glob":
        return sorted(u for u in repo.uuids()
                      if fnmatch.fnmatch(repo.index_entry(u)["path"], arg))
    raise ValueError(f"bad selector '{selector}' (use split:, uuids:, or glob:)")


def _load_or_build_index(cfg: PipelineConfig, repo: corpus.Repository,
                         provider, quiet: bool = False) -> retrieval.RetrievalIndex:
    train = sorted(repo.splits.get("train", []))
    if not train:
        raise RuntimeError("no train split; run the split command first")
    cache_path = repo.root / INDEX_CACHE_NAME
    cached = retrieval.load_index_cache(str(cache_path))
    if cached is not None and cached.provider_id == provider.provider_id and \
            [u for u, _ in cached.entries] == train:
        if not quiet:
            print(f"index cache is current ({len(cached.entries)} entries)")
        return cached
    index = retrieval.build_index(repo, provider, train)
    repo.root.mkdir(parents=True, exist_ok=True)
    retrieval.save_index_cache(index, str(cache_path))
    if not quiet:
        print(f"built index over {len(index.entries)} train samples "
              f"({provider.provider_id})")
    return index


def _summarize_targets(cfg: PipelineConfig, repo: corpus.Repository,
                       targets: Sequence[str], out_dir: Path,
                       mask: AblationMask, render_png: bool = False) -> int:
    provider = make_provider(cfg)
    backend = make_backend(cfg)
    index = None
    if cfg.shots > 0:
        index = _load_or_build_index(cfg, repo, provider, quiet=True)
    outputs = out_dir / "outputs"
    outputs.mkdir(parents=True, exist_ok=True)
    for uuid in sorted(targets):
        sample = repo.load_sample(uuid)
        shots = []
        if cfg.shots > 0 and index is not None:
            shots = promptgen.assemble_few_shot(repo, index, sample, cfg.shots,
                                                provider=provider)
        attachment = None
        if render_png:
            graphs = out_dir / "graphs"
            graphs.mkdir(parents=True, exist_ok=True)
            attachment = callgraph.render_png(sample.dot, str(graphs / f"{uuid}.png"))
        bundle = build_prompt(sample.facts, sample.code, shots, mask,
                              attachment=attachment,
                              inner_fn_line_budget=cfg.inner_fn_line_budget)
        prompt_text = render_prompt(bundle)
        req = llmclient.LlmRequest(
            prompt_text=prompt_text, attachment=bundle.attachment,
            model_id=cfg.model_id, max_output_tokens=cfg.max_output_tokens,
            temperature=cfg.temperature)
        resp = llmclient.summarize(backend, req)
        (outputs / f"{uuid}.json").write_text(
            _dump_json({"uuid": uuid, "prompt": prompt_text, "summary": resp.summary}),
            encoding="utf-8")
    return len(targets)


def _write_manifest(out_dir: Path, cfg: PipelineConfig, command: str,
                    run_id: str, targets: Sequence[str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "created_utc": _utc_now(),
        "run_id": run_id,
        "targets": sorted(targets),
    }
    (out_dir / "manifest.json").write_text(_dump_json(manifest), encoding="utf-8")


def _evaluate_run_dir(repo: corpus.Repository, run_dir: Path) -> tuple[metrics.MetricReport, int]:
    outputs = run_dir / "outputs"
    if not outputs.is_dir():
        raise FileNotFoundError(f"no outputs directory under {run_dir}")
    pairs = []
    skipped = 0
    for path in sorted(outputs.glob("*.json")):
        record = json.loads(path.read_text(encoding="utf-8"))
        uuid = record["uuid"]
        if uuid not in repo.uuids():
            _eprint(f"warning: no reference for {uuid}; skipped")
            skipped += 1
            continue
        reference = repo.load_sample(uuid).comment
        pairs.append((uuid, record["summary"], reference))
    report = metrics.evaluate_corpus(pairs)
    (run_dir / "report.json").write_text(metrics.report_to_json(report), encoding="utf-8")
    (run_dir / "report.txt").write_text(metrics.format_report_table(report), encoding="utf-8")
    return report, skipped


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_ingest(cfg: PipelineConfig, args) -> int:
    repo = corpus.Repository(cfg.repo_root)
    files: list[Path] = []
    for raw in args.paths:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(p.rglob("*.sol")))
        elif p.exists():
            files.append(p)
        else:
            _eprint(f"error: cannot read '{raw}': no such file or directory")
            return 2
    total = 0
    for f in files:
        try:
            new = corpus.ingest_file(repo, f, max_depth=cfg.max_depth)
        except ParseError as exc:
            _eprint(f"error: {exc}")
            return 2
        except OSError as exc:
            _eprint(f"error: cannot read '{f}': {exc}")
            return 2
        total += len(new)
        print(f"{f.as_posix()}: {len(new)} samples")
    n = len(files)
    print(f"{n} file{'s' if n != 1 else ''}, {total} sample{'s' if total != 1 else ''}")
    return 0


def cmd_split(cfg: PipelineConfig, args) -> int:
    repo = corpus.Repository(cfg.repo_root)
    try:
        splits = corpus.split_dataset(repo, cfg.ratios, cfg.split_seed)
    except corpus.InvalidRatio as exc:
        _eprint(f"error: {exc}")
        return 2
    print(f"train {len(splits['train'])} / validation {len(splits['validation'])}"
          f" / test {len(splits['test'])} (seed {cfg.split_seed})")
    return 0


def cmd_index(cfg: PipelineConfig, args) -> int:
    repo = corpus.Repository(cfg.repo_root)
    try:
        _load_or_build_index(cfg, repo, make_provider(cfg))
    except RuntimeError as exc:
        _eprint(f"error: {exc}")
        return 2
    return 0


def cmd_summarize(cfg: PipelineConfig, args) -> int:
    repo = corpus.Repository(cfg.repo_root)
    try:
        targets = select_targets(repo, args.select)
    except (KeyError, ValueError) as exc:
        _eprint(f"error: {exc}")
        return 2
    run_id = args.run_id or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ") + \
        "-" + config_hash(cfg)[:8]
    run_dir = repo.runs_dir / run_id
    n = _summarize_targets(cfg, repo, targets, run_dir, cfg.mask,
                           render_png=args.png)
    _write_manifest(run_dir, cfg, "summarize", run_id, targets)
    print(f"wrote {n} summaries to {run_dir.as_posix()}")
    return 0


def cmd_evaluate(cfg: PipelineConfig, args) -> int:
    repo = corpus.Repository(cfg.repo_root)
    run_dir = Path(args.run_dir)
    try:
        report, skipped = _evaluate_run_dir(repo, run_dir)
    except (FileNotFoundError, metrics.EmptyInput) as exc:
        _eprint(f"error: {exc}")
        return 2
    print(metrics.format_report_table(report), end="")
    if skipped:
        print(f"{skipped} output(s) skipped for missing references")
    return 0


def cmd_ablate(cfg: PipelineConfig, args) -> int:
    repo = corpus.Repository(cfg.repo_root)
    try:
        targets = select_targets(repo, args.select)
    except (KeyError, ValueError) as exc:
        _eprint(f"error: {exc}")
        return 2
    run_id = args.run_id or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ") + \
        "-ablate-" + config_hash(cfg)[:8]
    run_dir = repo.runs_dir / run_id
    safe = {"ALL": "all", "-CFG": "no_cfg", "-IF": "no_if",
            "-Id&MGV": "no_idmgv", "-ALL": "none"}
    rows = []
    for label, mask in ABLATION_ROWS:
        sub = run_dir / safe[label]
        _summarize_targets(cfg, repo, targets, sub, mask)
        report, _ = _evaluate_run_dir(repo, sub)
        rows.append({"component": label, "bleu4": report.corpus[0],
                     "meteor": report.corpus[1], "rouge_l": report.corpus[2],
                     "bleurt": None, "n": report.n})
    _write_manifest(run_dir, cfg, "ablate", run_id, targets)
    (run_dir / "ablation.json").write_text(_dump_json({"rows": rows}), encoding="utf-8")
    table = format_ablation_table(rows)
    (run_dir / "ablation.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


def format_ablation_table(rows: list[dict]) -> str:
    header = f"{'Component':<10}  {'BLEU-4':>8}  {'METEOR':>8}  {'ROUGE-L':>8}  {'BLEURT':>8}"
    lines = [header, "-" * len(header)]
    for row in rows:
        bleurt = f"{row['bleurt']:>8.2f}" if row["bleurt"] is not None else f"{'-':>8}"
        lines.append(f"{row['component']:<10}  {row['bleu4']:>8.2f}  "
                     f"{row['meteor']:>8.2f}  {row['rouge_l']:>8.2f}  {bleurt}")
    return "\n".join(lines) + "\n"


def cmd_calltree(cfg: PipelineConfig, args) -> int:
    path = Path(args.file)
    if not path.exists():
        _eprint(f"error: cannot read '{args.file}': no such file")
        return 2
    try:
        unit = parse_source(path.read_text(encoding="utf-8"), path.as_posix())
    except ParseError as exc:
        _eprint(f"error: {path.as_posix()}: {exc}")
        return 2
    ref = callgraph.build_reference_tree(unit)
    if "." in args.target:
        contract, _, function = args.target.partition(".")
    else:
        function = args.target
        contract = next((c.name for c in unit.contracts
                         if any(f.name == function for f in c.functions)), "")
    try:
        tree = callgraph.graft_call_tree(ref, contract, function, cfg.max_depth)
    except callgraph.UnknownFunction as exc:
        _eprint(f"error: unknown function {exc}")
        return 2
    dot = callgraph.to_dot(tree)
    if args.dot_out:
        Path(args.dot_out).write_text(dot, encoding="utf-8")
    if args.png:
        rendered = callgraph.render_png(dot, args.png)
        if rendered is None:
            _eprint("warning: PNG not rendered (graphviz 'dot' unavailable)")
    print(dot, end="")
    return 0


def cmd_retrieve(cfg: PipelineConfig, args) -> int:
    repo = corpus.Repository(cfg.repo_root)
    provider = make_provider(cfg)
    try:
        index = _load_or_build_index(cfg, repo, provider, quiet=True)
    except RuntimeError as exc:
        _eprint(f"error: {exc}")
        return 2
    if args.uuid:
        sample = repo.load_sample(args.uuid)
        query_text, query_id = sample.code, args.uuid
    elif args.text:
        query_text, query_id = args.text, "text-query"
    else:
        p = Path(args.file)
        if not p.exists():
            _eprint(f"error: cannot read '{args.file}': no such file")
            return 2
        query_text, query_id = p.read_text(encoding="utf-8"), p.as_posix()
    query = retrieval.embed(provider, query_text)
    try:
        result = retrieval.top_k_matches(index, query, args.k, query_id=query_id)
    except retrieval.EmptyIndex as exc:
        _eprint(f"error: {exc}")
        return 2
    matches = []
    for uuid, similarity in result.matches:
        s = repo.load_sample(uuid)
        matches.append({"uuid": uuid, "similarity": similarity,
                        "code": s.code, "comment": s.comment})
    payload = json.dumps({"query_id": result.query_id, "matches": matches}, indent=2)
    if args.out:
        retrieval.save_results_json(result, args.out, repo)
    print(payload)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="solsum",
        description="Solidity call-tree summarization pipeline")
    ap.add_argument("--config", help="path to a key = value config file")
    ap.add_argument("--repo", help="repository root directory")
    ap.add_argument("--shots", type=int, choices=[0, 1, 3, 5],
                    help="few-shot example count")
    ap.add_argument("--mask", help="included prompt components: csv of cfg,if,idgv (or none)")
    ap.add_argument("--backend", choices=["mock", "remote"], help="summary backend")
    ap.add_argument("--embedder", choices=["local", "remote"], help="embedding provider")
    ap.add_argument("--seed", type=int, help="dataset split seed")
    ap.add_argument("--max-depth", type=int, help="call tree depth cap")

    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest .sol files into the repository")
    p.add_argument("paths", nargs="+", help=".sol files or directories")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("split", help="partition samples into train/validation/test")
    p.add_argument("--ratios", help="train,validation,test ratios summing to 1")
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("index", help="build or refresh the retrieval index")
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("summarize", help="generate summaries for selected samples")
    p.add_argument("--select", default="split:test",
                   help="split:<name> | uuids:<a,b> | glob:<pattern>")
    p.add_argument("--run-id", help="run directory name (timestamped by default)")
    p.add_argument("--png", action="store_true",
                   help="render call-graph PNGs and attach them")
    p.set_defaults(fn=cmd_summarize)

    p = sub.add_parser("evaluate", help="score a run against reference comments")
    p.add_argument("run_dir", help="run directory produced by summarize")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("ablate", help="run all ablation masks and compare scores")
    p.add_argument("--select", default="split:test")
    p.add_argument("--run-id")
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("calltree", help="print the DOT call tree for one function")
    p.add_argument("file", help=".sol source file")
    p.add_argument("target", help="Contract.function or bare function name")
    p.add_argument("--dot-out", help="also write DOT text to this path")
    p.add_argument("--png", help="also render a PNG to this path")
    p.set_defaults(fn=cmd_calltree)

    p = sub.add_parser("retrieve", help="print the top-k most similar samples")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--uuid", help="query by a stored sample's code")
    g.add_argument("--text", help="query by raw text")
    g.add_argument("--file", help="query by a file's contents")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--out", help="write the result JSON to this path")
    p.set_defaults(fn=cmd_retrieve)

    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_arg_parser().parse_args(argv)
    overrides = {
        "repo_root": args.repo,
        "shots": args.shots,
        "mask": args.mask,
        "backend": args.backend,
        "embedder": args.embedder,
        "split_seed": args.seed,
        "max_depth": args.max_depth,
    }
    if getattr(args, "ratios", None):
        overrides["ratios"] = args.ratios
    try:
        cfg = load_config(args.config, cli_overrides=overrides)
    except (ValueError, OSError) as exc:
        _eprint(f"error: {exc}")
        return 2
    return args.fn(cfg, args)


if __name__ == "__main__":
    sys.exit(main())
