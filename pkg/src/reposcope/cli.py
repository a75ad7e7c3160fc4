"""Command-line entry point: ``reposcope <command> ...``.

Exit codes: 0 success, 1 usage error, 2 corpus/index error, 3 network error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import Config, ConfigError, load_config
from .embedding import EmbeddingError
from .graph import IndexError_, TargetNotFound, load_index, persist_index
from .pipeline import TargetRun, build_index, build_prompt, resolve_target, run_target

log = logging.getLogger("reposcope")

EXIT_OK, EXIT_USAGE, EXIT_CORPUS, EXIT_NETWORK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("repository and index")
    g.add_argument("--root", default=".", help="repository root (default: .)")
    g.add_argument("--index", dest="index_path", help="index file (default: <root>/.reposcope/index.json)")
    g.add_argument("--exclude", action="append", dest="excludes", help="glob to skip; repeatable")
    g.add_argument("--window", type=int)
    g.add_argument("--stride", type=int)
    g.add_argument("--embed-provider", choices=["hashed", "remote"])
    g.add_argument("--clusters", type=int, help="K-means cluster count")
    g.add_argument("--seed", type=int)
    c = p.add_argument_group("chain prediction")
    c.add_argument("--k-chain", type=int)
    c.add_argument("--l-max", type=int)
    c.add_argument("--tau", type=int)
    c.add_argument("--alpha1", type=float)
    c.add_argument("--alpha2", type=float)
    c.add_argument("--alpha3", type=float)
    r = p.add_argument_group("retrieval and prompt")
    r.add_argument("--k-caller", type=int)
    r.add_argument("--k-sim-function", type=int)
    r.add_argument("--k-sim-fragment", type=int)
    r.add_argument("--ell", type=int, help="prompt token budget")
    r.add_argument("--priority", help="e.g. chains,callers,simfn,simfrag")
    r.add_argument("--unstructured", action="store_true", help="flat chain block (no structure tree)")
    m = p.add_argument_group("generation")
    m.add_argument("--llm-url")
    m.add_argument("--llm-model")
    m.add_argument("--max-retries", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def _target_arg(p):
    p.add_argument("--target", required=True, help="<file>:<qualified_name>")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="reposcope", description="Repository-level context retrieval for code generation.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("index", help="parse, build the graph, embed, cluster and persist")
    _common(p)

    p = sub.add_parser("predict-chains", help="print predicted call chains as JSON")
    _common(p)
    _target_arg(p)

    p = sub.add_parser("retrieve", help="print the four context views as JSON")
    _common(p)
    _target_arg(p)

    p = sub.add_parser("prompt", help="compose the budgeted prompt")
    _common(p)
    _target_arg(p)
    p.add_argument("--out", help="write the prompt here instead of stdout")
    p.add_argument("--emit-plan", help="also write the budget plan JSON here")

    p = sub.add_parser("generate", help="send a prompt to the generation endpoint")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--prompt-file", help="prompt text file ('-' for stdin)")
    src.add_argument("--target", help="<file>:<qualified_name>")
    p.add_argument("--dry-run", action="store_true", help="print the prompt, make no request")
    p.add_argument("--out")

    p = sub.add_parser("pipeline", help="chains, views, plan, prompt and generation")
    _common(p)
    _target_arg(p)
    p.add_argument("--dry-run", action="store_true", help="stop after the prompt")
    p.add_argument("--out", help="write the prompt (dry run) or completion here")
    p.add_argument("--emit-plan")

    p = sub.add_parser("eval", help="callee-F1 ablation over a corpus of repositories")
    _common(p)
    p.add_argument("--corpus", required=True, help="directory whose subdirectories are repositories")
    p.add_argument("--variants", default="full,no-wes,no-dfs,no-cce")
    p.add_argument("--report", required=True, help="JSON report path; PNG figures go beside it")
    p.add_argument("--no-match", action="store_true", help="skip callee-count matching")
    p.add_argument("--no-plots", action="store_true")
    return ap


def config_from_args(args) -> Config:
    keys = ["excludes", "window", "stride", "embed_provider", "clusters", "seed", "k_chain",
            "l_max", "tau", "alpha1", "alpha2", "alpha3", "k_caller", "k_sim_function",
            "k_sim_fragment", "ell", "priority", "llm_url", "llm_model", "max_retries",
            "index_path"]
    cli = {k: getattr(args, k, None) for k in keys}
    try:
        return load_config(args.root, cli)
    except (ConfigError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _write(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(cfg: Config):
    return load_index(cfg.index_file)


def _run(cfg: Config, target_text: str, structured: bool = True) -> TargetRun:
    index = _load(cfg)
    try:
        target = resolve_target(index, target_text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return run_target(index, target, cfg, structured=structured)


def cmd_index(args, cfg: Config) -> int:
    if not Path(cfg.root).is_dir():
        raise FileNotFoundError(f"repository root not found: {cfg.root}")
    index, diags = build_index(cfg)
    path = persist_index(index, cfg.index_file)
    for d in diags:
        log.warning("%s: %s", d.path, d.message)
    print(f"entities: {len(index.graph)}")
    print(f"triples: {len(index.graph.triples)}")
    print(f"fragments: {len(index.fragments)}")
    print(f"index: {path}")
    return EXIT_OK


def cmd_predict_chains(args, cfg: Config) -> int:
    run = _run(cfg, args.target)
    g = run.graph
    doc = {
        "target": g[run.target.entity].path,
        "starts": [g[s].path for s in run.prediction.starts],
        "chains": [c.to_json(g) for c in run.prediction.chains],
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_retrieve(args, cfg: Config) -> int:
    run = _run(cfg, args.target, structured=not args.unstructured)
    print(json.dumps(run.context.to_json(), indent=2))
    return EXIT_OK


def _prompt_run(args, cfg: Config) -> TargetRun:
    structured = not args.unstructured
    run = build_prompt(_run(cfg, args.target, structured), cfg, structured)
    if getattr(args, "emit_plan", None):
        Path(args.emit_plan).parent.mkdir(parents=True, exist_ok=True)
        Path(args.emit_plan).write_text(json.dumps(run.plan.to_json(), indent=2, sort_keys=True) + "\n",
                                        encoding="utf-8")
    return run


def cmd_prompt(args, cfg: Config) -> int:
    _write(_prompt_run(args, cfg).prompt, args.out)
    return EXIT_OK


def _generate(prompt: str, cfg: Config) -> str:
    from .generation import generate

    return generate(prompt, url=cfg.llm_url, key=cfg.llm_key, model=cfg.llm_model,
                    temperature=cfg.temperature, max_retries=cfg.max_retries)


def cmd_generate(args, cfg: Config) -> int:
    if args.prompt_file:
        prompt = sys.stdin.read() if args.prompt_file == "-" else Path(args.prompt_file).read_text(encoding="utf-8")
    else:
        prompt = build_prompt(_run(cfg, args.target), cfg).prompt
    _write(prompt if args.dry_run else _generate(prompt, cfg), args.out)
    return EXIT_OK


def cmd_pipeline(args, cfg: Config) -> int:
    run = _prompt_run(args, cfg)
    _write(run.prompt if args.dry_run else _generate(run.prompt, cfg), args.out)
    return EXIT_OK


def cmd_eval(args, cfg: Config) -> int:
    from .evaluation import VARIANTS, index_corpus, reports_json, run_benchmark

    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    bad = [v for v in variants if v not in VARIANTS]
    if bad:
        raise UsageError(f"unknown variants {bad}; choose from {', '.join(VARIANTS)}")
    corpus = index_corpus(args.corpus, cfg)
    reports = run_benchmark(corpus, variants, cfg.chain, match=not args.no_match)
    out = Path(args.report)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(reports_json(reports), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{'variant':<8} {'k':>3} {'callees':>8} {'F1':>7} {'F1(fn)':>7} matched")
    for r in reports:
        print(f"{r.variant:<8} {r.k_chain:>3} {r.mean_callees:>8.3f} {r.micro[2]:>7.4f} "
              f"{r.functions_only[2]:>7.4f} {r.matched}")
    if reports and not args.no_plots:
        from .plotting import plot_report

        for fig in plot_report(reports, out):
            print(f"figure: {fig}")
    print(f"report: {out}")
    return EXIT_OK


COMMANDS = {
    "index": cmd_index,
    "predict-chains": cmd_predict_chains,
    "retrieve": cmd_retrieve,
    "prompt": cmd_prompt,
    "generate": cmd_generate,
    "pipeline": cmd_pipeline,
    "eval": cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"reposcope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TargetNotFound as exc:
        print(f"reposcope: target not found: {exc.target}", file=sys.stderr)
        if exc.suggestions:
            print("did you mean:", file=sys.stderr)
            for s in exc.suggestions:
                print(f"  {s}", file=sys.stderr)
        return EXIT_CORPUS
    except (IndexError_, FileNotFoundError, NotADirectoryError) as exc:
        print(f"reposcope: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    except EmbeddingError as exc:
        print(f"reposcope: embedding failed: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except Exception as exc:
        from .generation import GenerationError

        if isinstance(exc, GenerationError):
            print(f"reposcope: generation failed: {exc}", file=sys.stderr)
            return EXIT_NETWORK
        raise


if __name__ == "__main__":
    sys.exit(main())
