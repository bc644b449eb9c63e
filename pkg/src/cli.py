# =====================================================
# src/cli.py - Command-line surface (python -m src.cli)
# =====================================================
"""
Comandi: run, evaluate, shot-sim, ablate, report.

Exit code: 0 successo, 1 fallimento di uno stage, 2 errore di
configurazione o di validazione. La diagnostica va su stderr.
"""
import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import closing
from itertools import product
from pathlib import Path
from typing import List, Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from src.database.connection import get_registry_url
from src.database.exceptions import DatabaseError
from src.schemas.evaluation import EvalTask
from src.schemas.prompting import ShotStrategy
from src.schemas.run_config import RunConfig
from src.services.ablation import compare_critic_settings, compare_reports, render_ablation_table
from src.services.embeddings import build_embedder
from src.services.exceptions import GoreError, PipelineError, StageFailed
from src.services.ground_truth import load_all_projects, load_project
from src.services.llm_gateway import Transcript
from src.services.prompting import load_shot_examples
from src.services.registry import RunRegistry
from src.services.reporting import (
    load_report,
    render_per_dataset_table,
    render_results_table,
    render_stage_summary,
    serialize_report,
    strategy_of,
)
from src.services.runner import RunService, evaluate_runs
from src.services.shot_similarity import render_shot_similarity, shot_similarity

logger = logging.getLogger("src.cli")

EXIT_OK = 0
EXIT_STAGE_FAILED = 1
EXIT_CONFIG = 2
LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"


def setup_logging(level: Optional[str]) -> None:
    level = (level or os.getenv("GORE_LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    # httpx logga ogni richiesta a INFO
    logging.getLogger("httpx").setLevel(logging.WARNING)


def _out_dir(args: argparse.Namespace) -> Path:
    return Path(args.out_dir or os.getenv("GORE_OUT_DIR", "runs"))


def _load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.load(args.config)
    loop_update = {}
    if getattr(args, "strategy", None):
        loop_update["strategy"] = ShotStrategy(args.strategy)
    if getattr(args, "critic", None):
        loop_update["critic_enabled"] = args.critic == "on"
    if getattr(args, "threshold", None) is not None:
        loop_update["quality_threshold"] = args.threshold
    if getattr(args, "max_iterations", None) is not None:
        loop_update["max_iterations"] = args.max_iterations
    if getattr(args, "keep", None):
        loop_update["keep"] = args.keep
    if loop_update:
        # revalidate: model_copy non esegue i validator
        loop = type(config.loop).model_validate({**config.loop.model_dump(), **loop_update})
        config = config.model_copy(update={"loop": loop})
    return config


def _registry(args: argparse.Namespace, config: RunConfig) -> Optional[RunRegistry]:
    if args.no_registry:
        return None
    return RunRegistry(get_registry_url(_out_dir(args), config.registry_url))


def _write(path: Optional[str], data: bytes) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(data)
        logger.info(f"Wrote {path}")


# ==========================================
# COMMANDS
# ==========================================

def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    load_project(config.paths.projects_dir, args.dataset)
    replay = Transcript.read_entries(args.replay) if args.replay else None
    if replay is not None and args.matrix:
        raise GoreError("--replay cannot be combined with --matrix")

    service = RunService(config, _out_dir(args), registry=_registry(args, config),
                         replay_entries=replay, record=args.record)

    if not args.matrix:
        manifest, result = service.run(args.dataset)
        sys.stdout.write(f"Run {manifest.run_id} completed\n")
        sys.stdout.write(render_stage_summary(result))
        return EXIT_OK

    cells = [
        config.loop.model_copy(update={"strategy": strategy, "critic_enabled": critic})
        for strategy, critic in product(ShotStrategy, (True, False))
    ]
    failures = 0
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        futures = [(cell, pool.submit(service.run, args.dataset, cell)) for cell in cells]
        for cell, future in futures:
            label = f"{cell.strategy.short}/critic {'on' if cell.critic_enabled else 'off'}"
            try:
                manifest, _ = future.result()
                sys.stdout.write(f"{label}: {manifest.run_id} completed\n")
            except PipelineError as e:
                failures += 1
                sys.stdout.write(f"{label}: failed ({e})\n")
    return EXIT_STAGE_FAILED if failures else EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    report = evaluate_runs(config, args.runs, args.truth, registry=_registry(args, config))
    _write(args.output, serialize_report(report))
    sys.stdout.write(render_results_table(report))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    report = load_report(args.report)
    critic = None if args.critic is None else args.critic == "on"
    if args.per_dataset:
        strategy = strategy_of(args.strategy)
        sys.stdout.write(render_per_dataset_table(report, EvalTask(args.task), strategy,
                                                  True if critic is None else critic))
    else:
        sys.stdout.write(render_results_table(report, critic))
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    if args.dataset:
        if args.report_a:
            raise GoreError("ablate takes either report files or --dataset, not both")
        if args.no_registry:
            raise GoreError("ablate --dataset reads the run registry; drop --no-registry")
        config = _load_config(args)
        registry = _registry(args, config)
        try:
            rows = registry.ablation_rows(args.dataset, config.evaluation.metric_convention.value,
                                          config.evaluation.embedder.value)
        finally:
            registry.dispose()
    elif args.report_a and args.report_b:
        rows = compare_reports(load_report(args.report_a), load_report(args.report_b))
    elif args.report_a:
        # un solo report: righe critic on contro righe critic off
        rows = compare_critic_settings(load_report(args.report_a))
    else:
        raise GoreError("ablate needs one mixed report, two reports (A critic on, B critic off) or --dataset")
    sys.stdout.write(render_ablation_table(rows))
    return EXIT_OK


def cmd_shot_similarity(args: argparse.Namespace) -> int:
    config = _load_config(args)
    projects = load_all_projects(config.paths.projects_dir)
    if args.datasets:
        projects = {k: v for k, v in projects.items() if k in set(args.datasets)}
        missing = set(args.datasets) - set(projects)
        if missing:
            raise GoreError(f"Unknown datasets: {', '.join(sorted(missing))}")
    evaluation = config.evaluation
    api_key = os.getenv(evaluation.embedder_api_key_env) if evaluation.embedder_api_key_env else None
    with closing(build_embedder(evaluation, api_key)) as backend:
        report = shot_similarity(projects, load_shot_examples(config.paths.examples_path), backend)
    _write(args.output, (report.model_dump_json(indent=2) + "\n").encode("utf-8"))
    sys.stdout.write(render_shot_similarity(report))
    return EXIT_OK


# ==========================================
# PARSER
# ==========================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gore-extract", description="Goal-model extraction pipeline")
    parser.add_argument("--config", help="Run configuration JSON")
    parser.add_argument("--out-dir", help="Output root for run directories (default: $GORE_OUT_DIR or ./runs)")
    parser.add_argument("--replay", help="Transcript JSONL to replay instead of calling providers")
    parser.add_argument("--record", action="store_true", help="Persist mock-provider exchanges to the transcript")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR (default: $GORE_LOG_LEVEL or INFO)")
    parser.add_argument("--no-registry", action="store_true", help="Do not write to the run registry")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run the extraction pipeline for one dataset")
    run.add_argument("dataset", help="Dataset id, e.g. gestao_hospital")
    run.add_argument("--strategy", choices=[s.value for s in ShotStrategy])
    run.add_argument("--critic", choices=["on", "off"])
    run.add_argument("--keep", choices=["last", "best"])
    run.add_argument("--threshold", type=float, help="Quality threshold override")
    run.add_argument("--max-iterations", type=int, help="Iteration cap override")
    run.add_argument("--matrix", action="store_true", help="Run every strategy x critic cell concurrently")
    run.add_argument("--workers", type=int, default=3)
    run.set_defaults(func=cmd_run)

    evaluate = sub.add_parser("evaluate", help="Evaluate runs against ground truth")
    evaluate.add_argument("runs", nargs="+", help="Run directories or manifest files")
    evaluate.add_argument("--truth", help="Ground-truth JSON (default: dataset fixture)")
    evaluate.add_argument("--output", help="Write the EvalReport JSON here")
    evaluate.set_defaults(func=cmd_evaluate)

    shot = sub.add_parser("shot-sim", help="Similarity between dataset descriptions and shot examples")
    shot.add_argument("--datasets", nargs="*")
    shot.add_argument("--output", help="Write the ShotSimilarityReport JSON here")
    shot.set_defaults(func=cmd_shot_similarity)

    ablate = sub.add_parser("ablate", help="Compare critic-on (A) with critic-off (B) results")
    ablate.add_argument("report_a", nargs="?", help="Critic-on report, or one report holding both settings")
    ablate.add_argument("report_b", nargs="?", help="Critic-off report")
    ablate.add_argument("--dataset", help="Compare the latest registered critic on/off runs of this dataset")
    ablate.set_defaults(func=cmd_ablate)

    report = sub.add_parser("report", help="Render tables from a saved EvalReport")
    report.add_argument("report")
    report.add_argument("--critic", choices=["on", "off"])
    report.add_argument("--per-dataset", action="store_true")
    report.add_argument("--task", choices=[t.value for t in EvalTask], default=EvalTask.HIGH_LEVEL.value)
    strategies = [s.short for s in ShotStrategy] + [s.value for s in ShotStrategy]
    report.add_argument("--strategy", default="FS", choices=strategies,
                        help="Strategy of the per-dataset table (default FS)")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.func(args)
    except StageFailed as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_STAGE_FAILED
    except (GoreError, DatabaseError, ValidationError, OSError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
