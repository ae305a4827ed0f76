"""Command-line entry point: analyze, build-pool, train, generate, evaluate, render, serve."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import torch

from app.core.config import (
    ActMode,
    RewardComponent,
    ResampleMode,
    RunConfig,
    get_settings,
    load_run_config,
)
from app.core.exceptions import BaseAppException, ConfigError
from app.core.logging import configure_logging
from app.models import CENSUS_FIELDS
from app.models.tile import load_alphabet
from app.repositories.corpus import CorpusRepository
from app.repositories.generator import PoolRepository
from app.repositories.policy import PolicyCheckpoint, PolicyRepository, normalizer_state
from app.repositories.report import ReportRepository
from app.services.evaluation_service import (
    LEVEL_SUMMARY_FIELDS,
    SEGMENT_ROW_FIELDS,
    benchmark_latency,
    evaluate_policy,
    sample_initial_states,
    summary_table,
)
from app.services.generator_service import build_pool
from app.services.level_service import census_rows
from app.services.metrics_service import corpus_diversity_stats
from app.services.online_service import generate_online, summarize_generations
from app.services.pipeline_service import RANDOM_DESIGNER, build_pipeline, designer_factory, load_designer
from app.services.render_service import RenderStyle, parse_style, render_ascii, render_image
from app.services.training_service import TRAINING_LOG_FIELDS, TrainingResult, train

logger = logging.getLogger(__name__)

DIVERSITY_FIELDS = ("level_type", "stride", "count", "mean", "std")
CENSUS_ROW_FIELDS = ("segment",) + CENSUS_FIELDS


def _config(args) -> RunConfig:
    config = load_run_config(args.config or get_settings().run_config_path)
    return config.with_overrides(**{"seed": args.seed, "paths.out_dir": args.out})


def _corpus_dir(args, config: RunConfig) -> str:
    directory = getattr(args, "corpus", None) or config.paths.corpus_dir
    if not directory:
        raise ConfigError("No corpus directory: pass --corpus or set paths.corpus_dir")
    return directory


def _load_corpus(args, config: RunConfig):
    alphabet = load_alphabet(config.paths.alphabet_path)
    repo = CorpusRepository(alphabet, config.backend.segment_height, config.backend.segment_width)
    return repo.load_corpus(_corpus_dir(args, config), config.corpus)


def cmd_analyze(args) -> int:
    config = _config(args)
    corpus = _load_corpus(args, config)
    reports = ReportRepository(config.paths.out_dir)
    rows = []
    for stride in config.corpus.strides:
        stats = corpus_diversity_stats(((c.level, c.level_type) for c in corpus), config.metrics, stride)
        for item in stats.values():
            rows.append(
                {
                    "level_type": item.level_type,
                    "stride": item.stride,
                    "count": item.count,
                    "mean": item.mean,
                    "std": item.std,
                }
            )
            print(f"{item.level_type:<12} stride {item.stride:>2}: {item.mean:.2f}±{item.std:.2f} ({item.count})")
    reports.write_csv("diversity.csv", DIVERSITY_FIELDS, rows)
    reports.write_manifest("analyze", config, [Path(_corpus_dir(args, config)) / f"{c.name}.txt" for c in corpus])
    return 0


def cmd_build_pool(args) -> int:
    config = _config(args)
    corpus = _load_corpus(args, config)
    alphabet = load_alphabet(config.paths.alphabet_path)
    pool = build_pool(
        [c.level for c in corpus],
        width=config.backend.segment_width,
        stride=config.backend.pool_stride,
        seed=config.backend.pool_seed,
        alphabet=alphabet,
        source=str(_corpus_dir(args, config)),
    )
    reports = ReportRepository(config.paths.out_dir)
    reports.record(PoolRepository().save(pool, reports.path("pool.edrlpool")))
    reports.write_manifest("build-pool", config, [Path(_corpus_dir(args, config)) / f"{c.name}.txt" for c in corpus])
    return 0


def _checkpoint(result: TrainingResult, config: RunConfig) -> PolicyCheckpoint:
    return PolicyCheckpoint(
        policy=result.policy,
        reward=config.reward,
        train=config.train,
        seed=config.seed,
        steps=result.steps,
        optimizer_state=result.optimizer.state_dict(),
        normalizers=normalizer_state(result.normalizers),
    )


def cmd_train(args) -> int:
    config = _config(args)
    overrides = {}
    if args.reward:
        overrides["reward.components"] = list(args.reward.upper())
    if args.steps is not None:
        overrides["train.total_steps"] = args.steps
    config = config.with_overrides(**overrides)

    pipeline = build_pipeline(config)
    reports = ReportRepository(config.paths.out_dir)
    policy_path = reports.path(f"policy_{config.reward.name}.pt")
    repo = PolicyRepository()

    result = train(config, pipeline, checkpoint=lambda r: repo.save(_checkpoint(r, config), policy_path))
    reports.record(repo.save(_checkpoint(result, config), policy_path))
    reports.write_csv("training_log.csv", TRAINING_LOG_FIELDS, (row.as_dict() for row in result.log.rows))
    reports.write_manifest("train", config, [config.paths.pool_path, config.paths.decoder_path])
    return 0


def _policy_path(args, config: RunConfig) -> str:
    return args.policy or config.paths.policy_path or get_settings().policy_path or RANDOM_DESIGNER


def cmd_generate(args) -> int:
    config = _config(args)
    overrides = {}
    if args.segments is not None:
        overrides["online.target_segments"] = args.segments
    if args.resample:
        overrides["online.resample_mode"] = args.resample
    if args.mode:
        overrides["online.act_mode"] = args.mode
    config = config.with_overrides(**overrides)
    if args.runs < 1:
        raise ConfigError("--runs must be >= 1")

    pipeline = build_pipeline(config)
    policy_path = _policy_path(args, config)
    reports = ReportRepository(config.paths.out_dir)
    corpus = CorpusRepository(pipeline.alphabet, config.backend.segment_height, config.backend.segment_width)

    inits = sample_initial_states(pipeline, min(args.runs, config.evaluation.initial_segments), config.seed)
    generation_reports = []
    for run in range(args.runs):
        run_seed = int(np.random.SeedSequence([config.seed, run]).generate_state(1)[0])
        designer = load_designer(policy_path, run_seed)
        level, report = generate_online(designer, pipeline, inits[run % len(inits)], config.online, run_seed)
        generation_reports.append(report)
        suffix = "" if args.runs == 1 else f"_{run:03d}"
        reports.record(corpus.save(level, reports.path(f"level{suffix}.txt")))
        reports.write_csv(f"segments{suffix}.csv", CENSUS_ROW_FIELDS, census_rows(level, pipeline.alphabet))
        reports.write_json(f"generation{suffix}.json", report.summary())
        status = "failed" if report.failed else "ok"
        print(f"run {run}: {status}, {report.segments} segments, {report.resamples_total} resamples")

    if args.runs > 1:
        reports.write_json("online_summary.json", summarize_generations(generation_reports))
    reports.write_manifest("generate", config, _artifact_inputs(config, policy_path))
    return 0


def _artifact_inputs(config: RunConfig, policy_path: str) -> List[Optional[str]]:
    inputs = [config.paths.pool_path, config.paths.decoder_path]
    if policy_path != RANDOM_DESIGNER:
        inputs.append(policy_path)
    return inputs


def cmd_evaluate(args) -> int:
    config = _config(args)
    overrides = {}
    if args.workers is not None:
        overrides["evaluation.workers"] = args.workers
    config = config.with_overrides(**overrides)

    pipeline = build_pipeline(config)
    policy_path = _policy_path(args, config)
    stop_on_unplayable = False
    name = RANDOM_DESIGNER
    if policy_path != RANDOM_DESIGNER:
        checkpoint = PolicyRepository().load(policy_path)
        stop_on_unplayable = checkpoint.reward.uses(RewardComponent.P)
        name = checkpoint.reward.name

    inits = sample_initial_states(pipeline, config.evaluation.initial_segments, config.seed)
    report = evaluate_policy(
        designer_factory(policy_path, config.seed),
        pipeline,
        inits,
        config.evaluation,
        stop_on_unplayable,
        config.online.act_mode,
        config.seed,
    )
    latency = benchmark_latency(
        load_designer(policy_path, config.seed),
        pipeline,
        inits[0],
        config.evaluation.latency_segments,
        config.online,
        config.seed,
    )

    reports = ReportRepository(config.paths.out_dir)
    reports.write_csv("evaluation_rows.csv", SEGMENT_ROW_FIELDS, (row.as_dict() for row in report.rows))
    summary = report.summary()
    reports.write_csv("evaluation_summary.csv", ("designer", *LEVEL_SUMMARY_FIELDS), [{"designer": name, **summary}])
    table = summary_table({name: report})
    reports.write_text("summary.txt", table + "\n")
    reports.write_json("latency.json", latency.as_dict())
    reports.write_manifest("evaluate", config, _artifact_inputs(config, policy_path))
    print(table)
    return 0


def cmd_render(args) -> int:
    config = _config(args)
    style = parse_style(args.style)
    alphabet = load_alphabet(config.paths.alphabet_path)
    level = CorpusRepository(alphabet, config.backend.segment_height, config.backend.segment_width).load(args.level)
    if style == RenderStyle.ASCII:
        print(render_ascii(level), end="")
        return 0
    reports = ReportRepository(config.paths.out_dir)
    reports.write_image(f"{Path(args.level).stem}.png", render_image(level, alphabet))
    reports.write_manifest("render", config, [args.level])
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mariopuzzle", description="Segment-wise level design with RL designers")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run config")
    common.add_argument("--seed", type=int, help="Override the run seed")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--log-level", default=None, help="Logging level")

    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", parents=[common], help="Corpus diversity statistics")
    analyze.add_argument("--corpus", help="Directory of level .txt files")
    analyze.set_defaults(handler=cmd_analyze)

    pool = sub.add_parser("build-pool", parents=[common], help="Build a segment pool checkpoint")
    pool.add_argument("--corpus", help="Directory of level .txt files")
    pool.set_defaults(handler=cmd_build_pool)

    train_parser = sub.add_parser("train", parents=[common], help="Train a designer policy")
    train_parser.add_argument("--reward", help="Reward components, e.g. FHP")
    train_parser.add_argument("--steps", type=int, help="Environment steps")
    train_parser.set_defaults(handler=cmd_train)

    generate = sub.add_parser("generate", parents=[common], help="Online level generation")
    generate.add_argument("--policy", help=f"Policy checkpoint or '{RANDOM_DESIGNER}'")
    generate.add_argument("--segments", type=int, help="Target level length in segments")
    generate.add_argument("--resample", choices=[m.value for m in ResampleMode])
    generate.add_argument("--mode", choices=[m.value for m in ActMode])
    generate.add_argument("--runs", type=int, default=1, help="Independent generations")
    generate.set_defaults(handler=cmd_generate)

    evaluate = sub.add_parser("evaluate", parents=[common], help="Batch evaluation of a designer")
    evaluate.add_argument("--policy", help=f"Policy checkpoint or '{RANDOM_DESIGNER}'")
    evaluate.add_argument("--workers", type=int, help="Worker processes")
    evaluate.set_defaults(handler=cmd_evaluate)

    render = sub.add_parser("render", parents=[common], help="Render a level file")
    render.add_argument("level", help="Level .txt file")
    render.add_argument("--style", default=RenderStyle.ASCII.value)
    render.set_defaults(handler=cmd_render)

    serve = sub.add_parser("serve", parents=[common], help="Run the HTTP API")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command.

    Returns:
        int: 0 on success, 1 config error, 2 data error, 3 runtime failure
    """
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(args.log_level or settings.log_level)
    torch.set_num_threads(settings.torch_threads)
    logger.info("Running %s", args.command)
    try:
        code = args.handler(args)
    except BaseAppException as e:
        logger.error("%s: %s", type(e).__name__, e.detail)
        print(f"error: {e.message}", file=sys.stderr)
        return e.exit_code
    logger.info("Finished %s", args.command)
    return code


if __name__ == "__main__":
    sys.exit(main())
