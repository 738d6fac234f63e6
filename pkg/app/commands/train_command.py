import argparse
import logging
import time

from pydantic import ValidationError

from app.exceptions import ConfigError
from app.schemas.training import LineOrder, ModelName, NegativeWeighting, TrainConfig, WalkStart
from app.services.embedding_service import EmbeddingService
from app.services.graph_service import load_graph
from app.services.run_service import RunService, file_digest
from app.services.sampler_service import build_graph_sampler
from app.services.training_service import train

logger = logging.getLogger(__name__)

# flag dest -> TrainConfig field
CONFIG_FLAGS = {
    "model": "model",
    "dimensions": "dimensions",
    "walk_times": "walk_times",
    "walk_length": "walk_length",
    "window": "window",
    "negatives": "negatives",
    "sample_times": "sample_times",
    "alpha": "alpha",
    "threads": "workers",
    "seed": "seed",
    "line_order": "line_order",
    "walk_start": "walk_start",
    "offsets": "walklets_offsets",
    "negative_weighting": "negative_weighting",
}


def _offsets(value: str):
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid offset list: {value!r}") from None


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Train vertex embeddings on a weighted edge list.")
    parser.add_argument("--train", required=True, help="edge-list file")
    parser.add_argument("--save", required=True, help="output embedding file")
    parser.add_argument("--save-context", help="also write the context-role matrix")
    parser.add_argument("--manifest", help="replay the configuration recorded in a run manifest")
    parser.add_argument("--model", choices=[m.value for m in ModelName])
    parser.add_argument("--dimensions", type=int, help="default 64")
    parser.add_argument("--walk-times", type=int, help="default 10")
    parser.add_argument("--walk-length", type=int, help="default 40")
    parser.add_argument("--window", type=int, help="default 5")
    parser.add_argument("--negatives", type=int, help="default 5")
    parser.add_argument("--sample-times", type=float, help="millions of positive pairs, default 10")
    parser.add_argument("--alpha", type=float, help="default 0.025")
    parser.add_argument("--threads", type=int, help="default 1")
    parser.add_argument("--seed", type=int, help="default 1")
    parser.add_argument("--line-order", choices=[o.value for o in LineOrder])
    parser.add_argument("--walk-start", choices=[s.value for s in WalkStart])
    parser.add_argument("--offsets", type=_offsets, help="walklets step offsets, e.g. 2,3")
    parser.add_argument("--negative-weighting", choices=[n.value for n in NegativeWeighting])
    parser.add_argument("--undirected", action="store_true", default=None)
    parser.add_argument("--typed", action="store_true", default=None)
    parser.set_defaults(handler=cmd_train)


def resolve_config(args) -> TrainConfig:
    values = {}
    if args.manifest:
        values.update(RunService.config_overrides(RunService.read_manifest(args.manifest)))
    for flag, field_name in CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[field_name] = value
    try:
        return TrainConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigError(f"invalid configuration: {location}: {first['msg']}") from None


def _graph_option(args, name: str) -> bool:
    value = getattr(args, name)
    if value is not None:
        return value
    if args.manifest:
        return RunService.read_manifest(args.manifest).config.get(name) == "True"
    return False


def _check_replay_input(args) -> None:
    recorded = RunService.read_manifest(args.manifest).digests.get("train")
    if recorded and recorded != file_digest(args.train):
        logger.warning(f"{args.train} differs from the input recorded in {args.manifest}; replay may not reproduce it")


def cmd_train(args) -> None:
    cfg = resolve_config(args)
    undirected, typed = _graph_option(args, "undirected"), _graph_option(args, "typed")
    if args.manifest:
        _check_replay_input(args)
    started = time.time()

    graph = load_graph(args.train, undirected=undirected, typed=typed)
    sampler = build_graph_sampler(graph, cfg.negative_weighting)
    result = train(graph, cfg, sampler)
    EmbeddingService.save(args.save, graph.vertex_names, result.embeddings)
    if args.save_context:
        if result.context is None:
            logger.warning(f"{cfg.model.value} has no single context matrix; --save-context ignored")
        else:
            EmbeddingService.save(args.save_context, graph.vertex_names, result.context)

    duration = time.time() - started
    manifest = RunService.build_manifest(
        cfg,
        {"train": args.train},
        duration,
        sampler.size_report(),
        graph_options={"undirected": undirected, "typed": typed},
    )
    RunService.write_manifest(f"{args.save}.manifest", manifest)
    RunService.record_if_enabled(
        command="train",
        model=cfg.model.value,
        output_path=args.save,
        seed=cfg.seed,
        duration_seconds=duration,
        manifest=manifest,
    )
    print(f"saved: {args.save} ({graph.vertex_count} x {result.embeddings.shape[1]})")
    print(f"updates: {result.updates}")
