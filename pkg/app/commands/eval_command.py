import argparse
import logging

from app.schemas.evaluation import Scorer
from app.services.embedding_service import EmbeddingService
from app.services.evaluation_service import EvaluationService, RecEvalSplit
from app.services.graph_service import read_edge_list
from app.services.run_service import RunService

logger = logging.getLogger(__name__)


def _cutoffs(value: str):
    try:
        cutoffs = sorted({int(v) for v in value.split(",") if v.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid cutoff list: {value!r}") from None
    if not cutoffs or cutoffs[0] < 1:
        raise argparse.ArgumentTypeError("cutoffs must be positive integers")
    return cutoffs


def register(subparsers) -> None:
    sim = subparsers.add_parser("eval-sim", help="Spearman correlation against a word-similarity benchmark.")
    sim.add_argument("--embeddings", required=True)
    sim.add_argument("--benchmark", required=True, help="'<word1> <word2> <score>' per line")
    sim.set_defaults(handler=cmd_eval_sim)

    rec = subparsers.add_parser("eval-rec", help="Recall@k, HR@k and mAP@k for item-item recommendation.")
    rec.add_argument("--embeddings", required=True)
    rec.add_argument("--train", required=True, help="training interactions (user item weight)")
    rec.add_argument("--test", required=True, help="test interactions; weights ignored")
    rec.add_argument("--queries", type=int, default=5)
    rec.add_argument("--k", type=_cutoffs, default=[10, 20, 30])
    rec.add_argument("--runs", type=int, default=None, help="seeded query draws to average, default 10")
    rec.add_argument("--seed", type=int, default=1)
    rec.add_argument("--scorer", choices=[s.value for s in Scorer], default=Scorer.DOT.value)
    rec.add_argument("--csv", help="also write metric,k,value rows to this file")
    rec.set_defaults(handler=cmd_eval_rec)


def cmd_eval_sim(args) -> None:
    embeddings = EmbeddingService.load(args.embeddings)
    benchmark = EvaluationService.read_benchmark(args.benchmark)
    result = EvaluationService.eval_word_similarity(embeddings, benchmark)
    print(f"rho: {result.rho:.4f}")
    print(f"covered: {result.covered_pairs}")
    print(f"skipped: {result.skipped_pairs}")
    RunService.record_if_enabled(
        command="eval-sim",
        output_path=args.embeddings,
        metrics=[("rho", None, result.rho)],
    )


def cmd_eval_rec(args) -> None:
    embeddings = EmbeddingService.load(args.embeddings)
    split = RecEvalSplit.from_edges(
        read_edge_list(args.train),
        read_edge_list(args.test),
        queries=args.queries,
        cutoffs=args.k,
    )
    report = EvaluationService.eval_recommendation(
        embeddings, split, runs=args.runs, seed=args.seed, scorer=Scorer(args.scorer)
    )
    for k in sorted(report.cutoffs):
        m = report.cutoffs[k]
        print(f"Recall@{k}: {m.recall:.4f}  HR@{k}: {m.hit_ratio:.4f}  mAP@{k}: {m.map:.4f}")
    print(f"users: {report.users_evaluated}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as out:
            out.write("metric,k,value\n")
            for name, k, value in report.rows():
                out.write(f"{name},{k},{value:.6f}\n")
    RunService.record_if_enabled(
        command="eval-rec",
        output_path=args.embeddings,
        seed=args.seed,
        metrics=list(report.rows()),
    )
