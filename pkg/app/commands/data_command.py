import logging

from app.exceptions import AppError
from app.services.corpus_service import CorpusService
from app.services.evaluation_service import EvaluationService
from app.services.graph_service import read_edge_list, utf8_lines, write_edge_list

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    network = subparsers.add_parser("build-network", help="Build a word co-occurrence edge list from text.")
    network.add_argument("--corpus", required=True, help="plain text, whitespace-tokenised")
    network.add_argument("--out", required=True)
    network.add_argument("--window", type=int, default=5)
    network.add_argument("--min-count", type=int, default=5)
    network.add_argument("--directed", action="store_true", help="keep only reading-order edges")
    network.set_defaults(handler=cmd_build_network)

    split = subparsers.add_parser("split", help="Split user ratings per user into train and test files.")
    split.add_argument("--in", dest="input", required=True)
    split.add_argument("--train-out", required=True)
    split.add_argument("--test-out", required=True)
    split.add_argument("--fraction", type=float, default=0.8)
    split.add_argument("--seed", type=int, default=1)
    split.set_defaults(handler=cmd_split)


def cmd_build_network(args) -> None:
    lines = utf8_lines(args.corpus, lambda n, detail: AppError(f"{args.corpus}: line {n}: {detail}"))
    edges = CorpusService.cooccurrence_edges(lines, window=args.window, min_count=args.min_count,
                                            directed=args.directed)
    with open(args.out, "w", encoding="utf-8") as out:
        count = write_edge_list(edges, out)
    print(f"edges: {count}")


def cmd_split(args) -> None:
    train, test = EvaluationService.split_ratings(read_edge_list(args.input), args.fraction, args.seed)
    with open(args.train_out, "w", encoding="utf-8") as out:
        write_edge_list(train, out)
    with open(args.test_out, "w", encoding="utf-8") as out:
        write_edge_list(test, out)
    print(f"train: {len(train)}")
    print(f"test: {len(test)}")
