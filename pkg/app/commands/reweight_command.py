import logging

from app.exceptions import UsageError
from app.schemas.graph import WeightScheme
from app.services.graph_service import read_edge_list, write_edge_list
from app.services.weighting_service import WeightingService

logger = logging.getLogger(__name__)

SCHEME_CHOICES = ["binary", "tf", "tfidf", "rating", "rating-irf"]


def register(subparsers) -> None:
    parser = subparsers.add_parser("reweight", help="Re-weight an edge list with a weighting scheme.")
    parser.add_argument("--scheme", required=True, choices=SCHEME_CHOICES)
    parser.add_argument("--in", dest="input", required=True, help="input edge list")
    parser.add_argument("--out", required=True, help="output edge list")
    parser.add_argument("--typed", action="store_true", help="source column = users, target column = items")
    parser.set_defaults(handler=cmd_reweight)


def cmd_reweight(args) -> None:
    scheme = WeightScheme.parse(args.scheme)
    if scheme is WeightScheme.RATING_IRF and not args.typed:
        raise UsageError("--scheme rating-irf needs --typed (users in the source column)")

    edges = read_edge_list(args.input, typed=args.typed)
    reweighted = WeightingService.reweight(edges, scheme)
    with open(args.out, "w", encoding="utf-8") as out:
        count = write_edge_list(reweighted, out)
    logger.info(f"Re-weighted {len(edges)} edges with {scheme.value}")
    print(f"edges: {count}")
