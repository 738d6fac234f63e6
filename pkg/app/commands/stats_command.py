from app.schemas.training import NegativeWeighting
from app.services.graph_service import load_graph
from app.services.sampler_service import build_graph_sampler


def register(subparsers) -> None:
    parser = subparsers.add_parser("stats", help="Report graph size and sampler table sizes.")
    parser.add_argument("--train", required=True, help="edge-list file")
    parser.add_argument("--undirected", action="store_true")
    parser.add_argument("--typed", action="store_true")
    parser.add_argument("--negative-weighting", choices=[n.value for n in NegativeWeighting],
                        default=NegativeWeighting.LOG.value)
    parser.set_defaults(handler=cmd_stats)


def cmd_stats(args) -> None:
    graph = load_graph(args.train, undirected=args.undirected, typed=args.typed)
    sampler = build_graph_sampler(graph, args.negative_weighting)
    summary = graph.summary()
    print(f"vertices: {summary.vertex_count}")
    print(f"edges: {summary.edge_count}")
    print(f"total_weight: {summary.total_weight:g}")
    print(f"dangling_vertices: {summary.dangling_vertices}")
    for key, value in sampler.size_report().model_dump().items():
        print(f"{key}: {value}")
