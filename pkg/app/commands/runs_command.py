from app.database import get_db, init_db
from app.services.run_service import RunService


def register(subparsers) -> None:
    parser = subparsers.add_parser("runs", help="List recorded runs (RECORD_RUNS=true).")
    parser.add_argument("--limit", type=int, default=20)
    parser.set_defaults(handler=cmd_runs)


def cmd_runs(args) -> None:
    init_db()
    with get_db() as db:
        runs = RunService.list_runs(db, limit=args.limit)
    if not runs:
        print("no recorded runs")
        return
    for run in runs:
        metrics = " ".join(f"{name}={value:.4f}" for name, value in run.metrics.items())
        duration = f"{run.duration_seconds:.1f}s" if run.duration_seconds is not None else "-"
        print(f"{run.id[:8]}  {run.command:<8}  {run.model or '-':<8}  {duration:>8}  {run.output_path or ''}  {metrics}".rstrip())
