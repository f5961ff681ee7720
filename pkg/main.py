import argparse
import logging
import sys

from hyplat import config
from hyplat.cli import batch, check_report, run
from hyplat.errors import InputError
from hyplat.logging_config import setup_logging
from hyplat.models import JobSpec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyplat", description="Automorphism groups of hyperbolic lattices")
    parser.add_argument("--log-level", default=None, help="overrides HYPLAT_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_job_options(p):
        p.add_argument("--mode", choices=["direct", "watson", "auto"], default="auto")
        p.add_argument("--json", dest="json_path", default=None, help="write the full report here")
        p.add_argument("--dot", dest="dot_path", default=None, help="write the residue graph here")
        p.add_argument("--verify", action="store_true")
        p.add_argument("--orbit-budget", type=int, default=config.ORBIT_BUDGET)
        p.add_argument("--no-timings", action="store_true", help="omit wall-clock fields from the report")
        p.add_argument("--quiet", action="store_true", help="no summary on stdout")

    aut = sub.add_parser("aut", help="Gram matrix file: `n a11 ... ann` or a JSON array of arrays")
    aut.add_argument("matrix_file")
    add_job_options(aut)

    graph = sub.add_parser("graph", help="edge list file; Gram matrix 2I - adjacency")
    graph.add_argument("edge_file")
    add_job_options(graph)

    b = sub.add_parser("batch", help="random hyperbolic matrices, CSV on stdout")
    b.add_argument("--count", type=int, required=True)
    b.add_argument("--dim", type=int, required=True)
    b.add_argument("--bound", type=int, required=True)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--workers", type=int, default=config.BATCH_WORKERS)

    c = sub.add_parser("check", help="re-check the generators of a saved JSON report")
    c.add_argument("report_file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(level=args.log_level.upper() if args.log_level else None)

    if args.command == "batch":
        try:
            sys.stdout.write(batch(args.count, args.dim, args.bound, args.seed, args.workers))
        except InputError as e:
            logging.error(f"batch rejected: {e}")
            print(f"error: {e}", file=sys.stderr)
            return 2
        return 0

    if args.command == "check":
        try:
            with open(args.report_file, encoding="utf-8") as fh:
                verification = check_report(fh.read())
        except (InputError, OSError) as e:
            logging.error(f"check rejected: {e}")
            print(f"error: {e}", file=sys.stderr)
            return 2
        for v in verification.violations:
            print(f"{v.kind}: {v.detail}")
        return 0 if verification.ok else 1

    job = JobSpec(
        matrix_path=args.matrix_file if args.command == "aut" else None,
        graph_path=args.edge_file if args.command == "graph" else None,
        mode=args.mode,
        json_path=args.json_path,
        dot_path=args.dot_path,
        summary=not args.quiet,
        verify=args.verify,
        orbit_budget=args.orbit_budget,
        include_timings=not args.no_timings,
    )
    return run(job)


if __name__ == "__main__":
    raise SystemExit(main())
