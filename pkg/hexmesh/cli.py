"""
Command-line surface: gen, enumerate, bound, simplify, validate, runs, fetch, serve.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 budget exceeded.
"""
import argparse
import logging
import os
import sys

from hexmesh.combinatorics import canonical_solution
from hexmesh.config import DB_PATH, resolve_threads
from hexmesh.errors import BudgetExceeded, HexMeshError
from hexmesh.generators import (
    DEFAULT_APEX_HEIGHT, DEFAULT_RING_HEIGHT, GENERATORS, gen_grid, gen_spindle_boundary,
)
from hexmesh.geometry import validity
from hexmesh.hexm_io import HexmFile, read_hexm, write_hexm
from hexmesh.logging_utils import add_log_entry, log_bound_step, log_search_stats
from hexmesh.parallel import parallel_search
from hexmesh.run_store import RunStore, boundary_digest
from hexmesh.search import SearchLimits
from hexmesh.simplifier import SimplifyConfig, simplify

# Effectively unbounded hex count for vertex-limited refutations
UNBOUNDED_HEXES = 10 ** 6

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="hexmesh", description="Enumerate, refute and simplify hexahedral meshes.")
    parser.add_argument("--db", default=None, help="Run ledger path (default: HEXMESH_DB_PATH)")
    parser.add_argument("--log-level", default=None, help="Override the logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="Write a built-in boundary or mesh")
    p.add_argument("kind", choices=sorted(GENERATORS))
    p.add_argument("dims", nargs="*", type=int, help="a b c for grid")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--ring-height", type=float, default=DEFAULT_RING_HEIGHT)
    p.add_argument("--apex-height", type=float, default=DEFAULT_APEX_HEIGHT)

    p = sub.add_parser("enumerate", help="Enumerate every mesh of a boundary within limits")
    p.add_argument("--boundary", default="-")
    p.add_argument("--max-hex", type=int, required=True)
    p.add_argument("--max-vertices", type=int, required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--emit", default=None, help="Directory for one .hexm file per solution")
    p.add_argument("--max-solutions", type=int, default=None)
    p.add_argument("--budget-secs", type=float, default=None)
    p.add_argument("--no-symmetry-breaking", action="store_true")
    p.add_argument("--dedup", action="store_true", help="Also count solutions distinct up to relabelling")

    p = sub.add_parser("bound", help="Run the search with increasing limits, reporting SAT/UNSAT")
    p.add_argument("--boundary", default="-")
    p.add_argument("--mode", choices=("interior-vertices", "hexahedra"), required=True)
    p.add_argument("--from", dest="start", type=int, required=True)
    p.add_argument("--to", dest="stop", type=int, required=True)
    p.add_argument("--max-hex", type=int, default=None)
    p.add_argument("--max-vertices", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--budget-secs", type=float, default=None)

    p = sub.add_parser("simplify", help="Reduce a mesh by cavity remeshing")
    p.add_argument("--mesh", default="-")
    p.add_argument("--out", default="-")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cavity-min", type=int, default=None)
    p.add_argument("--cavity-max", type=int, default=None)
    p.add_argument("--budget-secs", type=float, default=None)
    p.add_argument("--total-budget-secs", type=float, default=None)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--history", action="store_true", help="Print one line per accepted cavity")

    p = sub.add_parser("validate", help="Check every hex has positive sampled Jacobians")
    p.add_argument("--mesh", default="-")
    p.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("runs", help="List recorded runs")
    p.add_argument("--limit", type=int, default=20)
    p.add_argument("--command", dest="filter_command", default=None)

    p = sub.add_parser("fetch", help="Download a .msh or .hexm mesh and store it as .hexm")
    p.add_argument("url")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("serve", help="Start the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=5000)
    return parser


# --- Commands ---
def cmd_gen(args, store):
    if args.kind == "grid":
        if len(args.dims) != 3 or min(args.dims) < 1:
            raise UsageError("grid needs three positive dimensions: gen grid A B C")
        hf = gen_grid(*args.dims)
    elif args.dims:
        raise UsageError(f"{args.kind} takes no dimensions")
    elif args.kind == "spindle":
        hf = gen_spindle_boundary(args.ring_height, args.apex_height)
    else:
        hf = GENERATORS[args.kind]()
    write_hexm(hf, args.output)
    return 0


def _threads(args, store):
    return resolve_threads(args.threads, default=store.get_int_setting('threads', 0))


def cmd_enumerate(args, store):
    hf = read_hexm(args.boundary)
    boundary_file = hf.boundary_file()
    surface = hf.surface()
    surface.validate()
    n_threads = _threads(args, store)
    limits = SearchLimits(args.max_hex, args.max_vertices, args.max_solutions).with_budget(args.budget_secs)
    digest = boundary_digest(surface)

    sink = None
    if args.emit:
        os.makedirs(args.emit, exist_ok=True)
        counter = [0]

        def sink(solution):
            counter[0] += 1
            path = os.path.join(args.emit, f"solution_{counter[0]:05d}.hexm")
            write_hexm(HexmFile.from_solution(boundary_file, solution), path)
    elif not args.count_only:
        counter = [0]

        def sink(solution):
            counter[0] += 1
            hexes = " | ".join(" ".join(str(v) for v in h) for h in solution.hexes)
            print(f"solution {counter[0]}: {hexes}")

    distinct = set()
    if args.dedup:
        inner = sink

        def sink(solution):
            distinct.add(canonical_solution(solution.hexes, solution.n_boundary))
            if inner is not None:
                inner(solution)

    try:
        stats = parallel_search(surface, limits, n_threads=n_threads, sink=sink,
                                target_per_thread=store.get_int_setting('target_per_thread', 4096),
                                symmetry_breaking=not args.no_symmetry_breaking)
    except BudgetExceeded as e:
        store.record_run('enumerate', 'BUDGET', getattr(e, 'stats', None), digest,
                         h_max=args.max_hex, v_max=args.max_vertices)
        raise

    print(f"solutions: {stats.solutions}")
    if args.dedup:
        print(f"distinct: {len(distinct)}")
    print(stats.summary(), file=sys.stderr)
    log_search_stats("enumerate", stats)
    store.record_run('enumerate', 'SAT' if stats.solutions else 'UNSAT', stats, digest,
                     h_max=args.max_hex, v_max=args.max_vertices)
    return 0


def cmd_bound(args, store):
    hf = read_hexm(args.boundary)
    surface = hf.surface()
    surface.validate()
    if args.start < 0 or args.stop < args.start:
        raise UsageError("--from must be non-negative and not above --to")
    n_threads = _threads(args, store)
    nb = surface.n_vertices
    digest = boundary_digest(surface)

    for k in range(args.start, args.stop + 1):
        if args.mode == "interior-vertices":
            h_max = args.max_hex if args.max_hex is not None else UNBOUNDED_HEXES
            v_max = nb + k
        else:
            h_max = k
            v_max = args.max_vertices if args.max_vertices is not None else nb + 4 * k
        limits = SearchLimits(h_max, v_max, max_solutions=1).with_budget(args.budget_secs)
        try:
            stats = parallel_search(surface, limits, n_threads=n_threads,
                                    target_per_thread=store.get_int_setting('target_per_thread', 4096))
        except BudgetExceeded as e:
            stats = getattr(e, 'stats', None)
            print(f"{args.mode}={k} BUDGET")
            store.record_run('bound', 'BUDGET', stats, digest, args.mode, k, h_max, v_max)
            raise
        status = "SAT" if stats.solutions else "UNSAT"
        print(f"{args.mode}={k} {status} nodes={stats.nodes} time={stats.elapsed_ms}ms")
        log_bound_step(args.mode, k, status, stats)
        store.record_run('bound', status, stats, digest, args.mode, k, h_max, v_max)
    return 0


def cmd_simplify(args, store):
    mesh = read_hexm(args.mesh).geo_mesh()

    def pick(value, key, default):
        return value if value is not None else store.get_int_setting(key, default)

    config = SimplifyConfig(
        cavity_min=pick(args.cavity_min, 'cavity_min', 6),
        cavity_max=pick(args.cavity_max, 'cavity_max', 18),
        cavity_retries=store.get_int_setting('cavity_retries', 32),
        cavities_per_size=store.get_int_setting('cavities_per_size', 8),
        seed=args.seed,
        budget_secs=(args.budget_secs if args.budget_secs is not None
                     else store.get_float_setting('budget_secs', 30.0)),
        total_budget_secs=args.total_budget_secs,
        exhaustive=args.exhaustive,
        threads=_threads(args, store),
        target_per_thread=store.get_int_setting('target_per_thread', 4096),
        samples=pick(args.samples, 'samples', 3),
        untangle_max_iters=store.get_int_setting('untangle_max_iters', 1000),
    )
    history = []
    result = simplify(mesh, config, history)
    write_hexm(HexmFile.from_geo_mesh(result), args.out)

    if args.history:
        for record in history:
            print(record.as_row(), file=sys.stderr)
    print(f"hexes: {mesh.n_hexes} -> {result.n_hexes}", file=sys.stderr)
    add_log_entry(f"SIMPLIFY: {mesh.n_hexes} -> {result.n_hexes} hexes in {len(history)} iterations",
                  "success" if history else "info")
    store.record_run('simplify', 'IMPROVED' if history else 'UNCHANGED', None,
                     limit=config.cavity_max, h_max=result.n_hexes)
    return 0


def cmd_validate(args, store):
    mesh = read_hexm(args.mesh).geo_mesh()
    mesh.complex(check=True)
    samples = args.samples if args.samples is not None else store.get_int_setting('samples', 3)
    report = validity(mesh, samples)
    print(report.summary())
    for k in report.invalid_hexes:
        print(f"  hex {k}: {' '.join(str(v) for v in mesh.hexes[k])} "
              f"(min jacobian {report.per_hex_min[k]:.6g})")
    return 0 if report.valid else 2


def cmd_runs(args, store):
    rows = store.get_runs(limit=args.limit, command=args.filter_command)
    if not rows:
        print("no runs recorded")
        return 0
    for row in rows:
        limit = f" {row['mode']}={row['limit_value']}" if row['mode'] else ""
        print(f"{row['id']:>5} {row['created_at']} {row['command']:<9} {row['status']:<9}"
              f"{limit} H_max={row['h_max']} V_max={row['v_max']} solutions={row['solutions']} "
              f"nodes={row['nodes']} {row['elapsed_ms']}ms {row['boundary_digest']}")
    return 0


def cmd_fetch(args, store):
    from hexmesh.fetch import fetch_mesh, session_from_settings
    hf = fetch_mesh(args.url, session_from_settings(store))
    write_hexm(hf, args.output)
    return 0


def cmd_serve(args, store):
    from main import create_app
    create_app().run(host=args.host, port=args.port)
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "enumerate": cmd_enumerate,
    "bound": cmd_bound,
    "simplify": cmd_simplify,
    "validate": cmd_validate,
    "runs": cmd_runs,
    "fetch": cmd_fetch,
    "serve": cmd_serve,
}


def run_cli(argv=None, store=None):
    """Parse argv, run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"hexmesh: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as e:
        return e.code or 0

    if args.log_level:
        logging.getLogger().setLevel(getattr(logging, args.log_level.upper(), logging.INFO))

    try:
        store = store or RunStore(args.db or DB_PATH)
        return COMMANDS[args.command](args, store)
    except UsageError as e:
        print(f"hexmesh: {e}", file=sys.stderr)
        return 1
    except HexMeshError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"hexmesh: {e}", file=sys.stderr)
        return e.exit_code
