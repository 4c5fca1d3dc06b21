"""
Splitting the search tree into independent subproblems and running them on
a process pool. A subproblem is the list of branching decisions that leads
from the root to one node; workers rebuild their own engine and replay it.
"""
import logging
import multiprocessing
import time
from dataclasses import dataclass, field, replace

from hexmesh.errors import HexMeshError, WorkerFailure
from hexmesh.search import SearchProblem, SearchStats, Solution

DEFAULT_TARGET_PER_THREAD = 4096

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Subproblem:
    # ((slot, vertex), ...) decisions taken at successive branching nodes
    prefix: tuple


@dataclass
class WorkPlan:
    problem: SearchProblem
    subproblems: list
    target_per_thread: int = DEFAULT_TARGET_PER_THREAD
    # Solutions met while expanding the layer; they belong to no subproblem
    shallow_solutions: list = field(default_factory=list)
    split_stats: SearchStats = field(default_factory=SearchStats)


def split(boundary, limits, n_threads=1, target_per_thread=DEFAULT_TARGET_PER_THREAD,
          context=None, symmetry_breaking=True):
    """
    Deepen the decision layer until it holds n_threads * target_per_thread
    open nodes or the tree runs out. Solutions above the final layer are kept
    in the plan so that nothing is lost.
    """
    if n_threads < 1:
        raise ValueError("n_threads must be at least 1")
    problem = SearchProblem(boundary, limits, context, symmetry_breaking)
    # Early stopping would truncate the layer
    layer_problem = replace(problem, limits=replace(limits, max_solutions=None))
    goal = n_threads * target_per_thread

    depth = 0
    passes = SearchStats()
    while True:
        engine = layer_problem.engine()
        found = []
        stats = engine.run(sink=found.append, cutoff=depth)
        passes.nodes += stats.nodes
        passes.backtracks += stats.backtracks
        passes.elapsed_ms += stats.elapsed_ms
        frontier = engine.frontier
        if len(frontier) >= goal or not frontier:
            break
        depth += 1

    passes.solutions = len(found)
    plan = WorkPlan(problem, [Subproblem(p) for p in frontier], target_per_thread, found, passes)
    logger.info(f"Split at decision depth {depth}: {len(plan.subproblems)} subproblems, "
                f"{len(found)} shallow solutions")
    return plan


# --- Worker side ---
_worker_problem = None
_worker_collect = True


def _init_worker(problem, collect):
    global _worker_problem, _worker_collect
    _worker_problem = problem
    _worker_collect = collect


def _run_subproblem(sub):
    engine = _worker_problem.engine()
    found = []
    stats = engine.run(sink=found.append if _worker_collect else None, prefix=sub.prefix)
    return stats, [s.hexes for s in found]


def run_parallel(plan, n_threads=1, sink=None):
    """
    Explore every subproblem of the plan and aggregate the statistics. Workers
    pull the next unclaimed subproblem; solutions are handed to `sink` in the
    parent process as workers finish.
    """
    start = time.monotonic()
    problem = plan.problem
    max_solutions = problem.limits.max_solutions
    total = SearchStats(workers=n_threads, subproblems=len(plan.subproblems))
    total.nodes = plan.split_stats.nodes
    total.backtracks = plan.split_stats.backtracks
    n_boundary = problem.boundary.n_vertices

    def deliver(hexes_list):
        for hexes in hexes_list:
            if max_solutions is not None and total.solutions >= max_solutions:
                return False
            total.solutions += 1
            if sink is not None:
                sink(Solution(list(hexes), n_boundary))
        return max_solutions is None or total.solutions < max_solutions

    going = deliver([s.hexes for s in plan.shallow_solutions])
    if going and plan.subproblems:
        collect = sink is not None
        if n_threads == 1 or len(plan.subproblems) == 1:
            _run_inline(plan, collect, total, deliver, max_solutions)
        else:
            _run_pool(plan, n_threads, collect, total, deliver, max_solutions)

    total.elapsed_ms = int((time.monotonic() - start) * 1000) + plan.split_stats.elapsed_ms
    return total


def _absorb(total, result, collect, deliver, max_solutions):
    """Fold one worker result into the totals; False once max_solutions is reached."""
    stats, hexes_list = result
    total.nodes += stats.nodes
    total.backtracks += stats.backtracks
    if collect:
        return deliver(hexes_list)
    total.solutions += stats.solutions
    if max_solutions is not None and total.solutions >= max_solutions:
        total.solutions = max_solutions
        return False
    return True


def _run_inline(plan, collect, total, deliver, max_solutions):
    _init_worker(plan.problem, collect)
    for sub in plan.subproblems:
        try:
            result = _run_subproblem(sub)
        except HexMeshError:
            raise
        except Exception as e:
            raise WorkerFailure(f"Subproblem {sub.prefix} failed: {e!r}") from e
        if not _absorb(total, result, collect, deliver, max_solutions):
            break


def _run_pool(plan, n_threads, collect, total, deliver, max_solutions):
    with multiprocessing.Pool(n_threads, initializer=_init_worker,
                              initargs=(plan.problem, collect)) as pool:
        results = pool.imap_unordered(_run_subproblem, plan.subproblems, chunksize=1)
        try:
            for result in results:
                if not _absorb(total, result, collect, deliver, max_solutions):
                    break
        except HexMeshError:
            pool.terminate()
            raise
        except Exception as e:
            pool.terminate()
            raise WorkerFailure(f"Worker failed: {e!r}") from e


def parallel_search(boundary, limits, n_threads=1, sink=None,
                    target_per_thread=DEFAULT_TARGET_PER_THREAD, context=None,
                    symmetry_breaking=True):
    """split + run_parallel; with one thread the whole tree runs in-process."""
    if n_threads == 1:
        engine = SearchProblem(boundary, limits, context, symmetry_breaking).engine()
        return engine.run(sink)
    plan = split(boundary, limits, n_threads, target_per_thread, context, symmetry_breaking)
    return run_parallel(plan, n_threads, sink)
