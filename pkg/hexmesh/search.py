"""
Backtracking enumeration of the hex meshes bounded by a quad surface.

Hexes are built one at a time on the smallest facet of the advancing front.
Each of the four open corners keeps a candidate bit-set; the engine branches
on the smallest set with more than one candidate. Interior vertices obey
value precedence: a hex may only introduce the next unused label, and the
new vertices of a hex are numbered in slot order when it is closed, so each
mesh is produced once up to interior relabelling.
"""
import sys
import time
from dataclasses import dataclass, replace

from hexmesh.adjacency import (
    apply_precedence, bits_of, bit, filter_candidates, init_adjacency,
    initialize_candidates, register_hex, single_value,
)
from hexmesh.combinatorics import HexComplex, canonicalize_hex, hex_facets, is_compatible
from hexmesh.errors import BudgetExceeded, InputError

# Deadline is polled every this many nodes
_DEADLINE_POLL = 512


@dataclass(frozen=True)
class SearchLimits:
    h_max: int
    v_max: int
    max_solutions: int = None
    # Absolute wall-clock time (time.time()) after which the search aborts
    deadline: float = None

    def with_budget(self, seconds):
        if seconds is None:
            return self
        return replace(self, deadline=time.time() + seconds)


@dataclass
class SearchStats:
    nodes: int = 0
    backtracks: int = 0
    solutions: int = 0
    elapsed_ms: int = 0
    workers: int = 1
    subproblems: int = 0

    def merge(self, other):
        self.nodes += other.nodes
        self.backtracks += other.backtracks
        self.solutions += other.solutions
        return self

    def summary(self):
        return (f"solutions={self.solutions} nodes={self.nodes} backtracks={self.backtracks} "
                f"time={self.elapsed_ms}ms workers={self.workers} subproblems={self.subproblems}")


@dataclass
class Solution:
    hexes: list
    n_boundary: int

    @property
    def n_vertices(self):
        return len({v for h in self.hexes for v in h})

    @property
    def n_interior(self):
        return self.n_vertices - self.n_boundary


@dataclass(frozen=True)
class SearchContext:
    """
    Hexes that surround the region being meshed and must stay compatible with
    the result. Labels below the boundary vertex count are boundary vertices;
    any other label is a vertex the search never uses.
    """
    hexes: tuple = ()


@dataclass(frozen=True)
class SearchProblem:
    """Everything a worker needs to rebuild an engine."""
    boundary: object
    limits: SearchLimits
    context: SearchContext = None
    symmetry_breaking: bool = True

    def engine(self, debug=False):
        return SearchEngine(self.boundary, self.limits, context=self.context,
                            symmetry_breaking=self.symmetry_breaking, debug=debug)


class _StopSearch(Exception):
    pass


def select_front_facet(front):
    """The lexicographically smallest canonical facet of the front."""
    if not front:
        raise ValueError("The front is empty; the partial mesh is already a solution")
    return min(front)


def pick_hex_vertex(C):
    """Slot with the fewest candidates among those still open; lowest slot wins ties."""
    best, best_size = None, None
    for i, c in enumerate(C):
        size = bin(c).count("1")
        if size > 1 and (best_size is None or size < best_size):
            best, best_size = i, size
    if best is None:
        raise ValueError("Every candidate set is a singleton; close the hex instead")
    return best


class SearchEngine:
    def __init__(self, boundary, limits, context=None, symmetry_breaking=True, debug=False):
        boundary.validate()
        if limits.h_max < 0:
            raise InputError(f"H_max must be non-negative, got {limits.h_max}")
        self.boundary = boundary
        self.limits = limits
        self.symmetry_breaking = symmetry_breaking
        self.debug = debug
        self.n_boundary = boundary.n_vertices
        self.adjacency = init_adjacency(boundary, limits.v_max)
        self.complex = HexComplex()
        self.boundary_quads = boundary.quads
        self.front = set(boundary.quads)
        self.blocked = set()
        self.next_fresh = self.n_boundary
        if context is not None:
            self._seed_context(context)
        self.stats = SearchStats()

    def _seed_context(self, context):
        for h in context.hexes:
            register_hex(self.adjacency, canonicalize_hex(h))
            for q in hex_facets(h):
                if q not in self.boundary_quads and all(0 <= v < self.n_boundary for v in q):
                    self.blocked.add(q)
        # Context is permanent for this engine
        self.adjacency.trail.clear()

    # --- Facet bookkeeping ---
    def facet_available(self, q):
        if q in self.blocked:
            return False
        used = self.complex.quad_use_count.get(q, 0)
        if q in self.boundary_quads:
            return used == 0
        return used < 2

    def _push_hex(self, h):
        facets = hex_facets(h)
        for q in facets:
            used = self.complex.quad_use_count.get(q, 0)
            if q in self.boundary_quads or used == 1:
                self.front.discard(q)
            else:
                self.front.add(q)
        self.complex.push(h, check=False)

    def _pop_hex(self):
        h = self.complex.pop()
        for q in hex_facets(h):
            used = self.complex.quad_use_count.get(q, 0)
            if q in self.boundary_quads or used == 1:
                self.front.add(q)
            else:
                self.front.discard(q)
        return h

    def _check_front(self):
        expected = {q for q in self.boundary_quads if q not in self.complex.quad_use_count}
        expected |= {q for q, n in self.complex.quad_use_count.items()
                     if n == 1 and q not in self.boundary_quads}
        assert expected == self.front, "front diverged from the facet use counts"

    # --- Driver ---
    def run(self, sink=None, prefix=(), cutoff=None):
        """
        Explore the tree. `prefix` replays branching decisions (slot, label)
        from the root; `cutoff` stops at branching nodes that deep and records
        their decision paths in self.frontier instead of exploring them.
        """
        self.stats = SearchStats()
        self.frontier = []
        self._sink = sink
        self._prefix = tuple(prefix)
        self._cutoff = cutoff
        self._path = []
        sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
        start = time.monotonic()
        try:
            self._search(None, 0)
        except _StopSearch:
            pass
        except BudgetExceeded as e:
            self.stats.elapsed_ms = int((time.monotonic() - start) * 1000)
            e.stats = self.stats
            raise
        self.stats.elapsed_ms = int((time.monotonic() - start) * 1000)
        return self.stats

    def _emit(self):
        self.stats.solutions += 1
        if self._sink is not None:
            self._sink(Solution(list(self.complex.hexes), self.n_boundary))
        if self.limits.max_solutions is not None and self.stats.solutions >= self.limits.max_solutions:
            raise _StopSearch()

    def _search(self, C, depth, fixed=None):
        stats = self.stats
        stats.nodes += 1
        if (self.limits.deadline is not None and stats.nodes % _DEADLINE_POLL == 0
                and time.time() > self.limits.deadline):
            raise BudgetExceeded("Search budget exhausted")

        if C is None:
            if self.debug:
                self._check_front()
            if not self.front:
                self._emit()
                return
            if len(self.complex) >= self.limits.h_max:
                stats.backtracks += 1
                return
            C = initialize_candidates(self.adjacency, select_front_facet(self.front))
            if self.symmetry_breaking:
                C = apply_precedence(C, self.next_fresh, self.limits.v_max)

        if self.symmetry_breaking:
            C = filter_candidates(self.adjacency, C, fresh=self.next_fresh,
                                  fresh_room=self.limits.v_max - self.next_fresh,
                                  facet_available=self.facet_available, fixed=fixed)
        else:
            C = filter_candidates(self.adjacency, C, facet_available=self.facet_available, fixed=fixed)

        if not all(C):
            stats.backtracks += 1
            return
        if not any(c & (c - 1) for c in C):
            self._close_hex(C, depth)
            return

        if depth < len(self._prefix):
            slot, value = self._prefix[depth]
            if not C[slot] & bit(value) or pick_hex_vertex(C) != slot:
                raise ValueError(f"Decision {self._prefix[depth]} does not replay at depth {depth}")
            values = [value]
        else:
            if self._cutoff is not None and depth >= self._cutoff:
                self.frontier.append(tuple(self._path))
                return
            slot = pick_hex_vertex(C)
            values = bits_of(C[slot])

        for v in values:
            child = list(C)
            child[slot] = bit(v)
            self._path.append((slot, v))
            self._search(child, depth + 1, (slot,))
            self._path.pop()

    def _close_hex(self, C, depth):
        labels = [single_value(c) for c in C]
        n_new = 0
        if self.symmetry_breaking:
            # New vertices share the fresh label until here; number them in slot order
            for k in range(8):
                if labels[k] == self.next_fresh:
                    labels[k] = self.next_fresh + n_new
                    n_new += 1
        h = canonicalize_hex(labels)
        if self.debug:
            assert all(is_compatible(h, g) for g in self.complex), f"{h} slipped through the filter"
        mark = register_hex(self.adjacency, h)
        self._push_hex(h)
        self.next_fresh += n_new
        try:
            self._search(None, depth)
        finally:
            self.next_fresh -= n_new
            self._pop_hex()
            self.adjacency.rollback(mark)


def search(boundary, limits, sink=None, context=None, symmetry_breaking=True, debug=False):
    """Enumerate every mesh of the boundary within the limits; returns SearchStats."""
    engine = SearchEngine(boundary, limits, context=context,
                          symmetry_breaking=symmetry_breaking, debug=debug)
    return engine.run(sink)


def collect_solutions(boundary, limits, **kwargs):
    """Convenience wrapper returning (solutions, stats)."""
    solutions = []
    stats = search(boundary, limits, sink=solutions.append, **kwargs)
    return solutions, stats
