"""
Hex mesh simplification by cavity remeshing.

Each iteration grows a random facet-connected cavity, searches for a smaller
mesh of its boundary that stays compatible with the hexes around it, embeds
the replacement and untangles the new vertices. A replacement is kept only
when untangling succeeds; otherwise the mesh is left exactly as it was.
"""
import logging
import random
import time
from dataclasses import dataclass, field

import numpy as np

from hexmesh.combinatorics import (
    HEX_FACETS_OUTWARD, HexComplex, QuadSurface, boundary_of, canonicalize_quad,
    hex_facets, same_cyclic_orientation,
)
from hexmesh.errors import BudgetExceeded, InputError, InvalidComplexError, NoCavityFound
from hexmesh.geometry import GeoMesh, untangle, validity
from hexmesh.logging_utils import add_log_entry, log_performance
from hexmesh.parallel import DEFAULT_TARGET_PER_THREAD, parallel_search
from hexmesh.search import SearchContext, SearchLimits

MIN_INTERIOR_VERTICES = 4
PLACEMENTS = ("centroid", "neighbors")

# Reflection through the mid-plane: swaps the bottom and top facets
_MIRROR = (4, 5, 6, 7, 0, 1, 2, 3)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cavity:
    hexes: tuple              # indices into the host mesh
    interior_vertices: tuple  # host labels used only inside the cavity
    boundary_facets: tuple    # canonical quads used by exactly one cavity hex

    @property
    def boundary_vertices(self):
        return tuple(sorted({v for q in self.boundary_facets for v in q}))

    @property
    def n_vertices(self):
        return len(self.interior_vertices) + len(self.boundary_vertices)


@dataclass
class RemeshOutcome:
    replacement: HexComplex = None
    # Host label of local boundary vertex i
    boundary_labels: tuple = ()
    hex_delta: int = 0
    interior_vertex_delta: int = 0
    stats: object = None
    budget_exceeded: bool = False


@dataclass
class SimplifyConfig:
    cavity_min: int = 6
    cavity_max: int = 18
    cavity_retries: int = 32
    cavities_per_size: int = 8
    seed: int = None
    budget_secs: float = 30.0
    total_budget_secs: float = None
    exhaustive: bool = False
    threads: int = 1
    target_per_thread: int = DEFAULT_TARGET_PER_THREAD
    samples: int = 3
    untangle_max_iters: int = 1000


@dataclass
class IterationRecord:
    """Sizes before and after one accepted cavity replacement."""
    mesh_hexes: int
    mesh_vertices: int
    cavity_hexes: int
    cavity_vertices: int
    cavity_boundary_facets: int
    new_cavity_hexes: int
    new_cavity_vertices: int
    new_mesh_hexes: int
    new_mesh_vertices: int

    def as_row(self):
        return (f"{self.mesh_hexes:>5} {self.mesh_vertices:>5} | {self.cavity_hexes:>3} "
                f"{self.cavity_vertices:>3} {self.cavity_boundary_facets:>3} | "
                f"{self.new_cavity_hexes:>3} {self.new_cavity_vertices:>3} | "
                f"{self.new_mesh_hexes:>5} {self.new_mesh_vertices:>5}")


def _hex_tuples(mesh):
    return [tuple(int(v) for v in h) for h in mesh.hexes]


def describe_cavity(mesh, indices):
    """Cavity made of the given hexes of the mesh."""
    hexes = _hex_tuples(mesh)
    indices = tuple(indices)
    complex_ = HexComplex((hexes[i] for i in indices), check=False)
    facets = boundary_of(complex_).quads
    on_boundary = {v for q in facets for v in q}
    vertices = {v for i in indices for v in hexes[i]}
    return Cavity(indices, tuple(sorted(vertices - on_boundary)), tuple(sorted(facets)))


def facet_neighbors(hexes):
    """For each hex index, the indices of the hexes sharing a facet with it."""
    owners = {}
    for k, h in enumerate(hexes):
        for q in hex_facets(h):
            owners.setdefault(q, []).append(k)
    neighbors = [set() for _ in hexes]
    for ks in owners.values():
        for a in ks:
            neighbors[a].update(b for b in ks if b != a)
    return neighbors


# --- Cavity selection ---
def select_cavity(mesh, n, seed=None, rng=None, max_retries=32):
    """
    Grow a facet-connected cavity of exactly n hexes from a random seed hex,
    reseeding until it has enough interior vertices.
    """
    hexes = _hex_tuples(mesh)
    if not 1 <= n <= len(hexes):
        raise ValueError(f"Cavity size {n} outside 1..{len(hexes)}")
    rng = rng if rng is not None else random.Random(seed)
    neighbors = facet_neighbors(hexes)

    for attempt in range(max_retries):
        cavity = [rng.randrange(len(hexes))]
        inside = set(cavity)
        while len(cavity) < n:
            options = sorted({b for a in cavity for b in neighbors[a]} - inside)
            if not options:
                break
            pick = rng.choice(options)
            cavity.append(pick)
            inside.add(pick)
        if len(cavity) != n:
            continue
        found = describe_cavity(mesh, cavity)
        if len(found.interior_vertices) >= MIN_INTERIOR_VERTICES:
            logger.debug(f"Cavity of {n} hexes after {attempt + 1} attempts")
            return found
    raise NoCavityFound(f"No cavity of {n} hexes with {MIN_INTERIOR_VERTICES} interior vertices "
                        f"after {max_retries} attempts")


# --- Cavity remeshing ---
def _local_problem(mesh, cavity):
    """Relabelled cavity boundary plus the outside hexes that touch it."""
    labels = cavity.boundary_vertices
    local = {v: i for i, v in enumerate(labels)}
    surface = QuadSurface(
        [tuple(local[v] for v in q) for q in cavity.boundary_facets], len(labels))

    in_cavity = set(cavity.hexes)
    outside_label = {}
    context = []
    for k, h in enumerate(_hex_tuples(mesh)):
        if k in in_cavity or sum(v in local for v in h) < 2:
            continue
        mapped = []
        for v in h:
            if v in local:
                mapped.append(local[v])
            else:
                mapped.append(outside_label.setdefault(v, -1 - len(outside_label)))
        context.append(tuple(mapped))
    return labels, surface, SearchContext(tuple(context))


def remesh_cavity(mesh, cavity, exhaustive=False, budget_secs=None, n_threads=1,
                  target_per_thread=DEFAULT_TARGET_PER_THREAD):
    """
    Search for a mesh of the cavity boundary with at most |cavity|-2 hexes and
    fewer interior vertices, compatible with every hex outside the cavity.
    Returns the first replacement found, or the smallest one with exhaustive.
    """
    outcome = RemeshOutcome()
    n_interior = len(cavity.interior_vertices)
    if n_interior < MIN_INTERIOR_VERTICES or len(cavity.hexes) < 3:
        logger.debug(f"Cavity with {n_interior} interior vertices rejected before search")
        return outcome

    labels, surface, context = _local_problem(mesh, cavity)
    try:
        surface.validate()
    except InputError as e:
        logger.debug(f"Cavity boundary unusable: {e}")
        return outcome

    limits = SearchLimits(h_max=len(cavity.hexes) - 2,
                          v_max=len(labels) + n_interior - 1,
                          max_solutions=1).with_budget(budget_secs)
    best = None
    try:
        while limits.h_max >= 1:
            found = []
            outcome.stats = parallel_search(surface, limits, n_threads=n_threads, sink=found.append,
                                            target_per_thread=target_per_thread, context=context)
            if not found:
                break
            best = found[0]
            if not exhaustive:
                break
            limits = SearchLimits(len(best.hexes) - 1, limits.v_max, 1, limits.deadline)
    except BudgetExceeded:
        outcome.budget_exceeded = True
        logger.info(f"Remesh budget of {budget_secs}s exhausted for a {len(cavity.hexes)}-hex cavity")

    if best is not None:
        outcome.replacement = HexComplex(best.hexes, check=False)
        outcome.boundary_labels = labels
        outcome.hex_delta = len(best.hexes) - len(cavity.hexes)
        outcome.interior_vertex_delta = best.n_interior - n_interior
    return outcome


# --- Embedding ---
def _outward_facets(h):
    return [tuple(h[k] for k in f) for f in HEX_FACETS_OUTWARD]


def orient_to_facet(h, outward):
    """h or its mirror image, whichever has `outward` as an outward facet."""
    key = frozenset(outward)
    for candidate in (tuple(h), tuple(h[k] for k in _MIRROR)):
        for f in _outward_facets(candidate):
            if frozenset(f) == key:
                if same_cyclic_orientation(f, outward):
                    return candidate
                break
    raise InvalidComplexError(f"Hex {tuple(h)} has no facet on {tuple(outward)}")


def orient_replacement(hexes, boundary_outward):
    """
    Orient new hexes so each cavity boundary facet keeps its outward direction;
    orientation then spreads through shared facets, which two neighbours see
    with opposite cycles.
    """
    required = dict(boundary_outward)
    pending = [tuple(h) for h in hexes]
    oriented = []
    while pending:
        progress = False
        for h in list(pending):
            hit = next((q for q in hex_facets(h) if q in required), None)
            if hit is None:
                continue
            o = orient_to_facet(h, required[hit])
            pending.remove(h)
            oriented.append(o)
            progress = True
            for f in _outward_facets(o):
                q = canonicalize_quad(*f)
                if q not in boundary_outward:
                    required[q] = f[::-1]
        if not progress:
            raise InvalidComplexError("Replacement hexes are not facet-connected to the cavity boundary")
    return oriented


def _placement_coords(coords, new_ids, new_hexes, boundary_ids, placement, rounds=30):
    centroid = coords[list(boundary_ids)].mean(axis=0)
    coords[new_ids] = centroid
    if placement == "centroid" or not new_ids:
        return coords
    # Averaged neighbours, starting from the centroid
    neighbors = {v: set() for v in new_ids}
    for h in new_hexes:
        for a, b in ((0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4),
                     (0, 4), (1, 5), (2, 6), (3, 7)):
            if h[a] in neighbors:
                neighbors[h[a]].add(h[b])
            if h[b] in neighbors:
                neighbors[h[b]].add(h[a])
    for _ in range(rounds):
        for v in new_ids:
            if neighbors[v]:
                coords[v] = coords[list(neighbors[v])].mean(axis=0)
    return coords


def embed_replacement(mesh, cavity, outcome, placement="centroid"):
    """New GeoMesh with the cavity swapped for the replacement; vertices are compacted."""
    nb = len(outcome.boundary_labels)
    local_hexes = list(outcome.replacement)
    new_local = sorted({v for h in local_hexes for v in h if v >= nb})

    removed = set(cavity.interior_vertices)
    keep = [v for v in range(mesh.n_vertices) if v not in removed]
    renumber = {old: i for i, old in enumerate(keep)}
    to_host = {i: renumber[host] for i, host in enumerate(outcome.boundary_labels)}
    for j, v in enumerate(new_local):
        to_host[v] = len(keep) + j

    coords = np.vstack([mesh.coords[keep], np.zeros((len(new_local), 3))])
    is_boundary = np.concatenate([mesh.is_boundary[keep], np.zeros(len(new_local), dtype=bool)])

    boundary_outward = {}
    for k in cavity.hexes:
        for f in _outward_facets([renumber[int(v)] if int(v) in renumber else -1 for v in mesh.hexes[k]]):
            if -1 in f:
                continue
            q = canonicalize_quad(*f)
            boundary_outward[q] = f
    facet_keys = {canonicalize_quad(*(renumber[v] for v in q)) for q in cavity.boundary_facets}
    boundary_outward = {q: f for q, f in boundary_outward.items() if q in facet_keys}

    new_hexes = orient_replacement([tuple(to_host[v] for v in h) for h in local_hexes],
                                   boundary_outward)
    in_cavity = set(cavity.hexes)
    kept = [tuple(renumber[int(v)] for v in h) for k, h in enumerate(mesh.hexes) if k not in in_cavity]
    hexes = kept + new_hexes

    new_ids = list(range(len(keep), len(keep) + len(new_local)))
    boundary_ids = sorted(to_host[i] for i in range(nb))
    coords = _placement_coords(coords, new_ids, new_hexes, boundary_ids, placement)
    return GeoMesh(np.array(hexes, dtype=np.int64).reshape(-1, 8), coords, is_boundary)


def try_replacement(mesh, cavity, outcome, config):
    """Embedded and untangled mesh, or None when every placement fails."""
    for placement in PLACEMENTS:
        candidate = embed_replacement(mesh, cavity, outcome, placement)
        result = untangle(candidate, max_iters=config.untangle_max_iters,
                          samples_per_axis=config.samples)
        if not result.success:
            logger.debug(f"Untangling from '{placement}' placement failed "
                         f"(min jacobian {result.min_jacobian:.3g})")
            continue
        candidate.coords = result.coords
        if validity(candidate, config.samples).valid:
            return candidate
    return None


# --- Driver ---
def simplify(mesh, config=None, history=None):
    """
    Repeatedly replace cavities by smaller meshes of their boundary. Cavity
    sizes start at cavity_min and grow by 2 after a round with no improvement.
    Accepted iterations are appended to `history` when given.
    """
    config = config or SimplifyConfig()
    report = validity(mesh, config.samples)
    if not report.valid:
        raise InputError(f"Input mesh is not valid: {report.summary()}")

    start = time.monotonic()
    rng = random.Random(config.seed)
    size = config.cavity_min
    while size <= config.cavity_max and mesh.n_hexes > 0:
        if config.total_budget_secs is not None and time.monotonic() - start > config.total_budget_secs:
            logger.info("Simplification budget exhausted")
            break
        n = min(size, mesh.n_hexes)
        improved = False
        for _ in range(config.cavities_per_size):
            try:
                cavity = select_cavity(mesh, n, rng=rng, max_retries=config.cavity_retries)
            except NoCavityFound as e:
                logger.debug(str(e))
                break
            outcome = remesh_cavity(mesh, cavity, exhaustive=config.exhaustive,
                                    budget_secs=config.budget_secs, n_threads=config.threads,
                                    target_per_thread=config.target_per_thread)
            if outcome.replacement is None:
                continue
            candidate = try_replacement(mesh, cavity, outcome, config)
            if candidate is None:
                add_log_entry(f"SIMPLIFY: replacement of {len(cavity.hexes)} hexes rolled back", "warning")
                continue
            record = IterationRecord(
                mesh.n_hexes, mesh.n_vertices,
                len(cavity.hexes), cavity.n_vertices, len(cavity.boundary_facets),
                len(outcome.replacement), len(outcome.replacement.vertices()),
                candidate.n_hexes, candidate.n_vertices)
            if history is not None:
                history.append(record)
            logger.info(f"Cavity {record.cavity_hexes} -> {record.new_cavity_hexes} hexes; "
                        f"mesh now {record.new_mesh_hexes} hexes")
            add_log_entry(f"SIMPLIFY: {record.mesh_hexes} -> {record.new_mesh_hexes} hexes", "success")
            mesh = candidate
            improved = True
            break
        if not improved:
            if n >= mesh.n_hexes:
                break
            size += 2

    log_performance("simplify", int((time.monotonic() - start) * 1000), f"{mesh.n_hexes} hexes")
    return mesh
