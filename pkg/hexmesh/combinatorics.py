"""
Combinatorial quads and hexahedra.

Vertices are small non-negative integers. A hexahedron is an 8-tuple in the
corner convention: (v0, v1, v2, v3) is a facet in cyclic order and v4+i is
joined to vi by an edge. Quads and hexes are plain tuples so they hash
cheaply; the canonical forms below make them order-independent.
"""
import itertools
from collections import Counter
from functools import lru_cache

from hexmesh.errors import InvalidComplexError, InvalidFacetError, InvalidHexError, InputError

# --- Corner convention tables (slot indices) ---
HEX_EDGES = (
    (0, 1), (1, 2), (2, 3), (3, 0),
    (4, 5), (5, 6), (6, 7), (7, 4),
    (0, 4), (1, 5), (2, 6), (3, 7),
)
HEX_FACETS = (
    (0, 1, 2, 3), (4, 5, 6, 7),
    (0, 1, 5, 4), (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7),
)
# Outward-oriented facets for a positively oriented hex
HEX_FACETS_OUTWARD = (
    (0, 3, 2, 1), (4, 5, 6, 7),
    (0, 1, 5, 4), (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7),
)
HEX_FACET_DIAGONALS = tuple(
    pair for (a, b, c, d) in HEX_FACETS for pair in ((a, c), (b, d))
)
HEX_INTERIOR_DIAGONALS = ((0, 6), (1, 7), (2, 4), (3, 5))

EDGE, FACET_DIAGONAL, INTERIOR_DIAGONAL = 0, 1, 2


def _build_pair_roles():
    roles = {}
    for a, b in HEX_EDGES:
        roles[(a, b)] = roles[(b, a)] = EDGE
    for a, b in HEX_FACET_DIAGONALS:
        roles[(a, b)] = roles[(b, a)] = FACET_DIAGONAL
    for a, b in HEX_INTERIOR_DIAGONALS:
        roles[(a, b)] = roles[(b, a)] = INTERIOR_DIAGONAL
    return roles


# Every one of the 28 slot pairs has exactly one role
PAIR_ROLES = _build_pair_roles()


@lru_cache(maxsize=None)
def cube_automorphisms():
    """The 48 slot permutations that map the cube's edge set onto itself."""
    edges = {frozenset(e) for e in HEX_EDGES}
    perms = []
    for p in itertools.permutations(range(8)):
        if all(frozenset((p[a], p[b])) in edges for a, b in HEX_EDGES):
            perms.append(p)
    return tuple(perms)


@lru_cache(maxsize=None)
def orientation_preserving_automorphisms():
    """The 24 rotations: automorphisms that keep the outward facet orientation."""
    outward = {_cyclic_key(f) for f in HEX_FACETS_OUTWARD}
    rotations = []
    for p in cube_automorphisms():
        if all(_cyclic_key(tuple(p[k] for k in f)) in outward for f in HEX_FACETS_OUTWARD):
            rotations.append(p)
    return tuple(rotations)


def _cyclic_key(seq):
    """Key of a cyclic sequence up to rotation only (orientation kept)."""
    n = len(seq)
    return min(tuple(seq[(i + k) % n] for k in range(n)) for i in range(n))


def same_cyclic_orientation(a, b):
    """True when two 4-cycles over the same labels run the same way."""
    return _cyclic_key(a) == _cyclic_key(b)


# Entries kept by each canonical-form memo
_CACHE_SIZE = 1 << 16


@lru_cache(maxsize=_CACHE_SIZE)
def canonicalize_quad(a, b, c, d):
    """Smallest of the 8 dihedral reorderings of a quad."""
    v = (int(a), int(b), int(c), int(d))
    if len(set(v)) != 4:
        raise InvalidFacetError(f"Quad {v} has repeated vertices")
    a, b, c, d = v
    rotations = (v, (b, c, d, a), (c, d, a, b), (d, a, b, c))
    reflections = tuple(r[::-1] for r in rotations)
    return min(rotations + reflections)


def canonicalize_hex(v):
    """Smallest image of an 8-tuple under the 48 cube automorphisms."""
    return _canonical_hex(tuple(v))


@lru_cache(maxsize=_CACHE_SIZE)
def _canonical_hex(v):
    v = tuple(int(x) for x in v)
    if len(v) != 8 or len(set(v)) != 8:
        raise InvalidHexError(f"Hex {v} must have 8 distinct vertices")
    return min(tuple(v[k] for k in p) for p in cube_automorphisms())


def hex_facets(h):
    return _hex_facets(tuple(h))


@lru_cache(maxsize=_CACHE_SIZE)
def _hex_facets(h):
    return tuple(canonicalize_quad(*(h[k] for k in f)) for f in HEX_FACETS)


def hex_edges(h):
    return _hex_edges(tuple(h))


@lru_cache(maxsize=_CACHE_SIZE)
def _hex_edges(h):
    return tuple(_pair(h[a], h[b]) for a, b in HEX_EDGES)


def hex_facet_diagonals(h):
    return [_pair(h[a], h[b]) for a, b in HEX_FACET_DIAGONALS]


def hex_interior_diagonals(h):
    return _hex_interior_diagonals(tuple(h))


@lru_cache(maxsize=_CACHE_SIZE)
def _hex_interior_diagonals(h):
    return tuple(_pair(h[a], h[b]) for a, b in HEX_INTERIOR_DIAGONALS)


@lru_cache(maxsize=_CACHE_SIZE)
def quad_edges(q):
    return tuple(_pair(q[i], q[(i + 1) % 4]) for i in range(4))


@lru_cache(maxsize=_CACHE_SIZE)
def quad_diagonals(q):
    return (_pair(q[0], q[2]), _pair(q[1], q[3]))


def _pair(a, b):
    return (a, b) if a < b else (b, a)


def is_compatible(h1, h2):
    """Two hexes meet in nothing, a common vertex, a common edge or a common facet."""
    shared = set(h1) & set(h2)
    n = len(shared)
    if n <= 1:
        return True
    if n == 2:
        pair = _pair(*shared)
        return pair in hex_edges(h1) and pair in hex_edges(h2)
    if n == 4:
        facet = frozenset(shared)
        return (any(frozenset(f) == facet for f in hex_facets(h1))
                and any(frozenset(f) == facet for f in hex_facets(h2)))
    return False


class QuadSurface:
    """A closed combinatorial quad surface, the boundary handed to the search."""

    def __init__(self, quads, n_vertices=None):
        self.quads = frozenset(canonicalize_quad(*q) for q in quads)
        labels = {v for q in self.quads for v in q}
        self.n_vertices = n_vertices if n_vertices is not None else len(labels)

    def __len__(self):
        return len(self.quads)

    def __eq__(self, other):
        return isinstance(other, QuadSurface) and self.quads == other.quads

    def __hash__(self):
        return hash(self.quads)

    def __repr__(self):
        return f"QuadSurface({len(self.quads)} quads, {self.n_vertices} vertices)"

    def vertices(self):
        return sorted({v for q in self.quads for v in q})

    def validate(self):
        """Raise InputError unless the surface is closed, even and densely labelled."""
        if len(self.quads) % 2:
            raise InputError(f"Boundary has {len(self.quads)} quads; a hex mesh needs an even number")
        edge_use = Counter(e for q in self.quads for e in quad_edges(q))
        open_edges = [e for e, n in edge_use.items() if n != 2]
        if open_edges:
            raise InputError(f"Boundary is not a closed surface: edge {open_edges[0]} "
                             f"lies in {edge_use[open_edges[0]]} quads")
        labels = self.vertices()
        if labels != list(range(len(labels))):
            raise InputError("Boundary vertex labels must be exactly 0..n_b-1")
        if self.n_vertices != len(labels):
            raise InputError(f"Boundary declares {self.n_vertices} vertices but uses {len(labels)}")
        return self


class HexComplex:
    """Ordered hexes plus the use count of every facet; counts above 2 are rejected."""

    def __init__(self, hexes=(), check=True):
        self.hexes = []
        self.quad_use_count = {}
        for h in hexes:
            self.push(h, check=check)

    def __len__(self):
        return len(self.hexes)

    def __iter__(self):
        return iter(self.hexes)

    def push(self, h, check=True):
        h = canonicalize_hex(h)
        if check:
            for other in self.hexes:
                if not is_compatible(h, other):
                    raise InvalidComplexError(f"Hex {h} is incompatible with {other}")
        facets = hex_facets(h)
        for f in facets:
            if self.quad_use_count.get(f, 0) >= 2:
                raise InvalidComplexError(f"Facet {f} would be used by three hexes")
        for f in facets:
            self.quad_use_count[f] = self.quad_use_count.get(f, 0) + 1
        self.hexes.append(h)
        return h

    def pop(self):
        h = self.hexes.pop()
        for f in hex_facets(h):
            n = self.quad_use_count[f] - 1
            if n:
                self.quad_use_count[f] = n
            else:
                del self.quad_use_count[f]
        return h

    def vertices(self):
        return sorted({v for h in self.hexes for v in h})


def boundary_of(H):
    """Facets used by exactly one hex."""
    quads = []
    for f, n in H.quad_use_count.items():
        if n > 2:
            raise InvalidComplexError(f"Facet {f} is used by {n} hexes")
        if n == 1:
            quads.append(f)
    return QuadSurface(quads)


def canonical_solution(hexes, n_boundary):
    """
    Relabelling-invariant key of a mesh. Boundary labels (< n_boundary) stay
    put; interior vertices are coloured by how they sit among their hexes,
    ties are split one vertex at a time, and the key is the smallest sorted
    tuple of canonical hexes over every labelling the splitting reaches.
    Two meshes get the same key exactly when they differ by interior labels.
    """
    hexes = [canonicalize_hex(h) for h in hexes]
    incident = {}
    for h in hexes:
        for slot, v in enumerate(h):
            if v >= n_boundary:
                incident.setdefault(v, []).append((h, slot))
    if not incident:
        return tuple(sorted(hexes))
    colours = _refine_colours(incident, dict.fromkeys(incident, 0), n_boundary)
    return _smallest_labelling(hexes, incident, colours, n_boundary)


def _rank(keys):
    """Dense ranks of the values of `keys`, in sorted order of those values."""
    order = {k: r for r, k in enumerate(sorted(set(keys.values())))}
    return {v: order[k] for v, k in keys.items()}


def _refine_colours(incident, colours, n_boundary):
    """Split interior colour classes by the roles and colours around each vertex until stable."""
    while True:
        def colour(u):
            return u if u < n_boundary else n_boundary + colours[u]

        signatures = {}
        for v, uses in incident.items():
            views = sorted(
                tuple(sorted((PAIR_ROLES[(slot, k)], colour(h[k])) for k in range(8) if k != slot))
                for h, slot in uses
            )
            signatures[v] = (colours[v], tuple(views))
        refined = _rank(signatures)
        if len(set(refined.values())) == len(set(colours.values())):
            return refined
        colours = refined


def _smallest_labelling(hexes, incident, colours, n_boundary):
    classes = {}
    for v, c in colours.items():
        classes.setdefault(c, []).append(v)
    tied = [c for c in sorted(classes) if len(classes[c]) > 1]
    if not tied:
        mapping = {v: n_boundary + c for v, c in colours.items()}
        return tuple(sorted(canonicalize_hex([mapping.get(u, u) for u in h]) for h in hexes))

    best = None
    for chosen in classes[tied[0]]:
        split = _rank({u: (c, 0 if u == chosen or c != tied[0] else 1) for u, c in colours.items()})
        key = _smallest_labelling(hexes, incident, _refine_colours(incident, split, n_boundary), n_boundary)
        if best is None or key < best:
            best = key
    return best
