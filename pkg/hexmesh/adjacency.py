"""
Per-vertex adjacency bit-sets and candidate filtering.

Bit-sets are Python ints: bit u of known_neighbors[v] is set when (u, v) is an
edge of the boundary or of a registered hex. Every mutation is written to an
undo trail so the search can roll back to a mark in O(changes).
"""
from hexmesh.combinatorics import (
    HEX_FACETS, PAIR_ROLES,
    canonicalize_quad, hex_facets, hex_interior_diagonals,
    quad_diagonals, quad_edges,
)
from hexmesh.errors import CapacityError

BITSET_CAPACITY = 1024

# Family indices used in trail records
ALLOWED, NEIGHBORS, DIAGONALS, QUAD_DIAGONALS = range(4)
_PAIR_RECORD = 4

# Per slot, the (other slot, pair role) entries a fixed label constrains;
# pairs inside the base facet are fixed by construction
_SLOT_PEERS = tuple(
    tuple((t, PAIR_ROLES[(s, t)]) for t in range(8) if t != s and not (s < 4 and t < 4))
    for s in range(8)
)
# Every facet diagonal with the crossing diagonal of the same facet
_CROSSING_DIAGONALS = tuple(
    pair for (a, b, c, d) in HEX_FACETS for pair in (((a, c), (b, d)), ((b, d), (a, c)))
)


def bit(v):
    return 1 << v


def bits_of(mask):
    """Labels set in a bit-set, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def single_value(mask):
    return mask.bit_length() - 1


class AdjacencyState:
    """Allowed-Neighbors / Known-Neighbors / Known-Diagonals plus quad diagonals, with undo."""

    def __init__(self, capacity):
        if capacity < 0 or capacity > BITSET_CAPACITY:
            raise CapacityError(f"{capacity} vertices exceed the bit-set capacity of {BITSET_CAPACITY}")
        self.capacity = capacity
        self.full_mask = (1 << capacity) - 1
        self.allowed_neighbors = [self.full_mask & ~bit(v) for v in range(capacity)]
        self.known_neighbors = [0] * capacity
        self.known_diagonals = [0] * capacity
        self.quad_diagonals = [0] * capacity
        # (u, v) -> the other diagonal of the quad that has (u, v) as a diagonal
        self.quad_diagonal_pairs = {}
        self.trail = []
        self._families = (self.allowed_neighbors, self.known_neighbors,
                          self.known_diagonals, self.quad_diagonals)

    # --- Trail ---
    def mark(self):
        return len(self.trail)

    def rollback(self, mark):
        trail = self.trail
        while len(trail) > mark:
            family, key, old = trail.pop()
            if family == _PAIR_RECORD:
                del self.quad_diagonal_pairs[key]
            else:
                self._families[family][key] = old

    def _update(self, family, v, value):
        values = self._families[family]
        old = values[v]
        if old != value:
            self.trail.append((family, v, old))
            values[v] = value

    def _in_range(self, u, v):
        return 0 <= u < self.capacity and 0 <= v < self.capacity

    # --- Mutations ---
    def add_edge(self, u, v):
        if not self._in_range(u, v):
            return
        self._update(NEIGHBORS, u, self.known_neighbors[u] | bit(v))
        self._update(NEIGHBORS, v, self.known_neighbors[v] | bit(u))

    def add_interior_diagonal(self, u, v):
        if not self._in_range(u, v):
            return
        self._update(DIAGONALS, u, self.known_diagonals[u] | bit(v))
        self._update(DIAGONALS, v, self.known_diagonals[v] | bit(u))
        self._forbid_edge(u, v)

    def add_quad(self, q):
        for u, v in quad_edges(q):
            self.add_edge(u, v)
        d1, d2 = quad_diagonals(q)
        for diag, partner in ((d1, d2), (d2, d1)):
            u, v = diag
            if not self._in_range(u, v):
                continue
            self._update(QUAD_DIAGONALS, u, self.quad_diagonals[u] | bit(v))
            self._update(QUAD_DIAGONALS, v, self.quad_diagonals[v] | bit(u))
            self._forbid_edge(u, v)
            if diag not in self.quad_diagonal_pairs:
                self.quad_diagonal_pairs[diag] = partner
                self.trail.append((_PAIR_RECORD, diag, None))

    def _forbid_edge(self, u, v):
        self._update(ALLOWED, u, self.allowed_neighbors[u] & ~bit(v))
        self._update(ALLOWED, v, self.allowed_neighbors[v] & ~bit(u))

    def snapshot(self):
        """Hashable copy of every family, for rollback checks."""
        return (tuple(self.allowed_neighbors), tuple(self.known_neighbors),
                tuple(self.known_diagonals), tuple(self.quad_diagonals),
                tuple(sorted(self.quad_diagonal_pairs.items())))


def init_adjacency(boundary, n_max_vertices):
    """State seeded with the boundary quads; labels up to n_max_vertices-1 are addressable."""
    if n_max_vertices < boundary.n_vertices:
        raise CapacityError(f"V_max={n_max_vertices} is below the {boundary.n_vertices} boundary vertices")
    state = AdjacencyState(n_max_vertices)
    for q in sorted(boundary.quads):
        state.add_quad(q)
    # Boundary entries are never rolled back
    state.trail.clear()
    return state


def register_hex(state, h):
    """Record the 6 facets (and so the 12 edges) and 4 interior diagonals of h; returns a rollback mark."""
    mark = state.mark()
    for q in hex_facets(h):
        state.add_quad(q)
    for u, v in hex_interior_diagonals(h):
        state.add_interior_diagonal(u, v)
    return mark


def initialize_candidates(state, base):
    """Candidate sets for a hex built on the base facet (v1..v4), as in the front-based init."""
    C = [bit(v) for v in base] + [0, 0, 0, 0]
    base_mask = 0
    for v in base:
        base_mask |= bit(v)
    for i in range(4):
        c = state.allowed_neighbors[base[i]] & ~base_mask
        for j in range(4):
            if i != j:
                vj = base[j]
                c &= ~(state.known_diagonals[vj] | state.known_neighbors[vj])
            if i == (j + 2) % 4:
                c &= ~state.quad_diagonals[base[j]]
        C[4 + i] = c
    return C


def apply_precedence(C, next_fresh, v_max):
    """Keep used labels and at most the single unused label next_fresh."""
    top = min(next_fresh + 1, v_max)
    mask = (1 << top) - 1 if top > 0 else 0
    return [c & mask for c in C]


def filter_candidates(state, C, fresh=None, fresh_room=4, facet_available=None, fixed=None):
    """
    Remove candidates whose edges, diagonals or facets clash with the
    registered mesh or the singleton slots, until nothing changes. A label
    equal to `fresh` stands for a new vertex: several slots may hold it at
    once (they become distinct vertices when the hex is closed), at most
    `fresh_room` of them.

    `fixed` names the slots that became singletons since C was last
    filtered against the same state; by default every singleton is
    propagated. Returns the filtered list; an empty slot means a dead end.
    """
    C = list(C)
    if not all(C):
        return C
    fresh_bit = bit(fresh) if fresh is not None else 0
    allowed = state.allowed_neighbors
    neighbors = state.known_neighbors
    diagonals = state.known_diagonals
    quad_diags = state.quad_diagonals
    pairs = state.quad_diagonal_pairs

    if fixed is None:
        queue = [i for i in range(8) if C[i] & (C[i] - 1) == 0]
    else:
        queue = list(fixed)

    while True:
        # Edges must be allowed neighbours; diagonals must not be known edges or diagonals
        while queue:
            slot = queue.pop()
            c = C[slot]
            if c == fresh_bit:
                continue
            x = c.bit_length() - 1
            known = neighbors[x] | diagonals[x] | c
            # Indexed by pair role: edge, facet diagonal, interior diagonal
            masks = (allowed[x], ~known, ~(known | quad_diags[x]))
            for t, role in _SLOT_PEERS[slot]:
                old = C[t]
                new = old & masks[role]
                if new != old:
                    if not new:
                        C[t] = 0
                        return C
                    C[t] = new
                    if new & (new - 1) == 0:
                        queue.append(t)

        # Fresh-vertex budget
        if fresh_bit:
            n_fresh = C.count(fresh_bit)
            if n_fresh > fresh_room:
                C[4] = 0
                return C
            if n_fresh == fresh_room:
                for i in range(8):
                    c = C[i]
                    if c != fresh_bit and c & fresh_bit:
                        c ^= fresh_bit
                        C[i] = c
                        if c & (c - 1) == 0:
                            queue.append(i)
                if queue:
                    continue

        # A facet that contains a quad diagonal must be that quad
        changed = False
        for (p, r), (q, s) in _CROSSING_DIAGONALS:
            cp, cr = C[p], C[r]
            p_fixed = cp & (cp - 1) == 0
            r_fixed = cr & (cr - 1) == 0
            if p_fixed and r_fixed:
                partner = None
                if cp != fresh_bit and cr != fresh_bit:
                    xp, xr = cp.bit_length() - 1, cr.bit_length() - 1
                    partner = pairs.get((xp, xr) if xp < xr else (xr, xp))
                if partner is not None:
                    m = 0
                    for u in partner:
                        if u >= 0:
                            m |= bit(u)
                    cuts = ((q, m), (s, m))
                else:
                    # (p, r) is no quad diagonal, so (q, s) may not be one either
                    cuts = []
                    for held, other in ((q, s), (s, q)):
                        ch = C[held]
                        if ch & (ch - 1) == 0 and ch != fresh_bit:
                            cuts.append((other, ~quad_diags[ch.bit_length() - 1]))
            elif p_fixed or r_fixed:
                held, other = (p, r) if p_fixed else (r, p)
                ch = C[held]
                if ch == fresh_bit:
                    continue
                x = ch.bit_length() - 1
                cq, cs = C[q], C[s]
                m = ~0
                for z in bits_of(C[other] & quad_diags[x]):
                    u, w = pairs[(x, z) if x < z else (z, x)]
                    if not (u >= 0 and w >= 0 and (
                            (cq >> u & 1 and cs >> w & 1) or (cq >> w & 1 and cs >> u & 1))):
                        m &= ~bit(z)
                cuts = ((other, m),)
            else:
                continue
            for t, m in cuts:
                old = C[t]
                new = old & m
                if new != old:
                    if not new:
                        C[t] = 0
                        return C
                    C[t] = new
                    changed = True
                    if new & (new - 1) == 0:
                        queue.append(t)
        if changed:
            continue

        # A fully fixed facet needs room for one more hex; the base is the front facet
        if facet_available is not None:
            for f in HEX_FACETS[1:]:
                cells = [C[k] for k in f]
                if fresh_bit in cells or any(c & (c - 1) for c in cells):
                    continue
                if not facet_available(canonicalize_quad(*(c.bit_length() - 1 for c in cells))):
                    C[f[0]] = 0
                    return C
        return C
