"""
Built-in boundaries and meshes: the unit cube, structured grids, Schneiders'
pyramid and the octagonal spindle. Output is deterministic.
"""
import itertools

import numpy as np

from hexmesh.combinatorics import HEX_FACETS_OUTWARD, canonicalize_quad
from hexmesh.geometry import REFERENCE_CORNERS
from hexmesh.hexm_io import HexmFile

DEFAULT_RING_HEIGHT = 0.25
DEFAULT_APEX_HEIGHT = 1.0


def _outward_boundary(hexes):
    """Facets of the hexes used once, in their outward orientation."""
    seen = {}
    for h in hexes:
        for f in HEX_FACETS_OUTWARD:
            face = tuple(h[k] for k in f)
            q = canonicalize_quad(*face)
            if q in seen:
                seen[q] = None
            else:
                seen[q] = face
    return sorted(face for face in seen.values() if face is not None)


def gen_cube():
    """One unit hex labelled in the corner convention."""
    hexes = [tuple(range(8))]
    return HexmFile(REFERENCE_CORNERS.copy(), np.ones(8, dtype=bool), _outward_boundary(hexes), hexes)


def gen_grid(a, b, c):
    """
    An a x b x c block of unit hexes. Boundary vertices come first so the
    quads section is a densely labelled boundary.
    """
    if min(a, b, c) < 1:
        raise ValueError("Grid dimensions must be at least 1")
    points = [(i, j, k) for k in range(c + 1) for j in range(b + 1) for i in range(a + 1)]

    def on_boundary(p):
        i, j, k = p
        return i in (0, a) or j in (0, b) or k in (0, c)

    ordered = [p for p in points if on_boundary(p)] + [p for p in points if not on_boundary(p)]
    label = {p: n for n, p in enumerate(ordered)}
    hexes = []
    for k, j, i in itertools.product(range(c), range(b), range(a)):
        bottom = [(i, j, k), (i + 1, j, k), (i + 1, j + 1, k), (i, j + 1, k)]
        top = [(x, y, z + 1) for x, y, z in bottom]
        hexes.append(tuple(label[p] for p in bottom + top))
    flags = np.array([on_boundary(p) for p in ordered], dtype=bool)
    return HexmFile(np.array(ordered, dtype=float), flags, _outward_boundary(hexes), hexes)


def gen_schneiders_boundary():
    """
    Square pyramid with each triangle split into 3 quads around its centroid
    and the base into 4 around the base centre: 18 vertices, 16 quads.

    Labels: 0-3 base corners, 4 apex, 5-8 base edge midpoints, 9-12 lateral
    edge midpoints, 13-16 triangle centroids, 17 base centre.
    """
    corners = np.array([[-1, -1, 0], [1, -1, 0], [1, 1, 0], [-1, 1, 0]], dtype=float)
    apex = np.array([0.0, 0.0, 1.0])
    coords = list(corners) + [apex]
    coords += [(corners[i] + corners[(i + 1) % 4]) / 2 for i in range(4)]
    coords += [(corners[i] + apex) / 2 for i in range(4)]
    coords += [(corners[i] + corners[(i + 1) % 4] + apex) / 3 for i in range(4)]
    coords.append(corners.mean(axis=0))

    base_mid = lambda i: 5 + i % 4
    lateral_mid = lambda i: 9 + i % 4
    quads = []
    for i in range(4):
        # Base quads face down, triangle quads face out
        quads.append((i, base_mid(i - 1), 17, base_mid(i)))
        a, b, centroid = i, (i + 1) % 4, 13 + i
        quads.append((a, base_mid(i), centroid, lateral_mid(a)))
        quads.append((b, lateral_mid(b), centroid, base_mid(i)))
        quads.append((4, lateral_mid(a), centroid, lateral_mid(b)))
    return HexmFile(np.array(coords), np.ones(18, dtype=bool), quads, [])


def gen_spindle_boundary(ring_height=DEFAULT_RING_HEIGHT, apex_height=DEFAULT_APEX_HEIGHT):
    """
    Tetragonal trapezohedron: an antiprismatic ring of 8 vertices (0-7)
    alternating up and down, apexes N=8 and S=9, and 8 kite quads.
    """
    # Unit octagon from a correctly rounded square root, so files match bit for bit across platforms
    s = np.sqrt(0.5)
    octagon = np.array([[1, 0], [s, s], [0, 1], [-s, s], [-1, 0], [-s, -s], [0, -1], [s, -s]])
    ring = np.column_stack([octagon, ring_height * (-1.0) ** np.arange(8)])
    coords = np.vstack([ring, [[0, 0, apex_height], [0, 0, -apex_height]]])
    north, south = 8, 9
    quads = []
    for k in range(4):
        quads.append((north, 2 * k, (2 * k + 1) % 8, (2 * k + 2) % 8))
    for k in range(4):
        quads.append((south, (2 * k + 3) % 8, (2 * k + 2) % 8, (2 * k + 1) % 8))
    return HexmFile(coords, np.ones(10, dtype=bool), quads, [])


GENERATORS = {
    "cube": gen_cube,
    "grid": gen_grid,
    "schneiders": gen_schneiders_boundary,
    "spindle": gen_spindle_boundary,
}
