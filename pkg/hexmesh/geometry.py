"""
Geometric hex meshes: trilinear Jacobian checks and interior-vertex untangling.

A hex is valid when the Jacobian determinant of its trilinear map is positive
at the 8 corners and at an s^3 grid of interior sample points. This is a
sampled check, weaker than a certified bound.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from hexmesh.combinatorics import HexComplex, boundary_of
from hexmesh.errors import InputError

logger = logging.getLogger(__name__)

# Corner convention in the parameter cube: bottom 0-3 counter-clockwise, 4+i above i
REFERENCE_CORNERS = np.array([
    [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
    [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
], dtype=float)

DEFAULT_SAMPLES = 3
DEFAULT_MAX_ITERS = 1000
RELATIVE_MARGIN = 1e-9
SOFTMIN_SHARPNESS = 20.0


@dataclass
class GeoMesh:
    hexes: np.ndarray        # K x 8 vertex labels, positively oriented
    coords: np.ndarray       # N x 3
    is_boundary: np.ndarray  # N booleans

    def __post_init__(self):
        self.hexes = np.asarray(self.hexes, dtype=np.int64).reshape(-1, 8)
        self.coords = np.asarray(self.coords, dtype=float).reshape(-1, 3)
        self.is_boundary = np.asarray(self.is_boundary, dtype=bool).reshape(-1)
        if len(self.is_boundary) != len(self.coords):
            raise InputError("Boundary flags and coordinates disagree in length")
        if len(self.hexes) and (self.hexes.min() < 0 or self.hexes.max() >= len(self.coords)):
            raise InputError("Hex references an undeclared vertex")
        if not np.all(np.isfinite(self.coords)):
            raise InputError("Coordinates must be finite")
        self._check_boundary_flags()

    def _check_boundary_flags(self):
        """A vertex of a hex is flagged boundary exactly when it lies on a facet used once."""
        if not len(self.hexes):
            return
        expected = np.zeros(len(self.coords), dtype=bool)
        expected[self.boundary_vertices()] = True
        used = np.zeros(len(self.coords), dtype=bool)
        used[self.hexes.ravel()] = True
        wrong = np.flatnonzero(used & (expected != self.is_boundary))
        if wrong.size:
            v = int(wrong[0])
            actual = "boundary" if expected[v] else "interior"
            raise InputError(f"Vertex {v} is a {actual} vertex but its boundary flag is {int(self.is_boundary[v])} "
                             f"({wrong.size} flags disagree with the facet use counts)")

    @property
    def n_hexes(self):
        return len(self.hexes)

    @property
    def n_vertices(self):
        return len(self.coords)

    def complex(self, check=False):
        return HexComplex((tuple(int(v) for v in h) for h in self.hexes), check=check)

    def boundary_quads(self):
        return boundary_of(self.complex()).quads

    def boundary_vertices(self):
        """Vertices on facets used by exactly one hex."""
        return sorted({v for q in self.boundary_quads() for v in q})

    def copy(self):
        return GeoMesh(self.hexes.copy(), self.coords.copy(), self.is_boundary.copy())


@dataclass
class ValidityReport:
    min_jacobian: float
    min_corner_jacobian: float
    invalid_hexes: list = field(default_factory=list)
    per_hex_min: np.ndarray = None

    @property
    def valid(self):
        return not self.invalid_hexes

    def summary(self):
        state = "valid" if self.valid else f"INVALID ({len(self.invalid_hexes)} hexes)"
        return (f"{state}: min corner jacobian {self.min_corner_jacobian:.6g}, "
                f"min sampled jacobian {self.min_jacobian:.6g}")


@dataclass
class UntangleResult:
    success: bool
    coords: np.ndarray
    sweeps: int
    min_jacobian: float


# --- Trilinear map ---
def sample_points(samples_per_axis=DEFAULT_SAMPLES):
    """The 8 corners followed by the cell centres of an s x s x s grid."""
    s = samples_per_axis
    if s <= 0:
        return REFERENCE_CORNERS.copy()
    axis = (np.arange(s) + 0.5) / s
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    return np.vstack([REFERENCE_CORNERS, grid])


def shape_gradients(points):
    """P x 8 x 3 derivatives of the trilinear shape functions at the points."""
    points = np.asarray(points, dtype=float)
    upper = REFERENCE_CORNERS[None, :, :] == 1
    values = np.where(upper, points[:, None, :], 1 - points[:, None, :])
    slopes = np.where(upper, 1.0, -1.0) * np.ones_like(values)
    grads = np.empty_like(values)
    grads[..., 0] = slopes[..., 0] * values[..., 1] * values[..., 2]
    grads[..., 1] = values[..., 0] * slopes[..., 1] * values[..., 2]
    grads[..., 2] = values[..., 0] * values[..., 1] * slopes[..., 2]
    return grads


def jacobians(coords, hexes, grads):
    """K x P determinants of the trilinear maps of the hexes at the sample points."""
    X = coords[np.asarray(hexes)]
    J = np.einsum("kai,paj->kpij", X, grads)
    return np.linalg.det(J)


def characteristic_length(coords, hexes):
    if len(hexes) == 0:
        return 1.0
    X = coords[np.asarray(hexes)]
    lengths = np.linalg.norm(X[:, [1, 2, 3, 0, 5, 6, 7, 4, 4, 5, 6, 7]]
                             - X[:, [0, 1, 2, 3, 4, 5, 6, 7, 0, 1, 2, 3]], axis=-1)
    mean = float(lengths.mean())
    return mean if mean > 0 else 1.0


# --- Validity ---
def validity(mesh, samples_per_axis=DEFAULT_SAMPLES):
    if mesh.n_hexes == 0:
        return ValidityReport(np.inf, np.inf, [], np.zeros(0))
    grads = shape_gradients(sample_points(samples_per_axis))
    J = jacobians(mesh.coords, mesh.hexes, grads)
    per_hex = J.min(axis=1)
    invalid = [int(k) for k in np.flatnonzero(~(per_hex > 0))]
    return ValidityReport(
        min_jacobian=float(J.min()),
        min_corner_jacobian=float(J[:, :8].min()),
        invalid_hexes=invalid,
        per_hex_min=per_hex,
    )


# --- Untangling ---
def vertex_hex_incidence(hexes, n_vertices):
    incident = [[] for _ in range(n_vertices)]
    for k, h in enumerate(np.asarray(hexes)):
        for v in h:
            incident[int(v)].append(k)
    return [np.array(ks, dtype=np.int64) for ks in incident]


def _relocate_vertex(coords, v, local_hexes, grads, scale):
    """Move one vertex to raise the soft minimum of its hexes' Jacobians; True if it moved."""
    origin = coords[v].copy()
    unit = scale ** 3

    def objective(x):
        coords[v] = x
        J = jacobians(coords, local_hexes, grads) / unit
        return logsumexp(-SOFTMIN_SHARPNESS * J.ravel()) / SOFTMIN_SHARPNESS

    before = objective(origin)
    radius = 2.0 * scale
    res = minimize(objective, origin, method="L-BFGS-B",
                   bounds=[(c - radius, c + radius) for c in origin],
                   options={"maxiter": 50})
    if np.all(np.isfinite(res.x)) and res.fun < before - 1e-12:
        coords[v] = res.x
        return True
    coords[v] = origin
    return False


def untangle(mesh, fixed=None, max_iters=DEFAULT_MAX_ITERS, samples_per_axis=DEFAULT_SAMPLES):
    """
    Relocate free vertices of invalid hexes until every sampled Jacobian is
    positive. `fixed` is a boolean mask or a list of labels (default: the
    boundary flags). The input mesh is never modified; on failure the result
    carries the original coordinates.
    """
    if fixed is None:
        fixed_mask = mesh.is_boundary.copy()
    else:
        fixed = np.asarray(fixed)
        if fixed.dtype == bool:
            fixed_mask = fixed.copy()
        else:
            fixed_mask = np.zeros(mesh.n_vertices, dtype=bool)
            fixed_mask[fixed.astype(np.int64)] = True

    coords = mesh.coords.copy()
    if mesh.n_hexes == 0:
        return UntangleResult(True, coords, 0, np.inf)

    grads = shape_gradients(sample_points(samples_per_axis))
    scale = characteristic_length(coords, mesh.hexes)
    margin = RELATIVE_MARGIN * scale ** 3
    incident = vertex_hex_incidence(mesh.hexes, mesh.n_vertices)

    sweep = 0
    worst = np.inf
    while True:
        per_hex = jacobians(coords, mesh.hexes, grads).min(axis=1)
        worst = float(per_hex.min())
        bad = np.flatnonzero(per_hex <= margin)
        if bad.size == 0:
            logger.debug(f"Untangled after {sweep} sweeps, min jacobian {worst:.3g}")
            return UntangleResult(True, coords, sweep, worst)
        free = [int(v) for v in np.unique(mesh.hexes[bad]) if not fixed_mask[v]]
        if sweep >= max_iters:
            break
        if not free:
            break
        moved = False
        for v in free:
            moved |= _relocate_vertex(coords, v, mesh.hexes[incident[v]], grads, scale)
        sweep += 1
        if not moved:
            break

    logger.debug(f"Untangling stalled after {sweep} sweeps, min jacobian {worst:.3g}")
    return UntangleResult(False, mesh.coords.copy(), sweep, worst)
