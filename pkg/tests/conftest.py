import os

# Keep the module-level run store off the disk
os.environ.setdefault('HEXMESH_DB_PATH', ':memory:')

import numpy as np
import pytest

from hexmesh.combinatorics import HEX_FACETS_OUTWARD
from hexmesh.generators import gen_cube, gen_grid
from hexmesh.geometry import GeoMesh, REFERENCE_CORNERS
from hexmesh.run_store import RunStore


@pytest.fixture
def app():
    """Flask app fixture."""
    from main import create_app
    return create_app()

@pytest.fixture
def client(app):
    """Test client fixture."""
    return app.test_client()

@pytest.fixture
def store():
    """RunStore with an in-memory DB."""
    rs = RunStore(':memory:')
    yield rs
    rs.conn.close()

@pytest.fixture
def api_store(mocker, store):
    """Swap the API's module-level store for the in-memory one."""
    mocker.patch('hexmesh.api_routes.run_store', store)
    return store

@pytest.fixture
def cube_surface():
    """Boundary of the unit cube: 6 quads over 8 vertices."""
    return gen_cube().surface()

@pytest.fixture
def stack_surface():
    """Boundary of two stacked hexes: 10 quads over 12 vertices."""
    return gen_grid(1, 1, 2).surface()

@pytest.fixture
def cube_in_cube():
    """Seven hexes filling [0,3]^3 around the inner cube [1,2]^3."""
    coords = np.vstack([3 * REFERENCE_CORNERS, 1 + REFERENCE_CORNERS])
    hexes = [tuple(reversed(f)) + tuple(v + 8 for v in reversed(f)) for f in HEX_FACETS_OUTWARD]
    hexes.append(tuple(range(8, 16)))
    flags = np.array([True] * 8 + [False] * 8)
    return GeoMesh(np.array(hexes), coords, flags)

@pytest.fixture
def grid_mesh():
    """A 2x2x2 block of unit hexes with one interior vertex."""
    return gen_grid(2, 2, 2).geo_mesh()

@pytest.fixture
def msh_text():
    """Gmsh 2.2 ASCII file with one unit hexahedron, a quad element and an unused node."""
    return """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
9
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
5 0 0 1
6 1 0 1
7 1 1 1
8 0 1 1
9 5 5 5
$EndNodes
$Elements
2
1 3 2 0 1 1 2 3 4
2 5 2 0 1 1 2 3 4 5 6 7 8
$EndElements
"""
