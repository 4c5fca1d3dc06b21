import os
from collections import Counter

import numpy as np
import pytest

from hexmesh.generators import GENERATORS, gen_cube, gen_grid, gen_schneiders_boundary, gen_spindle_boundary
from hexmesh.geometry import validity
from hexmesh.hexm_io import format_hexm

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "data")


def directed_edges(quads):
    return Counter((q[i], q[(i + 1) % 4]) for q in quads for i in range(4))


def assert_consistently_oriented(quads):
    """Every edge is walked once in each direction."""
    edges = directed_edges(quads)
    assert all(n == 1 for n in edges.values())
    assert all((b, a) in edges for a, b in edges)


class TestCube:
    """Test the unit cube generator."""

    def test_counts(self):
        """Test the cube has 6 quads on 8 boundary vertices."""
        hf = gen_cube()
        assert hf.n_vertices == 8
        assert len(hf.quads) == 6
        assert hf.hexes == [tuple(range(8))]
        hf.surface().validate()

    def test_valid_and_oriented(self):
        """Test the cube is a valid mesh with an oriented boundary."""
        hf = gen_cube()
        assert validity(hf.geo_mesh()).valid
        assert_consistently_oriented(hf.quads)

    def test_header_lines(self):
        """Test the written cube starts with its vertex block."""
        lines = format_hexm(gen_cube()).splitlines()
        assert lines[:4] == ["hexm 1", "vertices 8", "0 0 0 1", "1 0 0 1"]


class TestGrid:
    """Test structured grids."""

    def test_row_of_two(self):
        """Test a 2x1x1 grid has 2 hexes and 12 boundary vertices."""
        hf = gen_grid(2, 1, 1)
        assert len(hf.hexes) == 2
        assert hf.n_vertices == 12
        assert hf.boundary_flags.all()
        assert len(hf.quads) == 10

    def test_boundary_first(self):
        """Test boundary vertices come before interior ones."""
        hf = gen_grid(2, 2, 2)
        assert hf.n_vertices == 27
        assert list(hf.boundary_flags) == [True] * 26 + [False]
        assert np.array_equal(hf.coords[26], [1, 1, 1])
        hf.surface().validate()

    def test_valid_and_oriented(self):
        """Test grids are valid meshes with oriented boundaries."""
        hf = gen_grid(3, 2, 1)
        assert validity(hf.geo_mesh()).valid
        assert_consistently_oriented(hf.quads)

    def test_bad_dimensions(self):
        """Test empty grids are refused."""
        with pytest.raises(ValueError):
            gen_grid(0, 1, 1)


class TestClassicBoundaries:
    """Test Schneiders' pyramid and the spindle."""

    def test_schneiders_counts(self):
        """Test the pyramid boundary has 16 quads on 18 vertices."""
        hf = gen_schneiders_boundary()
        assert hf.n_vertices == 18
        assert len(hf.quads) == 16
        assert hf.hexes == []
        hf.surface().validate()

    def test_schneiders_geometry(self):
        """Test the apex and base centre positions."""
        hf = gen_schneiders_boundary()
        assert np.array_equal(hf.coords[4], [0, 0, 1])
        assert np.array_equal(hf.coords[17], [0, 0, 0])

    def test_schneiders_oriented(self):
        """Test the pyramid's quads are consistently oriented."""
        assert_consistently_oriented(gen_schneiders_boundary().quads)

    def test_spindle_counts(self):
        """Test the spindle has 8 quads on 10 vertices."""
        hf = gen_spindle_boundary()
        assert hf.n_vertices == 10
        assert len(hf.quads) == 8
        hf.surface().validate()
        assert_consistently_oriented(hf.quads)

    def test_spindle_apexes(self):
        """Test each apex lies in four quads and the surface is a sphere."""
        hf = gen_spindle_boundary()
        use = Counter(v for q in hf.quads for v in q)
        assert use[8] == 4
        assert use[9] == 4
        n_edges = len({frozenset(e) for e in directed_edges(hf.quads)})
        assert hf.n_vertices - n_edges + len(hf.quads) == 2

    def test_spindle_ring_height(self):
        """Test the ring alternates up and down by the requested height."""
        hf = gen_spindle_boundary(ring_height=0.5)
        assert np.allclose(hf.coords[:8, 2], [0.5, -0.5] * 4)


class TestDeterminism:
    """Test generators always produce the same files."""

    @pytest.mark.parametrize("name,args", [
        ("cube", ()), ("grid", (2, 1, 3)), ("schneiders", ()), ("spindle", ()),
    ])
    def test_same_output(self, name, args):
        """Test two calls write identical text."""
        gen = GENERATORS[name]
        assert format_hexm(gen(*args)) == format_hexm(gen(*args))

    @pytest.mark.parametrize("name", ["schneiders", "spindle"])
    def test_matches_golden_file(self, name):
        """Test the default boundary is byte-identical to the stored file."""
        with open(os.path.join(GOLDEN_DIR, f"{name}.hexm")) as f:
            assert format_hexm(GENERATORS[name]()) == f.read()
