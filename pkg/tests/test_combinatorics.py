import itertools
import random

import pytest

from hexmesh.combinatorics import (
    HEX_EDGES, HEX_INTERIOR_DIAGONALS, PAIR_ROLES, EDGE, FACET_DIAGONAL, INTERIOR_DIAGONAL,
    HexComplex, QuadSurface, boundary_of, canonical_solution, canonicalize_hex, canonicalize_quad,
    cube_automorphisms, hex_facets, is_compatible, orientation_preserving_automorphisms,
    same_cyclic_orientation,
)
from hexmesh.errors import InputError, InvalidComplexError, InvalidFacetError, InvalidHexError

CUBE = tuple(range(8))


class TestCanonicalizeQuad:
    """Test quad canonical forms."""

    def test_rotation(self):
        """Test a cyclic rotation collapses to the smallest form."""
        assert canonicalize_quad(3, 0, 1, 2) == (0, 1, 2, 3)

    def test_reflection(self):
        """Test a reversed cycle collapses to the same form."""
        assert canonicalize_quad(0, 3, 2, 1) == (0, 1, 2, 3)

    def test_min_over_dihedral_images(self):
        """Test the result is the minimum over all 8 reorderings."""
        assert canonicalize_quad(5, 9, 2, 7) == (2, 7, 5, 9)

    def test_diagonals_preserved(self):
        """Test the diagonal pairs survive canonicalization."""
        q = canonicalize_quad(5, 9, 2, 7)
        assert {frozenset((q[0], q[2])), frozenset((q[1], q[3]))} == {frozenset((5, 2)), frozenset((9, 7))}

    def test_idempotent(self):
        """Test canonicalizing twice changes nothing."""
        rng = random.Random(3)
        for _ in range(50):
            q = canonicalize_quad(*rng.sample(range(20), 4))
            assert canonicalize_quad(*q) == q

    def test_duplicate_labels(self):
        """Test repeated labels are rejected."""
        with pytest.raises(InvalidFacetError):
            canonicalize_quad(0, 1, 1, 2)


class TestCanonicalizeHex:
    """Test hex canonical forms and the automorphism group."""

    def test_group_sizes(self):
        """Test the cube has 48 automorphisms, 24 of them rotations."""
        assert len(set(cube_automorphisms())) == 48
        assert len(set(orientation_preserving_automorphisms())) == 24

    def test_identity_is_minimal(self):
        """Test the identity hex is already canonical."""
        assert canonicalize_hex(CUBE) == CUBE

    def test_top_bottom_swap(self):
        """Test swapping top and bottom facets is an automorphism."""
        assert canonicalize_hex((4, 5, 6, 7, 0, 1, 2, 3)) == CUBE

    def test_all_images_agree(self):
        """Test every automorphic image of a random hex shares one canonical form."""
        rng = random.Random(11)
        for _ in range(10):
            h = tuple(rng.sample(range(30), 8))
            forms = {canonicalize_hex(tuple(h[k] for k in p)) for p in cube_automorphisms()}
            assert len(forms) == 1

    def test_no_extra_symmetries(self):
        """Test a hex is fixed by exactly 48 vertex permutations preserving its edge set."""
        edges = {frozenset(e) for e in HEX_EDGES}
        count = sum(1 for p in itertools.permutations(range(8))
                    if all(frozenset((p[a], p[b])) in edges for a, b in HEX_EDGES))
        assert count == 48

    def test_sub_faces_preserved(self):
        """Test canonicalization keeps the facet set."""
        h = (9, 3, 7, 1, 4, 8, 2, 6)
        assert set(hex_facets(h)) == set(hex_facets(canonicalize_hex(h)))

    def test_duplicate_labels(self):
        """Test repeated labels are rejected."""
        with pytest.raises(InvalidHexError):
            canonicalize_hex((0, 1, 2, 3, 4, 5, 6, 6))

    def test_pair_roles_cover_all_pairs(self):
        """Test the 28 slot pairs split into 12 edges, 12 facet diagonals and 4 interior diagonals."""
        roles = [PAIR_ROLES[(a, b)] for a, b in itertools.combinations(range(8), 2)]
        assert roles.count(EDGE) == 12
        assert roles.count(FACET_DIAGONAL) == 12
        assert roles.count(INTERIOR_DIAGONAL) == 4
        assert (0, 6) in HEX_INTERIOR_DIAGONALS

    def test_cyclic_orientation(self):
        """Test cycle direction comparison."""
        assert same_cyclic_orientation((0, 1, 2, 3), (2, 3, 0, 1))
        assert not same_cyclic_orientation((0, 1, 2, 3), (0, 3, 2, 1))


class TestCompatibility:
    """Test pairwise hex compatibility."""

    def test_shared_facet(self):
        """Test stacked hexes are compatible."""
        assert is_compatible(CUBE, (4, 5, 6, 7, 8, 9, 10, 11))

    def test_identical(self):
        """Test a hex is not compatible with itself."""
        assert not is_compatible(CUBE, CUBE)

    def test_facet_diagonal_as_edge(self):
        """Test sharing a facet diagonal of one hex that is an edge of the other fails."""
        other = (0, 2, 8, 9, 10, 11, 12, 13)
        assert not is_compatible(CUBE, other)

    def test_shared_edge_and_vertex(self):
        """Test sharing one edge or one vertex is fine."""
        assert is_compatible(CUBE, (0, 1, 8, 9, 10, 11, 12, 13))
        assert is_compatible(CUBE, (0, 8, 9, 10, 11, 12, 13, 14))
        assert is_compatible(CUBE, tuple(range(10, 18)))

    def test_three_shared_vertices(self):
        """Test three shared vertices never form a face."""
        assert not is_compatible(CUBE, (0, 1, 2, 8, 9, 10, 11, 12))

    def test_four_vertices_not_a_facet(self):
        """Test four shared vertices must be a facet of both."""
        assert not is_compatible(CUBE, (0, 1, 6, 7, 8, 9, 10, 11))

    def test_symmetric(self):
        """Test compatibility does not depend on argument order."""
        rng = random.Random(5)
        for _ in range(200):
            a = tuple(rng.sample(range(12), 8))
            b = tuple(rng.sample(range(12), 8))
            assert is_compatible(a, b) == is_compatible(b, a)


class TestComplexAndBoundary:
    """Test HexComplex bookkeeping and boundary extraction."""

    def test_single_hex_boundary(self):
        """Test a single hex's boundary is its 6 facets."""
        H = HexComplex([CUBE])
        assert boundary_of(H).quads == frozenset(hex_facets(CUBE))

    def test_stacked_boundary(self):
        """Test two stacked hexes expose 10 facets."""
        H = HexComplex([CUBE, (4, 5, 6, 7, 8, 9, 10, 11)])
        assert len(boundary_of(H)) == 10
        assert canonicalize_quad(4, 5, 6, 7) not in boundary_of(H).quads

    def test_empty_boundary(self):
        """Test the empty complex has an empty boundary."""
        assert len(boundary_of(HexComplex())) == 0

    def test_use_counts_sum(self):
        """Test facet use counts add up to six per hex."""
        H = HexComplex([CUBE, (4, 5, 6, 7, 8, 9, 10, 11)])
        assert sum(H.quad_use_count.values()) == 12

    def test_incompatible_push(self):
        """Test an incompatible hex is refused."""
        H = HexComplex([CUBE])
        with pytest.raises(InvalidComplexError):
            H.push((0, 1, 2, 8, 9, 10, 11, 12))

    def test_third_use_rejected(self):
        """Test a facet cannot be used three times even without compatibility checks."""
        H = HexComplex([CUBE, (4, 5, 6, 7, 8, 9, 10, 11)], check=False)
        with pytest.raises(InvalidComplexError):
            H.push((4, 5, 6, 7, 12, 13, 14, 15), check=False)

    def test_pop_restores_counts(self):
        """Test pop undoes push."""
        H = HexComplex([CUBE])
        before = dict(H.quad_use_count)
        H.push((4, 5, 6, 7, 8, 9, 10, 11))
        H.pop()
        assert H.quad_use_count == before


class TestQuadSurface:
    """Test boundary surface validation."""

    def test_cube_surface_valid(self, cube_surface):
        """Test the cube boundary passes."""
        assert cube_surface.validate() is cube_surface
        assert cube_surface.n_vertices == 8

    def test_odd_quad_count(self):
        """Test an odd number of quads is rejected."""
        with pytest.raises(InputError, match="even"):
            QuadSurface([(0, 1, 2, 3)]).validate()

    def test_open_surface(self):
        """Test an open surface is rejected."""
        with pytest.raises(InputError, match="closed"):
            QuadSurface([(0, 1, 2, 3), (0, 1, 5, 4)]).validate()

    def test_sparse_labels(self):
        """Test labels must be exactly 0..n_b-1."""
        quads = [tuple(v + 1 for v in q) for q in hex_facets(CUBE)]
        with pytest.raises(InputError, match="labels"):
            QuadSurface(quads).validate()


class TestCanonicalSolution:
    """Test the relabelling-invariant solution key."""

    def test_interior_relabelling(self):
        """Test two meshes that differ by interior labels share a key."""
        a = [(0, 1, 2, 3, 8, 9, 10, 11)]
        b = [(0, 1, 2, 3, 9, 8, 11, 10)]
        assert canonical_solution(a, 8) == canonical_solution(b, 8)

    def test_boundary_labels_matter(self):
        """Test boundary labels are not permuted."""
        a = [(0, 1, 2, 3, 4, 5, 6, 7)]
        b = [(0, 1, 2, 3, 5, 4, 7, 6)]
        assert canonical_solution(a, 8) != canonical_solution(b, 8)

    @staticmethod
    def _shuffled(hexes, n_boundary, n_vertices, rng):
        """The same mesh with interior labels permuted, hexes reordered and each hex rewritten by a cube symmetry."""
        interior = list(range(n_boundary, n_vertices))
        targets = interior[:]
        rng.shuffle(targets)
        perm = dict(zip(interior, targets))
        autos = cube_automorphisms()
        out = []
        for h in hexes:
            p = rng.choice(autos)
            out.append(tuple(perm.get(h[k], h[k]) for k in p))
        rng.shuffle(out)
        return out

    def test_cube_in_cube_relabelled(self, cube_in_cube):
        """Test every interior relabelling of the seven-hex mesh gets one key."""
        hexes = [tuple(int(v) for v in h) for h in cube_in_cube.hexes]
        key = canonical_solution(hexes, 8)
        rng = random.Random(11)
        for _ in range(25):
            assert canonical_solution(self._shuffled(hexes, 8, 16, rng), 8) == key

    def test_symmetric_interior_relabelled(self):
        """Test two interior hexes whose vertices refinement cannot tell apart still get one key."""
        hexes = [tuple(range(8, 16)), (12, 13, 14, 15, 16, 17, 18, 19)]
        key = canonical_solution(hexes, 8)
        rng = random.Random(5)
        for _ in range(25):
            assert canonical_solution(self._shuffled(hexes, 8, 20, rng), 8) == key

    def test_key_is_a_relabelling(self, cube_in_cube):
        """Test the key keeps boundary labels and packs interior labels from n_boundary."""
        hexes = [tuple(int(v) for v in h) for h in cube_in_cube.hexes]
        key = canonical_solution(hexes, 8)
        assert sorted({v for h in key for v in h}) == list(range(16))
        assert boundary_of(HexComplex(key)).quads == boundary_of(HexComplex(hexes)).quads

    def test_different_meshes_differ(self, cube_in_cube):
        """Test dropping different hexes gives different keys."""
        hexes = [tuple(int(v) for v in h) for h in cube_in_cube.hexes]
        keys = {canonical_solution(hexes[:k] + hexes[k + 1:], 8) for k in range(7)}
        assert len(keys) == 7
        assert canonical_solution([CUBE], 8) != canonical_solution(hexes, 8)
