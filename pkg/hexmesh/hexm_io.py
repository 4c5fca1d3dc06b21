"""
Reading and writing the plain-text `hexm 1` mesh format.

    hexm 1
    vertices N
    x y z b          (N lines, b = 1 for boundary vertices)
    quads M          (optional section, boundary surface)
    a b c d
    hexes K          (optional section, corner convention)
    v0 v1 v2 v3 v4 v5 v6 v7

Coordinates are written with 17 significant digits so a write/read cycle is exact.
"""
import sys
from dataclasses import dataclass, field

import numpy as np

from hexmesh.combinatorics import HexComplex, QuadSurface, boundary_of, canonicalize_hex, canonicalize_quad
from hexmesh.errors import HexMeshError, InputError
from hexmesh.geometry import GeoMesh

HEADER = "hexm 1"
GMSH_HEXAHEDRON = 5


@dataclass
class HexmFile:
    coords: np.ndarray
    boundary_flags: np.ndarray
    quads: list = field(default_factory=list)
    hexes: list = field(default_factory=list)

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float).reshape(-1, 3)
        self.boundary_flags = np.asarray(self.boundary_flags, dtype=bool).reshape(-1)
        self.quads = [tuple(int(v) for v in q) for q in self.quads]
        self.hexes = [tuple(int(v) for v in h) for h in self.hexes]

    @property
    def n_vertices(self):
        return len(self.coords)

    def boundary_file(self):
        """This file if it has a quads section, else the boundary of its hexes relabelled 0..n_b-1."""
        if self.quads:
            return self
        if not self.hexes:
            raise InputError("File has neither quads nor hexes")
        quads = boundary_of(HexComplex(self.hexes, check=False)).quads
        labels = sorted({v for q in quads for v in q})
        local = {v: i for i, v in enumerate(labels)}
        return HexmFile(self.coords[labels], np.ones(len(labels), dtype=bool),
                        sorted(tuple(local[v] for v in q) for q in quads), [])

    def surface(self):
        bf = self.boundary_file()
        n = int(bf.boundary_flags.sum()) if bf.boundary_flags.any() else bf.n_vertices
        return QuadSurface(bf.quads, n)

    def geo_mesh(self):
        if not self.hexes:
            raise InputError("File has no hexes section")
        return GeoMesh(np.array(self.hexes, dtype=np.int64), self.coords, self.boundary_flags)

    @classmethod
    def from_geo_mesh(cls, mesh, with_quads=False):
        quads = sorted(mesh.boundary_quads()) if with_quads else []
        return cls(mesh.coords, mesh.is_boundary, quads, [tuple(h) for h in mesh.hexes])

    @classmethod
    def from_solution(cls, boundary_file, solution):
        """
        A combinatorial solution over the boundary file's vertices. Interior
        vertices have no geometry yet and sit at the boundary centroid.
        """
        nb = solution.n_boundary
        boundary_coords = boundary_file.coords[:nb]
        n_total = max([nb] + [v + 1 for h in solution.hexes for v in h])
        coords = np.zeros((n_total, 3))
        coords[:nb] = boundary_coords
        if n_total > nb:
            coords[nb:] = boundary_coords.mean(axis=0)
        flags = np.zeros(n_total, dtype=bool)
        flags[:nb] = True
        return cls(coords, flags, [], list(solution.hexes))


# --- Parsing ---
def _lines(text):
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            yield line


def _section_count(line, name):
    parts = line.split()
    if len(parts) != 2 or parts[0] != name:
        raise InputError(f"Expected '{name} <count>', got '{line}'")
    try:
        count = int(parts[1])
    except ValueError:
        raise InputError(f"Bad {name} count in '{line}'")
    if count < 0:
        raise InputError(f"Negative {name} count")
    return count


def _labels(line, size, n_vertices, what):
    parts = line.split()
    if len(parts) != size:
        raise InputError(f"A {what} needs {size} labels, got '{line}'")
    try:
        labels = tuple(int(p) for p in parts)
    except ValueError:
        raise InputError(f"Non-integer label in {what} '{line}'")
    if any(v < 0 or v >= n_vertices for v in labels):
        raise InputError(f"{what.capitalize()} '{line}' references an undeclared vertex")
    return labels


def parse_hexm(text):
    lines = list(_lines(text))
    if not lines or lines[0].split() != HEADER.split():
        raise InputError(f"Missing '{HEADER}' header")
    pos = 1
    if pos >= len(lines):
        raise InputError("Missing vertices section")
    n = _section_count(lines[pos], "vertices")
    pos += 1
    if pos + n > len(lines):
        raise InputError(f"Expected {n} vertex lines")
    coords = np.zeros((n, 3))
    flags = np.zeros(n, dtype=bool)
    for i in range(n):
        parts = lines[pos + i].split()
        if len(parts) != 4:
            raise InputError(f"Vertex line must be 'x y z b', got '{lines[pos + i]}'")
        try:
            coords[i] = [float(p) for p in parts[:3]]
            b = int(parts[3])
        except ValueError:
            raise InputError(f"Bad vertex line '{lines[pos + i]}'")
        if b not in (0, 1):
            raise InputError(f"Boundary flag must be 0 or 1, got {b}")
        flags[i] = bool(b)
    pos += n

    quads, hexes = [], []
    for name, size, target in (("quads", 4, quads), ("hexes", 8, hexes)):
        if pos < len(lines) and lines[pos].split()[0] == name:
            count = _section_count(lines[pos], name)
            pos += 1
            if pos + count > len(lines):
                raise InputError(f"Expected {count} lines in the {name} section")
            what = name[:-1] if name == "quads" else "hex"
            target.extend(_labels(lines[pos + i], size, n, what) for i in range(count))
            pos += count
    if pos != len(lines):
        raise InputError(f"Unexpected content: '{lines[pos]}'")

    try:
        for q in quads:
            canonicalize_quad(*q)
        for h in hexes:
            canonicalize_hex(h)
    except HexMeshError as e:
        raise InputError(str(e)) from e
    return HexmFile(coords, flags, quads, hexes)


def format_hexm(hf):
    out = [HEADER, f"vertices {hf.n_vertices}"]
    for (x, y, z), b in zip(hf.coords, hf.boundary_flags):
        out.append(f"{x:.17g} {y:.17g} {z:.17g} {int(b)}")
    if hf.quads:
        out.append(f"quads {len(hf.quads)}")
        out.extend(" ".join(str(v) for v in q) for q in hf.quads)
    if hf.hexes:
        out.append(f"hexes {len(hf.hexes)}")
        out.extend(" ".join(str(v) for v in h) for h in hf.hexes)
    return "\n".join(out) + "\n"


def read_hexm(path):
    """Read a HexmFile from a path; '-' reads standard input."""
    if path in (None, "-"):
        return parse_hexm(sys.stdin.read())
    try:
        with open(path) as f:
            return parse_hexm(f.read())
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}") from e


def write_hexm(hf, path):
    text = format_hexm(hf)
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w") as f:
        f.write(text)


# --- Gmsh import ---
def read_msh(text):
    """Hexahedra of a Gmsh 2.2 ASCII file as a HexmFile with compacted labels."""
    lines = [l.strip() for l in text.splitlines()]

    def section(name):
        try:
            start = lines.index(f"${name}")
            end = lines.index(f"$End{name}", start)
        except ValueError:
            raise InputError(f"Gmsh file has no ${name} section")
        return lines[start + 1:end]

    fmt = section("MeshFormat")
    if not fmt or not fmt[0].split()[0].startswith("2"):
        raise InputError("Only Gmsh 2.x ASCII files are supported")
    if len(fmt[0].split()) > 1 and fmt[0].split()[1] != "0":
        raise InputError("Binary Gmsh files are not supported")

    nodes = section("Nodes")
    positions = {}
    for line in nodes[1:1 + int(nodes[0])]:
        parts = line.split()
        positions[int(parts[0])] = [float(p) for p in parts[1:4]]

    elements = section("Elements")
    raw_hexes = []
    for line in elements[1:1 + int(elements[0])]:
        parts = [int(p) for p in line.split()]
        if parts[1] != GMSH_HEXAHEDRON:
            continue
        n_tags = parts[2]
        raw_hexes.append(parts[3 + n_tags:3 + n_tags + 8])
    if not raw_hexes:
        raise InputError("Gmsh file contains no hexahedra")

    used = sorted({v for h in raw_hexes for v in h})
    missing = [v for v in used if v not in positions]
    if missing:
        raise InputError(f"Element references unknown node {missing[0]}")
    compact = {v: i for i, v in enumerate(used)}
    hexes = [tuple(compact[v] for v in h) for h in raw_hexes]
    coords = np.array([positions[v] for v in used])
    on_boundary = {v for q in boundary_of(HexComplex(hexes, check=False)).quads for v in q}
    flags = np.array([i in on_boundary for i in range(len(used))], dtype=bool)
    return HexmFile(coords, flags, [], hexes)
