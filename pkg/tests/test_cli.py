import io
import os

import pytest

from hexmesh.cli import build_parser, run_cli
from hexmesh.errors import InputError
from hexmesh.generators import gen_cube, gen_grid
from hexmesh.hexm_io import HexmFile, format_hexm, read_hexm, write_hexm


@pytest.fixture
def cube_file(tmp_path):
    path = tmp_path / "cube.hexm"
    write_hexm(gen_cube(), str(path))
    return str(path)


def run(store, *argv):
    return run_cli(list(argv), store=store)


class TestParser:
    """Test argument handling and exit codes."""

    def test_unknown_flag(self, store, capsys):
        """Test an unknown flag is a usage error."""
        assert run(store, "enumerate", "--max-hex", "2", "--max-vertices", "8", "--bogus") == 1
        assert "hexmesh:" in capsys.readouterr().err

    def test_missing_required(self, store):
        """Test a missing required option is a usage error."""
        assert run(store, "enumerate", "--max-hex", "2") == 1

    def test_no_command(self, store):
        """Test a subcommand is required."""
        assert run(store) == 1

    def test_help_exits_cleanly(self, store, capsys):
        """Test --help prints usage and exits 0."""
        assert run(store, "--help") == 0
        assert "enumerate" in capsys.readouterr().out

    def test_bound_modes(self):
        """Test only the two bound modes are accepted."""
        args = build_parser().parse_args(["bound", "--mode", "hexahedra", "--from", "0", "--to", "3"])
        assert (args.mode, args.start, args.stop) == ("hexahedra", 0, 3)


class TestGen:
    """Test the gen command."""

    def test_cube_to_file(self, cube_file):
        """Test the cube file reads back."""
        assert read_hexm(cube_file).n_vertices == 8

    def test_grid_to_stdout(self, store, capsys):
        """Test a grid goes to standard output by default."""
        assert run(store, "gen", "grid", "2", "1", "1") == 0
        assert "hexes 2" in capsys.readouterr().out

    def test_grid_needs_dims(self, store):
        """Test grid without dimensions is a usage error."""
        assert run(store, "gen", "grid") == 1

    def test_cube_takes_no_dims(self, store):
        """Test dimensions on a fixed boundary are a usage error."""
        assert run(store, "gen", "cube", "1") == 1

    def test_spindle_ring_height(self, store, tmp_path):
        """Test the ring height flag reaches the generator."""
        path = str(tmp_path / "spindle.hexm")
        assert run(store, "gen", "spindle", "--ring-height", "0.5", "-o", path) == 0
        assert read_hexm(path).coords[0, 2] == 0.5

    @pytest.mark.parametrize("name", ["schneiders", "spindle"])
    def test_matches_golden_file(self, store, tmp_path, name):
        """Test gen writes the stored boundary byte for byte."""
        path = tmp_path / f"{name}.hexm"
        assert run(store, "gen", name, "-o", str(path)) == 0
        golden = os.path.join(os.path.dirname(__file__), "data", f"{name}.hexm")
        with open(golden) as f:
            assert path.read_text() == f.read()


class TestEnumerate:
    """Test the enumerate command."""

    def test_count_only(self, store, cube_file, capsys):
        """Test the cube has exactly one mesh."""
        code = run(store, "enumerate", "--boundary", cube_file, "--max-hex", "2",
                   "--max-vertices", "8", "--count-only", "--threads", "1")
        assert code == 0
        out = capsys.readouterr().out
        assert "solutions: 1" in out
        assert "solution 1:" not in out

    def test_prints_solutions(self, store, cube_file, capsys):
        """Test solutions are printed one per line."""
        run(store, "enumerate", "--boundary", cube_file, "--max-hex", "2", "--max-vertices", "8",
            "--threads", "1")
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("solution 1: ")

    def test_dedup(self, store, cube_file, capsys):
        """Test --dedup reports the distinct count."""
        run(store, "enumerate", "--boundary", cube_file, "--max-hex", "2", "--max-vertices", "8",
            "--threads", "1", "--count-only", "--dedup")
        assert "distinct: 1" in capsys.readouterr().out

    def test_emit(self, store, cube_file, tmp_path):
        """Test --emit writes one file per solution."""
        out_dir = tmp_path / "solutions"
        run(store, "enumerate", "--boundary", cube_file, "--max-hex", "2", "--max-vertices", "8",
            "--threads", "1", "--emit", str(out_dir))
        assert os.listdir(out_dir) == ["solution_00001.hexm"]
        assert len(read_hexm(str(out_dir / "solution_00001.hexm")).hexes) == 1

    def test_stdin_boundary(self, store, monkeypatch, capsys):
        """Test the boundary is read from standard input by default."""
        monkeypatch.setattr('sys.stdin', io.StringIO(format_hexm(gen_cube())))
        assert run(store, "enumerate", "--max-hex", "1", "--max-vertices", "8", "--count-only",
                   "--threads", "1") == 0
        assert "solutions: 1" in capsys.readouterr().out

    def test_odd_boundary(self, store, tmp_path):
        """Test an odd number of boundary quads is invalid input."""
        cube = gen_cube()
        path = str(tmp_path / "open.hexm")
        write_hexm(HexmFile(cube.coords, cube.boundary_flags, cube.quads[:5]), path)
        assert run(store, "enumerate", "--boundary", path, "--max-hex", "2", "--max-vertices", "8") == 2

    def test_records_run(self, store, cube_file):
        """Test each run lands in the ledger."""
        run(store, "enumerate", "--boundary", cube_file, "--max-hex", "2", "--max-vertices", "8",
            "--threads", "1", "--count-only")
        rows = store.get_runs()
        assert len(rows) == 1
        assert (rows[0]['command'], rows[0]['status'], rows[0]['solutions']) == ('enumerate', 'SAT', 1)


class TestBound:
    """Test the bound command."""

    def test_hexahedra_steps(self, store, cube_file, capsys):
        """Test the cube is refuted with zero hexes and meshed with one."""
        assert run(store, "bound", "--boundary", cube_file, "--mode", "hexahedra",
                   "--from", "0", "--to", "2", "--threads", "1") == 0
        lines = capsys.readouterr().out.splitlines()
        assert [line.split()[:2] for line in lines] == [
            ["hexahedra=0", "UNSAT"], ["hexahedra=1", "SAT"], ["hexahedra=2", "SAT"],
        ]
        assert [r['limit_value'] for r in store.get_runs(command='bound')] == [2, 1, 0]

    def test_interior_vertices(self, store, cube_file, capsys):
        """Test the cube needs no interior vertex."""
        run(store, "bound", "--boundary", cube_file, "--mode", "interior-vertices",
            "--from", "0", "--to", "0", "--threads", "1")
        assert capsys.readouterr().out.startswith("interior-vertices=0 SAT")

    def test_verdicts_are_monotone(self, store, tmp_path, capsys):
        """Test a two-hex stack is refuted below two hexes and meshed from two on."""
        path = str(tmp_path / "stack.hexm")
        write_hexm(gen_grid(1, 1, 2), path)
        assert run(store, "bound", "--boundary", path, "--mode", "hexahedra",
                   "--from", "0", "--to", "3", "--threads", "1") == 0
        verdicts = [line.split()[1] for line in capsys.readouterr().out.splitlines()]
        assert verdicts == ["UNSAT", "UNSAT", "SAT", "SAT"]

    def test_interior_vertices_monotone(self, store, cube_file, capsys):
        """Test extra interior vertices keep the cube satisfiable."""
        run(store, "bound", "--boundary", cube_file, "--mode", "interior-vertices",
            "--from", "0", "--to", "1", "--threads", "1")
        verdicts = [line.split()[1] for line in capsys.readouterr().out.splitlines()]
        assert verdicts == ["SAT", "SAT"]

    def test_budget(self, store, tmp_path, capsys):
        """Test an exhausted budget prints BUDGET and exits 3."""
        path = str(tmp_path / "pyramid.hexm")
        run(store, "gen", "schneiders", "-o", path)
        code = run(store, "bound", "--boundary", path, "--mode", "interior-vertices",
                   "--from", "4", "--to", "4", "--budget-secs", "0", "--threads", "1")
        assert code == 3
        assert "interior-vertices=4 BUDGET" in capsys.readouterr().out
        assert store.get_runs()[0]['status'] == 'BUDGET'

    def test_bad_range(self, store, cube_file):
        """Test --from above --to is a usage error."""
        assert run(store, "bound", "--boundary", cube_file, "--mode", "hexahedra",
                   "--from", "3", "--to", "1") == 1


class TestSimplifyAndValidate:
    """Test the mesh commands."""

    def test_simplify_cube_in_cube(self, store, cube_in_cube, tmp_path, capsys):
        """Test the seven-hex mesh is written back as one hex."""
        src, dst = str(tmp_path / "in.hexm"), str(tmp_path / "out.hexm")
        write_hexm(HexmFile.from_geo_mesh(cube_in_cube), src)
        code = run(store, "simplify", "--mesh", src, "--out", dst, "--cavity-min", "7",
                   "--cavity-max", "7", "--exhaustive", "--seed", "0", "--threads", "1", "--history")
        assert code == 0
        assert len(read_hexm(dst).hexes) == 1
        assert "hexes: 7 -> 1" in capsys.readouterr().err
        assert store.get_runs()[0]['status'] == 'IMPROVED'

    def test_validate_grid(self, store, tmp_path, capsys):
        """Test a grid validates."""
        path = str(tmp_path / "grid.hexm")
        write_hexm(gen_grid(2, 2, 2), path)
        assert run(store, "validate", "--mesh", path) == 0
        assert "valid" in capsys.readouterr().out

    def test_validate_inverted(self, store, tmp_path, capsys):
        """Test an inverted hex is listed and exits 2."""
        cube = gen_cube()
        cube.coords[[0, 6]] = cube.coords[[6, 0]]
        path = str(tmp_path / "bad.hexm")
        write_hexm(cube, path)
        assert run(store, "validate", "--mesh", path) == 2
        assert "hex 0:" in capsys.readouterr().out

    def test_validate_wrong_boundary_flags(self, store, tmp_path, capsys):
        """Test a mesh whose flags disagree with its facets is refused with exit 2."""
        grid = gen_grid(2, 2, 2)
        grid.boundary_flags[:] = False
        path = str(tmp_path / "flags.hexm")
        write_hexm(grid, path)
        assert run(store, "validate", "--mesh", path) == 2
        assert "boundary flag" in capsys.readouterr().err


class TestRunsAndFetch:
    """Test the ledger listing and remote download."""

    def test_empty_ledger(self, store, capsys):
        """Test an empty ledger says so."""
        assert run(store, "runs") == 0
        assert "no runs recorded" in capsys.readouterr().out

    def test_lists_runs(self, store, capsys):
        """Test recorded runs are listed."""
        store.record_run('bound', 'UNSAT', None, 'abc', 'hexahedra', 0, 0, 8)
        run(store, "runs")
        out = capsys.readouterr().out
        assert "bound" in out
        assert "hexahedra=0" in out

    def test_fetch_writes_file(self, store, tmp_path, mocker):
        """Test a fetched mesh is written as hexm."""
        fetch = mocker.patch('hexmesh.fetch.fetch_mesh', return_value=gen_cube())
        path = str(tmp_path / "remote.hexm")
        assert run(store, "fetch", "http://example.org/cube.msh", "-o", path) == 0
        assert read_hexm(path).n_vertices == 8
        assert fetch.call_args[0][0] == "http://example.org/cube.msh"

    def test_fetch_failure(self, store, mocker):
        """Test a failed download is invalid input."""
        mocker.patch('hexmesh.fetch.fetch_mesh', side_effect=InputError("Could not download"))
        assert run(store, "fetch", "http://example.org/missing.msh") == 2
