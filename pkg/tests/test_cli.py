"""Command-line interface: outputs, formats, exit codes, reproducibility."""

import csv
import io
import json

import pytest

from polarkernels import cli
from polarkernels import decomposition as dc
from polarkernels import kernel as kn


def run(*argv):
    buf = io.StringIO()
    rc = cli.main(list(argv), out=buf)
    return rc, buf.getvalue()


def test_exponent_arikan():
    rc, out = run("exponent", "--kernel", "arikan")
    assert rc == 0
    assert "partial_distances: 1,2" in out
    assert "exponent: 0.500000" in out


def test_exponent_formats_carry_identical_numbers():
    _, text = run("exponent", "--kernel", "arikan")
    _, js = run("exponent", "--kernel", "arikan", "--format", "json")
    _, csv_text = run("exponent", "--kernel", "arikan", "--format", "csv")
    payload = json.loads(js)
    row = next(csv.DictReader(io.StringIO(csv_text)))
    assert payload["exponent"] == row["exponent"] == "0.500000"
    assert payload["partial_distances"] == row["partial_distances"]
    assert "exponent: 0.500000" in text


def test_exponent_reference_kernel():
    rc, out = run("exponent", "--kernel", "4")
    assert rc == 0
    assert "exponent: 0.501940" in out
    assert "chain_lower_bound: 0.501940" in out


def test_exponent_file_round_trip(tmp_path):
    path = tmp_path / "k.txt"
    rc, out = run("dump-kernel", "--kernel", "arikan", "--out", str(path))
    assert rc == 0
    rc, from_file = run("exponent", "--kernel", f"file:{path}")
    _, direct = run("exponent", "--kernel", "arikan")
    assert rc == 0
    # identical numbers, only the selector differs
    assert from_file.splitlines()[1:] == direct.splitlines()[1:]


def test_bound_small():
    rc, out = run("bound", "--l", "2")
    assert rc == 0 and "bound: 0.500000" in out
    rc, out = run("bound", "--l", "4", "--format", "json")
    payload = json.loads(out)
    assert payload["sequence"] == "1,2,2,4"
    assert payload["bound"] == "0.500000"
    assert payload["nodes"] > 0


def test_validation_exit_codes():
    assert run("bound", "--l", "1")[0] == 1
    assert run("bound", "--l", "17")[0] == 1
    assert run("exponent", "--kernel", "nope")[0] == 1
    assert run("simulate", "subchannel", "--kernel", "1",
               "--channel", "bec:0.5")[0] == 1  # exact beyond the cap
    assert run("exponent", "--kernel", "file:/does/not/exist")[0] == 1
    assert run("simulate", "tree", "--kernel", "arikan",
               "--channel", "zzz:0.5", "--depth", "1")[0] == 1


def test_simulate_tree_output_and_determinism():
    args = ("simulate", "tree", "--kernel", "arikan", "--channel", "bec:0.5",
            "--depth", "3", "--trials", "40", "--seed", "7")
    rc, out = run(*args)
    assert rc == 0
    lines = out.splitlines()
    assert lines[0].startswith("# tree") and "seed=7" in lines[0]
    assert lines[1] == "trial,n,Z"
    assert len(lines) == 42
    assert run(*args)[1] == out
    assert run(*args[:-1], "8")[1] != out


def test_simulate_tree_depth0():
    rc, out = run("simulate", "tree", "--kernel", "arikan", "--channel",
                  "bec:0.5", "--depth", "0", "--trials", "5", "--seed", "1")
    assert rc == 0
    rows = [line.split(",") for line in out.splitlines()[2:]]
    assert all(float(z) == 0.5 and n == "0" for _, n, z in rows)


def test_simulate_tree_matches_exact_distribution():
    # empirical threshold crossing agrees with the closed-form recursion
    from polarkernels import polarize as pz
    rc, out = run("simulate", "tree", "--kernel", "arikan", "--channel",
                  "bec:0.5", "--depth", "10", "--trials", "400", "--seed", "3")
    assert rc == 0
    zs = [float(line.split(",")[2]) for line in out.splitlines()[2:]]
    leaves = pz.tree_leaves_exact(kn.arikan(), pz.bec(0.5), 10)
    thr = 2.0 ** -16
    p = float((leaves <= thr).mean())
    p_hat = sum(z <= thr for z in zs) / len(zs)
    assert abs(p_hat - p) <= 3 * (p * (1 - p) / len(zs)) ** 0.5


def test_simulate_sc_edge_cases():
    # all frozen: every trial decodes the frozen vector, zero block errors
    rc, out = run("simulate", "sc", "--kernel", "arikan", "--m", "2",
                  "--channel", "bec:0.4", "--rate", "0", "--trials", "30",
                  "--seed", "2")
    assert rc == 0
    assert out.splitlines()[-1] == "bec:0.4,0.0,0,30"
    # noiseless at rate 1: decoding inverts the encoder exactly
    rc, out = run("simulate", "sc", "--kernel", "arikan", "--m", "2",
                  "--channel", "bsc:0", "--rate", "1", "--trials", "30",
                  "--seed", "2")
    assert rc == 0
    assert out.splitlines()[-1] == "bsc:0,1.0,0,30"


def test_simulate_subchannel_exact():
    rc, out = run("simulate", "subchannel", "--kernel", "arikan",
                  "--channel", "bec:0.5")
    assert rc == 0
    rows = [line.split(",") for line in out.splitlines()[2:]]
    assert float(rows[0][2]) == 0.75 and float(rows[1][2]) == 0.25


def test_simulate_subchannel_monte_carlo():
    rc, out = run("simulate", "subchannel", "--kernel", "arikan",
                  "--channel", "bec:0.5", "--i", "2", "--samples", "1000",
                  "--seed", "4")
    assert rc == 0
    i, I, Z, radius = out.splitlines()[2].split(",")
    assert i == "2" and abs(float(Z) - 0.25) <= 3 * float(radius) + 1e-9


def test_tables_kernels_idempotent(tmp_path):
    args = ("tables", "--outdir", str(tmp_path), "--table", "kernels")
    rc, out = run(*args)
    assert rc == 0 and "all values match references" in out
    first = (tmp_path / "kernel_exponents.csv").read_bytes()
    rc, _ = run(*args)
    assert rc == 0
    assert (tmp_path / "kernel_exponents.csv").read_bytes() == first


@pytest.mark.slow
def test_tables_full(tmp_path):
    rc, out = run("tables", "--outdir", str(tmp_path))
    assert rc == 0 and "all values match references" in out
    bounds = (tmp_path / "exponent_bounds.csv").read_text().splitlines()
    assert len(bounds) == 6  # header + five dimensions
    assert bounds[-1].startswith("16,")


def test_tables_mismatch_exit_code(tmp_path, monkeypatch):
    monkeypatch.setitem(cli.REFERENCE_KERNELS, 1, 0.9)
    rc, out = run("tables", "--outdir", str(tmp_path), "--table", "kernels")
    assert rc == 2 and "MISMATCH" in out


def test_check_decomposition(tmp_path):
    path = tmp_path / "chain.txt"
    dc.write_decomposition_file(dc.example_chain_4(), path)
    rc, out = run("check-decomposition", str(path))
    assert rc == 0
    assert "(4,3,2)" in out and "exponent lower bound: 0.5" in out
    bad = tmp_path / "bad.txt"
    bad.write_text("length=4 levels=1\nlevel nonsense\n")
    assert run("check-decomposition", str(bad))[0] == 1


def test_missing_subcommand_is_validation_error():
    assert run()[0] == 1
    assert run("simulate")[0] == 1
