import io

import pytest

from fpcodes.cli import int_list, main
from fpcodes.field import FieldSpec
from fpcodes.linalg import DenseMatrix, matmul, read_matrix, write_matrix
from fpcodes.sim import CSV_HEADER, read_csv


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def a2x2(tmp_path):
    path = tmp_path / "a.fpcm"
    write_matrix(path, DenseMatrix(FieldSpec.prime(2**31 - 1), [[1, 2], [3, 4]]))
    return path


def test_int_list():
    assert int_list("3") == [3]
    assert int_list("1,4,5") == [1, 4, 5]
    assert int_list("0:3") == [0, 1, 2, 3]


def test_threshold():
    assert cli("threshold", "--scheme", "fpc", "--m", 1, "--p", 8)[1] == "8\n"
    assert cli("threshold", "--scheme", "matdot", "--m", 1, "--p", 8)[1] == "15\n"
    assert cli("threshold", "--scheme", "ep", "--m", 2, "--p", 2)[1] == "9\n"


def test_dims_and_chains():
    assert cli("dims", "--m", 2, "--p", 2)[1] == "4,3\n"
    assert cli("dims", "--m", 2, "--p", 2, "--char", 2)[1] == "3,3\n"
    code, out, _ = cli("chains", "--m", 2, "--p", 2)
    assert code == 0
    assert out.splitlines() == ["special-loop 0,1: (1,0,1)", "chain 0,0,1: (0,0,1) (0,1,1) (1,1,1)"]


def test_multiply_2x2(a2x2, tmp_path):
    out_path, rep = tmp_path / "c.fpcm", tmp_path / "r.csv"
    code, _, err = cli("multiply", "--input", a2x2, "--scheme", "fpc", "--m", 1, "--p", 2, "--workers", 4,
                       "--stragglers", 2, "--out", out_path, "--report", rep)
    assert code == 0, err
    assert read_matrix(out_path).tolist() == [[5, 11], [11, 25]]
    rows = read_csv(rep)
    assert len(rows) == 1 and rows[0]["status"] == "ok" and rows[0]["s"] == "2"
    assert rep.read_text().splitlines()[0] == ",".join(CSV_HEADER)


def test_multiply_deterministic(tmp_path):
    a = tmp_path / "a.fpcm"
    assert cli("gen-matrix", "--rows", 6, "--cols", 8, "--dist", "gaussian", "--field", "real64",
               "--seed", 3, "--out", a)[0] == 0
    blobs = []
    for k in range(2):
        o, r = tmp_path / f"c{k}.fpcm", tmp_path / f"r{k}.csv"
        code, _, err = cli("multiply", "--input", a, "--m", 2, "--p", 2, "--workers", 9, "--stragglers", 2,
                           "--jitter", 0.1, "--out", o, "--report", r, "--verify-budget", 36)
        assert code == 0, err
        blobs.append((o.read_bytes(), r.read_bytes()))
    assert blobs[0] == blobs[1]


def test_round_trip_exact(tmp_path):
    a, c = tmp_path / "a.fpcm", tmp_path / "c.fpcm"
    cli("gen-matrix", "--rows", 4, "--cols", 6, "--field", "gf2:8", "--seed", 1, "--out", a)
    A = read_matrix(a)
    assert A.spec == FieldSpec.binary(8)
    code, _, err = cli("multiply", "--input", a, "--m", 2, "--p", 3, "--workers", 12, "--straggler-ids", "3,7",
                       "--out", c)
    assert code == 0, err
    assert read_matrix(c) == matmul(A, A.T)


def test_multiply_fail_stop_exit_4(a2x2):
    code, _, err = cli("multiply", "--input", a2x2, "--p", 2, "--workers", 4, "--stragglers", 3, "--fail-stop")
    assert code == 4
    assert err.startswith("error: StragglerOverload:")


def test_multiply_error_codes(a2x2, tmp_path):
    assert cli("multiply", "--input", a2x2, "--p", 3, "--workers", 4)[0] == 3
    assert cli("multiply", "--input", tmp_path / "missing", "--p", 2, "--workers", 4)[0] == 2
    junk = tmp_path / "junk"
    junk.write_bytes(b"not a matrix")
    code, _, err = cli("multiply", "--input", junk, "--p", 2, "--workers", 4)
    assert code == 2 and "FormatError" in err
    assert cli("multiply", "--input", a2x2, "--p", 2)[0] == 1
    assert cli("multiply", "--input", a2x2, "--p", 2, "--workers", 4, "--field", "prime:7")[0] == 1
    assert cli("nonsense")[0] == 1


def test_multiply_with_manifest(a2x2, tmp_path):
    man = tmp_path / "pts.txt"
    assert cli("verify-points", "--m", 1, "--p", 2, "--workers", 4, "--field", "prime:2147483647",
               "--out", man)[0] == 0
    c = tmp_path / "c.fpcm"
    code, _, err = cli("multiply", "--input", a2x2, "--p", 2, "--workers", 4, "--manifest", man, "--out", c)
    assert code == 0, err
    assert read_matrix(c).tolist() == [[5, 11], [11, 25]]


def test_gen_matrix(tmp_path):
    a, b = tmp_path / "a.fpcm", tmp_path / "b.fpcm"
    cli("gen-matrix", "--rows", 20, "--cols", 30, "--dist", "integers", "--field", "prime:101", "--seed", 2,
        "--out", a)
    cli("gen-matrix", "--rows", 20, "--cols", 30, "--dist", "integers", "--field", "prime:101", "--seed", 2,
        "--out", b)
    assert a.read_bytes() == b.read_bytes()
    M = read_matrix(a)
    assert M.shape == (20, 30) and 0 <= M.data.min() and M.data.max() < 101
    code, _, err = cli("gen-matrix", "--rows", 2, "--cols", 2, "--dist", "gaussian", "--field", "prime:7",
                       "--out", a)
    assert code == 1 and "gaussian" in err


def test_verify_points_prints_manifest():
    code, out, _ = cli("verify-points", "--m", 2, "--p", 2, "--workers", 10, "--field", "gf2:8")
    assert code == 0
    assert "verified=exhaustive" in out and "threshold=7" in out
    assert out == cli("verify-points", "--m", 2, "--p", 2, "--workers", 10, "--field", "gf2:8")[1]


def test_sweep_and_cond(tmp_path):
    a = tmp_path / "a.fpcm"
    cli("gen-matrix", "--rows", 16, "--cols", 16, "--field", "prime:2147483647", "--out", a)
    code, out, err = cli("sweep", "--input", a, "--p", 8, "--workers", 18, "--s-range", "0,4", "--fail-stop")
    assert code == 0, err
    lines = out.splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and len(lines) == 5
    assert lines[-1].endswith("straggler_overload")
    code, out, _ = cli("cond", "--p-range", "2:3", "--s", 1, "--trials", 2)
    assert code == 0 and len(out.splitlines()) == 3
    assert out == cli("cond", "--p-range", "2:3", "--s", 1, "--trials", 2)[1]
