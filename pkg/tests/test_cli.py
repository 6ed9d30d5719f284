import json
import os

import numpy as np

from mateq import laplacian_2d, read_dense_matrix_market, read_matrix_market
from mateq.cli import main


def run(args):
    return main(args)


def test_gen_writes_operator_and_rhs(tmp_path):
    out = str(tmp_path / "A.mtx")
    rhs = str(tmp_path / "C.mtx")
    code = run(["gen", "--problem", "laplacian2d", "--n", "6", "--out", out,
                "--rhs-out", rhs, "--s", "2", "--seed", "3", "--normalize"])
    assert code == 0
    A = read_matrix_market(out)
    assert A.n == 36
    ref = laplacian_2d(6)
    assert np.array_equal(A.to_dense(), ref.to_dense())
    C = read_dense_matrix_market(rhs)
    assert C.shape == (36, 2)
    assert abs(np.linalg.norm(C @ C.T) - 1.0) <= 1e-13


def test_gen_convdiff_selects_field(tmp_path):
    from mateq import convdiff_3d

    for field in ("wA", "wB"):
        out = str(tmp_path / f"{field}.mtx")
        code = run(["gen", "--problem", "convdiff3d", "--n", "3", "--field", field,
                    "--out", out])
        assert code == 0
        back = read_matrix_market(out)
        ref = convdiff_3d(3, 0.01, field)
        assert np.array_equal(back.to_dense(), ref.to_dense())


def test_solve_writes_report_and_history(tmp_path):
    rep_path = str(tmp_path / "rep.json")
    hist = str(tmp_path / "h")
    code = run(["solve", "--problem", "laplacian2d", "--n", "8", "--s", "2",
                "--seed", "1", "--normalize", "--solver", "restarted-lyap",
                "--memmax", "40", "--tol-res", "1e-7", "--out", rep_path,
                "--history-out", hist, "--verify"])
    assert code == 0
    rep = json.load(open(rep_path))
    assert rep["converged"] is True
    assert rep["solver"] == "restarted-lyap"
    assert len(rep["residual_history"]) == rep["iterations"]
    assert rep["explicit_history"] is not None
    lines = open(hist + "_residual_norms.dat").read().splitlines()
    assert len(lines) == rep["iterations"]
    first_it, first_val = lines[0].split()
    assert int(first_it) == 1
    assert float(first_val) > 0
    for suffix in ("_cycle_markers", "_res_ranks", "_sol_ranks", "_eig"):
        assert os.path.exists(hist + suffix + ".dat")


def test_solve_file_problem_roundtrip(tmp_path):
    a_path = str(tmp_path / "A.mtx")
    run(["gen", "--problem", "laplacian2d", "--n", "7", "--out", a_path])
    code = run(["solve", "--problem", "file", "--a-file", a_path, "--s", "2",
                "--seed", "2", "--normalize", "--solver", "restarted-lyap",
                "--memmax", "40", "--tol-res", "1e-6",
                "--out", str(tmp_path / "r.json")])
    assert code == 0


def test_solve_report_deterministic(tmp_path):
    paths = [str(tmp_path / f"r{i}.json") for i in range(2)]
    for p in paths:
        code = run(["solve", "--problem", "laplacian2d", "--n", "8", "--s", "2",
                    "--seed", "9", "--normalize", "--solver", "restarted-lyap",
                    "--memmax", "40", "--tol-res", "1e-7", "--out", p])
        assert code == 0
    reps = [json.load(open(p)) for p in paths]
    for r in reps:
        r.pop("wall_time_s")
    assert json.dumps(reps[0], sort_keys=True) == json.dumps(reps[1], sort_keys=True)


def test_solve_nonconvergence_exit_code(tmp_path):
    code = run(["solve", "--problem", "laplacian2d", "--n", "10", "--s", "2",
                "--seed", "0", "--normalize", "--solver", "restarted-lyap",
                "--memmax", "40", "--tol-res", "1e-9", "--max-restarts", "0",
                "--out", str(tmp_path / "r.json")])
    assert code == 2


def test_incompatible_solver_problem_is_an_error(tmp_path):
    code = run(["solve", "--problem", "convdiff3d", "--n", "3", "--s", "1",
                "--seed", "0", "--solver", "sksm-two-pass",
                "--out", str(tmp_path / "r.json")])
    assert code == 1


def test_malformed_flags_exit_one(capsys):
    assert run(["solve", "--nope"]) == 1
    assert run(["frobnicate"]) == 1


def test_compare_table(tmp_path):
    out = str(tmp_path / "table.csv")
    code = run(["compare", "--problem", "laplacian2d", "--n", "8", "--s", "2",
                "--seed", "1", "--normalize",
                "--solvers", "restarted-lyap,eksm-bcg,sksm-two-pass",
                "--memmax", "40", "--tol-res", "1e-6", "--out", out])
    assert code == 0
    lines = open(out).read().splitlines()
    assert lines[0].split(",") == ["solver", "its", "restarts", "rank",
                                   "a_calls", "matvecs", "efficiency", "time_s"]
    assert len(lines) == 4
    assert lines[1].startswith("restarted-lyap")
    assert lines[2].startswith("eksm-cg")
    assert lines[3].startswith("sksm-two-pass")


def test_compare_rejects_empty_solver_list():
    assert run(["compare", "--problem", "laplacian2d", "--n", "8",
                "--solvers", ""]) == 1


def test_gen_benchmark_scale_file(tmp_path):
    out = str(tmp_path / "A.mtx")
    assert run(["gen", "--problem", "laplacian2d", "--n", "100", "--out", out]) == 0
    with open(out) as fh:
        header = fh.readline()
        size = fh.readline().split()
    assert header.strip().endswith("symmetric")
    assert size[:2] == ["10000", "10000"]
    A = read_matrix_market(out)
    ref = laplacian_2d(100)
    assert A.n == 10000
    assert np.array_equal(A.data, ref.data) and np.array_equal(A.indices, ref.indices)


def test_solve_convdiff_sylvester_path(tmp_path):
    rep_path = str(tmp_path / "r.json")
    code = run(["solve", "--problem", "convdiff3d", "--n", "3", "--s", "2",
                "--seed", "1", "--normalize", "--solver", "restarted-sylv",
                "--memmax", "64", "--tol-res", "1e-6", "--out", rep_path])
    assert code == 0
    rep = json.load(open(rep_path))
    assert rep["counters"]["A"]["a_calls"] == rep["counters"]["B"]["a_calls"]
