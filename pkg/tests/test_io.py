"""Problem serialization, problem generators, result reports, and the CLI."""

from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import STRUCTURES, random_structured_problem, rng_for
from paretopt import benchmarks
from paretopt.cli import main
from paretopt.io import (
    ProblemFormatError,
    gen_miso,
    gen_miso_random,
    gen_mimo_autoencoder,
    gen_mimo_random,
    load_csv_matrix,
    parse_problem,
    result_to_json,
    serialize_problem,
)
from paretopt.poly import Poly
from paretopt.representation import MopProblem


def same_problem(a: MopProblem, b: MopProblem) -> bool:
    if (a.n, a.m, a.l) != (b.n, b.m, b.l):
        return False
    pairs = [(a.preference, b.preference)]
    pairs += list(zip(a.objectives, b.objectives))
    pairs += list(zip(a.constraints, b.constraints))
    return all(pa.norm_inf_diff(pb) == 0.0 for pa, pb in pairs) and type(
        a.structure
    ) is type(b.structure)


# -- round trips -------------------------------------------------------------


GALLERY = [
    benchmarks.hypercube_two_objectives,
    benchmarks.polyhedron_two_objectives,
    benchmarks.ball_six_objectives,
    benchmarks.weighted_quadratic_four_objectives,
    benchmarks.shifted_norm_three_objectives,
    benchmarks.parabolic_region_two_objectives,
]


@pytest.mark.parametrize("make", GALLERY, ids=lambda f: f.__name__)
def test_gallery_round_trip(make):
    prob = make()
    assert same_problem(prob, parse_problem(serialize_problem(prob)))


@pytest.mark.parametrize("structure", STRUCTURES + ["free"])
def test_random_round_trip(structure):
    if structure == "free":
        prob = benchmarks.random_convex_quadratic(3, 2, seed=4, structure="free")
    else:
        prob = random_structured_problem(structure, seed=4)
    assert same_problem(prob, parse_problem(serialize_problem(prob)))


def test_generator_round_trip():
    for prob in [gen_miso_random(2, 3, 2, seed=1), gen_mimo_random(2, 2, seed=1)]:
        assert same_problem(prob, parse_problem(serialize_problem(prob)))


def test_parse_rejects_malformed_documents():
    with pytest.raises(ProblemFormatError):
        parse_problem("not json {")
    with pytest.raises(ProblemFormatError):
        parse_problem("{}")
    good = json.loads(serialize_problem(benchmarks.parabolic_region_two_objectives()))
    bad = dict(good)
    bad["objectives"] = []
    with pytest.raises(ProblemFormatError):
        parse_problem(json.dumps(bad))
    bad = dict(good)
    bad["structure"] = {"type": "mystery"}
    with pytest.raises(ProblemFormatError):
        parse_problem(json.dumps(bad))
    bad = dict(good)
    bad["objectives"] = [[{"exp": [1], "coef": 1.0}]]  # wrong exponent length
    with pytest.raises(ProblemFormatError):
        parse_problem(json.dumps(bad))


# -- task generators ---------------------------------------------------------


def test_miso_identity_task_is_shifted_norm():
    prob = gen_miso([np.eye(2)], np.array([1.0, 1.0]))
    want = (Poly.var(0, 2) - Poly.const(2, 1.0)) ** 2 + (
        Poly.var(1, 2) - Poly.const(2, 1.0)
    ) ** 2
    assert prob.m == 1
    assert prob.objectives[0].norm_inf_diff(want) <= 1e-12
    assert prob.l == prob.n == 2


def test_miso_matches_least_squares_losses():
    prob = gen_miso_random(3, 4, 3, seed=5)
    rng = rng_for(5)
    mats = [rng.standard_normal((4, 3)) for _ in range(3)]
    y = rng.standard_normal(4)
    pts = rng_for(99).uniform(-2, 2, size=(100, 3))
    for u in pts:
        for f, X in zip(prob.objectives, mats):
            want = float(np.sum((X @ u - y) ** 2))
            assert f(u) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_mimo_matches_numeric_forward_pass():
    prob = gen_mimo_random(2, 2, tanh_degree=3, seed=7)
    rng = rng_for(7)
    data = [rng.standard_normal(2) for _ in range(2)]
    n = 2

    def loss(X, z):
        A, b = z[: n * n].reshape(n, n), z[n * n :]
        t = A @ np.maximum(X, 0.0) + b
        out = t - t**3 / 3.0
        return float(np.sum((out - X) ** 2))

    pts = rng_for(11).uniform(-0.5, 0.5, size=(20, n * n + n))
    for z in pts:
        for f, X in zip(prob.objectives, data):
            assert f(z) == pytest.approx(loss(X, z), rel=1e-9, abs=1e-9)


def test_generator_input_validation():
    with pytest.raises(ProblemFormatError):
        gen_miso([], np.array([1.0]))
    with pytest.raises(ProblemFormatError):
        gen_miso([np.eye(2), np.ones((2, 3))], np.array([1.0, 1.0]))
    with pytest.raises(ProblemFormatError):
        gen_miso([np.eye(2)], np.array([1.0, 1.0, 1.0]))
    with pytest.raises(ProblemFormatError):
        gen_mimo_autoencoder([np.ones(2)], tanh_degree=4)


# -- result reports ----------------------------------------------------------


def test_result_json_for_solved_run(tiny_problem):
    from paretopt.extract import run_owp

    res = run_owp(tiny_problem, "xw")
    doc = json.loads(result_to_json(res))
    assert doc["status"] == "Solved"
    assert doc["fmin"] == pytest.approx(res.fmin)
    assert doc["representation"] == "XW"
    assert doc["certificate"]["passed"] is True
    mz = doc["minimizers"][0]
    assert len(mz["x"]) == tiny_problem.n and len(mz["w"]) == tiny_problem.m
    assert mz["kkt_residual"] <= 1e-4


def test_result_json_for_unsolved_statuses():
    from paretopt.extract import OwpResult, OwpStatus

    infeasible = OwpResult(
        status=OwpStatus.INFEASIBLE_NO_WPP,
        fmin=None,
        minimizers=[],
        certificate=None,
        order_used=2,
        bounds={},
    )
    doc = json.loads(result_to_json(infeasible))
    assert doc["status"] == "InfeasibleNoWPP"
    assert doc["fmin"] is None and doc["certificate"] is None

    limited = OwpResult(
        status=OwpStatus.ORDER_LIMIT_REACHED,
        fmin=-1.5,
        minimizers=[],
        certificate=None,
        order_used=3,
        bounds={2: -2.0, 3: -1.5},
    )
    doc = json.loads(result_to_json(limited))
    assert doc["status"] == "OrderLimitReached"
    assert doc["bounds"] == {"2": -2.0, "3": -1.5}


def test_load_csv_matrix(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1.0,2.0\n3.0,4.5\n")
    M = load_csv_matrix(str(path))
    assert M.shape == (2, 2)
    assert M[1, 1] == 4.5
    single = tmp_path / "v.csv"
    single.write_text("7.0\n")
    assert load_csv_matrix(str(single)).shape == (1, 1)


# -- command line ------------------------------------------------------------


@pytest.fixture(scope="module")
def problem_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "parabolic.json"
    path.write_text(serialize_problem(benchmarks.parabolic_region_two_objectives()))
    return str(path)


def test_cli_solve_outputs_json_and_exit_zero(problem_file, capsys):
    code = main(["solve", problem_file, "--rep", "xw"])
    out = capsys.readouterr().out
    doc = json.loads(out)
    assert code == 0
    assert doc["status"] == "Solved"
    assert doc["minimizers"]
    assert doc["certificate"]["passed"] is True


def test_cli_represent_lists_expressions(problem_file, capsys):
    code = main(["represent", problem_file, "--rep", "xonly"])
    out = capsys.readouterr().out
    assert code == 0
    assert "lambda[1] =" in out and "w[1] =" in out
    doc = json.loads(out[out.index("{") :])
    assert doc["representation"] == "XOnly"


def test_cli_oracle_writes_csv(problem_file, capsys, tmp_path):
    csv_path = tmp_path / "samples.csv"
    code = main(["oracle", problem_file, "--grid", "6", "--csv", str(csv_path)])
    doc = json.loads(capsys.readouterr().out)
    assert code == 0
    assert doc["samples"] >= 1
    assert csv_path.read_text().startswith("w1,")


def test_cli_gen_miso_random_round_trips(capsys):
    code = main(["gen-miso", "--random", "2", "3", "2", "--seed", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert same_problem(parse_problem(out), gen_miso_random(2, 3, 2, seed=3))


def test_cli_export_sdp(problem_file, capsys):
    code = main(["export-sdp", problem_file, "--rep", "xw"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("moments ")


def test_cli_error_paths(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["solve", str(bad)]) == 1
    assert main(["no-such-command"]) == 1
    capsys.readouterr()
