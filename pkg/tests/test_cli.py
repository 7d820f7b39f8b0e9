from __future__ import annotations

import json
import subprocess
import sys

import pytest

from robba_kit.cli import main


def run(capsys, tmp_path, argv, payload=None):
    if payload is not None:
        path = tmp_path / "in.json"
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
        argv = argv + [str(path)]
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def tate(terms, n=1):
    return {"n": n, "terms": [[list(I), str(c)] for I, c in terms]}


def series(terms):
    return {"terms": [[i, str(c)] for i, c in terms]}


def test_eval_wr(capsys, tmp_path):
    code, out = run(capsys, tmp_path, ["eval", "wr", "--r", "1/2"], series([(-4, 1)]))
    assert code == 0 and out == {"w_r": [-2, 1]}


def test_eval_gauss(capsys, tmp_path):
    code, out = run(capsys, tmp_path, ["eval", "gauss"], tate([((0,), 1)]))
    assert code == 0 and out == {"v": [0, 1]}


def test_eval_vn_sigma_derive(capsys, tmp_path):
    _, out = run(capsys, tmp_path, ["eval", "vn", "--n", "1"], series([(-2, 25), (3, 5)]))
    assert out == {"v_n": 3}
    _, out = run(capsys, tmp_path, ["eval", "sigma"], series([(2, 1)]))
    assert out["series"]["terms"] == [[10, "1"]]
    _, out = run(capsys, tmp_path, ["eval", "derive"], series([(2, 1)]))
    assert out["series"]["terms"] == [[1, "2"]]


def test_malformed_json_exits_2(capsys, tmp_path):
    code, out = run(capsys, tmp_path, ["eval", "gauss"], "{not json")
    assert code == 2 and out["error"] == "ParseError"


def test_missing_field_exits_2(capsys, tmp_path):
    code, out = run(capsys, tmp_path, ["solve", "twisted"], {"x": series([(0, 1)])})
    assert code == 2 and out["error"] == "ParseError"


def test_bad_prime_exits_2(capsys, tmp_path):
    code, out = run(capsys, tmp_path, ["eval", "gauss", "--prime", "6"], tate([((0,), 1)]))
    assert code == 2


def test_solve_twisted(capsys, tmp_path):
    code, out = run(capsys, tmp_path, ["solve", "twisted"], {"lambda": 5, "x": series([(0, 1)])})
    assert code == 0 and out["kind"] == "twisted"
    # y = 1/4 mod 5^14 as a residue
    y = int(out["y"]["terms"][0][1])
    assert (4 * y - 1) % 5 ** 12 == 0


def test_solve_twisted_unit_lambda_exits_3(capsys, tmp_path):
    code, out = run(capsys, tmp_path, ["solve", "twisted"], {"lambda": 2, "x": series([(0, 1)])})
    assert code == 3 and out["error"] == "LambdaIsUnit"


def test_split_zero_and_rejection(capsys, tmp_path):
    one = [[series([(0, 1)])]]
    code, out = run(capsys, tmp_path, ["solve", "split"],
                    {"A": [[series([(0, 5)])]], "B": [[series([])]], "D": one})
    assert code == 0 and out["X"][0][0]["terms"] == []
    code, out = run(capsys, tmp_path, ["solve", "split"],
                    {"A": one, "B": one, "D": [[series([(0, 5)])]]})
    assert code == 4 and out["error"] == "NoContraction"


def test_qs_reduce_identity(capsys, tmp_path):
    code, out = run(capsys, tmp_path, ["qs", "reduce"], {"f": [tate([((0,), 1)]), tate([])]})
    assert code == 0 and out["verified"]
    M = out["M"]
    assert M[0][0]["terms"] == [[[0], "1", 0]] and M[1][1]["terms"] == [[[0], "1", 0]]
    assert M[0][1]["terms"] == [] and M[1][0]["terms"] == []


def test_qs_prepare_example(capsys, tmp_path):
    code, out = run(capsys, tmp_path, ["qs", "prepare"], tate([((1,), 1), ((2,), 5)]))
    assert code == 0
    assert out["P"]["terms"] == [[[1], "1", 0]]
    assert out["u"]["terms"] == [[[0], "1", 0], [[1], "5", 0]]


def test_slopes(capsys, tmp_path):
    code, out = run(capsys, tmp_path, ["slopes"], {"A": [[series([(0, 1)]), series([])],
                                                          [series([]), series([(0, 5)])]]})
    assert code == 0 and out["slopes"] == [[0, 1], [1, 1]] and out["exact"]


CERTIFICATES = [
    (["qs", "reduce"], {"f": [tate([((1,), 1)]), tate([((0,), 1), ((1,), 1)])]}),
    (["qs", "complete"], {"f": [tate([((1,), 1)]), tate([((0,), 1), ((1,), 1)]), tate([((2,), 5)])]}),
    (["qs", "kernel"], {"f": [tate([((1, 0), 1)], 2), tate([((0, 0), 1), ((1, 1), 1)], 2)],
                        "witness": [tate([((0, 1), -1)], 2), tate([((0, 0), 1)], 2)]}),
    (["qs", "prepare"], tate([((1,), 1), ((2,), 5), ((0,), 25)])),
    (["qs", "tj"], tate([((1, 1), 1)], 2)),
    (["qs", "tj", "--mode", "ring", "--radius", "-1/2", "--radius", "-1/2"], tate([((1, 1), 1), ((0, 0), 1)], 2)),
    (["solve", "twisted"], {"lambda": 25, "x": series([(-1, 1), (2, 3)])}),
    (["solve", "split"], {"A": [[series([(0, 5)]), series([(1, 1)])], [series([]), series([(0, 25)])]],
                          "B": [[series([(0, 1), (-1, 2)])], [series([(2, 3)])]],
                          "D": [[series([(0, 1)])]]}),
]


@pytest.mark.parametrize("argv,payload", CERTIFICATES, ids=lambda a: " ".join(a) if isinstance(a, list) else "")
def test_every_certificate_reverifies(capsys, tmp_path, argv, payload):
    code, cert = run(capsys, tmp_path, argv, payload)
    assert code == 0, cert
    code, out = run(capsys, tmp_path, ["verify"], cert)
    assert code == 0 and out["verified"] and all(out["checks"].values())


def test_verify_catches_tampering(capsys, tmp_path):
    _, cert = run(capsys, tmp_path, ["solve", "split"],
                  {"A": [[series([(0, 5)])]], "B": [[series([(0, 1)])]], "D": [[series([(0, 1)])]]})
    cert["X"][0][0]["terms"][0][1] = "7"
    code, out = run(capsys, tmp_path, ["verify"], cert)
    assert code == 1 and not out["verified"]


def test_output_is_deterministic(capsys, tmp_path):
    payload = {"f": [tate([((1, 0), 1)], 2), tate([((0, 0), 1), ((1, 1), 1)], 2)],
               "witness": [tate([((0, 1), -1)], 2), tate([((0, 0), 1)], 2)]}
    first = run(capsys, tmp_path, ["qs", "reduce", "--seed", "3"], payload)
    second = run(capsys, tmp_path, ["qs", "reduce", "--seed", "3"], payload)
    assert first == second and first[1]["seed"] == 3


def test_qs_selftest_small(capsys):
    code = main(["qs", "--selftest", "--seed", "7", "--scale", "0.02"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0 and out["all_passed"] and out["seed"] == 7


def test_entry_point_and_stdin():
    proc = subprocess.run([sys.executable, "-m", "robba_kit.cli", "eval", "gauss", "-"],
                          input=json.dumps(tate([((0,), 25)])), capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout) == {"v": [2, 1]}
    assert proc.stderr == ""
