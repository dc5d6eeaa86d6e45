import json
import os
import subprocess
import sys

import numpy as np
import pytest

from martpara.cli import main
from martpara.function_norms import hardy_norm
from martpara.martingale_ops import paraproducts
from martpara.measure_space import Filtration, MeasureSpace


def _write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def files(data_dir):
    return {k: os.path.join(data_dir, v) for k, v in {"space": "space4.json", "filtration": "filt4.json", "f": "f4.json", "ones": "ones4.json", "short": "short3.json"}.items()}


def _tree_args(files, *extra):
    return ["--space", files["space"], "--filtration", files["filtration"], *extra]


def test_norm_prints_value(files, capsys):
    assert main(["norm", "--variant", "Hp_S", "--p", "1", *_tree_args(files, "--func", files["f"])]) == 0
    assert capsys.readouterr().out.strip() == "1.5"


def test_norm_equals_library_bits(files, capsys):
    main(["norm", "--variant", "hp_s", "--p", "0.7", *_tree_args(files, "--func", files["f"])])
    printed = float(capsys.readouterr().out)
    space = MeasureSpace.uniform(4)
    filt = Filtration.from_json(json.load(open(files["filtration"])))
    assert printed == hardy_norm(space, filt, np.array([1.0, -1.0, 2.0, -2.0]), "hp_s", 0.7)


def test_paraproduct_json(files, capsys):
    assert main(["paraproduct", *_tree_args(files, "--f", files["ones"], "--g", files["f"])]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pi2"] == [1.0, -1.0, 2.0, -2.0]
    space = MeasureSpace.uniform(4)
    filt = Filtration.from_json(json.load(open(files["filtration"])))
    lib = paraproducts(space, filt, np.ones(4), np.array([1.0, -1.0, 2.0, -2.0]))
    assert [out[k] for k in ("pi1", "pi2", "pi3")] == [x.tolist() for x in lib]


def test_paraproduct_dimension_error(files, capsys):
    assert main(["paraproduct", *_tree_args(files, "--f", files["short"], "--g", files["f"])]) == 2
    assert "shape" in capsys.readouterr().err


def test_malformed_json_has_line(tmp_path, files, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"values": [1, 2,\n 3,, 4]}')
    assert main(["norm", "--variant", "Hp_S", *_tree_args(files, "--func", str(bad))]) == 2
    assert "line 2" in capsys.readouterr().err


def test_validate_commands(files, tmp_path, capsys):
    assert main(["space", "validate", "--space", files["space"]]) == 0
    assert main(["filtration", "validate", *_tree_args(files)]) == 0
    bad = _write(tmp_path, "f.json", {"k_min": 0, "partitions": [[[0, 1], [2, 3]], [[0, 1, 2, 3]]]})
    assert main(["filtration", "validate", "--space", files["space"], "--filtration", bad]) == 1
    assert "nestedness" in capsys.readouterr().out


def test_expand_and_atoms(files, tmp_path, capsys):
    assert main(["expand", *_tree_args(files, "--func", files["f"]), "--out", str(tmp_path)]) == 0
    exp = json.loads((tmp_path / "expansion.json").read_text())
    assert exp["differences"][1] == [1.0, -1.0, 2.0, -2.0]
    capsys.readouterr()
    assert main(["atoms", "decompose", *_tree_args(files, "--func", files["f"]), "--q", "inf"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["quasi_norm"] > 0 and out["terms"]


def test_dyadic_commands(tmp_path, capsys):
    metric = _write(tmp_path, "m.json", {"coordinates": [0, 0.1, 0.35, 0.5, 0.7, 0.9], "weights": [1] * 6})
    assert main(["dyadic", "build", "--metric", metric, "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert main(["dyadic", "verify", "--metric", metric, "--system", str(tmp_path / "dyadic_system.json")]) == 0
    assert json.loads(capsys.readouterr().out)["ok"]
    assert main(["dyadic", "build", "--metric", metric, "--delta", "0.5"]) == 2
    assert "dyadic build" in capsys.readouterr().err


def test_adjacent_and_cover_ball(tmp_path, capsys):
    metric = _write(tmp_path, "m.json", {"coordinates": [0, 0.1, 0.35, 0.49, 0.5, 0.51, 0.7, 0.9], "weights": [1] * 8})
    assert main(["adjacent", "build", "--metric", metric, "--backend", "euclidean"]) == 0
    assert json.loads(capsys.readouterr().out)["C"] <= 6
    assert main(["cover-ball", "--metric", metric, "--backend", "euclidean", "--x", "4", "--r", "0.0100001"]) == 0
    ref = json.loads(capsys.readouterr().out)
    assert {3, 4, 5} <= set(ref["members"]) and ref["diameter"] <= 0.12


def test_verify_exit_code(capsys):
    assert main(["verify", "--suite", "identity", "--trials", "1000", "--seed", "7"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and report["seed"] == 7 and report["trials"] == 1000


def test_verify_csv_and_out(tmp_path, capsys):
    assert main(["verify", "--suite", "lip-q1-q2", "--suite", "lam1", "--trials", "6", "--format", "csv", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("suite,") and len(lines) == 3
    assert (tmp_path / "lam1.json").exists() and (tmp_path / "reports.csv").exists()


def test_verify_config(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", {"suites": ["maximal-bound"], "trials": 300, "suite_params": {"maximal-bound": {"p": 0.3}}})
    assert main(["verify", "--config", cfg]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["details"]["params"]["p"] == 0.3 and rep["trials"] == 300


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", {"suites": ["identity"], "tolerance": 1})
    assert main(["verify", "--config", cfg]) == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_verify_unknown_suite(capsys):
    assert main(["verify", "--suite", "nope"]) == 2


def test_module_entry_point(files):
    out = subprocess.run(
        [sys.executable, "-m", "martpara", "norm", "--variant", "Hp_max", *_tree_args(files, "--func", files["f"])],
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "1.5"
