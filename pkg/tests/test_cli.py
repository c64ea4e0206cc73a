import io
import json
import subprocess
import sys

import numpy as np
import pytest

from kcoherence.cli import parse_scalar, parse_vector, run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


@pytest.fixture
def bell_csv(tmp_path):
    path = tmp_path / "bell.csv"
    h = 2 ** -0.5
    path.write_text(f"{h!r},0\n0,{h!r}\n")
    return str(path)


def test_parse_scalars():
    assert parse_scalar("0.5") == 0.5
    assert parse_scalar("3/5") == 0.6
    assert parse_scalar("0.3+0.4i") == 0.3 + 0.4j
    assert parse_scalar("-i") == -1j
    assert parse_scalar("2j") == 2j
    np.testing.assert_allclose(parse_vector("0.6, 0.8i"), [0.6, 0.8j])


def test_value_uniform():
    code, out = call("value", "--vector", "0.5,0.5,0.5,0.5", "--k", "2")
    assert code == 0
    assert "value: 1.0" in out


def test_certify_basis_json():
    code, out = call("certify", "--vector", "1,0,0", "--k", "2", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == 0 and doc["status"] == "certified"
    assert doc["primal"]["atoms"] == [[1, 0, 0]]


def test_entangle_bell(bell_csv):
    code, out = call("entangle", "--matrix", bell_csv, "--k", "1", "--json")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(1.0, abs=1e-12)


def test_norm():
    code, out = call("norm", "--vector", "3,4", "--k", "1")
    assert code == 0 and "k_support_norm: 7" in out


def test_exact_certify():
    code, out = call("certify", "--exact", "--vector", "1/2,1/2,1/2,1/2", "--k", "3")
    assert code == 0 and "1/3" in out


def test_vector_file(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("0.6\n0.8i\n")
    code, out = call("value", "--vector-file", str(path), "--k", "2")
    assert code == 0 and "value: 0.0" in out


def test_json_is_byte_identical():
    args = ("certify", "--vector", "0.7071067811865476,0.5,0.3872983346207417,0.31622776601683794",
            "--k", "3", "--json")
    assert call(*args)[1] == call(*args)[1]


def test_verify_subcommand(tmp_path):
    code, out = call("certify", "--vector", "0.5,0.5,0.5,0.5", "--k", "2", "--json")
    path = tmp_path / "c.json"
    path.write_text(out)
    assert call("verify", str(path))[0] == 0
    doc = json.loads(out)
    doc["value"] = 0.9
    path.write_text(json.dumps(doc))
    assert call("verify", str(path))[0] == 3


@pytest.mark.parametrize("argv", [
    ("value", "--vector", "1,1", "--k", "2"),
    ("value", "--vector", "0.6,abc", "--k", "2"),
    ("value", "--vector", "0.6,0.8", "--k", "3"),
    ("value", "--vector", "0.6,0.8", "--k", "1"),
    ("value", "--vector", "", "--k", "2"),
    ("value", "--k", "2"),
    ("value", "--vector", "0.6,0.8", "--k", "two"),
    ("certify", "--exact", "--vector", "0.6,0.8000001", "--k", "2"),
    ("entangle", "--matrix", "/nonexistent/m.csv", "--k", "1"),
    ("value", "--vector-file", "/nonexistent/v.csv", "--k", "2"),
    ("bogus",),
])
def test_invalid_inputs_exit_2(argv):
    assert call(*argv)[0] == 2


def test_ragged_matrix(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1,0\n0\n")
    assert call("entangle", "--matrix", str(path), "--k", "1")[0] == 2


def test_gap_exit_3():
    code, _ = call("certify", "--vector", "0.7071067811865476,0.5,0.3872983346207417,0.31622776601683794",
                   "--k", "3", "--tolerance", "0")
    assert code == 3


def test_selftest_quick():
    code, out = call("selftest", "--size", "0.01", "--seed", "3")
    assert code == 0
    assert out.count("PASS") == 8


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kcoherence", "value", "--vector", "1,0", "--k", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "value: 0.0" in proc.stdout
