import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from udiscord.cli import main, ordered_simplex_grid
from udiscord.linalg import density_matrix_to_json


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["measure"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["thermal", "--kind", "ising", "--sign", "+"])
    assert exc.value.code == 2
    assert run(["measure", "--spectrum", "a,b"], capsys)[0] == 2
    assert run(["measure", "--spectrum", "1,0,0,0", "--samples", "0"], capsys)[0] == 2
    assert run(["thermal", "--kind", "xy", "--sign", "+", "--steps", "1"], capsys)[0] == 2


def test_physics_errors_exit_3(capsys, tmp_path):
    assert run(["measure", "--spectrum", "0.5,0.6,0,0"], capsys)[0] == 3
    assert run(["measure", "--spectrum", "1.2,-0.2,0,0"], capsys)[0] == 3
    assert run(["measure", "--spectrum", "0.5,0.5,0"], capsys)[0] == 3
    assert run(["measure", "--spectrum", "1,0"], capsys)[0] == 3
    assert run(["measure", "--spectrum", ",".join(["1"] + ["0"] * 15), "--samples", "4"], capsys)[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n_qubits": 1, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}))
    assert run(["measure", "--density", str(bad)], capsys)[0] == 3


def test_io_errors_exit_4(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = run(["constants", "--samples", "5", "--samples-up", "10", "--cache", str(blocker / "c.json")], capsys)[0]
    assert code == 4
    assert run(["measure", "--density", str(tmp_path / "missing.json")], capsys)[0] == 4
    assert run(["measure", "--spectrum", "1,0,0,0", "--samples", "10", "--out", str(blocker / "o")], capsys)[0] == 4


def test_measure_json(capsys):
    code, out, _ = run(["measure", "--spectrum", "1/2,1/2,0,0", "--samples", "20000"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["Q_G"] == pytest.approx(1 / 3, abs=1e-15)
    assert "std_error" not in json.dumps(rep["Q_G"])
    assert abs(rep["calQ"]["value"] - 0.72) <= max(0.02, 3 * rep["calQ"]["std_error"])
    assert "Q" not in rep


def test_measure_csv_and_optimized(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("UDISCORD_CACHE", str(tmp_path / "none.json"))
    code, out, _ = run(
        ["measure", "--spectrum", "1,0,0,0", "--samples", "300", "--with-optimized", "--format", "csv"], capsys
    )
    assert code == 0
    rows = {r["quantity"]: r for r in rows_of(out)}
    assert float(rows["Q"]["value"]) == 1.0
    assert float(rows["calQ"]["value"]) == 1.0
    assert rows["Q_G"]["std_error"] == ""


def test_measure_from_density_file(capsys, tmp_path, rng):
    u = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
    rho = u @ np.diag([0.5, 0.5, 0, 0]) @ u.conj().T
    path = tmp_path / "rho.json"
    path.write_text(json.dumps(density_matrix_to_json(rho)))
    code, out, _ = run(["measure", "--density", str(path), "--samples", "2000"], capsys)
    assert code == 0
    rep = json.loads(out)
    _, ref, _ = run(["measure", "--spectrum", "0.5,0.5,0,0", "--samples", "2000"], capsys)
    assert rep["calQ"]["value"] == pytest.approx(json.loads(ref)["calQ"]["value"], abs=1e-9)


def test_measure_three_qubits(capsys):
    code, out, _ = run(["measure", "--spectrum", "1,0,0,0,0,0,0,0", "--samples", "500"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["calQ"]["value"] == 1 and rep["Q_G"] == 1 and "|" in rep["calQ_split"]


def test_simplex_grid():
    pts = ordered_simplex_grid(2, 21)
    assert len(pts) == 21 and (0.5, 0.5, 0.0, 0.0) in pts and (1.0, 0.0, 0.0, 0.0) in pts
    pts3 = ordered_simplex_grid(3, 7)
    assert any(np.allclose(p, (1 / 3, 1 / 3, 1 / 3, 0)) for p in pts3)
    for p in pts3 + ordered_simplex_grid(4, 5):
        assert abs(sum(p) - 1) < 1e-12 and all(a >= b - 1e-15 for a, b in zip(p, p[1:]))
    assert any(np.allclose(p, 0.25) for p in ordered_simplex_grid(4, 5))


def test_sweep_two_eig(capsys, tmp_path):
    out_path = tmp_path / "s.csv"
    code, _, _ = run(["sweep", "--mode", "two-eig", "--grid", "11", "--samples", "20000", "--out", str(out_path)], capsys)
    assert code == 0
    rows = rows_of(out_path.read_text())
    assert len(rows) == 11
    top = next(r for r in rows if float(r["lambda1"]) == 1)
    assert float(top["q_modified"]) == 1
    low = min(rows, key=lambda r: float(r["q_modified"]))
    assert float(low["lambda1"]) == 0.5
    assert abs(float(low["q_modified"]) - 0.72) <= max(0.02, 3 * float(low["q_modified_stderr"]))


def test_sweep_four_eig_contains_zero(capsys):
    code, out, _ = run(["sweep", "--mode", "four-eig", "--grid", "3", "--samples", "500"], capsys)
    assert code == 0
    rows = rows_of(out)
    assert min(float(r["q_modified"]) for r in rows) == 0
    assert min(float(r["qg"]) for r in rows) == 0


def test_thermal_xy_sign_independent(capsys):
    argv = ["thermal", "--kind", "xy", "--beta-max", "6", "--steps", "4", "--samples", "1000"]
    _, plus, _ = run(argv + ["--sign", "+"], capsys)
    _, minus, _ = run(argv + ["--sign", "-"], capsys)
    assert plus == minus and plus.startswith("beta,")


def test_thermal_heisenberg_tail(capsys):
    code, out, _ = run(
        ["thermal", "--kind", "heisenberg", "--sign", "+", "--beta-max", "60", "--steps", "2", "--samples", "30000"],
        capsys,
    )
    assert code == 0
    zero, tail = rows_of(out)
    assert float(zero["q_modified"]) == 0 and abs(float(zero["qg_analytic"])) < 1e-15
    assert float(tail["qg_analytic"]) == pytest.approx(1 / 9, abs=1e-12)
    assert abs(float(tail["q_modified"]) - 0.30) <= max(0.02, 3 * float(tail["q_modified_stderr"]))


def test_constants_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    base = ["constants", "--samples", "64", "--samples-up", "2000", "--seed", "5"]
    assert run(base + ["--cache", str(a)], capsys)[0] == 0
    assert run(base + ["--cache", str(b), "--workers", "2"], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_constants_std_error_scaling(capsys, tmp_path):
    errs = []
    for m in (20_000, 40_000):
        _, out, _ = run(
            ["constants", "--samples", "8", "--samples-up", str(m), "--cache", str(tmp_path / f"{m}.json")], capsys
        )
        errs.append(json.loads(out)["qbar_up_pure"]["std_error"])
    assert abs(errs[1] / errs[0] * math.sqrt(2) - 1) <= 0.2


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "udiscord", "measure", "--spectrum", "0.25,0.25,0.25,0.25", "--samples", "10"],
        capture_output=True, text=True,
    )
    assert res.returncode == 0
    rep = json.loads(res.stdout)
    assert rep["calQ"]["value"] == 0 and rep["Q_G"] == 0
