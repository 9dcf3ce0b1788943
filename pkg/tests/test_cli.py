import csv
import io
import json
import math
import subprocess
import sys

import pytest

from esdlab.cli import EVOLVE_FIELDS, main

HEADER = "t,gamma_tilde,fidelity,gap,eof_bits,min_eigenvalue,isotropy_residual"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_evolve_full_csv(capsys):
    code, out, _ = run(
        capsys, "evolve", "--d", "3", "--f0", "0.5", "--model", "full", "--scenario", "both",
        "--rate", "1", "--t-max", "4", "--steps", "5", "--verify",
    )
    assert code == 0
    assert out.splitlines()[0] == HEADER
    assert ",".join(EVOLVE_FIELDS) == HEADER
    assert "\r" not in out
    r = rows(out)
    assert len(r) == 5
    assert [float(x["t"]) for x in r] == [0, 1, 2, 3, 4]
    assert float(r[0]["fidelity"]) == 0.5
    assert float(r[0]["gap"]) == pytest.approx(1 / 6, abs=1e-12)
    assert float(r[0]["eof_bits"]) > 0
    assert float(r[-1]["eof_bits"]) == 0
    for x in r:
        for key in ("fidelity", "gap", "min_eigenvalue"):
            assert x[key] == format(float(x[key]), ".12g")


def test_evolve_simple_has_no_eof(capsys):
    code, out, _ = run(capsys, "evolve", "--d", "3", "--f0", "0.5", "--model", "simple", "--steps", "4")
    assert code == 0
    assert all(x["eof_bits"] == "" for x in rows(out))


def test_evolve_qubits_warns_and_skips_eof(capsys):
    code, out, err = run(capsys, "evolve", "--d", "2", "--f0", "0.9", "--model", "full", "--format", "json", "--steps", "3")
    assert code == 0
    assert "warning" in err
    data = json.loads(out)
    assert len(data) == 3
    assert all(row["eof_bits"] is None for row in data)
    assert list(data[0]) == list(EVOLVE_FIELDS)
    assert data[0]["fidelity"] == 0.9


def test_evolve_verify_failure_exit_3(capsys, monkeypatch):
    monkeypatch.setenv("ESDLAB_TOL", "0")
    code, _, err = run(capsys, "evolve", "--d", "3", "--f0", "0.7", "--model", "simple", "--steps", "6", "--verify")
    assert code == 3
    assert "consistency" in err


def test_tol_flag_beats_env(capsys, monkeypatch):
    monkeypatch.setenv("ESDLAB_TOL", "0")
    code, _, _ = run(capsys, "evolve", "--d", "3", "--f0", "0.7", "--steps", "6", "--verify", "--tol", "1e-12")
    assert code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["evolve", "--d", "1", "--f0", "0.5"],
        ["evolve", "--d", "3", "--f0", "1.5"],
        ["evolve", "--d", "3", "--f0", "0.5", "--steps", "1"],
        ["evolve", "--d", "3", "--f0", "0.5", "--rate", "-1"],
        ["esd", "--d", "3", "--f0", "abc"],
        ["sweep", "--d", "x..y", "--f0-paper"],
    ],
)
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--d", "--f0-paper"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["evolve", "--d", "3"])
    assert info.value.code == 2


def test_esd_canonical_simple_both(capsys):
    code, out, _ = run(capsys, "esd", "--d", "3", "--f0-paper", "--model", "simple", "--scenario", "both", "--rate", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["status"] == "FiniteDeath"
    assert rep["death_time"] == pytest.approx(math.log(7), abs=1e-9)
    assert rep["analytic_time"] == pytest.approx(math.log(7), abs=1e-11)
    assert rep["effective_rate"] == 2.0
    assert rep["interpretation"] == "fidelity_threshold_crossing"
    assert set(rep) >= {"status", "death_time", "f_infinity", "gap_at_zero"}


def test_esd_statuses(capsys):
    _, out, _ = run(capsys, "esd", "--d", "3", "--f0", "0.3", "--model", "full")
    assert json.loads(out)["status"] == "AlreadySeparable"
    _, out, _ = run(capsys, "esd", "--d", "3", "--f0", "1.0", "--model", "full")
    rep = json.loads(out)
    assert rep["status"] == "AsymptoticOnly"
    assert rep["death_time"] is None
    assert rep["interpretation"] == "entanglement_sudden_death"


def test_sweep_canonical_family(capsys, tmp_path):
    simple = tmp_path / "simple.csv"
    full = tmp_path / "full.csv"
    assert main(["sweep", "--d", "3..10", "--f0", "paper", "--model", "simple", "--scenario", "a", "--out", str(simple)]) == 0
    assert main(["sweep", "--d", "3..10", "--f0-paper", "--model", "full", "--scenario", "a", "--out", str(full)]) == 0
    s, f = rows(simple.read_text()), rows(full.read_text())
    assert [int(x["d"]) for x in s] == list(range(3, 11))
    for x in s:
        d = int(x["d"])
        expected = 2 * math.log(2 * (d * d - d + 1) / ((d - 1) * (d - 2)))
        assert float(x["death_time"]) == pytest.approx(expected, rel=1e-9)
        assert float(x["abs_rel_error"]) <= 1e-9
        assert x["error"] == ""
    assert float(s[0]["death_time"]) == pytest.approx(3.891820, abs=1e-6)
    assert float(s[1]["death_time"]) == pytest.approx(2.932674, abs=1e-6)
    assert float(f[0]["death_time"]) == pytest.approx(1.694596, abs=1e-6)
    for a, b in zip(s, f):
        assert float(b["death_time"]) < float(a["death_time"])


def test_sweep_mixed_rows_and_json(capsys):
    code, out, _ = run(capsys, "sweep", "--d", "2,3", "--f0", "0.2", "0.9", "--model", "full", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [(r["d"], r["f0"]) for r in data] == [(2, 0.2), (2, 0.9), (3, 0.2), (3, 0.9)]
    assert data[2]["status"] == "AlreadySeparable"
    assert data[3]["status"] == "FiniteDeath"
    assert data[3]["analytic_time"] is None


def test_sweep_jobs_do_not_change_output(capsys):
    _, one, _ = run(capsys, "sweep", "--d", "3..9", "--f0", "paper", "0.4", "0.8")
    _, many, _ = run(capsys, "sweep", "--d", "3..9", "--f0", "paper", "0.4", "0.8", "--jobs", "4")
    assert one == many


def test_meta_sidecar(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["esd", "--d", "3", "--f0", "0.5", "--out", str(out), "--meta"]) == 0
    meta = json.loads((tmp_path / "e.csv.meta.json").read_text())
    assert "utc_time" in meta
    assert "utc_time" not in out.read_text()


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--dmax", "4")
    assert code == 0
    assert out.count("PASS") >= 6


def test_verify_fault_injection_names_completeness(capsys):
    code, out, _ = run(capsys, "verify", "--dmax", "3", "--inject-fault", "omega-sign")
    assert code == 1
    assert "FAIL kraus_completeness" in out
    assert "failed suites:" in out and "kraus_completeness" in out.splitlines()[-1]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "esdlab", "esd", "--d", "4", "--f0-paper", "--model", "simple", "--scenario", "a"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert json.loads(proc.stdout)["death_time"] == pytest.approx(2.932674, abs=1e-6)
