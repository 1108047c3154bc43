import contextlib
import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from deformqm.cli import main

FIXTURES = Path(__file__).parent / "fixtures"
CASES = json.loads((FIXTURES / "cases.json").read_text())


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def parse_csv(text):
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value if key == "schema" else json.loads(value)
        else:
            body.append(line)
    rows = list(csv.DictReader(body))
    return meta, rows


@pytest.mark.parametrize("case", CASES, ids=[c["name"] for c in CASES])
def test_golden_output(case):
    code, out, _ = run(case["argv"])
    assert code == 0
    assert out == (FIXTURES / f"{case['name']}.{case['format']}").read_text()


def test_every_command_has_three_fixtures():
    counts = {}
    for case in CASES:
        counts[case["argv"][0]] = counts.get(case["argv"][0], 0) + 1
    assert set(counts) == {"canonicalize", "spectrum", "verify", "wavefunction"}
    assert min(counts.values()) >= 3


def test_output_is_byte_deterministic():
    argv = ["spectrum", "--system", "pt-hyp", "--A", "3.5", "--beta", "0.004", "--format", "json"]
    assert run(argv)[1] == run(argv)[1]


def test_canonicalize_values():
    _, out, _ = run(["canonicalize", "--alpha", "0.02", "--beta", "0.01", "--kappa-re", "0.005"])
    meta, rows = parse_csv(out)
    assert meta["schema"] == "deformqm.canonicalize.v1"
    row = rows[0]
    assert float(row["alpha_p"]) == pytest.approx(0.0220711, abs=1e-7)
    assert float(row["beta_p"]) == pytest.approx(0.0079289, abs=1e-7)
    assert float(row["kappa_p"]) == 0.0
    assert row["admissible"] == "true"


def test_spectrum_values():
    _, out, _ = run(["spectrum", "--system", "morse", "--A", "2", "--B", "1", "--beta", "0.01"])
    meta, rows = parse_csv(out)
    assert meta["n_max"] == 1 and [r["n"] for r in rows] == ["0", "1"]
    assert float(rows[0]["E_exact"]) == pytest.approx(-1.994990, abs=1e-6)
    assert float(rows[1]["E_exact"]) == pytest.approx(-0.487560, abs=1e-6)

    _, out, _ = run(["spectrum", "--system", "pt-hyp", "--A", "2", "--beta", "0.01", "--format", "json"])
    doc = json.loads(out)
    row = dict(zip(doc["columns"], doc["rows"][0]))
    assert row["E_exact"] == pytest.approx(-1.991993, abs=1e-6)
    assert row["E_first_order"] == pytest.approx(-1.992, abs=1e-15)

    _, out, _ = run(["spectrum", "--system", "osc-field", "--alpha", "0.02", "--beta", "0.01", "--field", "0",
                     "--levels", "3"])
    _, rows = parse_csv(out)
    assert all(float(r["dE1"]) == 0 and float(r["dE2"]) == 0 for r in rows)


def test_no_bound_states_is_reported():
    code, out, _ = run(["spectrum", "--system", "morse", "--A", "0.3", "--B", "10", "--beta", "0.2"])
    meta, rows = parse_csv(out)
    assert code == 0 and meta["exists"] is False and rows == []


@pytest.mark.parametrize(
    "argv, code, kind",
    [
        (["canonicalize", "--alpha", "0.02", "--beta", "0.01", "--kappa-re", "0.02"], 2, "NotAdmissible"),
        (["canonicalize", "--alpha", "1.5", "--beta", "0.01"], 2, "ParameterRange"),
        (["spectrum", "--system", "morse", "--A", "0.3", "--B", "10", "--beta", "0.2", "--strict"], 2, "NoBoundStates"),
        (["verify", "--system", "pt-hyp", "--A", "2", "--beta", "0.01", "--no-cap", "--domain=-8:8"], 2,
         "IndefiniteKinetic"),
        (["wavefunction", "--system", "pt-hyp", "--A", "2", "--beta", "0.01", "--n", "1"], 2, "DomainViolation"),
        (["spectrum", "--A", "2"], 2, "ParameterRange"),
    ],
)
def test_error_exit_codes(argv, code, kind):
    rc, out, err = run(argv)
    assert rc == code and out == ""
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["error"] == kind


def test_not_admissible_names_violation():
    _, _, err = run(["canonicalize", "--alpha", "0.02", "--beta", "0.01", "--kappa-re", "0.02"])
    assert json.loads(err)["field"] == "kappa bound"


def test_failed_comparison_exits_one():
    code, out, _ = run(["verify", "--system", "pt-hyp", "--A", "3", "--beta", "0", "--levels", "1",
                        "--budget", "1e-9"])
    meta, rows = parse_csv(out)
    assert code == 1 and meta["passed"] is False and rows[0]["passed"] == "false"


def test_validate_only_skips_work():
    code, out, _ = run(["verify", "--system", "morse-exact", "--A", "2", "--B", "1", "--beta", "0.01",
                        "--validate-only", "--format", "json"])
    doc = json.loads(out)
    assert code == 0 and doc["rows"] == [] and doc["meta"]["validated"] is True


def test_config_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"spectrum": {"system": "pt-hyp", "A": 2.0, "beta": 0.01}}))
    direct = run(["spectrum", "--system", "pt-hyp", "--A", "2", "--beta", "0.01"])[1]
    assert run(["--config", str(cfg), "spectrum"])[1] == direct
    # explicit flags override the file
    assert run(["--config", str(cfg), "spectrum", "--A", "3"])[1] != direct
    cfg.write_text(json.dumps({"spectrum": {"colour": "red"}}))
    assert run(["--config", str(cfg), "spectrum"])[0] == 2


def test_out_file(tmp_path):
    target = tmp_path / "out.csv"
    argv = ["canonicalize", "--alpha", "0.02", "--beta", "0.01", "--kappa-re", "0.005"]
    code, out, _ = run(argv + ["--out", str(target)])
    assert code == 0 and out == ""
    assert target.read_text() == (FIXTURES / "canonicalize_rotation.csv").read_text()


def test_warnings_recorded_in_meta():
    code, out, err = run(["spectrum", "--system", "pt-hyp", "--A", "2", "--beta", "0.2"])
    meta, _ = parse_csv(out)
    assert code == 0 and meta["warnings"] and "warning:" in err


def test_thread_cap_environment():
    env = dict(os.environ, DEFORMQM_THREADS="1")
    argv = [sys.executable, "-m", "deformqm.cli", "spectrum", "--system", "morse", "--A", "2", "--B", "1",
            "--beta", "0.01"]
    proc = subprocess.run(argv, env=env, capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout == (FIXTURES / "spectrum_morse.csv").read_text()
    env["DEFORMQM_THREADS"] = "zero"
    assert subprocess.run(argv, env=env, capture_output=True, check=False).returncode == 2
