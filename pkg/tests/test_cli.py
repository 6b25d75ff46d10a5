import csv
import json
import subprocess
import sys

import pytest

from randbeta.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(line for line in text.splitlines() if not line.startswith("#")))


def test_density_json_has_tail_bound(capsys):
    code, out, _ = run(capsys, "density", "--beta", "1.6180339887", "--depth", "40", "--format", "json")
    assert code == 0
    data = json.loads(out)
    beta = data["beta"]
    assert data["sup_error"] <= 2 * beta**-40 / (beta - 1) * (1 + 1e-12)
    assert data["meta"]["version"] and data["meta"]["args"]["depth"] == 40
    assert len(data["breakpoints"]) == len(data["values"]) + 1


def test_count_brute_golden(capsys):
    code, out, _ = run(capsys, "count", "--beta", "1.6180339887", "--x", "1", "--n", "12", "--method", "brute")
    assert code == 0
    table = rows(out)
    assert table[0][-1] == "count" and table[1][-1] == "13"


def test_sweep_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--beta", "1.1:1.9:9", "--depth", "30", "--emit", "muS")
    assert code == 0
    table = rows(out)
    assert table[0] == ["beta", "muS", "sup_error"] and len(table) == 10
    assert out.startswith("# tool=randbeta")


def test_usage_errors_exit_64(capsys):
    assert run(capsys, "bogus")[0] == 64
    assert run(capsys, "sweep", "--beta", "1.1:1.9")[0] == 64
    assert run(capsys, "density", "--beta", "1.2:1.4:3")[0] == 64
    assert run(capsys, "count", "--beta", "1.5", "--x", "1")[0] == 64
    assert run(capsys, "density")[0] == 64
    assert run(capsys, "--version")[0] == 0


def test_contract_and_resource_exit_codes(capsys):
    code, _, err = run(capsys, "density", "--beta", "2.5")
    assert code == 1 and "DomainError" in err
    code, _, err = run(capsys, "count", "--beta", "1.5", "--x", "9", "--n", "3")
    assert code == 1
    code, _, err = run(capsys, "density", "--beta", "1.2", "--depth", "40")
    assert code == 2 and "ResourceError" in err
    assert run(capsys, "tower-check", "--beta", "1.7", "--depth", "25")[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["parry", "--beta", "golden", "--depth", "5"],
        ["transfer-check", "--beta", "1.45", "--depth", "30"],
        ["transfer-check", "--beta", "golden", "--variant", "greedy"],
        ["count", "--beta", "1.3", "--x", "0.7", "--n", "10", "--method", "mc", "--samples", "2000"],
        ["growth", "--beta", "golden", "--x", "0.3", "--n", "30"],
        ["tower-check", "--beta", "1.7", "--depth", "10", "--samples", "20000"],
        ["simulate", "--beta", "golden", "--samples", "20000", "--bins", "10"],
    ],
)
def test_commands_are_byte_reproducible(capsys, tmp_path, argv):
    for fmt in ("csv", "json"):
        a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        assert main(argv + ["--format", fmt, "--output", str(a)]) == 0
        assert main(argv + ["--format", fmt, "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        text = a.read_text()
        if fmt == "json":
            meta = json.loads(text)["meta"]
            assert {"tool", "version", "args", "error_bounds"} <= set(meta)
        else:
            assert text.startswith("# tool=randbeta") and "error_bounds=" in text
    capsys.readouterr()


def test_transfer_check_within_bound(capsys):
    code, out, _ = run(capsys, "transfer-check", "--beta", "1.7", "--depth", "35", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["residual"] <= data["bound"]


def test_simulate_csv_layout(capsys):
    code, out, _ = run(capsys, "simulate", "--beta", "1.5", "--samples", "5000", "--bins", "4")
    table = rows(out)
    assert code == 0 and table[0] == ["bin_left", "bin_right", "count", "density"] and len(table) == 5
    assert sum(int(r[2]) for r in table[1:]) == 4000
    assert "# s_fraction=" in out


def test_sweep_parallel_matches_serial(capsys):
    serial = run(capsys, "sweep", "--beta", "1.5:1.9:3", "--emit", "C")[1]
    parallel = run(capsys, "sweep", "--beta", "1.5:1.9:3", "--emit", "C", "--jobs", "2")[1]
    assert rows(serial) == rows(parallel)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "randbeta", "count", "--beta", "golden", "--x", "1", "--n", "5"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and rows(proc.stdout)[1][-1] == "6"
