from __future__ import annotations

import csv
import io
import json
import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from r3var import cli
from r3var.cache import CacheError, fnv1a64, read_cache, write_cache
from r3var.config import RunConfig
from r3var.cube_reps import sieve_r3


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_fnv1a_reference_vectors():
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8


@given(st.integers(1, 3000))
@settings(max_examples=15, deadline=None)
def test_cache_round_trip(tmp_path_factory, x_max):
    path = tmp_path_factory.mktemp("c") / "t.cache"
    t = sieve_r3(x_max)
    write_cache(path, t)
    back = read_cache(path)
    assert back.x_max == x_max and np.array_equal(back.counts, t.counts)


def test_cache_layout(tmp_path):
    path = tmp_path / "t.cache"
    write_cache(path, sieve_r3(10))
    data = path.read_bytes()
    assert data[:4] == b"R3CB" and data[4] == 1
    assert int.from_bytes(data[5:13], "little") == 10
    assert len(data) == 13 + 40 + 8
    assert int.from_bytes(data[13 + 4 * 2 : 13 + 4 * 3], "little") == 1  # r3(3)


@pytest.mark.parametrize("damage", ["truncate", "flip", "magic"])
def test_cache_corruption(tmp_path, damage):
    path = tmp_path / "t.cache"
    write_cache(path, sieve_r3(100))
    data = bytearray(path.read_bytes())
    if damage == "truncate":
        data = data[:-5]
    elif damage == "flip":
        data[40] ^= 1
    else:
        data[0:4] = b"XXXX"
    path.write_bytes(bytes(data))
    with pytest.raises(CacheError):
        read_cache(path)


def test_sieve_idempotent(tmp_path, capsys, caplog):
    path = str(tmp_path / "r.cache")
    code, out = run(capsys, "sieve", "--x-max", "10", "--cache", path)
    assert code == 0 and json.loads(out)[0]["status"] == "written"
    assert read_cache(path).counts.tolist() == sieve_r3(10).counts.tolist()
    with caplog.at_level(logging.INFO):
        code, out = run(capsys, "sieve", "--x-max", "10", "--cache", path)
    assert code == 0 and "cache hit" in caplog.text


def test_truncated_cache_exit_code(tmp_path, capsys):
    path = tmp_path / "r.cache"
    write_cache(path, sieve_r3(10))
    path.write_bytes(path.read_bytes()[:20])
    assert cli.main(["variance", "--x", "10", "--q", "2", "--cache", str(path)]) == cli.EXIT_IO
    assert cli.main(["variance", "--x", "10", "--q", "2", "--cache", str(tmp_path / "none")]) == cli.EXIT_IO


def test_variance_golden(capsys):
    code, out = run(capsys, "variance", "--x", "10", "--q", "2", "--formula", "none")
    row = json.loads(out)[0]
    assert code == 0 and row["v_empirical"] == pytest.approx(16.61, abs=0.01)
    assert set(row) == set(cli.REPORT_FIELDS)


def test_variance_end_to_end_csv_matches_json(capsys):
    args = ["variance", "--x", "10000", "--q", "10000", "--formula", "corollary2"]
    _, js = run(capsys, *args)
    _, cs = run(capsys, *args, "--format", "csv")
    row = json.loads(js)[0]
    (crow,) = list(csv.DictReader(io.StringIO(cs)))
    assert list(crow) == list(cli.REPORT_FIELDS)
    for key in ("v_empirical", "u0_residual", "normalized"):
        assert float(crow[key]) == row[key]
    assert float(crow["prediction"]) == row["prediction"]["total"]
    assert row["formula"] == "corollary2" and row["normalized"] is not None


def test_domain_and_usage_errors(capsys):
    assert cli.main(["variance", "--x", "10", "--q", "20"]) == cli.EXIT_USAGE
    assert cli.main(["predict", "--x", "10000", "--q", "100", "--formula", "theorem1"]) == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 2


def test_constants_schema(capsys):
    code, out = run(capsys, "constants", "--series-cutoff", "10000", "--prime-cutoff", "1000")
    data = json.loads(out)
    assert code == 0
    for k in ("C0", "C1", "C2", "A1", "A2", "D1", "D2", "D3", "D4"):
        assert set(data[k]) == {"value", "error_estimate"}
    assert data["A1"]["value"] > 0 and data["A2"]["value"] > 0


def test_gauss_sum_and_rho(capsys):
    code, out = run(capsys, "gauss-sum", "--q", "9")
    rows = json.loads(out)
    assert code == 0 and len(rows) == 9 and all(r["abs_dev_direct"] < 1e-9 for r in rows)
    code, out = run(capsys, "rho", "--q", "4")
    assert [r["rho"] for r in json.loads(out)] == [16, 12, 16, 20]


def test_scan_and_diagnose(capsys):
    code, out = run(capsys, "scan", "--x-grid", "100", "1000", "--q-policy", "x", "--formula", "corollary2")
    rows = json.loads(out)
    assert code == 0 and [r["x"] for r in rows] == [100, 1000]
    code, out = run(capsys, "diagnose", "--x", "1000", "--q-max", "4")
    assert code == 0 and max(r["bound_ratio"] for r in json.loads(out)) > 0


def test_identities_small(capsys):
    code, out = run(capsys, "identities", "--q-max", "30", "--s-direct-max", "100",
                    "--series-cutoff", "2000", "--prime-cutoff", "500")
    rows = json.loads(out)
    assert code == 0 and all(r["ok"] for r in rows)


def test_identity_failure_exit(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_identities", lambda **kw: [{"identity": "x", "range": "", "max_deviation": 1.0, "ok": False}])
    assert cli.main(["identities"]) == cli.EXIT_IDENTITY


def test_run_config_validation():
    assert RunConfig(threads=0).workers >= 1
    with pytest.raises(ValueError):
        RunConfig(tolerance=0)
    with pytest.raises(ValueError):
        RunConfig(output_format="xml")
    with pytest.raises(ValueError):
        RunConfig(q_max=0)
