import csv
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csfmelt import benchmarks as bm
from csfmelt import cli
from csfmelt.config import SCHEMA_VERSION, parse_config
from csfmelt.errors import InvalidInputError
from csfmelt.materials import TI64
from csfmelt.report import read_report, report_csv, write_report

MINIMAL = {"benchmark": "B1", "case": "V1", "eps": 6e-6, "n_i": 16}


def test_minimal_config_defaults():
    cfg = parse_config(json.dumps(MINIMAL))
    assert cfg.dt == 1e-9 and cfg.t_end == 1e-5
    assert cfg.material == TI64
    assert cfg.schema_version == SCHEMA_VERSION and cfg.is_single
    assert cfg.reference == "paper-exact" and cfg.workers == 1


@pytest.mark.parametrize("doc,match", [
    ({**MINIMAL, "eps": -1e-6}, "'eps'"),
    ({**MINIMAL, "case": "V7"}, "classical, V1, V2, V3, V4"),
    ({**MINIMAL, "colour": "red"}, "unknown config key"),
    ({**MINIMAL, "schema_version": 7}, "schema_version"),
    ({**MINIMAL, "n_i": 2}, "'n_i'"),
    ({**MINIMAL, "n_i": 16.5}, "'n_i'"),
    ({**MINIMAL, "dt": 0}, "'dt'"),
    ({**MINIMAL, "materials": {"k_l": -3}}, "materials.k_l"),
    ({**MINIMAL, "materials": {"kappa": 3}}, "materials.kappa"),
    ({**MINIMAL, "reference": "fast"}, "paper-exact, budgeted"),
    ({**MINIMAL, "steady": True, "benchmark": "B2"}, "'steady'"),
    ({"case": "V1", "eps": 1e-6}, "'benchmark'"),
])
def test_config_errors_name_the_key(doc, match):
    with pytest.raises(InvalidInputError, match=match):
        parse_config(doc)


def test_not_json():
    with pytest.raises(InvalidInputError):
        parse_config("{benchmark: B1")


configs = st.fixed_dictionaries(
    {"benchmark": st.sampled_from(["B1", "B2", "B3"]),
     "eps": st.lists(st.floats(1e-8, 5e-5), min_size=1, max_size=3)},
    optional={"case": st.sampled_from(["classical", "V1", "V2", "V3", "V4"]),
              "method": st.sampled_from(["CE", "IV"]),
              "n_i": st.lists(st.integers(4, 256), min_size=1, max_size=3),
              "dt": st.floats(1e-10, 1e-8),
              "workers": st.integers(1, 8),
              "materials": st.fixed_dictionaries({}, optional={"k_l": st.floats(1.0, 100.0),
                                                               "c_s": st.floats(0.0, 1.0)})})


@settings(max_examples=100, deadline=None)
@given(configs)
def test_config_round_trip(doc):
    cfg = parse_config(doc)
    assert parse_config(json.dumps(cfg.to_document())) == cfg


def _row(**kw):
    row = bm._empty_row(bm.RunSpec("B1", 6e-6, 16))
    row.update(kw)
    return row


def test_empty_report_is_header_only(tmp_path):
    write_report([], tmp_path)
    lines = (tmp_path / "report.csv").read_text().splitlines()
    assert lines == [",".join(bm.ROW_COLUMNS)]
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["rows"] == [] and "version" in meta and "started" in meta


@settings(max_examples=100, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False), st.floats(1e-300, 1e300),
       st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc")), max_size=20))
def test_csv_round_trip_exact(l2, recoil, message):
    row = _row(l2_error=l2, recoil=recoil, n_elements=123, steps=7, message=message, wall_time=0.5)
    text = report_csv([row])
    parsed = list(csv.reader(text.splitlines(keepends=True)))
    assert len(parsed) == 2
    got = dict(zip(parsed[0], parsed[1]))
    assert float(got["l2_error"]) == l2 and float(got["recoil"]) == recoil
    assert got["message"] == message


def test_control_characters_are_flattened():
    text = report_csv([_row(message="line one\nline two\r")])
    assert len(text.splitlines()) == 2 and "line one line two " in text


def test_report_files(tmp_path):
    rows = [_row(l2_error=0.0123, wall_time=1.5), _row(status="failed", message='bad, "quoted"')]
    write_report(rows, tmp_path, config=parse_config(MINIMAL))
    back = read_report(tmp_path / "report.csv")
    assert back[0]["l2_error"] == 0.0123 and back[0]["n_i"] == 16 and back[0]["steady"] is False
    assert back[1]["message"] == 'bad, "quoted"' and back[1]["T_peak"] is None
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["config"]["eps"] == [6e-6]
    assert [r["wall_time"] for r in meta["rows"]] == [1.5, None]


def test_field_dump_has_one_row_per_node(tmp_path, cache_dir):
    spec = bm.RunSpec("B1", 6e-6, 8, t_end=2e-8)
    row = bm.run_benchmark(spec, "budgeted", cache_dir, keep_field=True)
    fld = row.pop("_field")
    paths = write_report([row], tmp_path, fields={0: (fld, spec.eps)})
    with open(paths["fields"][0]) as fh:
        lines = list(csv.reader(fh))
    assert lines[0] == ["x", "T", "chi", "d"]
    assert len(lines) - 1 == fld.mesh.n_nodes == bm.diffuse_mesh_1d(6e-6, 8).n_nodes


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(InvalidInputError):
        write_report([], blocker / "sub")


def _write_cfg(tmp_path, doc):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    return str(p)


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    assert cli.main(["verify"]) == 0
    assert "PASS delta identity" in capsys.readouterr().out
    assert cli.main(["run", "--config", _write_cfg(tmp_path, {**MINIMAL, "eps": -1})]) == 1
    assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == 1
    assert cli.main(["run"]) == 1
    sweep_cfg = _write_cfg(tmp_path, {**MINIMAL, "eps": [6e-6, 3e-6]})
    assert cli.main(["run", "--config", sweep_cfg]) == 1
    blocker = tmp_path / "file"
    blocker.write_text("")
    # the output directory is checked before any solve starts
    monkeypatch.setattr(bm, "run_benchmark", lambda *a, **k: pytest.fail("solver started"))
    assert cli.main(["run", "--config", _write_cfg(tmp_path, MINIMAL), "--out", str(blocker / "o")]) == 1


def test_cli_run_and_solver_failure(tmp_path, monkeypatch, cache_dir):
    monkeypatch.setenv("CSFMELT_CACHE", str(cache_dir))
    doc = {**MINIMAL, "n_i": 8, "t_end": 2e-8, "reference": "budgeted", "fields": True}
    out = tmp_path / "out"
    assert cli.main(["run", "--config", _write_cfg(tmp_path, doc), "--out", str(out)]) == 0
    rows = read_report(out / "report.csv")
    assert len(rows) == 1 and rows[0]["status"] == "ok"
    assert len(list((out / "fields").glob("*.csv"))) == 1

    def failing(spec, *a, **k):
        return {**bm._empty_row(spec), "status": "failed", "message": "SolverError: diverged"}

    monkeypatch.setattr(bm, "run_benchmark", failing)
    assert cli.main(["run", "--config", _write_cfg(tmp_path, doc), "--out", str(tmp_path / "o2")]) == 2


def test_cli_sweep_and_reference(tmp_path, monkeypatch, cache_dir):
    monkeypatch.setenv("CSFMELT_CACHE", str(cache_dir))
    doc = {"benchmark": "B2", "case": "V1", "method": ["CE", "IV"], "eps": [2e-6, 1e-6], "n_i": 8,
           "t_end": 2e-8, "reference": "budgeted"}
    cfg = _write_cfg(tmp_path, doc)
    assert cli.main(["reference", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
    meta = json.loads((tmp_path / "r" / "meta.json").read_text())
    assert len(meta["references"]) == 1
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "s"), "--workers", "1"]) == 0
    rows = read_report(tmp_path / "s" / "report.csv")
    assert [(r["method"], r["eps"]) for r in rows] == [("CE", 2e-6), ("CE", 1e-6), ("IV", 2e-6), ("IV", 1e-6)]
    assert all(math.isfinite(r["recoil_error"]) for r in rows)


def test_budget_switches_reference_policy(tmp_path, capsys):
    args = cli.build_parser().parse_args(["sweep", "--config", "x", "--budget-minutes", "1"])
    _, _, budget, policy, _ = cli._settings(args, parse_config(MINIMAL))
    assert budget == 1.0 and policy == "budgeted"
