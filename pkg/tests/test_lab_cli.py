import csv
import json
import warnings
from pathlib import Path

import pytest

from hamlab.errors import ConfigError
from hamlab.lab_cli import EXPERIMENT_KINDS, load_config, parse_config, run
from hamlab.lab_cli.cli import main
from hamlab.lab_cli.config import KIND_DEFAULTS, apply_overrides
from hamlab.lab_cli.report import CSV_COLUMNS, SCHEMA, canonical_json, envelope, write_report

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

EXPECTED_VERDICTS = {
    "ho_invariance.yaml": "invariant_within_tol",
    "gaussian_nd.yaml": "independent_of_B",
    "period_quartic.yaml": "methods_agree",
    "quantum_finite.yaml": "trace_invariant",
    "fock_traces.yaml": "same_partition_function",
}


def test_minimal_config_fills_defaults():
    cfg = parse_config("experiment: fock_traces\n")
    assert cfg.experiment_id == "fock_traces"
    assert cfg.seed == 0
    assert cfg.betas == (0.5, 1.0, 2.0)
    assert cfg.tol == KIND_DEFAULTS["fock_traces"]["tol"]
    assert cfg.params == {"f": ["one_plus_tanh"], "cutoffs": [64], "ordering": "f_first"}
    assert cfg.output.endswith("fock_traces")


def test_every_kind_has_defaults():
    for kind in EXPERIMENT_KINDS:
        assert parse_config(f"experiment: {kind}\n").kind == kind


def test_config_hash_ignores_output_and_workers():
    a = parse_config("experiment: gaussian_nd\nseed: 3\noutput: a\nworkers: 1\n")
    b = parse_config("experiment: gaussian_nd\nseed: 3\noutput: b\nworkers: 4\n")
    c = parse_config("experiment: gaussian_nd\nseed: 4\n")
    assert a.config_hash == b.config_hash != c.config_hash


@pytest.mark.parametrize("text, line, fragment", [
    ("experiment: gaussian_nd\nseed: 1\ncolour: blue\n", 3, "unknown key 'colour'"),
    ("experiment: fock_traces\nbetas: [1.0, 0]\n", 2, "must be positive"),
    ("experiment: classical_invariance\n\ndeformations: [identity, tanh]\n", 3, "bounded above"),
    ("experiment: classical_invariance\nsystem: duffing\n", 2, "unknown system"),
    ("experiment: gaussian_nd\ntol: 0.5\n", 2, "tol"),
    ("experiment: period_profile\nemin: 10\nemax: 1\n", 3, "emin < emax"),
    ("experiment: fock_traces\ncutoffs: [4]\n", 2, "must be >= 8"),
    ("experiment: quantum_finite\nquantum_system: diag3\n", 2, "unknown quantum system"),
    ("experiment: gaussian_nd\nseed: [1\n", 3, "YAML syntax error"),
])
def test_config_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text, "exp.yaml")
    msg = str(info.value)
    assert msg.startswith(f"exp.yaml:{line}:")
    assert fragment in msg


def test_config_without_experiment_key():
    with pytest.raises(ConfigError, match="missing required key 'experiment'"):
        parse_config("seed: 1\n")
    with pytest.raises(ConfigError, match="mapping"):
        parse_config("- 1\n- 2\n")


def test_overrides_are_revalidated():
    cfg = parse_config("experiment: gaussian_nd\n")
    new = apply_overrides(cfg, betas=[2.0], seed=9, tol=None)
    assert new.betas == (2.0,) and new.seed == 9 and new.tol == cfg.tol
    with pytest.raises(ConfigError):
        apply_overrides(cfg, betas=[-1.0])


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/x.yaml")


@pytest.mark.parametrize("name", sorted(EXPECTED_VERDICTS))
def test_shipped_configs(name):
    result = run(load_config(CONFIGS / name))
    assert result.verdict == EXPECTED_VERDICTS[name]
    assert not result.contract_failed
    assert all(not r.error for r in result.records)


def test_boundary_vs_shell_records_discrepancy_without_failing():
    cfg = parse_config("experiment: boundary_vs_shell\nbetas: [1.0]\n")
    result = run(cfg)
    assert result.verdict.startswith("discrepancy_recorded")
    assert not result.contract_failed
    assert all(r.error_bound is not None for r in result.records)
    ho = run(parse_config("experiment: boundary_vs_shell\nsystem: ho\nbetas: [1.0]\n"))
    assert ho.verdict == "agree_within_tol"


def test_workers_do_not_change_results():
    cfg = parse_config("experiment: fock_traces\nf: [one_plus_tanh, one_plus_n]\ncutoffs: [32]\n")
    one = envelope(run(cfg, workers=1), 1)
    three = envelope(run(cfg, workers=3), 3)
    assert canonical_json(one["body"]) == canonical_json(three["body"])
    assert one["body_sha256"] == three["body_sha256"]


def test_report_files(tmp_path):
    cfg = parse_config("experiment: gaussian_nd\ndims: [2]\nsamples: 4\nbetas: [1.0]\n")
    paths = write_report(run(cfg), str(tmp_path), 1)
    with open(paths["csv"]) as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert {r["config_hash"] for r in rows} == {cfg.config_hash}
    doc = json.loads(Path(paths["json"]).read_text())
    assert set(doc) == {"body", "body_sha256", "run_info"}
    assert doc["body"]["schema"] == SCHEMA
    assert len(doc["body"]["cells"]) == len(rows)
    assert "verdict: independent_of_B" in Path(paths["summary"]).read_text()


def test_cli_run_exit_codes(tmp_path, capsys):
    out = tmp_path / "ok"
    assert main(["run", str(CONFIGS / "gaussian_nd.yaml"), "--output", str(out), "--quiet"]) == 0
    assert (out / "report.json").exists()
    bad = tmp_path / "bad.yaml"
    bad.write_text("experiment: gaussian_nd\nbetas: [0]\n")
    assert main(["run", str(bad)]) == 2
    assert f"{bad}:2:" in capsys.readouterr().err


def test_cli_contract_failure_exit_code(tmp_path):
    # the oscillator values carry ~1e-12 quadrature error, far above 10 * tol here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        code = main(["run", str(CONFIGS / "ho_invariance.yaml"), "--tol", "2e-14", "--beta", "1",
                     "--output", str(tmp_path), "--quiet"])
    assert code == 1


def test_cli_environment_workers(tmp_path, monkeypatch):
    monkeypatch.setenv("HAMLAB_WORKERS", "2")
    assert main(["run", str(CONFIGS / "fock_traces.yaml"), "--output", str(tmp_path), "--quiet"]) == 0
    assert json.loads((tmp_path / "report.json").read_text())["run_info"]["workers"] == 2
    monkeypatch.setenv("HAMLAB_WORKERS", "zero")
    assert main(["run", str(CONFIGS / "fock_traces.yaml"), "--output", str(tmp_path)]) == 2


def test_cli_list_catalogs(capsys):
    assert main(["list-catalogs"]) == 0
    out = capsys.readouterr().out
    for word in ("ho_plus_quartic", "exp_ramp", "one_plus_tanh", "random_hermitian_8", "fock_traces"):
        assert word in out


def test_cli_period_and_z(capsys):
    assert main(["period", "ho", "--emin", "1", "--emax", "10", "--per-decade", "1"]) == 0
    rows = [line.split() for line in capsys.readouterr().out.splitlines() if not line.lstrip().startswith(("#", "E"))]
    assert len(rows) == 2
    assert all(float(tau) == pytest.approx(6.283185307179586, rel=1e-8) for _, tau in rows)
    assert main(["z", "ho", "--beta", "1", "2", "--method", "shell"]) == 0
    rows = [line.split() for line in capsys.readouterr().out.splitlines()[2:]]
    assert [float(r[1]) for r in rows] == pytest.approx([1.0, 0.5], rel=1e-8)
    assert main(["z", "ho", "--beta", "1", "--method", "deformed"]) == 2
    assert main(["z", "ho", "--beta", "1", "--method", "deformed", "--deformation", "tanh"]) == 2


def test_cli_rejects_bad_arguments():
    with pytest.raises(SystemExit) as info:
        main(["z", "ho", "--beta", "0"])
    assert info.value.code == 2
