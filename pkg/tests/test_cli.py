import numpy as np
import pytest

from cavqed.cli import main
from cavqed.config import ConfigError, ExperimentConfig, bundled_configs, load_config, parse_config
from cavqed.runner import resolve_noise, run, sweep


def read_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    return lines[1].split(","), [l.split(",") for l in lines[2:]]


def test_bundled_configs_present():
    assert bundled_configs() == ["fig2_24modes", "fig2_36modes", "fig4a", "fig4b", "fig4c", "fig4d",
                                 "fig6_sweep", "fig7_custom"]
    for name in bundled_configs():
        load_config(name)


def test_parse_and_override():
    cfg = parse_config("approach = localized\nN_loc = 13  # comment\nsigma_support = 1\n",
                       {"dt": "0.05"})
    assert cfg.N_loc == 13 and cfg.dt == 0.05 and cfg.approach == "localized"
    assert parse_config(cfg.text()) == cfg


@pytest.mark.parametrize("text,key", [
    ("bogus = 1", "bogus"),
    ("dt = -1", "dt"),
    ("N_ph = many", "N_ph"),
    ("approach = localized", "N_loc"),
    ("N_loc = 13", "N_loc"),
    ("zne = maybe", "zne"),
])
def test_invalid_config_names_key(text, key):
    with pytest.raises(ConfigError, match=key):
        parse_config(text)


def test_noise_resolution():
    assert resolve_noise(ExperimentConfig()) is None
    n = resolve_noise(ExperimentConfig(noise="pittsburgh", eta=10))
    assert n.e2 == pytest.approx(1.52e-4)
    n = resolve_noise(ExperimentConfig(noise="inline", e1=0.001, e2=0.01, e_read=0.0, T1=100.0, T2=80.0))
    assert n.t1 == 100.0 and n.e2 == 0.01
    with pytest.raises(ConfigError):
        resolve_noise(ExperimentConfig(noise="inline", e1=0.1))


def test_default_run_rows_and_oracle(tmp_path):
    res = run(load_config("fig2_24modes", {"noise": "none"}), tmp_path)
    header, rows = read_rows(tmp_path / "dynamics.csv")
    assert header == ["t", "noiseless", "oracle", "noisy_mean", "noisy_stderr", "zne"]
    assert res.n_qubits == 14 and res.circuit.n_steps == 26 and len(rows) == 27
    assert float(rows[-1][0]) == pytest.approx(1.95)
    manifest = (tmp_path / "manifest.txt").read_text()
    assert "actual_t_final = 1.9500000000e+00" in manifest and "seed = 1" in manifest
    assert read_rows(tmp_path / "metrics.csv")[0] == ["step", "total_cx", "swaps", "max_qubit_load"]


def test_zero_final_time(tmp_path):
    run(load_config("fig4a", {"t_final": "0", "noise": "none", "zne": "false"}), tmp_path)
    _, rows = read_rows(tmp_path / "dynamics.csv")
    assert len(rows) == 1 and float(rows[0][1]) == 1.0


def test_localized_run_is_fifteen_qubits(tmp_path):
    res = run(load_config("fig4a", {"t_final": "0.15", "noise": "none"}), tmp_path)
    assert res.n_qubits == 15


def test_identical_config_gives_identical_bytes(tmp_path):
    overrides = {"t_final": "0.15", "runs": "3", "seed": "4", "fractions": "0,0.3"}
    for d in ("a", "b"):
        run(load_config("fig4a", overrides), tmp_path / d)
    for name in ("dynamics.csv", "metrics.csv", "manifest.txt", "zne.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sweep_n_loc(tmp_path):
    results, summary = sweep(load_config("fig6_sweep", {"t_final": "0.6"}), "N_loc", ["13", "19"], tmp_path)
    assert [r.n_qubits for r in results] == [15, 21]
    header, rows = read_rows(tmp_path / "sweep_N_loc.csv")
    assert header[:5] == ["N_loc", "t", "noiseless", "oracle", "reference"]
    assert len(rows) == 2 * 9
    assert all(np.isfinite(row[3]) for row in summary)


def test_sweep_rejects_bad_requests(tmp_path):
    cfg = load_config("fig6_sweep")
    with pytest.raises(ConfigError):
        sweep(cfg, "N_loc", [], tmp_path)
    with pytest.raises(ConfigError):
        sweep(cfg, "dt", ["0.1"], tmp_path)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", "fig2_24modes", "--set", "noise=none", "--set", "t_final=0.15",
                 "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r" / "dynamics.csv").exists()
    assert main(["metrics", "fig4c", "--set", "t_final=0.15", "--out", str(tmp_path / "m")]) == 0
    assert main(["run", "fig2_24modes", "--set", "bogus=1"]) == 2
    assert "bogus" in capsys.readouterr().err
    assert main(["run", "fig4a", "--set", "N_ph=60", "--set", "N_loc=31"]) == 2
    assert "refusing" in capsys.readouterr().err
    assert main(["sweep", "fig6_sweep", "--key", "N_loc", "--values", ""]) == 2
    assert main(["list"]) == 0
