import json

import numpy as np
import pytest

from gevreg.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, build_parser, run
from gevreg.experiments.writers import csv_text
from gevreg.sequences import ElementKind, loads

XY8 = """\
command: xy8
output_dir: unused
register:
  preset: measured_sample
  preset_nuclei: "A"
experiment:
  tau_dd_start: 3.0e-7
  tau_dd_stop: 3.5e-7
  points: 5
  order_grid: [1, 2]
  order_tau_dd: 3.255e-7
"""

CS = """\
command: cs
seed: 12
register:
  preset: measured_sample
  preset_nuclei: "A"
  T2_star_e: 1.0e-6
experiment:
  tau_dd: 3.255e-7
  order_n: 1
  tau_start: 5.0e-6
  tau_step: 1.0e-7
  tau_count: 64
  segment_length: 32
  memory_mode: memory
  shots_per_point: 2
  randomize_tau: true
"""

SSR = """\
command: ssr
seed: 4
register:
  preset: measured_sample
photon:
  init_fidelity_e: 0.98
  blink: {power: 7.0}
experiment:
  shots: 2000
  use_composite: true
  anticorr: both
  write_shots: true
"""

NUCLEAR = """\
command: nuclear_ssr
seed: 9
register:
  preset: measured_sample
  preset_nuclei: "A"
experiment:
  shots: 500
  rabi_grid: [600.0e+3, 765.0e+3]
  reads_grid: [1, 2]
  threshold_grid: [1, 2]
  max_repetitions: 2
"""

BLINK = """\
command: blink
seed: 1
register:
  preset: measured_sample
photon:
  blink: {power: 1.0}
experiment:
  powers: [5.0, 10.0, 20.0]
  duration: 20.0
  bin_width: 1.0e-4
  on_rate: 2.0e+5
  write_traces: true
"""


def _write(tmp_path, text, name="config.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parser_rejects_unknown_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["dance", "--config", "x.yaml"])


def test_xy8_command(tmp_path):
    out = tmp_path / "out"
    assert run(["xy8", "--config", _write(tmp_path, XY8), "--out", str(out)]) == EXIT_OK
    assert {p.name for p in out.iterdir()} == {"config_echo.json", "order_sweep.csv", "sequence.yaml", "spectrum.csv", "summary.json"}
    spectrum = np.loadtxt(out / "spectrum.csv", delimiter=",", skiprows=1)
    assert spectrum.shape == (5, 2)
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["nuclei"]) == 1
    assert summary["entangling_order_n"] in (1, 2)
    shot = loads((out / "sequence.yaml").read_text())
    assert shot.elements[-1].kind is ElementKind.READOUT_MARKER


def test_csv_only_format_keeps_primary_json(tmp_path):
    out = tmp_path / "out"
    assert run(["xy8", "--config", _write(tmp_path, XY8), "--out", str(out), "--format", "csv"]) == EXIT_OK
    assert (out / "summary.json").exists()
    assert (out / "order_sweep.csv").exists()


def test_cs_runs_are_reproducible(tmp_path):
    config = _write(tmp_path, CS)
    assert run(["cs", "--config", config, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert run(["cs", "--config", config, "--out", str(tmp_path / "b"), "--threads", "0"]) == EXIT_OK
    for name in ("signal.csv", "psd.csv", "peaks.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_override(tmp_path):
    config = _write(tmp_path, CS)
    assert run(["cs", "--config", config, "--out", str(tmp_path / "a"), "--seed", "99"]) == EXIT_OK
    assert json.loads((tmp_path / "a" / "config_echo.json").read_text())["seed"] == 99
    assert run(["cs", "--config", config, "--out", str(tmp_path / "b"), "--seed", "-3"]) == EXIT_CONFIG


def test_ssr_command(tmp_path):
    out = tmp_path / "out"
    assert run(["ssr", "--config", _write(tmp_path, SSR), "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert 0.5 < summary["f_ssr"] <= 1.0
    assert summary["rejected_b"] > 0
    shots = (out / "shots.csv").read_text().splitlines()
    assert shots[0] == "prepared,counts,classification"
    assert len(shots) == 1 + 2 * 2000


def test_nuclear_ssr_command(tmp_path):
    out = tmp_path / "out"
    assert run(["nuclear_ssr", "--config", _write(tmp_path, NUCLEAR), "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["optimal_2pi_rabi_m2_hz"] == pytest.approx(765.1e3, abs=500)
    assert summary["best_rabi_hz"] in (600e3, 765e3)
    assert len((out / "reads_threshold.csv").read_text().splitlines()) == 1 + 4
    assert len((out / "repetitions.csv").read_text().splitlines()) == 1 + 2


def test_blink_synthesis_and_reanalysis(tmp_path):
    out = tmp_path / "synth"
    assert run(["blink", "--config", _write(tmp_path, BLINK), "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert len(report["points"]) == 3
    assert report["gradient_on_off"]["gradient_nw_per_hz"] > 0

    files = ", ".join(str(out / "traces" / f"trace_{i:02d}.csv") for i in range(3))
    reread = f"command: blink\nregister: {{preset: measured_sample}}\nexperiment:\n  trace_files: [{files}]\n"
    again = tmp_path / "again"
    assert run(["blink", "--config", _write(tmp_path, reread, "reread.yaml"), "--out", str(again)]) == EXIT_OK
    assert json.loads((again / "report.json").read_text())["points"] == report["points"]


def test_fit_t2star_command(tmp_path):
    t = np.linspace(0, 8e-6, 200)
    signal = 0.5 + 0.4 * np.exp(-((t / 2e-6) ** 2)) * np.cos(2 * np.pi * 300e3 * t)
    (tmp_path / "ramsey.csv").write_text(csv_text(["time_s", "signal"], zip(t, signal)))
    config = _write(tmp_path, "command: fit\nregister: {preset: measured_sample}\nexperiment:\n  kind: t2star\n  data_file: ramsey.csv\n")
    out = tmp_path / "out"
    assert run(["fit", "--config", config, "--out", str(out)]) == EXIT_OK
    fit = json.loads((out / "fit.json").read_text())
    assert fit["t2star_s"] == pytest.approx(2e-6, rel=1e-3)


def test_config_errors_write_nothing(tmp_path):
    out = tmp_path / "out"
    assert run(["cs", "--config", _write(tmp_path, XY8), "--out", str(out)]) == EXIT_CONFIG
    assert run(["cs", "--config", _write(tmp_path, CS.replace("seed: 12\n", "")), "--out", str(out)]) == EXIT_CONFIG
    assert run(["xy8", "--config", _write(tmp_path, XY8.replace("points: 5", "pionts: 5")), "--out", str(out)]) == EXIT_CONFIG
    assert run(["xy8", "--config", str(tmp_path / "missing.yaml"), "--out", str(out)]) == EXIT_CONFIG
    assert run(["xy8", "--config", _write(tmp_path, XY8), "--out", str(out), "--threads", "-1"]) == EXIT_CONFIG
    assert not out.exists()


def test_runtime_error_exit_code(tmp_path):
    (tmp_path / "flat.csv").write_text(csv_text(["time_bin", "counts"], ((i, 10) for i in range(100))))
    (tmp_path / "flat.json").write_text(json.dumps({"bin_width": 1e-4, "power": 5.0}))
    config = _write(tmp_path, "command: blink\nregister: {preset: measured_sample}\nexperiment:\n  trace_files: [flat.csv]\n")
    out = tmp_path / "out"
    assert run(["blink", "--config", config, "--out", str(out)]) == EXIT_RUNTIME
    assert not out.exists()


def test_csv_text_cells():
    text = csv_text(["label", "value"], [("a,b", float("nan")), ("c", 0.1), ("d", True)])
    assert text == 'label,value\n"a,b",\nc,0.1\nd,1\n'
