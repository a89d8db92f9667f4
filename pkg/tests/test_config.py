import json
from pathlib import Path

import pytest

from gevreg.config import config_to_dict, load_config, parse_config
from gevreg.errors import ConfigError
from gevreg.experiments.factory import ExperimentFactory, ExperimentType

EXAMPLES = Path(__file__).resolve().parent.parent / "gevreg" / "examples"


def test_minimal_config():
    cfg = parse_config("command: xy8\nregister:\n  B_z: 0.1\n")
    assert cfg.command == "xy8"
    assert cfg.register.B_z == pytest.approx(0.1)
    assert cfg.register.n_nuclei == 0
    assert cfg.photon.n_bright_mean == pytest.approx(4.38)
    assert cfg.seed is None


def test_register_preset_and_extra_nuclei():
    text = """\
command: xy8
register:
  preset: measured_sample
  preset_nuclei: "A"
  nuclei:
    - {A_zx: 128000.0, A_zz: 39000.0}
"""
    cfg = parse_config(text)
    assert cfg.register.n_nuclei == 2
    assert cfg.register.nuclei[0].A_zz == pytest.approx(-2963e3)
    assert cfg.register.nuclei[1].A_zx == pytest.approx(128e3)
    assert cfg.register.T2_e == pytest.approx(3.52e-3)


def test_unknown_key_reports_line():
    text = "command: xy8\nregister:\n  B_z: 0.1\n  colour: blue\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == 4
    assert "colour" in str(info.value)


def test_unknown_top_level_key():
    with pytest.raises(ConfigError) as info:
        parse_config("command: xy8\nregister: {B_z: 0.1}\nextras: 1\n")
    assert info.value.line == 3


def test_invalid_values_carry_section_line():
    with pytest.raises(ConfigError) as info:
        parse_config("command: xy8\nregister:\n  B_z: -1.0\n")
    assert info.value.line == 2


@pytest.mark.parametrize("seed", ["-1", "true", "1.5", str(2**64)])
def test_seed_must_be_u64(seed):
    with pytest.raises(ConfigError):
        parse_config(f"command: ssr\nseed: {seed}\nregister: {{B_z: 0.1}}\n")


def test_yaml_syntax_error_has_line():
    with pytest.raises(ConfigError) as info:
        parse_config("command: xy8\nregister:\n  B_z: [0.1\n")
    assert info.value.line is not None


def test_missing_sections():
    with pytest.raises(ConfigError):
        parse_config("register: {B_z: 0.1}\n")
    with pytest.raises(ConfigError):
        parse_config("command: xy8\n")


def test_blink_gradients_default():
    cfg = parse_config("command: blink\nregister: {B_z: 0.1}\nphoton:\n  blink:\n    power: 3.0\n")
    assert cfg.photon.blink.grad_on_off == pytest.approx(0.690)
    assert cfg.photon.blink.grad_off_on == pytest.approx(0.2966)


def test_config_echo_is_plain_data():
    cfg = parse_config("command: blink\nseed: 3\nregister: {preset: measured_sample}\nphoton:\n  blink: {power: 3.0}\nexperiment:\n  powers: [1.0, 2.0]\n")
    echo = config_to_dict(cfg)
    assert json.loads(json.dumps(echo))["seed"] == 3
    assert len(echo["register"]["nuclei"]) == 2


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.yaml")


def test_unknown_command():
    with pytest.raises(ConfigError):
        ExperimentFactory.from_config(parse_config("command: bogus\nregister: {B_z: 0.1}\n"))


def test_missing_required_experiment_parameter():
    cfg = parse_config("command: xy8\nregister: {B_z: 0.1}\nexperiment:\n  tau_dd_start: 3.0e-7\n")
    with pytest.raises(ConfigError, match="tau_dd_stop"):
        ExperimentFactory.from_config(cfg)


@pytest.mark.parametrize("path", sorted(EXAMPLES.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_examples_parse(path):
    cfg = load_config(path)
    experiment = ExperimentFactory.from_config(cfg)
    assert ExperimentType(cfg.command)
    if cfg.command != "fit":
        experiment.validate()
    for value in cfg.experiment.values():
        assert not isinstance(value, str) or not value[:1].isdigit()
