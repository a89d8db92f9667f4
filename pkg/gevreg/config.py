"""YAML experiment configuration.

A config file is a mapping with the sections ``command``, ``seed``,
``output_dir``, ``register``, ``photon`` and ``experiment``. Sections map
onto frozen dataclasses; unknown keys are rejected and every error carries
the line of the offending entry when it can be located.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Union

import yaml

from gevreg.constants import BLINK_GRADIENTS
from gevreg.dynamics import HyperfineVector, RegisterConfig
from gevreg.errors import ConfigError
from gevreg.readout.photon import BlinkRates, PhotonModel

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = ("command", "seed", "output_dir", "register", "photon", "experiment")


class _Marks:
    """Line lookup of ``key.path`` entries in the composed YAML tree."""

    def __init__(self, node: Optional[yaml.Node]):
        self._node = node

    def line(self, *path: Union[str, int]) -> Optional[int]:
        node = self._node
        line = None
        for key in path:
            if isinstance(node, yaml.MappingNode):
                match = next(((k, v) for k, v in node.value if k.value == key), None)
                if match is None:
                    return line
                line = match[0].start_mark.line + 1
                node = match[1]
            elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
                node = node.value[key]
                line = node.start_mark.line + 1
            else:
                return line
        return line


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated contents of one config file.

    Attributes:
        command (str): Experiment to run.
        register (RegisterConfig): Register physics.
        photon (PhotonModel): Photon statistics.
        experiment (dict): Command-specific parameters, validated by the experiment.
        seed (int | None): 64-bit seed, required by stochastic commands.
        output_dir (Path): Where artifacts go.
        base_dir (Path): Directory of the config file, for relative data paths.
    """

    command: str
    register: RegisterConfig
    photon: PhotonModel = field(default_factory=PhotonModel)
    experiment: Mapping[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    output_dir: Path = Path("out")
    base_dir: Path = Path(".")
    marks: Any = field(default=None, repr=False, compare=False)

    def line_of(self, *path) -> Optional[int]:
        return self.marks.line(*path) if self.marks is not None else None


def build_dataclass(cls, values: Mapping[str, Any], section: str, marks: _Marks = None, path: Sequence = ()):
    """Instantiate ``cls`` from a mapping, rejecting unknown keys.

    Sequences become tuples. Validation errors raised by ``cls`` are re-raised
    with the line of the section.

    Raises:
        ConfigError: On unknown keys, wrong types or failed validation.
    """
    marks = marks or _Marks(None)
    if values is None:
        values = {}
    if not isinstance(values, Mapping):
        raise ConfigError(f"section '{section}' must be a mapping", marks.line(*path))
    names = {f.name for f in dataclasses.fields(cls)}
    for key in values:
        if key not in names:
            raise ConfigError(f"unknown key '{key}' in section '{section}'", marks.line(*path, key))
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        if exc.line is not None:
            raise
        raise ConfigError(f"{section}: {exc}", marks.line(*path)) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}", marks.line(*path)) from None


def _register(values: Mapping[str, Any], marks: _Marks) -> RegisterConfig:
    if not isinstance(values, Mapping):
        raise ConfigError("section 'register' must be a mapping", marks.line("register"))
    values = dict(values)
    preset = values.pop("preset", None)
    nuclei = values.pop("nuclei", [])
    if preset is not None:
        if preset != "measured_sample":
            raise ConfigError(f"unknown register preset '{preset}'", marks.line("register", "preset"))
        letters = values.pop("preset_nuclei", "AB")
        template = RegisterConfig.measured_sample(str(letters))
        nuclei = list(template.nuclei) + [n for n in nuclei]
        values.setdefault("B_z", template.B_z)
        values.setdefault("T2_e", template.T2_e)
        values.setdefault("T1_e", template.T1_e)
    vectors = []
    for index, item in enumerate(nuclei):
        if isinstance(item, HyperfineVector):
            vectors.append(item)
        else:
            vectors.append(build_dataclass(HyperfineVector, item, f"register.nuclei[{index}]", marks, ("register", "nuclei", index)))
    values["nuclei"] = tuple(vectors)
    return build_dataclass(RegisterConfig, values, "register", marks, ("register",))


def _photon(values: Mapping[str, Any], marks: _Marks) -> PhotonModel:
    if values is None:
        return PhotonModel()
    if not isinstance(values, Mapping):
        raise ConfigError("section 'photon' must be a mapping", marks.line("photon"))
    values = dict(values)
    blink = values.pop("blink", None)
    if blink is not None:
        blink = dict(blink)
        blink.setdefault("grad_on_off", BLINK_GRADIENTS[0])
        blink.setdefault("grad_off_on", BLINK_GRADIENTS[1])
        values["blink"] = build_dataclass(BlinkRates, blink, "photon.blink", marks, ("photon", "blink"))
    return build_dataclass(PhotonModel, values, "photon", marks, ("photon",))


def parse_config(text: str, base_dir: Union[str, Path] = ".") -> ExperimentConfig:
    """Parse and validate a YAML config document.

    Raises:
        ConfigError: With the line of the problem when it can be located.
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None) from None
    marks = _Marks(node)
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping", 1)
    for key in data:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"unknown top-level key '{key}'", marks.line(key))
    if "command" not in data:
        raise ConfigError("missing 'command'")
    if "register" not in data:
        raise ConfigError("missing 'register' section")

    seed = data.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64):
        raise ConfigError("seed must be a 64-bit unsigned integer", marks.line("seed"))
    experiment = data.get("experiment") or {}
    if not isinstance(experiment, dict):
        raise ConfigError("section 'experiment' must be a mapping", marks.line("experiment"))

    cfg = ExperimentConfig(
        command=str(data["command"]),
        register=_register(data["register"], marks),
        photon=_photon(data.get("photon"), marks),
        experiment=experiment,
        seed=seed,
        output_dir=Path(str(data.get("output_dir", "out"))),
        base_dir=Path(base_dir),
        marks=marks,
    )
    logger.debug("parsed config for command %s", cfg.command)
    return cfg


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate the config file at ``path``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)


def config_to_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Plain-data echo of a config, written next to the artifacts."""

    def _plain(obj):
        if dataclasses.is_dataclass(obj):
            return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if isinstance(obj, (list, tuple)):
            return [_plain(v) for v in obj]
        if isinstance(obj, Mapping):
            return {str(k): _plain(v) for k, v in obj.items()}
        if isinstance(obj, Path):
            return str(obj)
        return obj

    return {
        "command": cfg.command,
        "seed": cfg.seed,
        "register": _plain(cfg.register),
        "photon": _plain(cfg.photon),
        "experiment": _plain(cfg.experiment),
    }
