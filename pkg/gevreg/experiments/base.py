import logging
import os
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Sequence

from gevreg.config import ExperimentConfig, build_dataclass, config_to_dict
from gevreg.errors import ConfigError
from gevreg.experiments.writers import csv_text, json_text

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("csv", "json", "both")


class Experiment(ABC):
    """Abstract base of the command-line experiments.

    An experiment runs in three steps: ``validate`` turns the raw
    ``experiment`` section into the subclass' ``Params`` dataclass, the
    subclass' ``_compute`` simulates and registers its artifacts as text, and
    ``_write`` puts every artifact into the output directory in name order.
    Nothing is written when validation or computation fails.

    Attributes:
        name (str): Command name.
        Params (type): Dataclass of the ``experiment`` section.
        stochastic (bool): Whether the command needs a seed.
        config (ExperimentConfig): Parsed config.
        threads (int): Worker threads for sweeps.
        params: Validated ``Params`` instance, set by ``validate``.
        artifacts (dict): File name to text, filled by ``_compute``.

    Methods:
        _compute(self):
            Abstract method to be implemented by subclasses. Runs the
            simulation and registers its artifacts.

        _validate(self):
            Optional hook for checks that span several sections.
    """

    name = ""
    Params = None
    stochastic = False

    def __init__(self, config: ExperimentConfig, threads: int = 1, output_format: str = "both"):
        if output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output format must be one of {OUTPUT_FORMATS}")
        self.config = config
        self.threads = threads if threads > 0 else (os.cpu_count() or 1)
        self.output_format = output_format
        self.params = None
        self.artifacts: Dict[str, str] = {}

    @property
    def seed(self) -> int:
        return self.config.seed if self.config.seed is not None else 0

    def validate(self):
        """Parse the ``experiment`` section and run the subclass checks.

        Raises:
            ConfigError: On any invalid entry.
        """
        self.params = build_dataclass(self.Params, self.config.experiment, "experiment", self.config.marks, ("experiment",))
        if self.stochastic and self.config.seed is None:
            raise ConfigError(f"command '{self.name}' is stochastic and needs a seed")
        self._validate()

    def _validate(self):
        pass

    @abstractmethod
    def _compute(self):
        """Run the experiment and register artifacts with the ``_add_*`` helpers.

        When this method is called, ``self.params`` holds the validated
        parameters and ``self.artifacts`` is empty.
        """
        pass

    def run(self, out_dir: Path = None) -> List[Path]:
        """Validate, compute and write; returns the written paths."""
        self.validate()
        self.artifacts.clear()
        logger.info("running %s", self.name)
        self._compute()
        self._add_json("config_echo.json", config_to_dict(self.config), primary=True)
        paths = self._write(Path(out_dir) if out_dir is not None else self.config.output_dir)
        logger.info("%s finished, %d files written", self.name, len(paths))
        return paths

    def _add_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]], primary: bool = False):
        if primary or self.output_format in ("csv", "both"):
            self.artifacts[name] = csv_text(header, rows)

    def _add_json(self, name: str, data: Any, primary: bool = False):
        if primary or self.output_format in ("json", "both"):
            self.artifacts[name] = json_text(data)

    def _add_text(self, name: str, text: str):
        self.artifacts[name] = text

    def _write(self, out_dir: Path) -> List[Path]:
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for name in sorted(self.artifacts):
            path = out_dir / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self.artifacts[name])
            paths.append(path)
        return paths

    def map_ordered(self, fn: Callable, items: Sequence) -> List:
        """``[fn(x) for x in items]``, on ``threads`` workers when more than one."""
        if self.threads <= 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))

    def resolve(self, path: str) -> Path:
        """Data paths in the config are relative to the config file."""
        p = Path(path)
        return p if p.is_absolute() else self.config.base_dir / p
