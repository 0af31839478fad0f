import dataclasses
import math
import tomllib
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from speed import res_dir
from speed.src_py.cli import logger
from speed.src_py.errors import ConfigError, DomainError
from speed.src_py.heargmax.ArgmaxCircuitConfig import ArgmaxCircuitConfig
from speed.src_py.protocol.attack import AttackScenario
from speed.src_py.protocol.CollusionSpec import VIEWPOINTS, CollusionSpec
from speed.src_py.protocol.ensembles import ENSEMBLE_KINDS
from speed.src_py.protocol.session import HE_MODES, MODES

DEFAULT_CONFIG = res_dir / "default_config.toml"

_SECTIONS = ("heargmax", "attack")
_CIRCUIT_KEYS = ("offset", "b_i", "b_theta1", "b_theta2", "sigma_c")
_HEARGMAX_KEYS = _CIRCUIT_KEYS + ("target_accuracy", "calibration_trials", "bench_trials")


@dataclasses.dataclass
class ExperimentConfig:
    """Every parameter of a run, resolved from the default file, an optional user file and CLI flags."""
    teachers: int
    classes: int
    queries: int
    gamma: float
    tau: float
    viewpoint: str
    published: bool
    mode: str
    he: str
    ensemble: str
    error_rate: float
    seed: int
    delta: float
    lmax: int
    workers: int
    out: Path
    sweep_param: str
    sweep_range: str
    samples: int
    method: str
    variance_tolerance: float
    ks_threshold: float
    circuit: ArgmaxCircuitConfig
    target_accuracy: float
    calibration_trials: int
    bench_trials: int
    attack: AttackScenario
    attack_trials: int
    votes: Optional[Path] = None
    reference_gamma: Optional[float] = None

    @classmethod
    def load(cls, path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> "ExperimentConfig":
        """
        Reads the defaults, then the file at path, then applies overrides whose value is not None.
        Override keys are flat; circuit constants (offset, b_i, sigma_c, ...) and attack_trials go to
        their sections.
        :raises ConfigError: on unknown keys or values of the wrong type
        :raises OSError: if path cannot be read
        """
        with open(DEFAULT_CONFIG, "rb") as f:
            raw = tomllib.load(f)
        if path is not None:
            logger.debug(f"Reading config from {path}")
            with open(path, "rb") as f:
                try:
                    user = tomllib.load(f)
                except tomllib.TOMLDecodeError as e:
                    raise ConfigError("config", str(path), f"Invalid config file {path}: {e}") from e
            for key, value in user.items():
                if key in _SECTIONS:
                    if not isinstance(value, dict):
                        raise ConfigError(key, value, f"[{key}] must be a table")
                    raw[key].update(value)
                else:
                    raw[key] = value
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key in _HEARGMAX_KEYS:
                raw["heargmax"][key] = value
            elif key == "attack_trials":
                raw["attack"]["trials"] = value
            else:
                raw[key] = value
        return cls._from_raw(raw)

    @classmethod
    def _from_raw(cls, raw: Dict[str, Any]) -> "ExperimentConfig":
        raw = dict(raw)
        heargmax = dict(raw.pop("heargmax"))
        attack = dict(raw.pop("attack"))
        try:
            circuit = ArgmaxCircuitConfig(**{k: heargmax.pop(k) for k in _CIRCUIT_KEYS if k in heargmax})
            scenario = AttackScenario.from_dict(attack)
            for key in ("counts", "k0", "k1"):
                attack.pop(key)
        except DomainError as e:
            raise ConfigError(e.parameter, e.value, str(e)) from e
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError("config", None, f"Incomplete or malformed section: {e}") from e
        raw.update(circuit=circuit, attack=scenario, attack_trials=attack.pop("trials"),
                   target_accuracy=heargmax.pop("target_accuracy"),
                   calibration_trials=heargmax.pop("calibration_trials"),
                   bench_trials=heargmax.pop("bench_trials"))
        leftover = list(heargmax) + list(attack)
        names = {f.name for f in dataclasses.fields(cls)}
        leftover += [k for k in raw if k not in names]
        if leftover:
            raise ConfigError(leftover[0], None, f"Unknown config key(s): {', '.join(leftover)}")
        raw["out"] = Path(raw["out"])
        if raw.get("votes") is not None:
            raw["votes"] = Path(raw["votes"])
        return cls(**raw)

    def _check(self, name: str, ok: bool, message: str):
        if not ok:
            raise ConfigError(name, getattr(self, name, None), f"{name}: {message}")

    def validate(self, command: Optional[str] = None):
        """
        Checks every parameter domain before a run.
        :param command: the subcommand about to run; the votes file is required by "accountant" and the
                        attack scenario only checked for "attack-demo"
        :raises ConfigError: naming the first invalid parameter
        :raises FileNotFoundError: if a referenced input file is missing
        """
        def is_int(v) -> bool:
            return isinstance(v, int) and not isinstance(v, bool)

        def is_real(v) -> bool:
            return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)

        self._check("teachers", is_int(self.teachers) and self.teachers >= 1, "must be a positive integer")
        self._check("classes", is_int(self.classes) and self.classes >= 2, "must be an integer >= 2")
        self._check("queries", is_int(self.queries) and self.queries >= 0, "must be a non-negative integer")
        self._check("gamma", is_real(self.gamma) and self.gamma > 0, "must be a positive real")
        self._check("tau", is_real(self.tau) and 0 < self.tau <= 1, "must lie in (0, 1]")
        self._check("viewpoint", self.viewpoint in VIEWPOINTS, f"must be one of {VIEWPOINTS}")
        self._check("published", isinstance(self.published, bool), "must be true or false")
        self._check("mode", self.mode in MODES, f"must be one of {MODES}")
        self._check("he", self.he in HE_MODES, f"must be one of {HE_MODES}")
        self._check("ensemble", self.ensemble in ENSEMBLE_KINDS, f"must be one of {ENSEMBLE_KINDS}")
        self._check("error_rate", is_real(self.error_rate) and 0 <= self.error_rate <= 1, "must lie in [0, 1]")
        self._check("seed", is_int(self.seed) and self.seed >= 0, "must be a non-negative integer")
        self._check("delta", is_real(self.delta) and 0 < self.delta < 1, "must lie in (0, 1)")
        self._check("lmax", is_int(self.lmax) and self.lmax >= 1, "must be a positive integer")
        self._check("workers", is_int(self.workers) and self.workers >= 1, "must be a positive integer")
        self._check("sweep_param", self.sweep_param in ("gamma", "tau"), "must be 'gamma' or 'tau'")
        self._check("samples", is_int(self.samples) and self.samples >= 10_000, "must be an integer >= 10000")
        self._check("method", self.method in ("shares", "collapsed"), "must be 'shares' or 'collapsed'")
        self._check("variance_tolerance", is_real(self.variance_tolerance) and self.variance_tolerance > 0,
                    "must be positive")
        self._check("ks_threshold", is_real(self.ks_threshold) and 0 < self.ks_threshold < 1, "must lie in (0, 1)")
        self._check("reference_gamma", self.reference_gamma is None or (is_real(self.reference_gamma)
                                                                        and self.reference_gamma > 0),
                    "must be a positive real")
        self._check("target_accuracy", is_real(self.target_accuracy) and 0 < self.target_accuracy < 1,
                    "must lie in (0, 1)")
        for name in ("calibration_trials", "bench_trials", "attack_trials"):
            self._check(name, is_int(getattr(self, name)) and getattr(self, name) >= 2, "must be an integer >= 2")
        if command == "attack-demo":
            if len(self.attack.counts) != self.classes:
                raise ConfigError("attack", list(self.attack.counts),
                                  f"attack counts have {len(self.attack.counts)} classes, expected {self.classes}")
            if sum(self.attack.counts) > self.teachers:
                raise ConfigError("attack", list(self.attack.counts), f"attack counts exceed {self.teachers} teachers")
        self.circuit.validate(self.teachers, self.classes, self.gamma)
        self.sweep_values()
        try:
            self.collusion().params(self.gamma, self.viewpoint).snapped()
        except DomainError as e:
            raise ConfigError(e.parameter, e.value, str(e)) from e
        if command == "accountant":
            if self.votes is None:
                raise ConfigError("votes", None, "this command needs --votes")
            if not self.votes.is_file():
                raise FileNotFoundError(f"Votes file {self.votes} does not exist")

    def collusion(self) -> CollusionSpec:
        """The first n - round(tau n) teachers collude, so that the honest ones hold tau of the noise."""
        honest = int(math.floor(self.tau * self.teachers + 0.5))
        return CollusionSpec.first(self.teachers, self.teachers - honest, self.published)

    def sweep_values(self) -> Tuple[float, ...]:
        """
        Parses sweep_range: either comma separated values or start:stop:num for num evenly spaced points.
        :raises ConfigError: on fewer than two points or non-positive values
        """
        text = str(self.sweep_range).strip()
        try:
            if ":" in text:
                start, stop, num = text.split(":")
                start, stop, num = float(start), float(stop), int(num)
                values = tuple(start + (stop - start) * i / (num - 1) for i in range(num)) if num >= 2 else ()
            else:
                values = tuple(float(v) for v in text.split(","))
        except ValueError as e:
            raise ConfigError("sweep_range", text, f"sweep_range: cannot parse {text!r}") from e
        if len(values) < 2:
            raise ConfigError("sweep_range", text, "sweep_range: needs at least two points")
        if any(not (math.isfinite(v) and v > 0) for v in values):
            raise ConfigError("sweep_range", text, "sweep_range: values must be positive")
        if self.sweep_param == "tau" and any(v > 1 for v in values):
            raise ConfigError("sweep_range", text, "sweep_range: tau values must lie in (0, 1]")
        return values

    def to_dict(self) -> Dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        out["out"] = str(self.out)
        out["votes"] = None if self.votes is None else str(self.votes)
        out["circuit"] = self.circuit.to_dict()
        out["attack"] = {"counts": list(self.attack.counts), "k0": self.attack.k0, "k1": self.attack.k1}
        return out
