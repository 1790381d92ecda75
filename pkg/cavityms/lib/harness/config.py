"""Simulation config files.

Flat INI sections of `key = value` pairs:

    [system]      model, atoms, n_max, units, initial, photons
    [drive]       g, omega1, omega2, delta1_big, delta2_big, delta1, delta2
                  | chi, g_eff, delta | rb87: set or g, omega1, omega2,
                  delta1_big, delta2_big, delta, omega12
    [decay]       kappa, gamma, gamma_1g, gamma_1e, gamma_2g, gamma_2e
    [scan]        scenario, parameter, start, stop, points, spacing,
                  t_stop, t_points
    [integrator]  rel_tol, abs_tol, max_step

With `units = mhz` (default) frequencies are quoted in 2π·MHz and times come
out in μs; `units = natural` takes every value as is.
"""

from __future__ import annotations

import configparser
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from cavityms.common import constant as C
from cavityms.common.util.config import Config
from cavityms.lib import qops
from cavityms.lib.common.exception import InvalidConfigurationError
from cavityms.lib.dynamics import (
    IntegratorConfig,
    LindbladModel,
    cavity_decay_ops,
    effective_atomic_ops,
    raman_decay_ops,
    rb87_model,
)
from cavityms.lib.fidelity import GateSetup
from cavityms.lib.hamiltonians import (
    StarkFrame,
    build_effective,
    build_effective_from_raman,
    build_full_raman,
)
from cavityms.lib.msgate import MsTrajectory
from cavityms.lib.params import (
    RB87_OMEGA12_MHZ,
    RB87_TWO_GAMMA_MHZ,
    EffectiveParams,
    RamanConfig,
    Rb87Config,
    derive_effective,
    derive_rb87,
    from_table1,
    mhz_to_angular,
)
from cavityms.lib.harness.spec import ScanSpec

logger = logging.getLogger(__name__)

UNITS = ("mhz", "natural")

# section -> key -> parser
SCHEMA: Dict[str, Dict[str, type]] = {
    "system": dict(
        model=str, atoms=int, n_max=int, units=str, initial=int, photons=int
    ),
    "drive": dict(
        g=float,
        omega1=float,
        omega2=float,
        delta1_big=float,
        delta2_big=float,
        delta1=float,
        delta2=float,
        chi=float,
        g_eff=float,
        delta=float,
        omega12=float,
        set=int,
    ),
    "decay": dict(
        kappa=float,
        gamma=float,
        gamma_1g=float,
        gamma_1e=float,
        gamma_2g=float,
        gamma_2e=float,
    ),
    "scan": dict(
        scenario=str,
        parameter=str,
        start=float,
        stop=float,
        points=int,
        spacing=str,
        t_stop=float,
        t_points=int,
    ),
    "integrator": dict(rel_tol=float, abs_tol=float, max_step=float),
}

# [drive]/[decay] keys that are not frequencies
_UNITLESS = {"drive.set"}
_RAMAN_KEYS = ("g", "omega1", "omega2", "delta1_big", "delta2_big")
_EFFECTIVE_KEYS = ("chi", "g_eff", "delta")
_DEFAULT_N_MAX = {C.Model.RAMAN: 3, C.Model.EFFECTIVE: 10, C.Model.RB87: 4}


def _coerce(key: str, parser: type, raw: str) -> Any:
    try:
        return parser(raw)
    except ValueError:
        raise InvalidConfigurationError(
            f"expected {parser.__name__}, got {raw!r}", key=key
        ) from None


def parse_config(text: str) -> Config:
    """Parse INI text into a dotted `Config`, checking every key."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise InvalidConfigurationError(str(e).splitlines()[0]) from e

    config = Config()
    for section in parser.sections():
        if section not in SCHEMA:
            raise InvalidConfigurationError("unknown section", key=section)
        for key, raw in parser.items(section):
            dotted = f"{section}.{key}"
            if key not in SCHEMA[section]:
                raise InvalidConfigurationError("unknown key", key=dotted)
            config.add(dotted, _coerce(dotted, SCHEMA[section][key], raw))
    return config


def load_config(path: str | os.PathLike) -> SimulationConfig:
    """Read and validate a config file."""
    try:
        with open(path, "r", encoding="utf8") as f:
            text = f.read()
    except OSError as e:
        raise InvalidConfigurationError(f"cannot read {path}: {e.strerror}") from e
    return SimulationConfig.from_config(parse_config(text))


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    """A validated config file.

    The raw values stay in `config` (file units) so that a sweep can replace
    one key and rebuild.
    """

    config: Config
    model: str
    n_atoms: int
    n_max: int
    units: str
    initial: int
    photons: int

    @classmethod
    def from_config(cls, config: Config) -> SimulationConfig:
        """Validate the [system] section and the model parameters."""
        model = config.query("system.model", C.Model.EFFECTIVE)
        if model not in C.Model:
            raise InvalidConfigurationError(f"unknown model {model!r}", key="system.model")
        units = config.query("system.units", "mhz")
        if units not in UNITS:
            raise InvalidConfigurationError(f"must be one of {UNITS}", key="system.units")
        sim = cls(
            config=config,
            model=model,
            n_atoms=config.query("system.atoms", 2),
            n_max=config.query("system.n_max", _DEFAULT_N_MAX[model]),
            units=units,
            initial=config.query("system.initial", 1),
            photons=config.query("system.photons", 0),
        )
        if sim.n_atoms != 2:
            raise InvalidConfigurationError(
                "gate simulations need two atoms", key="system.atoms"
            )
        if sim.n_max < 1:
            raise InvalidConfigurationError("must be >= 1", key="system.n_max")
        if sim.initial not in (1, 2, 3, 4):
            raise InvalidConfigurationError("must be 1..4", key="system.initial")
        if not 0 <= sim.photons < sim.n_max:
            raise InvalidConfigurationError(
                f"must lie in [0, {sim.n_max})", key="system.photons"
            )
        # fail early on bad drive values
        sim.trajectory()
        return sim

    def with_value(self, key: str, value: float) -> SimulationConfig:
        """Copy with one dotted key replaced (file units)."""
        section, _, name = key.partition(".")
        if name not in SCHEMA.get(section, {}):
            raise InvalidConfigurationError("unknown key", key=key)
        config = self.config.copy()
        config.update_key(key, SCHEMA[section][name](value))
        return SimulationConfig.from_config(config)

    @property
    def time_unit(self) -> str:
        """Unit of the time column."""
        return "us" if self.units == "mhz" else "1/freq"

    def _freq(self, key: str, default: Optional[float] = None) -> float:
        value = self.config.query(key, default)
        if value is None:
            raise InvalidConfigurationError("required", key=key)
        if self.units == "mhz" and key not in _UNITLESS:
            return mhz_to_angular(value)
        return float(value)

    def _has(self, section: str, keys: Tuple[str, ...]) -> bool:
        return all(self.config.query(f"{section}.{k}", None) is not None for k in keys)

    @property
    def kappa(self) -> float:
        """Cavity decay rate."""
        return self._freq("decay.kappa", 0.0)

    def _gammas(self) -> Dict[str, float]:
        common = self.config.query("decay.gamma", 0.0)
        return {
            name: self._freq(f"decay.{name}", common)
            for name in ("gamma_1g", "gamma_1e", "gamma_2g", "gamma_2e")
        }

    def raman(self) -> RamanConfig:
        """Raman-scheme parameters from [drive] and [decay]."""
        return RamanConfig(
            g=self._freq("drive.g"),
            omega1=self._freq("drive.omega1"),
            omega2=self._freq("drive.omega2"),
            delta1_big=self._freq("drive.delta1_big"),
            delta2_big=self._freq("drive.delta2_big"),
            delta1=self._freq("drive.delta1", 0.0),
            delta2=self._freq("drive.delta2", 0.0),
            kappa=self.kappa,
            n_atoms=self.n_atoms,
            **self._gammas(),
        )

    def effective(self) -> EffectiveParams:
        """Effective parameters, given directly or derived from the drive."""
        if self._has("drive", _EFFECTIVE_KEYS):
            return EffectiveParams(
                chi=self._freq("drive.chi"),
                g_eff=self._freq("drive.g_eff"),
                delta=self._freq("drive.delta"),
            )
        if self._has("drive", _RAMAN_KEYS):
            return derive_effective(self.raman())
        raise InvalidConfigurationError(
            "give chi, g_eff, delta or the Raman drive", key="drive"
        )

    def rb87(self) -> Rb87Config:
        """87Rb parameters: a Table-1 set or explicit values."""
        set_id = self.config.query("drive.set", None)
        if set_id is not None:
            if self.units != "mhz":
                raise InvalidConfigurationError("Table-1 sets need units = mhz", key="drive.set")
            return from_table1(set_id)
        mhz = self.units == "mhz"
        omega2 = self.config.query("drive.omega2", None)
        return Rb87Config(
            g=self._freq("drive.g"),
            kappa=self.kappa,
            delta1_big=self._freq("drive.delta1_big"),
            delta2_big=self._freq("drive.delta2_big"),
            omega1=self._freq("drive.omega1"),
            delta=self._freq("drive.delta"),
            omega12=self._freq("drive.omega12", RB87_OMEGA12_MHZ if mhz else None),
            gamma=self._freq("decay.gamma", RB87_TWO_GAMMA_MHZ / 2 if mhz else None),
            omega2=None if omega2 is None else self._freq("drive.omega2"),
        )

    def trajectory(self) -> MsTrajectory:
        """Ideal gate trajectory of the configured model."""
        if self.model == C.Model.RB87:
            return MsTrajectory.from_effective(derive_rb87(self.rb87()).effective)
        if self.model == C.Model.RAMAN:
            return MsTrajectory.from_effective(derive_effective(self.raman()))
        return MsTrajectory.from_effective(self.effective())

    def build(self) -> GateSetup:
        """Model, trajectory and observation frame."""
        trajectory = self.trajectory()
        if self.model == C.Model.RB87:
            return GateSetup(rb87_model(self.rb87(), self.n_max), trajectory)

        if self.model == C.Model.RAMAN:
            cfg = self.raman()
            layout = qops.HilbertLayout.uniform(self.n_atoms, 4, self.n_max)
            ops = cavity_decay_ops(cfg.kappa, layout) + raman_decay_ops(cfg, layout)
            model = LindbladModel(build_full_raman(cfg, layout), tuple(ops))
            return GateSetup(model, trajectory, StarkFrame.for_raman(cfg, layout))

        layout = qops.HilbertLayout.qubits(self.n_max, self.n_atoms)
        if self._has("drive", _EFFECTIVE_KEYS):
            model = LindbladModel(
                build_effective(self.effective(), layout),
                tuple(cavity_decay_ops(self.kappa, layout)),
            )
            return GateSetup(model, trajectory)
        cfg = self.raman()
        ops = cavity_decay_ops(cfg.kappa, layout) + effective_atomic_ops(cfg, layout)
        model = LindbladModel(build_effective_from_raman(cfg, layout), tuple(ops))
        return GateSetup(model, trajectory)

    def integrator(self, rel_tol: Optional[float] = None) -> IntegratorConfig:
        """Runge-Kutta settings; an explicit `rel_tol` wins over the file."""
        options = {
            key: self.config.query(f"integrator.{key}")
            for key in ("rel_tol", "abs_tol", "max_step")
            if self.config.query(f"integrator.{key}", None) is not None
        }
        if rel_tol is not None:
            options["rel_tol"] = rel_tol
        return IntegratorConfig.for_density(**options)

    def scan_spec(self, **overrides: Any) -> ScanSpec:
        """ScanSpec from the [scan] section (scenario defaults to `custom`)."""
        values = dict(self.config.query("scan", {}))
        values.setdefault("scenario", C.Scenario.CUSTOM)
        values.update({k: v for k, v in overrides.items() if v is not None})
        if values["scenario"] == C.Scenario.CUSTOM and "parameter" not in values:
            raise InvalidConfigurationError(
                "a custom scan needs a parameter", key="scan.parameter"
            )
        rel_tol = self.config.query("integrator.rel_tol", None)
        if rel_tol is not None:
            values.setdefault("rel_tol", rel_tol)
        return ScanSpec(**values)
