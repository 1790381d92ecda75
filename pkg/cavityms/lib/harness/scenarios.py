"""Scenario runners.

Every scenario splits into independent tasks (one per sweep point or curve).
Tasks are plain module-level functions wrapped in `functools.partial` so that
they pickle into worker processes; results come back in submission order.
A task that raises `NumericalError` yields a single row with `ok = 0` and the
run goes on.

Natural units with g_eff = 1 unless the scenario says otherwise.
"""

from __future__ import annotations

import logging
import math
import multiprocessing
from abc import ABC, abstractmethod
from dataclasses import dataclass as std_dataclass
from functools import partial
from typing import Any, Callable, ClassVar, Dict, List, Optional, Sequence, Tuple, Type

import numpy as np

from cavityms.common import constant as C
from cavityms.common.util.log import log_func
from cavityms.lib import qops
from cavityms.lib.common.exception import InvalidConfigurationError, NumericalError
from cavityms.lib.dynamics import (
    IntegratorConfig,
    LindbladModel,
    cavity_decay_ops,
    effective_atomic_ops,
    rb87_model,
)
from cavityms.lib.fidelity import (
    GateSetup,
    gate_fidelity_series,
    max_gate_fidelity,
    max_state_fidelity,
    state_fidelity_series,
)
from cavityms.lib.hamiltonians import build_effective, build_effective_from_raman
from cavityms.lib.harness.config import SimulationConfig
from cavityms.lib.harness.spec import ScanResult, ScanSpec, finite_or_nan, provenance
from cavityms.lib.msgate import MsTrajectory
from cavityms.lib.params import (
    EffectiveParams,
    angular_to_mhz,
    balance_omega2,
    derive_rb87,
    diagnostics,
    from_table1,
    raman_for_effective,
)
from cavityms.lib.perturbation import dressed_basis, max_overlap_fidelity

logger = logging.getLogger(__name__)

Row = Dict[str, float]

# search window for fidelity peaks, in gate times
PEAK_WINDOW = (0.5, 1.5)
# dressed-basis cut-off for the perturbative series
SERIES_N_MAX = 40
FIG8_T_STOP_US = 400.0


@std_dataclass(frozen=True)
class Task:
    """Key columns of a point and the function that evaluates it."""

    keys: Dict[str, float]
    fn: Callable[[], List[Row]]


def _execute(task: Task) -> List[Row]:
    try:
        rows = task.fn()
    except NumericalError as e:
        logger.warning("point %s failed: %s", task.keys, e)
        return [{**task.keys, "ok": 0.0}]
    return [{**task.keys, **row, "ok": 1.0} for row in rows]


def run_tasks(tasks: Sequence[Task], jobs: int = 1) -> List[List[Row]]:
    """Evaluate tasks, in parallel when `jobs` > 1; order is preserved."""
    if jobs <= 1 or len(tasks) < 2:
        return [_execute(task) for task in tasks]
    with multiprocessing.Pool(processes=min(jobs, len(tasks))) as pool:
        return pool.map(_execute, tasks, chunksize=1)


###########
# Workers #
###########
def effective_setup(
    chi: float, delta: float, kappa: float = 0.0, n_max: int = 10, g_eff: float = 1.0
) -> GateSetup:
    """H′_eff with optional cavity decay on a qubit layout."""
    eff = EffectiveParams(chi=chi, g_eff=g_eff, delta=delta)
    layout = qops.HilbertLayout.qubits(n_max)
    model = LindbladModel(
        build_effective(eff, layout), tuple(cavity_decay_ops(kappa, layout))
    )
    return GateSetup(model, MsTrajectory.from_effective(eff))


def state_curve(
    chi: float, delta: float, i: int, n: int, t_stop: float, t_points: int, n_max: int
) -> List[Row]:
    """F_{i,n}(t) on [0, t_stop·t_gate]."""
    setup = effective_setup(chi, delta, n_max=n_max)
    times = np.linspace(0.0, t_stop * setup.t_gate, t_points)
    fids, truncs = state_fidelity_series(setup, i, n, times)
    return [
        dict(t=t, fidelity=f, trunc_pop=p) for t, f, p in zip(times, fids, truncs)
    ]


def state_peaks(chi: float, delta: float, i: int, n_max: int) -> List[Row]:
    """Exact and second-order perturbative max_t F_{i,0}."""
    setup = effective_setup(chi, delta, n_max=n_max)
    window = setup.window(*PEAK_WINDOW)
    exact = max_state_fidelity(setup, i, window)
    basis = dressed_basis(EffectiveParams(chi=chi, g_eff=1.0, delta=delta), SERIES_N_MAX)
    t_pert, pert = max_overlap_fidelity(basis, i, window)
    return [
        dict(
            t_exact=exact.t,
            exact=exact.value,
            t_perturbative=t_pert,
            perturbative=pert,
            trunc_pop=exact.trunc_pop,
        )
    ]


def _peak_row(setup: GateSetup, cfg: Optional[IntegratorConfig] = None) -> List[Row]:
    peak = max_gate_fidelity(setup, setup.window(*PEAK_WINDOW), cfg)
    return [dict(t=peak.t, fidelity=peak.value, trunc_pop=peak.trunc_pop)]


def gate_peak(chi: float, delta: float, kappa: float, n_max: int) -> List[Row]:
    """max_t F̄ of the effective model."""
    return _peak_row(effective_setup(chi, delta, kappa, n_max))


def atomic_decay_peak(
    gamma: float, delta_big: float, loops: float, n_max: int, rel_tol: float
) -> List[Row]:
    """max_t F̄ with effective spontaneous emission, g = Ω = 1 and χ = 0.

    g_eff = g²/Δ and δ = loops·g_eff.
    """
    g = 1.0
    g_eff = g**2 / delta_big
    rates = dict(gamma_1g=gamma, gamma_1e=gamma, gamma_2g=gamma, gamma_2e=gamma)
    cfg = raman_for_effective(g_eff, loops * g_eff, g, delta_big, **rates)
    layout = qops.HilbertLayout.qubits(n_max)
    model = LindbladModel(
        build_effective_from_raman(cfg, layout),
        tuple(effective_atomic_ops(cfg, layout)),
    )
    setup = GateSetup(model, MsTrajectory(g_eff, loops * g_eff))
    return _peak_row(setup, IntegratorConfig.for_density(rel_tol=rel_tol))


def rb87_curve(set_id: int, times: Sequence[float], n_max: int, rel_tol: float) -> List[Row]:
    """F̄(t) for a Table-1 set, t in μs."""
    cfg = from_table1(set_id)
    trajectory = MsTrajectory.from_effective(derive_rb87(cfg).effective)
    setup = GateSetup(rb87_model(cfg, n_max), trajectory)
    fids, truncs = gate_fidelity_series(
        setup, times, IntegratorConfig.for_density(rel_tol=rel_tol)
    )
    return [
        dict(t=t, fidelity=f, trunc_pop=p) for t, f, p in zip(times, fids, truncs)
    ]


def table1_row(set_id: int) -> List[Row]:
    """Derived Table-1 quantities; frequencies in 2π·kHz, times in μs."""
    cfg = from_table1(set_id)
    derived = derive_rb87(cfg)
    eff = derived.effective
    diag = diagnostics(cfg, eff)
    khz = 1e3
    return [
        dict(
            g_eff1_khz=angular_to_mhz(derived.g_eff_1) * khz,
            g_eff2_khz=angular_to_mhz(derived.g_eff_2) * khz,
            chi_khz=angular_to_mhz(eff.chi) * khz,
            omega2_mhz=angular_to_mhz(balance_omega2(cfg)),
            delta_mhz=angular_to_mhz(eff.delta),
            t_gate_us=diag.t_gate,
            loop_index=diag.loop_index,
            gamma_eff_khz=angular_to_mhz(diag.gamma_eff) * khz,
            p_spont=diag.p_spont,
            p_kappa_scale=diag.p_kappa_scale,
            trunc_pop=0.0,
        )
    ]


def config_peak(
    sim: SimulationConfig,
    parameter: str,
    value: float,
    t_stop: float,
    points: int,
    rel_tol: float,
) -> List[Row]:
    """max_t F̄ of a config file with one key replaced."""
    point = sim.with_value(parameter, value)
    setup = point.build()
    peak = max_gate_fidelity(
        setup, setup.window(0.0, t_stop), point.integrator(rel_tol), points=points
    )
    return [dict(t=peak.t, fidelity=peak.value, trunc_pop=peak.trunc_pop)]


def config_evolution(
    sim: SimulationConfig, t_stop: float, t_points: int, rel_tol: float
) -> List[Row]:
    """State and gate fidelity along [0, t_stop·t_gate]."""
    setup = sim.build()
    cfg = sim.integrator(rel_tol)
    times = np.linspace(0.0, t_stop * setup.t_gate, t_points)
    state, truncs = state_fidelity_series(setup, sim.initial, sim.photons, times, cfg)
    gate, _ = gate_fidelity_series(setup, times, cfg)
    return [
        dict(t=t, state_fidelity=s, gate_fidelity=g, trunc_pop=p)
        for t, s, g, p in zip(times, state, gate, truncs)
    ]


#############
# Scenarios #
#############
class Scenario(ABC):
    """A named table-producing run.

    Subclasses register themselves under the ids passed as `names`.
    """

    columns: ClassVar[Tuple[str, ...]]
    x: ClassVar[Optional[str]] = None
    y: ClassVar[Tuple[str, ...]] = ("fidelity",)
    group: ClassVar[Tuple[str, ...]] = ()
    log_x: ClassVar[bool] = False
    _registry: ClassVar[Dict[str, Type[Scenario]]] = {}

    def __init_subclass__(cls, names: Tuple[str, ...] = (), **kwargs: Any) -> None:
        """Register."""
        super().__init_subclass__(**kwargs)
        for name in names:
            Scenario._registry[name] = cls

    def __init__(self, spec: ScanSpec, sim: Optional[SimulationConfig] = None) -> None:
        """Initialize."""
        self.spec = spec
        self.sim = sim

    @classmethod
    def create(cls, spec: ScanSpec, sim: Optional[SimulationConfig] = None) -> Scenario:
        """Scenario registered for `spec.scenario`."""
        try:
            scenario_cls = cls._registry[spec.scenario]
        except KeyError:
            raise InvalidConfigurationError(
                f"no runner for {spec.scenario!r}", key="scan.scenario"
            ) from None
        return scenario_cls(spec, sim)

    @classmethod
    def names(cls) -> List[str]:
        """Registered ids."""
        return sorted(cls._registry)

    @abstractmethod
    def tasks(self) -> List[Task]:
        """Independent units of work in output order."""

    def extra_provenance(self) -> Dict[str, Any]:
        """Scenario inputs not captured by the ScanSpec."""
        return {}

    def _pick(self, quick: int, full: int) -> int:
        return full if self.spec.full else quick

    @log_func(logger_=logger, func_input=False, func_output=False)
    def run(self) -> ScanResult:
        """Run every task and assemble the table."""
        chunks = run_tasks(self.tasks(), self.spec.jobs)
        rows = [
            [finite_or_nan(row.get(name)) for name in self.columns]
            for chunk in chunks
            for row in chunk
        ]
        header = provenance(self.spec, self.extra_provenance())
        result = ScanResult(
            scenario=self.spec.scenario,
            columns=list(self.columns),
            rows=rows,
            provenance=header,
            x=self.x,
            y=list(self.y),
            group=list(self.group),
            log_x=self.log_x or self.spec.spacing == "log",
        )
        if result.flagged:
            logger.warning(C.Template.FLAGGED_ROWS.format(count=result.flagged))
        if result.max_trunc_pop > C.Tolerance.TRUNCATION:
            header["truncation_warning"] = f"{result.max_trunc_pop:.3e}"
            logger.warning("Fock truncation population reached %.2e", result.max_trunc_pop)
        return result


class Fig3a(Scenario, names=(C.Scenario.FIG3A,)):
    """F_{1,n}(t) at δ = 2 for χ = 0 and χ = 0.5 with n = 0, 1, 2 photons."""

    columns = ("chi", "n", "i", "t", "fidelity", "trunc_pop", "ok")
    x = "t"
    group = ("chi", "n")
    # (χ, n)
    curves = ((0.0, 0), (0.5, 0), (0.5, 1), (0.5, 2))
    delta = 2.0
    n_max = 16

    def tasks(self) -> List[Task]:
        """One curve per (χ, n)."""
        spec = self.spec
        return [
            Task(
                dict(chi=chi, n=n, i=1),
                partial(
                    state_curve, chi, self.delta, 1, n, spec.t_stop, spec.t_points, self.n_max
                ),
            )
            for chi, n in self.curves
        ]


class Fig3b(Scenario, names=(C.Scenario.FIG3B,)):
    """F_{i,0}(t) at δ = 2, χ = 0.5 for every logical start, plus the χ = 0 curve."""

    columns = ("chi", "n", "i", "t", "fidelity", "trunc_pop", "ok")
    x = "t"
    group = ("chi", "i")
    delta = 2.0
    n_max = 12

    def tasks(self) -> List[Task]:
        """χ = 0 reference and i = 1..4 at χ = 0.5."""
        spec = self.spec
        curves = [(0.0, 1)] + [(0.5, i) for i in (1, 2, 3, 4)]
        return [
            Task(
                dict(chi=chi, n=0, i=i),
                partial(
                    state_curve, chi, self.delta, i, 0, spec.t_stop, spec.t_points, self.n_max
                ),
            )
            for chi, i in curves
        ]


class Fig4(Scenario, names=(C.Scenario.FIG4,)):
    """Exact against perturbative max_t F_{i,0} versus χ at δ = 4, i = 1, 2."""

    columns = (
        "chi",
        "i",
        "t_exact",
        "exact",
        "t_perturbative",
        "perturbative",
        "trunc_pop",
        "ok",
    )
    x = "chi"
    y = ("exact", "perturbative")
    group = ("i",)
    delta = 4.0
    n_max = 10

    def tasks(self) -> List[Task]:
        """One task per (χ, i)."""
        chis = self.spec.sweep(0.0, 0.5, self._pick(25, 101))
        return [
            Task(dict(chi=chi, i=i), partial(state_peaks, float(chi), self.delta, i, self.n_max))
            for i in (1, 2)
            for chi in chis
        ]


class Fig5(Scenario, names=(C.Scenario.FIG5,)):
    """max_t F̄ versus χ for δ = 2, 4, 8, 16 (closed system)."""

    columns = ("delta", "chi", "t", "fidelity", "trunc_pop", "ok")
    x = "chi"
    group = ("delta",)
    deltas = (2.0, 4.0, 8.0, 16.0)

    def tasks(self) -> List[Task]:
        """One task per (δ, χ)."""
        chis = self.spec.sweep(0.0, 1.0, self._pick(25, 101))
        return [
            Task(
                dict(delta=delta, chi=chi),
                partial(gate_peak, float(chi), delta, 0.0, 12 if delta < 4 else 8),
            )
            for delta in self.deltas
            for chi in chis
        ]


class Fig6(Scenario, names=(C.Scenario.FIG6,)):
    """max_t F̄ versus δ with cavity decay κ = 0.1, 1, 10 (χ = 0)."""

    columns = ("kappa", "delta", "t", "fidelity", "trunc_pop", "ok")
    x = "delta"
    group = ("kappa",)
    log_x = True
    kappas = (0.1, 1.0, 10.0)

    @staticmethod
    def n_max(delta: float) -> int:
        """Photon cut-off; |α| ≤ 2/δ, and the Liouvillian must stay small."""
        return 7 if delta < 8 else 5

    def tasks(self) -> List[Task]:
        """One task per (κ, δ)."""
        deltas = self.spec.sweep(2.0, 1000.0, self._pick(25, 100), "log")
        return [
            Task(
                dict(kappa=kappa, delta=delta),
                partial(gate_peak, 0.0, float(delta), kappa, self.n_max(delta)),
            )
            for kappa in self.kappas
            for delta in deltas
        ]


class Fig7(Scenario, names=(C.Scenario.FIG7,)):
    """max_t F̄ versus γ/g with effective spontaneous emission, Ω = g.

    Curves for Δ/g = 100, 1000 and δ/g_eff = 2, 50, 200; `full` only refines
    the γ grid.
    """

    columns = ("delta_big", "loops", "gamma", "t", "fidelity", "trunc_pop", "ok")
    x = "gamma"
    group = ("delta_big", "loops")
    log_x = True
    delta_bigs = (100.0, 1000.0)
    loops = (2.0, 50.0, 200.0)

    def tasks(self) -> List[Task]:
        """One task per (Δ, δ/g_eff, γ)."""
        gammas = self.spec.sweep(1e-2, 10.0, self._pick(7, 25), "log")
        return [
            Task(
                dict(delta_big=delta_big, loops=k, gamma=gamma),
                partial(
                    atomic_decay_peak,
                    float(gamma),
                    delta_big,
                    k,
                    8 if k < 10 else 4,
                    self.spec.rel_tol,
                ),
            )
            for delta_big in self.delta_bigs
            for k in self.loops
            for gamma in gammas
        ]


class Fig8(Scenario, names=(C.Scenario.RB87, C.Scenario.FIG8)):
    """87Rb F̄(t) for both Table-1 sets on a common grid in μs."""

    columns = ("set", "t", "fidelity", "trunc_pop", "ok")
    x = "t"
    group = ("set",)
    n_max = 4

    def tasks(self) -> List[Task]:
        """One time series per set."""
        points = self.spec.t_points if not self.spec.full else max(self.spec.t_points, 801)
        times = np.linspace(0.0, FIG8_T_STOP_US, points)
        return [
            Task(dict(set=s), partial(rb87_curve, s, times, self.n_max, self.spec.rel_tol))
            for s in (1, 2)
        ]


class Table1(Scenario, names=(C.Scenario.TABLE1,)):
    """Derived parameters of both Table-1 sets."""

    columns = (
        "set",
        "g_eff1_khz",
        "g_eff2_khz",
        "chi_khz",
        "omega2_mhz",
        "delta_mhz",
        "t_gate_us",
        "loop_index",
        "gamma_eff_khz",
        "p_spont",
        "p_kappa_scale",
        "trunc_pop",
        "ok",
    )
    y = ()

    def tasks(self) -> List[Task]:
        """One row per set."""
        return [Task(dict(set=s), partial(table1_row, s)) for s in (1, 2)]


class Custom(Scenario, names=(C.Scenario.CUSTOM,)):
    """max_t F̄ of a config file while sweeping one of its keys."""

    columns = ("value", "t", "fidelity", "trunc_pop", "ok")
    x = "value"

    def __init__(self, spec: ScanSpec, sim: Optional[SimulationConfig] = None) -> None:
        """A config file and a swept key are required."""
        if sim is None:
            raise InvalidConfigurationError("a custom scan needs a config file")
        if not spec.parameter:
            raise InvalidConfigurationError("missing", key="scan.parameter")
        if spec.start is None or spec.stop is None:
            raise InvalidConfigurationError("a custom scan needs start and stop", key="scan")
        super().__init__(spec, sim)

    def extra_provenance(self) -> Dict[str, Any]:
        """The whole config file."""
        return dict(self.sim.config.flatten())

    def tasks(self) -> List[Task]:
        """One task per value of the swept key."""
        spec = self.spec
        return [
            Task(
                dict(value=value),
                partial(
                    config_peak,
                    self.sim,
                    spec.parameter,
                    float(value),
                    spec.t_stop,
                    spec.t_points,
                    spec.rel_tol,
                ),
            )
            for value in spec.sweep(math.nan, math.nan, 25)
        ]


class Evolution(Scenario, names=(C.Scenario.EVOLVE,)):
    """State and gate fidelity of a config file along time."""

    columns = ("t", "state_fidelity", "gate_fidelity", "trunc_pop", "ok")
    x = "t"
    y = ("state_fidelity", "gate_fidelity")

    def __init__(self, spec: ScanSpec, sim: Optional[SimulationConfig] = None) -> None:
        """A config file is required."""
        if sim is None:
            raise InvalidConfigurationError("evolve needs a config file")
        super().__init__(spec, sim)

    def extra_provenance(self) -> Dict[str, Any]:
        """The whole config file."""
        return dict(self.sim.config.flatten())

    def tasks(self) -> List[Task]:
        """A single time series."""
        spec = self.spec
        return [
            Task(
                {},
                partial(config_evolution, self.sim, spec.t_stop, spec.t_points, spec.rel_tol),
            )
        ]


def run_scenario(spec: ScanSpec, sim: Optional[SimulationConfig] = None) -> ScanResult:
    """Run the scenario named by `spec`."""
    return Scenario.create(spec, sim).run()
