"""Fidelity metrics.

State fidelity to the truth-table targets (photons traced out), the
perturbative overlap fidelity, the average gate fidelity

    F̄ = [Σ_k tr(U P_k U† E(P_k)) + 16] / 80

over the sixteen two-qubit Pauli products P_k, and maximization over time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from typing_extensions import Literal

from cavityms.common import constant as C
from cavityms.common.util.log import log_func
from cavityms.lib import qops
from cavityms.lib.common.exception import ContractViolationError, InvalidDimensionError
from cavityms.lib.dynamics import IntegratorConfig, LindbladModel, Propagation, propagate
from cavityms.lib.hamiltonians import StarkFrame
from cavityms.lib.msgate import MsTrajectory, ideal_gate_map, target_state

if TYPE_CHECKING:
    from cavityms.lib.perturbation import OverlapSeries

logger = logging.getLogger(__name__)

Reference = Literal["target", "instantaneous"]
PAULIS = qops.pauli_products()


def _qubit_indices(layout: qops.HilbertLayout) -> np.ndarray:
    """Atomic indices of |gg⟩, |ge⟩, |eg⟩, |ee⟩ (atom 1 slowest)."""
    if layout.n_atoms != 2:
        raise InvalidDimensionError("gate fidelities are defined for two atoms")
    g, e = C.Level.G, C.Level.E
    return np.array(
        [
            np.ravel_multi_index((a, b), layout.atom_levels)
            for a in (g, e)
            for b in (g, e)
        ]
    )


def _atomic_block(rho_atoms: np.ndarray, layout: qops.HilbertLayout) -> np.ndarray:
    idx = _qubit_indices(layout)
    return rho_atoms[..., idx[:, None], idx[None, :]]


def state_fidelity(
    state: np.ndarray, layout: qops.HilbertLayout, i: int, sign: int = 1
) -> float:
    """⟨Φ_i^(±)| tr_photon ρ |Φ_i^(±)⟩ for a ket or density operator."""
    target = target_state(i, sign)
    rho = _atomic_block(qops.partial_trace_photon(state, layout), layout)
    return float(np.real(np.vdot(target, rho @ target)))


def overlap_fidelity(series: OverlapSeries, order: Optional[int] = None) -> float:
    """|Σ_{k ≤ order} η⁽ᵏ⁾|²."""
    return series.fidelity(order)


@dataclass
class ChannelSample:
    """Images E(P_k) of the sixteen Pauli products at time t.

    Args:
        t (float): time
        outputs (np.ndarray): shape (16, 4, 4), qubit block after tracing photons
        trunc_pop (float): largest population in the top two Fock levels

    """

    t: float
    outputs: np.ndarray
    trunc_pop: float = 0.0

    def __post_init__(self) -> None:
        """Check the shape."""
        if np.shape(self.outputs) != (16, 4, 4):
            raise InvalidDimensionError(f"expected (16, 4, 4), got {np.shape(self.outputs)}")

    @property
    def trace_loss(self) -> float:
        """1 − tr E(I⊗I)/4, population leaving the qubit subspace."""
        return float(1 - np.real(np.trace(self.outputs[0])) / 4)


def avg_gate_fidelity(channel: ChannelSample, ideal: np.ndarray) -> float:
    """Average gate fidelity of the sampled channel against a 4×4 unitary."""
    ideal = np.asarray(ideal, dtype=complex)
    if ideal.shape != (4, 4):
        raise InvalidDimensionError(f"ideal gate must be 4×4, got {ideal.shape}")
    rotated = ideal @ PAULIS @ ideal.conj().T
    overlaps = np.einsum("kij,kji->", rotated, channel.outputs)
    return float((np.real(overlaps) + 16) / 80)


def _top_population(pops: np.ndarray) -> float:
    return float(np.max(pops[..., -2:]))


def channel_from_kets(
    kets: np.ndarray, layout: qops.HilbertLayout, t: float
) -> ChannelSample:
    """Channel of a closed evolution from the four evolved |k⟩|0⟩ kets.

    E(σ) = Σ_kl σ_kl tr_photon |ψ_k⟩⟨ψ_l|.
    """
    kets = np.asarray(kets, dtype=complex)
    if kets.shape != (4, layout.dim):
        raise InvalidDimensionError(f"expected (4, {layout.dim}) kets, got {kets.shape}")
    blocks = kets.reshape(4, layout.atom_dim, layout.fock_dim)
    pair = np.einsum("kif,ljf->klij", blocks, blocks.conj())
    pair = _atomic_block(pair, layout)
    outputs = np.einsum("pkl,klij->pij", PAULIS, pair)
    pops = np.mean([qops.fock_population(ket, layout) for ket in kets], axis=0)
    return ChannelSample(t, outputs, _top_population(pops))


def channel_from_rhos(
    rhos: np.ndarray, layout: qops.HilbertLayout, t: float
) -> ChannelSample:
    """Channel of an open evolution from the sixteen evolved P_k ⊗ |0⟩⟨0| inputs."""
    rhos = np.asarray(rhos, dtype=complex)
    if rhos.shape != (16, layout.dim, layout.dim):
        raise InvalidDimensionError(f"expected 16 operators, got {rhos.shape}")
    outputs = _atomic_block(qops.partial_trace_photon(rhos, layout), layout)
    pops = qops.fock_population(rhos[0], layout) / 4
    return ChannelSample(t, outputs, _top_population(pops))


def basis_inputs(layout: qops.HilbertLayout) -> np.ndarray:
    """|gg⟩|0⟩, |ge⟩|0⟩, |eg⟩|0⟩, |ee⟩|0⟩ as rows."""
    g, e = C.Level.G, C.Level.E
    return np.array(
        [qops.basis_ket(layout, (a, b), 0) for a in (g, e) for b in (g, e)]
    )


def pauli_inputs(layout: qops.HilbertLayout) -> np.ndarray:
    """P_k ⊗ |0⟩⟨0| embedded on the qubit levels, shape (16, d, d)."""
    kets = basis_inputs(layout)
    return np.einsum("pkl,ki,lj->pij", PAULIS, kets, kets.conj())


class Observation:
    """A propagation viewed on the qubit ⊗ photon layout.

    Four-level evolutions pass through a `StarkFrame`; everything else is
    observed as is.
    """

    def __init__(self, prop: Propagation, frame: Optional[StarkFrame] = None) -> None:
        """Initialize."""
        self.prop = prop
        self.frame = frame

    @property
    def kind(self) -> str:
        """'ket' or 'rho'."""
        return self.prop.kind

    @property
    def layout(self) -> qops.HilbertLayout:
        """Layout of the observed states."""
        return self.frame.target if self.frame is not None else self.prop.layout

    def _view(self, t: float, states: np.ndarray) -> np.ndarray:
        return states if self.frame is None else self.frame(t, states)

    def at(self, t: float) -> np.ndarray:
        """Observed states at t."""
        return self._view(t, self.prop.at(t))

    def sweep(self, times: Sequence[float]) -> Iterator[Tuple[float, np.ndarray]]:
        """Observed (t, states) along a grid."""
        for t, states in self.prop.sweep(times):
            yield t, self._view(t, states)


def channel_propagation(
    model: LindbladModel,
    cfg: Optional[IntegratorConfig] = None,
    frame: Optional[StarkFrame] = None,
) -> Observation:
    """Propagation of the channel inputs: four kets if closed, sixteen Paulis otherwise."""
    if model.is_closed:
        prop = propagate(model, basis_inputs(model.layout), cfg)
    else:
        prop = propagate(model, pauli_inputs(model.layout), cfg)
    return Observation(prop, frame)


def channel_at(
    obs: Observation, t: float, states: Optional[np.ndarray] = None
) -> ChannelSample:
    """ChannelSample at t; `states` skips the evaluation when already known."""
    states = obs.at(t) if states is None else states
    if obs.kind == "ket":
        return channel_from_kets(states, obs.layout, t)
    return channel_from_rhos(states, obs.layout, t)


def max_over_time(
    metric: Callable[[float], float],
    window: Tuple[float, float],
    points: int = 200,
    grid_values: Optional[Sequence[float]] = None,
    candidates: Sequence[float] = (),
) -> Tuple[float, float]:
    """Coarse scan then bounded scalar refinement around the best sample.

    Args:
        metric: function of time to maximize
        window: (t_start, t_stop)
        points: coarse grid size
        grid_values: metric already evaluated on np.linspace(*window, points)
        candidates: extra sample times inside the window (e.g. loop closures
            that a coarse grid would step over)

    Returns:
        Tuple[float, float]: (t*, metric(t*))

    """
    lo, hi = map(float, window)
    if not hi > lo:
        raise ContractViolationError(f"empty time window {window}")
    if points < 2:
        raise ContractViolationError("need at least two grid points")
    grid = np.linspace(lo, hi, points)
    if grid_values is None:
        values = np.array([metric(t) for t in grid])
    else:
        values = np.asarray(grid_values, dtype=float)
        if values.shape != grid.shape:
            raise InvalidDimensionError("grid_values do not match the grid")
    extra = np.array([t for t in candidates if lo < t < hi and t not in grid], dtype=float)
    if extra.size:
        grid = np.concatenate([grid, extra])
        values = np.concatenate([values, [metric(t) for t in extra]])
        order = np.argsort(grid, kind="stable")
        grid, values = grid[order], values[order]

    best = int(np.argmax(values))
    left, right = grid[max(best - 1, 0)], grid[min(best + 1, grid.size - 1)]
    result = minimize_scalar(
        lambda t: -metric(t),
        bounds=(left, right),
        method="bounded",
        options={"xatol": C.Tolerance.TIME_RESOLUTION * (hi - lo)},
    )
    if result.success and -result.fun >= values[best]:
        return float(result.x), float(-result.fun)
    return float(grid[best]), float(values[best])


def closure_times(
    trajectory: MsTrajectory, window: Tuple[float, float], count: int = 8
) -> List[float]:
    """Loop closures kτ nearest to t_gate that fall inside the window."""
    tau = trajectory.tau
    k0 = int(round(trajectory.gate_time() / tau))
    ks = range(max(k0 - count // 2, 1), k0 + count // 2 + 1)
    return [k * tau for k in ks if window[0] < k * tau < window[1]]


@dataclass
class FidelityPeak:
    """Best fidelity within a window."""

    t: float
    value: float
    trunc_pop: float = 0.0


@dataclass(frozen=True, eq=False)
class GateSetup:
    """A model together with the ideal gate it should implement.

    Args:
        model (LindbladModel): evolution to observe
        trajectory (MsTrajectory): ideal phase-space trajectory (sets the
            gate sign, t_gate and the loop closures)
        frame (StarkFrame | None): map for four-level models

    """

    model: LindbladModel
    trajectory: MsTrajectory
    frame: Optional[StarkFrame] = None

    @property
    def sign(self) -> int:
        """Sign of the gate, that of δ."""
        return 1 if self.trajectory.delta > 0 else -1

    @property
    def t_gate(self) -> float:
        """Ideal gate time."""
        return self.trajectory.gate_time()

    def window(self, start: float, stop: float) -> Tuple[float, float]:
        """Time window in units of the gate time."""
        return start * self.t_gate, stop * self.t_gate


def ideal_for(
    reference: Reference, trajectory: MsTrajectory
) -> Callable[[float], np.ndarray]:
    """Ideal comparison gate as a function of time."""
    if reference == "target":
        gate = ideal_gate_map(1 if trajectory.delta > 0 else -1)
        return lambda t: gate
    if reference == "instantaneous":
        return trajectory.atomic_phase_gate
    raise ContractViolationError(f"unknown reference {reference!r}")


def _check_trunc(value: float, where: str) -> None:
    if value > C.Tolerance.TRUNCATION:
        logger.warning("Fock truncation population %.2e %s", value, where)


@log_func(logger_=logger, func_input=False)
def max_gate_fidelity(
    setup: GateSetup,
    window: Tuple[float, float],
    cfg: Optional[IntegratorConfig] = None,
    reference: Reference = "target",
    points: int = 200,
) -> FidelityPeak:
    """max_t F̄(t) over a window."""
    obs = channel_propagation(setup.model, cfg, setup.frame)
    ideal = ideal_for(reference, setup.trajectory)
    grid = np.linspace(*window, points)
    values = [
        avg_gate_fidelity(channel_at(obs, t, states), ideal(t))
        for t, states in obs.sweep(grid)
    ]
    t_best, value = max_over_time(
        lambda t: avg_gate_fidelity(channel_at(obs, t), ideal(t)),
        window,
        points=points,
        grid_values=values,
        candidates=closure_times(setup.trajectory, window),
    )
    trunc = channel_at(obs, t_best).trunc_pop
    _check_trunc(trunc, "at the gate-fidelity peak")
    return FidelityPeak(t_best, value, trunc)


def gate_fidelity_series(
    setup: GateSetup,
    times: Sequence[float],
    cfg: Optional[IntegratorConfig] = None,
    reference: Reference = "target",
) -> Tuple[np.ndarray, np.ndarray]:
    """F̄(t) and the truncation guard on a grid."""
    obs = channel_propagation(setup.model, cfg, setup.frame)
    ideal = ideal_for(reference, setup.trajectory)
    fids, truncs = [], []
    for t, states in obs.sweep(times):
        sample = channel_at(obs, t, states)
        fids.append(avg_gate_fidelity(sample, ideal(t)))
        truncs.append(sample.trunc_pop)
    return np.array(fids), np.array(truncs)


def basis_inputs_n(layout: qops.HilbertLayout, n: int) -> np.ndarray:
    """|gg⟩|n⟩, |ge⟩|n⟩, |eg⟩|n⟩, |ee⟩|n⟩ as rows."""
    g, e = C.Level.G, C.Level.E
    return np.array(
        [qops.basis_ket(layout, (a, b), n) for a in (g, e) for b in (g, e)]
    )


def state_propagation(
    setup: GateSetup, i: int, n: int, cfg: Optional[IntegratorConfig] = None
) -> Observation:
    """Propagation of the single start |φ_i⟩|n⟩."""
    if i not in (1, 2, 3, 4):
        raise ContractViolationError(f"logical index must be 1..4, got {i}")
    start = basis_inputs_n(setup.model.layout, n)[i - 1]
    return Observation(propagate(setup.model, start, cfg), setup.frame)


def _state_trunc(state: np.ndarray, layout: qops.HilbertLayout) -> float:
    return _top_population(qops.fock_population(state, layout))


def state_fidelity_series(
    setup: GateSetup,
    i: int,
    n: int,
    times: Sequence[float],
    cfg: Optional[IntegratorConfig] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """F_{i,n}(t) and the truncation guard for the start |φ_i⟩|n⟩."""
    obs = state_propagation(setup, i, n, cfg)
    fids, truncs = [], []
    for _, states in obs.sweep(times):
        fids.append(state_fidelity(states[0], obs.layout, i, setup.sign))
        truncs.append(_state_trunc(states[0], obs.layout))
    return np.array(fids), np.array(truncs)


def max_state_fidelity(
    setup: GateSetup,
    i: int,
    window: Tuple[float, float],
    n: int = 0,
    cfg: Optional[IntegratorConfig] = None,
    points: int = 200,
) -> FidelityPeak:
    """max_t F_{i,n}(t) over a window."""
    obs = state_propagation(setup, i, n, cfg)
    layout, sign = obs.layout, setup.sign
    grid = np.linspace(*window, points)
    values = [state_fidelity(s[0], layout, i, sign) for _, s in obs.sweep(grid)]
    t_best, value = max_over_time(
        lambda t: state_fidelity(obs.at(t)[0], layout, i, sign),
        window,
        points=points,
        grid_values=values,
        candidates=closure_times(setup.trajectory, window),
    )
    trunc = _state_trunc(obs.at(t_best)[0], layout)
    _check_trunc(trunc, "at the state-fidelity peak")
    return FidelityPeak(t_best, value, trunc)
