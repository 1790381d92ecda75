import math

import numpy as np
import pytest

from cavityms.lib import qops
from cavityms.lib.common.exception import ContractViolationError, InvalidDimensionError
from cavityms.lib.dynamics import LindbladModel, cavity_decay_ops
from cavityms.lib.fidelity import (
    PAULIS,
    ChannelSample,
    GateSetup,
    avg_gate_fidelity,
    basis_inputs,
    channel_from_kets,
    channel_from_rhos,
    closure_times,
    gate_fidelity_series,
    max_gate_fidelity,
    max_over_time,
    max_state_fidelity,
    pauli_inputs,
    state_fidelity,
    state_fidelity_series,
)
from cavityms.lib.hamiltonians import build_effective
from cavityms.lib.msgate import MsTrajectory, ideal_gate_map, logical_state, target_state
from cavityms.lib.params import EffectiveParams


@pytest.fixture
def ideal_setup(ideal_gate):
    model = LindbladModel(build_effective(ideal_gate.ideal_params, ideal_gate.qubit_layout))
    return GateSetup(model, ideal_gate.trajectory)


def test_state_fidelity_of_targets():
    layout = qops.HilbertLayout.qubits(2)
    for sign in (1, -1):
        for i in (1, 2, 3, 4):
            ket = qops.with_photons(target_state(i, sign), layout)
            assert state_fidelity(ket, layout, i, sign) == pytest.approx(1.0)
            assert state_fidelity(qops.as_density(ket), layout, i, sign) == pytest.approx(1.0)
    start = qops.with_photons(logical_state(2), layout)
    assert state_fidelity(start, layout, 2) == pytest.approx(0.5)


def test_state_fidelity_needs_two_atoms():
    layout = qops.HilbertLayout.qubits(2, n_atoms=3)
    with pytest.raises(InvalidDimensionError):
        state_fidelity(qops.basis_ket(layout, (0, 0, 0)), layout, 1)


def test_identity_channel_from_unevolved_inputs():
    layout = qops.HilbertLayout.qubits(3)
    from_kets = channel_from_kets(basis_inputs(layout), layout, 0.0)
    from_rhos = channel_from_rhos(pauli_inputs(layout), layout, 0.0)
    np.testing.assert_allclose(from_kets.outputs, PAULIS, atol=1e-15)
    np.testing.assert_allclose(from_rhos.outputs, PAULIS, atol=1e-15)
    assert avg_gate_fidelity(from_kets, np.eye(4)) == pytest.approx(1.0)
    assert from_rhos.trace_loss == pytest.approx(0.0)
    assert from_kets.trunc_pop == 0.0


@pytest.mark.parametrize("p", [0.0, 0.2, 1.0])
def test_depolarizing_channel(p):
    outputs = (1 - p) * PAULIS.copy()
    outputs[0] = np.eye(4)
    value = avg_gate_fidelity(ChannelSample(0.0, outputs), np.eye(4))
    assert value == pytest.approx(1 - 3 * p / 4)


def test_lost_population_lowers_fidelity():
    sample = ChannelSample(0.0, np.zeros((16, 4, 4)))
    assert avg_gate_fidelity(sample, ideal_gate_map(1)) == pytest.approx(0.2)
    assert sample.trace_loss == pytest.approx(1.0)


def test_channel_shape_checks():
    with pytest.raises(InvalidDimensionError):
        ChannelSample(0.0, np.zeros((4, 4, 4)))
    with pytest.raises(InvalidDimensionError):
        avg_gate_fidelity(ChannelSample(0.0, PAULIS.copy()), np.eye(2))


def test_global_phase_does_not_matter():
    sample = ChannelSample(0.0, ideal_gate_map(1) @ PAULIS @ ideal_gate_map(1).conj().T)
    phased = np.exp(0.7j) * ideal_gate_map(1)
    assert avg_gate_fidelity(sample, phased) == pytest.approx(1.0)


def test_max_over_time_refines_parabola():
    t, value = max_over_time(lambda t: -((t - 1.3) ** 2), (0.0, 3.0), points=31)
    assert t == pytest.approx(1.3, abs=1e-3)
    assert value == pytest.approx(0.0, abs=1e-6)


def test_max_over_time_uses_candidates():
    # a spike the coarse grid steps over
    def spike(t):
        return 1.0 if abs(t - 1.234) < 1e-9 else 0.0

    t, value = max_over_time(spike, (0.0, 2.0), points=11, candidates=[1.234])
    assert t == pytest.approx(1.234)
    assert value == 1.0


def test_max_over_time_contracts():
    with pytest.raises(ContractViolationError):
        max_over_time(lambda t: t, (1.0, 1.0))
    with pytest.raises(ContractViolationError):
        max_over_time(lambda t: t, (0.0, 1.0), points=1)
    with pytest.raises(InvalidDimensionError):
        max_over_time(lambda t: t, (0.0, 1.0), points=5, grid_values=[0.0, 1.0])


def test_closure_times():
    trajectory = MsTrajectory(g_eff=1.0, delta=4.0)
    tau = math.pi / 2
    times = closure_times(trajectory, (math.pi, 3 * math.pi))
    assert times == pytest.approx([3 * tau, 4 * tau, 5 * tau])


def test_gate_setup_sign_and_window():
    eff = EffectiveParams(chi=0.0, g_eff=1.0, delta=-2.0)
    model = LindbladModel(build_effective(eff, qops.HilbertLayout.qubits(2)))
    setup = GateSetup(model, MsTrajectory.from_effective(eff))
    assert setup.sign == -1
    assert setup.window(0.5, 1.5) == pytest.approx((math.pi / 2, 3 * math.pi / 2))


def test_ideal_gate_peaks_at_gate_time(ideal_setup):
    peak = max_gate_fidelity(ideal_setup, ideal_setup.window(0.5, 1.5))
    assert peak.value == pytest.approx(1.0, abs=1e-6)
    assert peak.t == pytest.approx(math.pi, abs=1e-3)
    assert peak.trunc_pop < 1e-6


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_ideal_state_peaks_at_gate_time(ideal_setup, i):
    peak = max_state_fidelity(ideal_setup, i, ideal_setup.window(0.5, 1.5))
    assert peak.value == pytest.approx(1.0, abs=1e-6)
    assert peak.t == pytest.approx(math.pi, abs=1e-3)


def test_instantaneous_reference_follows_the_phase(ideal_setup):
    times = [0.0, math.pi / 2, math.pi]
    fids, truncs = gate_fidelity_series(ideal_setup, times, reference="instantaneous")
    assert fids[0] == pytest.approx(1.0)
    assert fids[-1] == pytest.approx(1.0, abs=1e-6)
    # photons are still out at half a loop
    assert fids[1] < 1.0
    assert truncs.shape == (3,)


def test_references_differ_away_from_gate_time(ideal_setup):
    times = [0.0, math.pi / 2, math.pi]
    target, _ = gate_fidelity_series(ideal_setup, times)
    moving, _ = gate_fidelity_series(ideal_setup, times, reference="instantaneous")
    # identity against the MS gate
    assert target[0] == pytest.approx(0.6)
    assert moving[0] == pytest.approx(1.0)
    assert abs(target[1] - moving[1]) > 0.01
    assert target[2] == pytest.approx(moving[2], abs=1e-6)


def test_instantaneous_reference_peaks_before_any_evolution(ideal_gate):
    layout = qops.HilbertLayout.qubits(6)
    model = LindbladModel(
        build_effective(ideal_gate.ideal_params, layout), tuple(cavity_decay_ops(0.05, layout))
    )
    setup = GateSetup(model, ideal_gate.trajectory)
    window = setup.window(0.0, 2.0)
    moving = max_gate_fidelity(setup, window, reference="instantaneous", points=41)
    assert moving.t == pytest.approx(0.0, abs=1e-3)
    assert moving.value == pytest.approx(1.0)
    target = max_gate_fidelity(setup, window, points=41)
    assert target.t == pytest.approx(math.pi, rel=0.05)
    assert target.value < 0.999


def test_state_series_starts_at_half(ideal_setup):
    fids, _ = state_fidelity_series(ideal_setup, 1, 0, [0.0, math.pi])
    assert fids[0] == pytest.approx(0.5)
    assert fids[1] == pytest.approx(1.0, abs=1e-6)


def test_cavity_loss_lowers_gate_fidelity(ideal_gate):
    layout = qops.HilbertLayout.qubits(6)
    model = LindbladModel(
        build_effective(ideal_gate.ideal_params, layout), tuple(cavity_decay_ops(0.05, layout))
    )
    setup = GateSetup(model, ideal_gate.trajectory)
    peak = max_gate_fidelity(setup, setup.window(0.5, 1.5), points=41)
    assert 0.9 < peak.value < 0.999
