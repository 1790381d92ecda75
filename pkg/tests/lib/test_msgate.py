import math

import numpy as np
import pytest

from cavityms.lib import qops
from cavityms.lib.common.exception import ContractViolationError, SingularParameterError
from cavityms.lib.dynamics import evolve_ket
from cavityms.lib.fidelity import state_fidelity
from cavityms.lib.hamiltonians import build_effective
from cavityms.lib.msgate import (
    MsTrajectory,
    ideal_gate_map,
    logical_state,
    target_state,
)


def test_trajectory_closes_after_gate_time(ideal_gate):
    traj = ideal_gate.trajectory
    assert ideal_gate.t_gate == pytest.approx(math.pi)
    assert traj.closes_exactly
    assert abs(traj.alpha_t(ideal_gate.t_gate)) == pytest.approx(0.0, abs=1e-12)
    assert traj.beta_t(ideal_gate.t_gate) == pytest.approx(math.pi / 2)


def test_trajectory_radius_and_area():
    traj = MsTrajectory(g_eff=1.0, delta=4.0)
    assert traj.tau == pytest.approx(math.pi / 2)
    assert traj.loop_index == pytest.approx(4.0)
    assert traj.area() == pytest.approx(math.pi / 16)
    assert abs(traj.alpha_t(traj.tau / 2)) == pytest.approx(0.5)


def test_zero_detuning_is_rejected():
    with pytest.raises(SingularParameterError):
        MsTrajectory(g_eff=1.0, delta=0.0)


@pytest.mark.parametrize("sign", [1, -1])
def test_ideal_gate_map_is_unitary_phase_gate(sign):
    u = ideal_gate_map(sign)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-15)
    sx = qops.atomic_spin("x")
    phase = qops.expm_hermitian(sx @ sx, -sign * math.pi / 2)
    np.testing.assert_allclose(np.exp(-1j * sign * math.pi / 4) * phase, u, atol=1e-12)


def test_target_states():
    np.testing.assert_allclose(
        target_state(1), np.array([1, 0, 0, 1j]) / math.sqrt(2), atol=1e-15
    )
    np.testing.assert_allclose(
        target_state(2, -1), np.array([0, 1, -1j, 0]) / math.sqrt(2), atol=1e-15
    )


def test_logical_index_range():
    with pytest.raises(ContractViolationError):
        logical_state(5)
    with pytest.raises(ContractViolationError):
        ideal_gate_map(0)


@pytest.mark.parametrize("delta", [2.0, 4.0, -2.0])
def test_closed_form_truth_table(delta):
    layout = qops.HilbertLayout.qubits(8)
    traj = MsTrajectory(g_eff=1.0, delta=delta)
    u = traj.u_ms(traj.gate_time(), layout)
    sign = 1 if delta > 0 else -1
    for i in (1, 2, 3, 4):
        out = u @ qops.with_photons(logical_state(i), layout)
        assert state_fidelity(out, layout, i, sign) >= 1 - 1e-9


def test_numerical_truth_table_matches_closed_form(ideal_gate):
    layout = ideal_gate.qubit_layout
    h = build_effective(ideal_gate.ideal_params, layout)
    for i in (1, 2, 3, 4):
        start = qops.with_photons(logical_state(i), layout)
        out = evolve_ket(h, start, times=[0.0, ideal_gate.t_gate])[-1]
        assert state_fidelity(out, layout, i) >= 1 - 1e-6


def test_photon_number_peaks_mid_loop():
    traj = MsTrajectory(g_eff=1.0, delta=2.0)
    atomic = logical_state(1)
    assert traj.photon_number(0.0, atomic) == pytest.approx(0.0)
    # |α|² = 4(g_eff/δ)² at half a loop, ⟨S_x²⟩ = 1/2 for |gg⟩
    assert traj.photon_number(traj.tau / 2, atomic) == pytest.approx(0.5)
