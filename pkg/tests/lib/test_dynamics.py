import math

import numpy as np
import pytest

from cavityms.common import constant as C
from cavityms.lib import qops
from cavityms.lib.common.exception import (
    ContractViolationError,
    InvalidConfigurationError,
    PositivityError,
)
from cavityms.lib.dynamics import (
    IntegratedPropagation,
    IntegratorConfig,
    LindbladModel,
    LiouvillePropagation,
    SpectralPropagation,
    cavity_decay_ops,
    check_positivity,
    evolve_ket,
    evolve_rho,
    photon_frame,
    propagate,
    rb87_model,
    restrict,
)
from cavityms.lib.hamiltonians import TimeDependentHamiltonian, build_effective
from cavityms.lib.msgate import logical_state
from cavityms.lib.params import EffectiveParams, from_table1

TIGHT = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)


@pytest.fixture
def dispersive():
    return EffectiveParams(chi=0.1, g_eff=1.0, delta=2.0)


def _start(layout, i=1):
    return qops.with_photons(logical_state(i), layout)


def test_engine_selection(dispersive):
    layout = qops.HilbertLayout.qubits(3)
    closed = LindbladModel(build_effective(dispersive, layout))
    psi = _start(layout)
    assert isinstance(propagate(closed, psi), SpectralPropagation)

    lossy = closed.with_ops(*cavity_decay_ops(0.2, layout))
    prop = propagate(lossy, psi)
    assert isinstance(prop, LiouvillePropagation)
    assert prop.initial.shape == (1, layout.dim, layout.dim)

    two_arms = dispersive.scaled(delta1_prime=2.0, delta2_prime=2.4)
    mixed = LindbladModel(build_effective(two_arms, layout))
    assert photon_frame(mixed) is None
    assert isinstance(propagate(mixed, psi), IntegratedPropagation)


def test_spectral_matches_integration(dispersive):
    layout = qops.HilbertLayout.qubits(6)
    model = LindbladModel(build_effective(dispersive, layout))
    psi = _start(layout, 3)[None]
    exact = propagate(model, psi)
    integrated = IntegratedPropagation(model, psi, TIGHT, "ket")
    for t in (0.3, 2.0, math.pi):
        np.testing.assert_allclose(exact.at(t), integrated.at(t), atol=1e-7)


def test_liouvillian_matches_integration(dispersive):
    layout = qops.HilbertLayout.qubits(3)
    model = LindbladModel(
        build_effective(dispersive, layout), tuple(cavity_decay_ops(0.2, layout))
    )
    rho = qops.as_density(_start(layout))[None]
    exact = propagate(model, rho)
    integrated = IntegratedPropagation(model, rho, TIGHT, "rho")
    np.testing.assert_allclose(exact.at(1.5), integrated.at(1.5), atol=1e-6)


def test_liouvillian_sweep_matches_pointwise(dispersive):
    layout = qops.HilbertLayout.qubits(3)
    model = LindbladModel(
        build_effective(dispersive, layout), tuple(cavity_decay_ops(0.5, layout))
    )
    prop = propagate(model, qops.as_density(_start(layout, 2))[None])
    for t, states in prop.sweep(np.linspace(0.0, 2.0, 5)):
        np.testing.assert_allclose(states, prop.at(t), atol=1e-10)


def test_cavity_decay_conserves_trace(dispersive):
    layout = qops.HilbertLayout.qubits(4)
    model = LindbladModel(
        build_effective(dispersive, layout), tuple(cavity_decay_ops(0.3, layout))
    )
    out = evolve_rho(model, _start(layout), times=np.linspace(0, 3, 7))
    assert out.shape == (7, layout.dim, layout.dim)
    np.testing.assert_allclose(np.trace(out, axis1=1, axis2=2), 1.0, atol=1e-8)
    for rho in out:
        assert qops.is_hermitian(rho, 1e-8)


def test_evolve_ket_keeps_norm(ideal_params):
    layout = qops.HilbertLayout.qubits(8)
    out = evolve_ket(build_effective(ideal_params, layout), _start(layout), times=[0, 1, 2])
    assert out.shape == (3, layout.dim)
    np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-10)


def test_evolve_ket_contracts(ideal_params):
    layout = qops.HilbertLayout.qubits(3)
    h = build_effective(ideal_params, layout)
    with pytest.raises(ContractViolationError):
        evolve_ket(h, 2 * _start(layout), times=[1.0])
    with pytest.raises(ContractViolationError):
        evolve_ket(h, _start(layout))
    with pytest.raises(ContractViolationError):
        evolve_ket(h, _start(layout), times=[1.0, 0.5])
    out = evolve_ket(h, _start(layout), IntegratorConfig(output_times=[0.0, 0.5]))
    assert out.shape == (2, layout.dim)


def test_restrict_turns_escape_into_leakage():
    rate = 0.1
    lv = C.Level
    layout = qops.HilbertLayout.uniform(2, 3, 1)
    escape = math.sqrt(rate) * qops.transition(layout, 0, lv.U, lv.E)
    model = LindbladModel(
        TimeDependentHamiltonian(layout, np.zeros((layout.dim, layout.dim))), (escape,)
    )
    small = restrict(model, (lv.G, lv.E))
    assert small.layout.dims == (2, 2, 2)
    assert small.leakage is not None
    assert not small.collapse_ops

    start = qops.basis_ket(small.layout, (lv.E, lv.G), 0)
    out = evolve_rho(small, start, times=[0.0, 1.0])
    assert np.real(np.trace(out[-1])) == pytest.approx(math.exp(-2 * rate), rel=1e-8)


def test_restrict_rejects_coupled_levels():
    layout = qops.HilbertLayout.uniform(2, 3, 1)
    hop = qops.level_sum(layout, C.Level.U, C.Level.G)
    model = LindbladModel(TimeDependentHamiltonian(layout, hop + hop.conj().T))
    with pytest.raises(ContractViolationError):
        restrict(model, (C.Level.G, C.Level.E))


def test_rb87_model_reduces_to_qubits():
    model = rb87_model(from_table1(1), n_max=2)
    assert model.layout.dims == (2, 2, 3)
    assert model.leakage is not None
    assert not model.is_closed
    full = rb87_model(from_table1(1), n_max=2, reduce=False)
    assert full.layout.dims == (3, 3, 3)


def test_positivity_guard():
    check_positivity(np.diag([0.5, 0.5]), 0.0)
    with pytest.raises(PositivityError) as e:
        check_positivity(np.diag([1.1, -0.1]), 2.0)
    assert e.value.t == 2.0
    assert e.value.min_eig == pytest.approx(-0.1)


def test_integrator_config_validation():
    with pytest.raises(InvalidConfigurationError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(InvalidConfigurationError):
        IntegratorConfig(method="Euler")
    with pytest.raises(InvalidConfigurationError):
        IntegratorConfig(output_times=[1.0, 0.0])
    assert IntegratorConfig.for_density().rel_tol == 1e-7
    assert IntegratorConfig(max_step=0.1).solver_options()["max_step"] == 0.1


def test_cavity_decay_ops():
    layout = qops.HilbertLayout.qubits(2)
    assert cavity_decay_ops(0.0, layout) == []
    with pytest.raises(InvalidConfigurationError):
        cavity_decay_ops(-1.0, layout)


def test_integrated_rejects_negative_time(dispersive):
    layout = qops.HilbertLayout.qubits(2)
    model = LindbladModel(build_effective(dispersive, layout))
    prop = IntegratedPropagation(model, _start(layout)[None], TIGHT, "ket")
    with pytest.raises(ContractViolationError):
        prop.at(-1.0)
