import math

import numpy as np
import pytest

from cavityms.lib import qops
from cavityms.lib.common.exception import ContractViolationError, FitError, SingularParameterError
from cavityms.lib.dynamics import evolve_ket
from cavityms.lib.fidelity import max_state_fidelity
from cavityms.lib.hamiltonians import build_effective
from cavityms.lib.harness.scenarios import effective_setup
from cavityms.lib.msgate import logical_state, target_state
from cavityms.lib.params import EffectiveParams
from cavityms.lib.perturbation import (
    SINGLET,
    DressedBasis,
    alpha_scaling_probe,
    divided_difference2,
    dressed_basis,
    dyson_numeric,
    eta0,
    eta1,
    eta2_vacuum,
    max_overlap_fidelity,
    overlap_series,
    perturbative_overlap,
    y_lmn,
    y_lmn_quadrature,
)


@pytest.fixture
def weak():
    """α = −1/4 with a small dispersive shift."""
    return EffectiveParams(chi=0.1, g_eff=1.0, delta=4.0)


def test_divided_difference_at_coincident_nodes():
    t = 1.7
    assert divided_difference2(0.0, 0.0, 0.0, t) == pytest.approx(t**2 / 2)
    near = divided_difference2(0.0, 1e-7, 2e-7, t)
    assert near == pytest.approx(t**2 / 2, rel=1e-6)


def test_divided_difference_is_continuous_across_branches():
    t = 1.0
    # spread·t = 1 switches from the Taylor series to the quotient
    below = divided_difference2(0.0, 0.3, 1.0 - 1e-9, t)
    above = divided_difference2(0.0, 0.3, 1.0 + 1e-9, t)
    assert below == pytest.approx(above, rel=1e-7)


def test_divided_difference_closed_form():
    t, y, z = 2.0, 1.5, -0.7
    direct = (
        (np.exp(1j * z * t) - 1) / (1j * z) - (np.exp(1j * y * t) - 1) / (1j * y)
    ) / (1j * (z - y))
    assert divided_difference2(0.0, y, z, t) == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("l, m, n", [(1, 2, 3), (2, 2, 2), (0, 1, 0), (3, 0, 1)])
def test_y_lmn_matches_quadrature(weak, l, m, n):
    basis = dressed_basis(weak, 6)
    t = 2.5
    assert complex(y_lmn(basis, l, m, n, t)) == pytest.approx(
        y_lmn_quadrature(basis, l, m, n, t), abs=1e-9
    )


def test_dressed_basis_is_eigenbasis(weak):
    basis = dressed_basis(weak, 30)
    v = basis.matrix()
    assert v.shape == (basis.layout.dim, 4 * basis.size)
    h_ms = (
        weak.delta * qops.number(basis.layout)
        + weak.g_eff
        * (qops.annihilate(basis.layout) + qops.annihilate(basis.layout).conj().T)
        @ qops.collective_spin(basis.layout, "x")
    )
    # columns far from the cut-off are exact eigenvectors
    low = [k for k, label in enumerate(basis.labels) if label.n < 10]
    residual = h_ms @ v[:, low] - v[:, low] * basis.energies[low]
    assert np.max(np.abs(residual)) < 1e-10
    assert basis.labels[0].sector == -1
    assert basis.labels[-1].sector == SINGLET


def test_dressed_basis_needs_detuning():
    with pytest.raises(SingularParameterError):
        DressedBasis(EffectiveParams(chi=0.0, g_eff=1.0, delta=0.0), 4)


def test_coupling_block_only_links_triplet_centre(weak):
    basis = dressed_basis(weak, 4)
    with pytest.raises(ContractViolationError):
        basis.coupling_block(0)
    a = basis.coupling_matrix()
    np.testing.assert_allclose(a, a.conj().T, atol=1e-15)
    # H_AS vanishes on the photon label 0 of the j = 0 state
    assert not np.any(basis.coupling_block(1)[0])


@pytest.mark.parametrize("i, n", [(1, 0), (2, 0), (1, 1), (4, 2)])
def test_eta0_matches_closed_system(i, n):
    eff = EffectiveParams(chi=0.0, g_eff=1.0, delta=2.0)
    basis = dressed_basis(eff, 40)
    layout = qops.HilbertLayout.qubits(24)
    t = 1.1
    start = qops.with_photons(logical_state(i), layout, n)
    out = evolve_ket(build_effective(eff, layout), start, times=[t])[-1]
    expected = np.vdot(qops.with_photons(target_state(i), layout, n), out)
    assert eta0(basis, i, n, t) == pytest.approx(expected, abs=1e-9)


def test_eta0_is_unimodular_at_gate_time():
    eff = EffectiveParams(chi=0.0, g_eff=1.0, delta=2.0)
    basis = dressed_basis(eff, 40)
    for i in (1, 2, 3, 4):
        assert abs(eta0(basis, i, 0, math.pi)) == pytest.approx(1.0, abs=1e-10)


def test_eta1_vanishes_for_vacuum_and_middle_states(weak):
    basis = dressed_basis(weak, 20)
    assert eta1(basis, 1, 0, 1.0) == 0
    assert eta1(basis, 2, 3, 1.0) == 0
    assert eta1(basis, 3, 1, 1.0) == 0


def test_eta1_matches_dyson_quadrature(weak):
    basis = dressed_basis(weak, 30)
    t = 1.3
    expected = dyson_numeric(weak, 1, 1, 1, t, n_max=20)
    assert eta1(basis, 1, 1, t) == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_closed_forms_match_path_sum(weak, i):
    basis = dressed_basis(weak, 20)
    t = 5.0
    series = overlap_series(basis, i, 0, t)
    closed = perturbative_overlap(basis, i, t)
    assert series.eta0 == pytest.approx(closed.eta0, abs=1e-12)
    assert series.eta1 == pytest.approx(0.0, abs=1e-12)
    assert series.eta2 == pytest.approx(closed.eta2, abs=1e-10)


def test_eta2_symmetry(weak):
    basis = dressed_basis(weak, 20)
    assert eta2_vacuum(basis, 1, 3.0) == eta2_vacuum(basis, 4, 3.0)
    assert eta2_vacuum(basis, 2, 3.0) == eta2_vacuum(basis, 3, 3.0)


def test_overlap_series_orders(weak):
    basis = dressed_basis(weak, 20)
    with pytest.raises(ContractViolationError):
        overlap_series(basis, 1, 0, 1.0, order=3)
    with pytest.raises(ContractViolationError):
        eta0(basis, 5, 0, 1.0)
    series = overlap_series(basis, 1, 1, 1.0, order=1)
    assert series.eta2 == 0
    assert series.fidelity(0) == pytest.approx(abs(series.eta0) ** 2)


def test_alpha_probe_rejects_degenerate_fits():
    with pytest.raises(FitError):
        alpha_scaling_probe(1, alphas=(0.02,))
    with pytest.raises(FitError):
        alpha_scaling_probe(1, alphas=(0.02, 0.02))
    with pytest.raises(FitError):
        alpha_scaling_probe(1, alphas=(-0.01, 0.02))


@pytest.mark.slow
def test_eta2_matches_dyson_quadrature(weak):
    basis = dressed_basis(weak, 20)
    t = 1.5
    expected = dyson_numeric(weak, 2, 1, 0, t, n_max=12, tol=1e-10)
    assert eta2_vacuum(basis, 1, t) == pytest.approx(expected, abs=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("i, slope", [(1, 4.0), (2, 2.0)])
def test_alpha_scaling(i, slope):
    assert alpha_scaling_probe(i) == pytest.approx(slope, abs=0.3)


@pytest.mark.slow
@pytest.mark.parametrize("chi", [0.05, 0.1, 0.2])
@pytest.mark.parametrize("i", [1, 2])
def test_second_order_tracks_exact_peak(chi, i):
    delta = 4.0
    setup = effective_setup(chi, delta, n_max=10)
    window = setup.window(0.5, 1.5)
    exact = max_state_fidelity(setup, i, window)
    basis = dressed_basis(EffectiveParams(chi=chi, g_eff=1.0, delta=delta), 40)
    _, perturbative = max_overlap_fidelity(basis, i, window)
    assert abs(perturbative - exact.value) < 1e-3
