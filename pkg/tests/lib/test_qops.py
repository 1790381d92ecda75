import numpy as np
import pytest

from cavityms.lib import qops
from cavityms.lib.common.exception import ContractViolationError, InvalidDimensionError


def _random_density(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def test_layout_index_follows_atoms_then_photon():
    layout = qops.HilbertLayout.qubits(3)
    assert layout.dims == (2, 2, 4)
    assert layout.dim == 16
    assert layout.index((1, 0), 2) == 10
    assert layout.index((0, 0), 0) == 0


def test_layout_rejects_bad_shapes():
    with pytest.raises(InvalidDimensionError):
        qops.HilbertLayout((), 3)
    with pytest.raises(InvalidDimensionError):
        qops.HilbertLayout((2, 2), 1)
    with pytest.raises(InvalidDimensionError):
        qops.HilbertLayout.qubits(3).index((0,), 0)


def test_restrict_keeps_matching_basis_states():
    big = qops.HilbertLayout.uniform(2, 4, 2)
    small, keep = big.restrict([0, 1])
    assert small.dims == (2, 2, 3)
    assert len(keep) == small.dim
    assert keep[small.index((1, 1), 2)] == big.index((1, 1), 2)
    assert keep[small.index((0, 1), 1)] == big.index((0, 1), 1)


def test_annihilation_lowers_photon_number():
    a = qops.fock_annihilate(3)
    ket = np.zeros(4)
    ket[2] = 1.0
    np.testing.assert_allclose(a @ ket, [0, np.sqrt(2), 0, 0])
    comm = a @ a.conj().T - a.conj().T @ a
    np.testing.assert_allclose(comm[:3, :3], np.eye(3), atol=1e-12)


def test_displacement_elements_match_truncated_exponential():
    alpha = 0.3 + 0.2j
    exact = qops.displacement_elements(alpha, 40)
    numeric = qops.displacement(alpha, 40)
    np.testing.assert_allclose(exact[:8, :8], numeric[:8, :8], atol=1e-10)
    assert exact[0, 0] == pytest.approx(np.exp(-abs(alpha) ** 2 / 2))


def test_displacement_elements_zero_is_identity():
    np.testing.assert_allclose(qops.displacement_elements(0.0, 5), np.eye(6), atol=1e-15)


def test_collective_spin_algebra():
    layout = qops.HilbertLayout.qubits(1)
    sx = qops.collective_spin(layout, "x")
    sy = qops.collective_spin(layout, "y")
    sz = qops.collective_spin(layout, "z")
    np.testing.assert_allclose(sx @ sy - sy @ sx, 1j * sz, atol=1e-12)
    eigs = np.unique(np.round(np.linalg.eigvalsh(sx), 9))
    np.testing.assert_allclose(eigs, [-1.0, 0.0, 1.0])


def test_embed_rejects_wrong_local_dimension():
    layout = qops.HilbertLayout.qubits(2)
    with pytest.raises(InvalidDimensionError):
        qops.embed(np.eye(3), 0, layout)
    with pytest.raises(InvalidDimensionError):
        qops.embed(np.eye(2), qops.PHOTON, layout)


def test_partial_traces_of_product_state():
    rng = np.random.default_rng(7)
    layout = qops.HilbertLayout.qubits(3)
    rho_a = _random_density(rng, 4)
    rho_f = _random_density(rng, 4)
    rho = np.kron(rho_a, rho_f)
    np.testing.assert_allclose(qops.partial_trace_photon(rho, layout), rho_a, atol=1e-12)
    np.testing.assert_allclose(qops.partial_trace_atoms(rho, layout), rho_f, atol=1e-12)


def test_fock_population_of_number_state():
    layout = qops.HilbertLayout.qubits(4)
    atomic = np.array([1, 0, 0, 1]) / np.sqrt(2)
    ket = qops.with_photons(atomic, layout, 2)
    np.testing.assert_allclose(qops.fock_population(ket, layout), [0, 0, 1, 0, 0])
    np.testing.assert_allclose(
        qops.fock_population(qops.as_density(ket), layout), [0, 0, 1, 0, 0], atol=1e-15
    )


def test_truncation_report_flags_top_levels():
    layout = qops.HilbertLayout.qubits(4)
    low = qops.basis_ket(layout, (0, 0), 0)
    high = qops.basis_ket(layout, (0, 0), 3)
    assert not qops.truncation_report(low, layout).flagged
    report = qops.truncation_report(high, layout)
    assert report.flagged
    assert report.top_population == pytest.approx(1.0)


def test_expm_hermitian_is_unitary():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    h = m + m.conj().T
    u = qops.expm_hermitian(h, 0.7)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(5), atol=1e-12)


def test_expm_hermitian_rejects_non_hermitian():
    with pytest.raises(ContractViolationError):
        qops.expm_hermitian(np.array([[0, 1], [0, 0]]), 1.0)


def test_pauli_products_are_orthogonal():
    paulis = qops.pauli_products()
    gram = np.einsum("aij,bji->ab", paulis, paulis)
    np.testing.assert_allclose(gram, 4 * np.eye(16), atol=1e-12)
