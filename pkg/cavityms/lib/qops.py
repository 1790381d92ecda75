"""Operator algebra on truncated atoms ⊗ photon Hilbert spaces.

Operators, kets and density operators are dense complex numpy arrays. Their
meaning is fixed by a `HilbertLayout`, which pins the tensor ordering once:

    atom 1 ⊗ atom 2 ⊗ ... ⊗ atom N ⊗ photon

with atom 1 the slowest-varying index. The basis index of
|l1, l2, ..., n⟩ is therefore ((l1·L2 + l2)·L3 + ...)·F + n, F = n_max + 1.
Every builder goes through `embed`, so nothing else needs to know this rule.

"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.special import eval_genlaguerre, gammaln
from typing_extensions import Literal

from cavityms.common import constant as C
from cavityms.lib.common.exception import ContractViolationError, InvalidDimensionError

logger = logging.getLogger(__name__)

PHOTON = "photon"
Site = Union[int, Literal["photon"]]


@dataclass(frozen=True)
class HilbertLayout:
    """Shape of a truncated atoms ⊗ photon Hilbert space.

    Args:
        atom_levels (Tuple[int, ...]): per-atom dimension, atom 1 first
        fock_dim (int): photon truncation n_max + 1

    """

    atom_levels: Tuple[int, ...]
    fock_dim: int
    dims: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        """Validate and freeze the level tuple."""
        levels = tuple(int(level) for level in self.atom_levels)
        if not levels:
            raise InvalidDimensionError("a layout needs at least one atom")
        if any(level < 1 for level in levels):
            raise InvalidDimensionError(f"atom levels must be positive: {levels}")
        if self.fock_dim < 2:
            raise InvalidDimensionError(f"fock_dim must be >= 2, got {self.fock_dim}")
        object.__setattr__(self, "atom_levels", levels)
        object.__setattr__(self, "fock_dim", int(self.fock_dim))
        object.__setattr__(self, "dims", levels + (int(self.fock_dim),))

    @classmethod
    def uniform(cls, n_atoms: int, levels: int, n_max: int) -> HilbertLayout:
        """N identical atoms with `levels` levels each and photons up to n_max."""
        if n_atoms < 1:
            raise InvalidDimensionError(f"need at least one atom, got {n_atoms}")
        return cls((levels,) * n_atoms, n_max + 1)

    @classmethod
    def qubits(cls, n_max: int, n_atoms: int = 2) -> HilbertLayout:
        """Two-level atoms plus photons."""
        return cls.uniform(n_atoms, 2, n_max)

    @property
    def n_atoms(self) -> int:
        """Number of atoms N."""
        return len(self.atom_levels)

    @property
    def n_max(self) -> int:
        """Highest kept photon number."""
        return self.fock_dim - 1

    @property
    def atom_dim(self) -> int:
        """Dimension of the atomic factor."""
        return int(np.prod(self.atom_levels))

    @property
    def dim(self) -> int:
        """Total dimension."""
        return self.atom_dim * self.fock_dim

    def index(self, levels: Sequence[int], n: int = 0) -> int:
        """Basis index of |levels⟩|n⟩."""
        if len(levels) != self.n_atoms:
            raise InvalidDimensionError(
                f"expected {self.n_atoms} atomic labels, got {len(levels)}"
            )
        return int(np.ravel_multi_index(tuple(levels) + (n,), self.dims))

    def photon_numbers(self) -> np.ndarray:
        """Photon number of every basis state, in basis order."""
        return np.tile(np.arange(self.fock_dim), self.atom_dim)

    def restrict(self, levels: Sequence[int]) -> tuple[HilbertLayout, np.ndarray]:
        """Keep only the given levels on every atom.

        Returns:
            tuple[HilbertLayout, np.ndarray]: the smaller layout and the
                indices of the kept basis states in this layout, in the
                smaller layout's order

        """
        levels = sorted(levels)
        if any(not 0 <= lv < min(self.atom_levels) for lv in levels):
            raise InvalidDimensionError(f"levels {levels} not present on every atom")
        grids = np.meshgrid(
            *([levels] * self.n_atoms), np.arange(self.fock_dim), indexing="ij"
        )
        keep = np.ravel_multi_index(tuple(g.ravel() for g in grids), self.dims)
        return HilbertLayout((len(levels),) * self.n_atoms, self.fock_dim), keep


def check_operator(op: np.ndarray, layout: HilbertLayout) -> np.ndarray:
    """Return `op` as a complex array after checking it fits the layout."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (layout.dim, layout.dim):
        raise InvalidDimensionError(
            f"operator shape {op.shape} does not match layout dim {layout.dim}"
        )
    return op


def is_hermitian(op: np.ndarray, tol: float = C.Tolerance.HERMITIAN) -> bool:
    """Elementwise hermiticity check with a scale-aware tolerance."""
    op = np.asarray(op)
    scale = max(1.0, float(np.max(np.abs(op), initial=0.0)))
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= tol * scale)


def dagger(op: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(op, -1, -2))


##########
# Photon #
##########
def fock_annihilate(n_max: int) -> np.ndarray:
    """Truncated annihilation operator with ⟨n−1|a|n⟩ = √n."""
    if n_max < 1:
        raise InvalidDimensionError(f"n_max must be >= 1, got {n_max}")
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


def fock_number(n_max: int) -> np.ndarray:
    """a†a on the truncated space."""
    if n_max < 1:
        raise InvalidDimensionError(f"n_max must be >= 1, got {n_max}")
    return np.diag(np.arange(n_max + 1)).astype(complex)


def displacement(alpha: complex, n_max: int) -> np.ndarray:
    """D(α) = exp(α a† − α* a) from the truncated generator.

    Accurate away from the truncation edge; keep |α|² well below n_max.
    """
    a = fock_annihilate(n_max)
    generator = alpha * a.conj().T - np.conj(alpha) * a
    # D = exp(G) = exp(-i·(iG)·1) with iG Hermitian
    return expm_hermitian(1j * generator, 1.0)


def displacement_elements(alpha: complex, n_max: int) -> np.ndarray:
    """Exact matrix elements d_mn(α) = ⟨m|D(α)|n⟩ for 0 ≤ m, n ≤ n_max.

    Uses the associated-Laguerre closed form, so there is no truncation error:
        m ≥ n: √(n!/m!) α^{m−n} e^{−|α|²/2} L_n^{(m−n)}(|α|²)
        m < n: √(m!/n!) (−α*)^{n−m} e^{−|α|²/2} L_m^{(n−m)}(|α|²)
    """
    if n_max < 0:
        raise InvalidDimensionError(f"n_max must be >= 0, got {n_max}")
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    m, n = np.meshgrid(np.arange(n_max + 1), np.arange(n_max + 1), indexing="ij")
    lo = np.minimum(m, n)
    k = np.abs(m - n)

    ratio = np.exp(0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)))
    base = np.where(m >= n, alpha, -np.conj(alpha))
    power = np.where(k == 0, 1.0 + 0j, base ** np.maximum(k, 1))
    laguerre = eval_genlaguerre(lo, k, x)
    return ratio * power * np.exp(-x / 2) * laguerre


########
# Atom #
########
def projector(levels: int, to: int, frm: int) -> np.ndarray:
    """Local |to⟩⟨frm| on an atom with `levels` levels."""
    if not (0 <= to < levels and 0 <= frm < levels):
        raise InvalidDimensionError(f"levels ({to}, {frm}) outside 0..{levels - 1}")
    op = np.zeros((levels, levels), dtype=complex)
    op[to, frm] = 1.0
    return op


def _local_spin(levels: int, axis: str, g: int, e: int) -> np.ndarray:
    raise_ = projector(levels, e, g)
    lower = projector(levels, g, e)
    if axis == "x":
        return 0.5 * (raise_ + lower)
    if axis == "y":
        return 0.5 * (-1j * raise_ + 1j * lower)
    if axis == "z":
        return 0.5 * (projector(levels, e, e) - projector(levels, g, g))
    raise ContractViolationError(f"unknown spin axis {axis!r}")


def collective_spin(
    layout: HilbertLayout,
    axis: Literal["x", "y", "z"],
    qubit_levels: Tuple[int, int] = (C.Level.G, C.Level.E),
) -> np.ndarray:
    """S_axis = ½ Σ_atoms σ_axis on the (g, e) levels, identity on photons."""
    g, e = qubit_levels
    if g == e:
        raise InvalidDimensionError("g and e must be distinct levels")
    return sum(
        embed(_local_spin(levels, axis, g, e), site, layout)
        for site, levels in enumerate(layout.atom_levels)
    )


def embed(op: np.ndarray, site: Site, layout: HilbertLayout) -> np.ndarray:
    """kron(I, …, op, …, I) following the layout's ordering."""
    op = np.asarray(op, dtype=complex)
    position = layout.n_atoms if site == PHOTON else int(site)
    if not 0 <= position <= layout.n_atoms:
        raise InvalidDimensionError(f"no site {site!r} in a {layout.n_atoms}-atom layout")
    expected = layout.dims[position]
    if op.shape != (expected, expected):
        raise InvalidDimensionError(
            f"local operator {op.shape} does not fit site {site!r} (dim {expected})"
        )
    factors = [
        op if i == position else np.eye(d, dtype=complex)
        for i, d in enumerate(layout.dims)
    ]
    return reduce(np.kron, factors)


def annihilate(layout: HilbertLayout) -> np.ndarray:
    """Embedded photon annihilation operator a."""
    return embed(fock_annihilate(layout.n_max), PHOTON, layout)


def number(layout: HilbertLayout) -> np.ndarray:
    """Embedded a†a."""
    return embed(fock_number(layout.n_max), PHOTON, layout)


def transition(layout: HilbertLayout, site: int, to: int, frm: int) -> np.ndarray:
    """Embedded |to⟩⟨frm| on one atom."""
    return embed(projector(layout.atom_levels[site], to, frm), site, layout)


def level_sum(layout: HilbertLayout, to: int, frm: int) -> np.ndarray:
    """Σ_atoms |to⟩⟨frm|."""
    return sum(transition(layout, site, to, frm) for site in range(layout.n_atoms))


##########
# States #
##########
def basis_ket(layout: HilbertLayout, levels: Sequence[int], n: int = 0) -> np.ndarray:
    """Product basis ket |levels⟩|n⟩."""
    ket = np.zeros(layout.dim, dtype=complex)
    ket[layout.index(levels, n)] = 1.0
    return ket


def with_photons(atomic: np.ndarray, layout: HilbertLayout, n: int = 0) -> np.ndarray:
    """Atomic ket (or matrix of kets as columns) ⊗ |n⟩."""
    atomic = np.asarray(atomic, dtype=complex)
    if atomic.shape[0] != layout.atom_dim:
        raise InvalidDimensionError(
            f"atomic state of dim {atomic.shape[0]} for atom_dim {layout.atom_dim}"
        )
    fock = np.zeros(layout.fock_dim, dtype=complex)
    fock[n] = 1.0
    if atomic.ndim == 1:
        return np.kron(atomic, fock)
    return np.kron(atomic, fock[:, None])


def as_density(state: np.ndarray) -> np.ndarray:
    """Ket → |ψ⟩⟨ψ|; density operators pass through."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def partial_trace_photon(rho: np.ndarray, layout: HilbertLayout) -> np.ndarray:
    """Trace out the photon factor.

    Accepts a ket, a density operator, or a stack of operators with shape
    (..., d, d); operators need not be positive.
    """
    rho = as_density(rho)
    a, f = layout.atom_dim, layout.fock_dim
    if rho.shape[-2:] != (layout.dim, layout.dim):
        raise InvalidDimensionError(f"shape {rho.shape} does not match layout")
    blocks = rho.reshape(rho.shape[:-2] + (a, f, a, f))
    return np.einsum("...ifjf->...ij", blocks)


def partial_trace_atoms(rho: np.ndarray, layout: HilbertLayout) -> np.ndarray:
    """Trace out all atoms, leaving the photon density operator."""
    rho = as_density(rho)
    a, f = layout.atom_dim, layout.fock_dim
    blocks = rho.reshape(rho.shape[:-2] + (a, f, a, f))
    return np.einsum("...imin->...mn", blocks)


def fock_population(state: np.ndarray, layout: HilbertLayout) -> np.ndarray:
    """Photon-number distribution of a ket or density operator."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        probs = np.abs(state) ** 2
    else:
        probs = np.real(np.diagonal(state, axis1=-2, axis2=-1))
    return probs.reshape(probs.shape[:-1] + (layout.atom_dim, layout.fock_dim)).sum(
        axis=-2
    )


@dataclass(frozen=True)
class TruncationReport:
    """Population sitting in the top two Fock levels."""

    top_population: float
    flagged: bool


def truncation_report(
    state: np.ndarray,
    layout: HilbertLayout,
    threshold: float = C.Tolerance.TRUNCATION,
) -> TruncationReport:
    """Flag states whose top Fock levels carry more than `threshold`."""
    pops = fock_population(state, layout)
    top = float(np.max(pops[..., -2:]))
    flagged = top > threshold
    if flagged:
        logger.warning(
            "Fock truncation: top-level population %.3e exceeds %.1e (n_max=%d)",
            top,
            threshold,
            layout.n_max,
        )
    return TruncationReport(top, flagged)


#########
# Maths #
#########
def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """e^{−iHt} through an eigendecomposition of Hermitian H."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got {h.shape}")
    if not is_hermitian(h):
        raise ContractViolationError("expm_hermitian needs a Hermitian generator")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * w * t)) @ v.conj().T


_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    # (g, e) ordering: σ_y = −i|e⟩⟨g| + i|g⟩⟨e|
    np.array([[0, 1j], [-1j, 0]], dtype=complex),
    np.array([[-1, 0], [0, 1]], dtype=complex),
)


def pauli_products() -> np.ndarray:
    """σ_i ⊗ σ_j for i, j ∈ (I, X, Y, Z), shape (16, 4, 4), row-major in (i, j)."""
    return np.array([np.kron(p, q) for p in _PAULI for q in _PAULI])


def atomic_spin(axis: Literal["x", "y", "z"], n_atoms: int = 2) -> np.ndarray:
    """Collective spin of `n_atoms` bare qubits, without a photon factor."""
    local = _local_spin(2, axis, C.Level.G, C.Level.E)
    eye = np.eye(2, dtype=complex)
    return sum(
        reduce(np.kron, [local if i == site else eye for i in range(n_atoms)])
        for site in range(n_atoms)
    )
