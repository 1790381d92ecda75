"""Perturbative treatment of the dispersive shift χ a†a S_z.

In the static frame H_I = H′_MS + H_AS with H′_MS = δ a†a + g_eff(a + a†)S_x and
H_AS = χ a†a S_z. H′_MS is diagonal in the dressed basis

    |j, n⟩⟩ = |S=1, S_x=j⟩ ⊗ D(jα)|n⟩,   E_jn = δ(n − (jα)²),   α = −g_eff/δ,
    |S=0⟩ ⊗ |n⟩,                         E = δn,

and H_AS only connects the j = 0 triplet to j = ±1:

    ⟨⟨0,m|H_AS|±1,n⟩⟩ = χ(m/√2)⟨m|D(±α)|n⟩.

The overlap η_{i,n}(t) = ⟨Φ_i|⟨n|ψ(t)⟩ (H′_eff frame, ψ(0) = |φ_i⟩|n⟩) is
expanded in powers of χ through the Dyson series of H_II(t) =
e^{iH′_MS t} H_AS e^{−iH′_MS t}. Time integrals of exponentials are written as
divided differences of λ ↦ e^{iλt}, which stay finite at every degeneracy.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from cavityms.common import constant as C
from cavityms.common.util.log import log_func
from cavityms.lib import qops
from cavityms.lib.common.exception import (
    ContractViolationError,
    FitError,
    QuadratureError,
    SeriesTruncationError,
    SingularParameterError,
)
from cavityms.lib.fidelity import max_over_time
from cavityms.lib.hamiltonians import split_interaction
from cavityms.lib.msgate import logical_state, target_state
from cavityms.lib.params import EffectiveParams

logger = logging.getLogger(__name__)

SINGLET = "singlet"
SECTORS = (-1, 0, 1)
_TAYLOR_TERMS = 30

# S_x eigenstates of two qubits in the (gg, ge, eg, ee) basis. The relative
# phase of the j = 0 state makes ⟨0|S_z|±1⟩ = +1/√2.
_PLUS = np.array([1.0, 1.0]) / math.sqrt(2)
_MINUS = np.array([1.0, -1.0]) / math.sqrt(2)
SPIN_STATES = {
    1: np.kron(_PLUS, _PLUS).astype(complex),
    0: (-(np.kron(_PLUS, _MINUS) + np.kron(_MINUS, _PLUS)) / math.sqrt(2)).astype(
        complex
    ),
    -1: np.kron(_MINUS, _MINUS).astype(complex),
    SINGLET: ((np.kron(_PLUS, _MINUS) - np.kron(_MINUS, _PLUS)) / math.sqrt(2)).astype(
        complex
    ),
}


#####################
# Divided differences #
#####################
def _i1(x: np.ndarray, t: float) -> np.ndarray:
    """∫_0^t e^{ixs} ds, finite at x = 0."""
    theta = x * t
    return t * (np.sinc(theta / np.pi) + 1j * np.sin(theta / 2) * np.sinc(theta / (2 * np.pi)))


def _dd1(p: np.ndarray, q: np.ndarray, t: float) -> np.ndarray:
    """Divided difference of e^{iλt} at λ = p, q (divided by i)."""
    return np.exp(1j * p * t) * _i1(q - p, t)


def divided_difference2(
    x: np.ndarray, y: np.ndarray, z: np.ndarray, t: float
) -> np.ndarray:
    """Second divided difference of λ ↦ e^{iλt} at real nodes x, y, z (over i²).

    Equals ∫_0^t dt1 e^{iy t1} ∫_0^{t1} dt2 e^{i(z−y) t2} when x = 0. Spread-out
    nodes use the difference quotient of the outermost pair; clustered nodes
    use a Taylor series about their centroid.
    """
    nodes = np.sort(np.stack(np.broadcast_arrays(*map(np.asarray, (x, y, z)))), axis=0)
    lo, mid, hi = nodes.astype(float)
    spread = hi - lo
    far = spread * t >= 1.0

    denominator = np.where(far, spread, 1.0)
    quotient = (_dd1(mid, hi, t) - _dd1(lo, mid, t)) / (1j * denominator)

    centre = (lo + mid + hi) / 3
    u, v, w = lo - centre, mid - centre, hi - centre
    e2 = u * v + u * w + v * w
    e3 = u * v * w
    h = [np.ones_like(u), np.zeros_like(u), -e2]
    coeff = t**2 / 2 + 0j
    taylor = coeff * h[0]
    for k in range(3, _TAYLOR_TERMS + 2):
        coeff = coeff * 1j * t / k
        j = k - 2
        if j >= len(h):
            h.append(-e2 * h[j - 2] + e3 * h[j - 3])
        taylor = taylor + coeff * h[j]
    taylor = np.exp(1j * centre * t) * taylor

    return np.where(far, quotient, taylor)


################
# Dressed basis #
################
@dataclass(frozen=True)
class DressedIndex:
    """Label of a dressed state: S_x sector (−1, 0, 1 or singlet) and photon n."""

    sector: Union[int, str]
    n: int


@dataclass(frozen=True, eq=False)
class DressedBasis:
    """Eigenbasis of H′_MS for two qubits.

    Args:
        eff (EffectiveParams): parameters; χ is only used by H_AS matrix elements
        n_max (int): highest photon label kept

    """

    eff: EffectiveParams
    n_max: int
    alpha: float = field(init=False)
    d_plus: np.ndarray = field(init=False, repr=False)
    d_minus: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Cache exact displacement elements d_mn(±α)."""
        if self.eff.delta == 0:
            raise SingularParameterError("dressed basis needs δ ≠ 0")
        alpha = -self.eff.g_eff / self.eff.delta
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "d_plus", qops.displacement_elements(alpha, self.n_max))
        object.__setattr__(self, "d_minus", qops.displacement_elements(-alpha, self.n_max))

    @property
    def size(self) -> int:
        """Photon labels per sector."""
        return self.n_max + 1

    @property
    def layout(self) -> qops.HilbertLayout:
        """Product layout of the same truncation."""
        return qops.HilbertLayout.qubits(self.n_max)

    def displacement(self, j: int) -> np.ndarray:
        """d_mn(jα)."""
        if j == 1:
            return self.d_plus
        if j == -1:
            return self.d_minus
        return np.eye(self.size, dtype=complex)

    def energy(self, sector: Union[int, str], n: Union[int, np.ndarray]) -> np.ndarray:
        """E_jn = δ(n − (jα)²); the singlet has δn."""
        j2 = 0 if sector == SINGLET else sector**2
        return self.eff.delta * (np.asarray(n) - j2 * self.alpha**2)

    @property
    def labels(self) -> List[DressedIndex]:
        """Dressed labels in matrix order: j = −1, 0, 1, then singlet."""
        return [
            DressedIndex(sector, n)
            for sector in SECTORS + (SINGLET,)
            for n in range(self.size)
        ]

    @property
    def energies(self) -> np.ndarray:
        """Energies in matrix order."""
        n = np.arange(self.size)
        return np.concatenate([self.energy(s, n) for s in SECTORS + (SINGLET,)])

    def matrix(self) -> np.ndarray:
        """Columns are the dressed states written in the product basis."""
        columns = []
        for sector in SECTORS + (SINGLET,):
            d = self.displacement(0 if sector == SINGLET else sector)
            columns.append(np.kron(SPIN_STATES[sector][:, None], d))
        return np.hstack(columns)

    def spin_coefficients(self, spin: np.ndarray) -> dict:
        """⟨X_j|spin⟩ for every sector."""
        return {sector: np.vdot(vec, spin) for sector, vec in SPIN_STATES.items()}

    def coefficients(self, spin: np.ndarray, n: int) -> dict:
        """Dressed components of spin ⊗ |n⟩ per sector: ⟨X_j|spin⟩·d_pn(−jα)."""
        spin_part = self.spin_coefficients(spin)
        out = {}
        for sector, amp in spin_part.items():
            j = 0 if sector == SINGLET else sector
            out[sector] = amp * self.displacement(-j)[:, n]
        return out

    def coupling_block(self, j: int) -> np.ndarray:
        """A[m, n] = ⟨⟨0,m|H_AS|j,n⟩⟩ = χ(m/√2)d_mn(jα) for j = ±1."""
        if j not in (1, -1):
            raise ContractViolationError(f"H_AS couples j=0 only to j=±1, got {j}")
        m = np.arange(self.size)[:, None]
        return self.eff.chi * m / math.sqrt(2) * self.displacement(j)

    def coupling_matrix(self) -> np.ndarray:
        """H_AS in the dressed basis (matrix order of `labels`)."""
        size = self.size
        out = np.zeros((4 * size, 4 * size), dtype=complex)
        zero = slice(size, 2 * size)
        for j, block in ((-1, slice(0, size)), (1, slice(2 * size, 3 * size))):
            a = self.coupling_block(j)
            out[zero, block] = a
            out[block, zero] = a.conj().T
        return out


def dressed_basis(eff: EffectiveParams, n_max: int = 40) -> DressedBasis:
    """Dressed eigenbasis of H′_MS."""
    return DressedBasis(eff, n_max)


def h_ii_matrix_element(
    basis: DressedBasis, m: int, n: int, j: int, t: float
) -> complex:
    """⟨⟨0,m|H_II(t)|j,n⟩⟩ = χ(m/√2) e^{i(E_0m − E_jn)t} d_mn(jα).

    Zero for j = 0 (the triplet j = 0 block is not coupled to itself).
    """
    if j == 0:
        return 0j
    a = basis.coupling_block(j)[m, n]
    phase = np.exp(1j * (basis.energy(0, m) - basis.energy(j, n)) * t)
    return complex(a * phase)


def h_ii_matrix(basis: DressedBasis, t: float) -> np.ndarray:
    """Full H_II(t) in the dressed basis."""
    e = basis.energies
    return np.exp(1j * (e[:, None] - e[None, :]) * t) * basis.coupling_matrix()


def y_lmn(
    basis: DressedBasis,
    l: Union[int, np.ndarray],
    m: Union[int, np.ndarray],
    n: Union[int, np.ndarray],
    t: float,
) -> np.ndarray:
    """Y_lmn(t) = ∫_0^t dt′ e^{ia t′} ∫_0^{t′} dt″ e^{ib t″}.

    a = E_1m − E_0l and b = E_0l − E_1n; finite through every degeneracy.
    """
    e1m = basis.energy(1, m)
    return divided_difference2(0.0, e1m - basis.energy(0, l), e1m - basis.energy(1, n), t)


def y_lmn_quadrature(
    basis: DressedBasis, l: int, m: int, n: int, t: float, tol: float = 1e-12
) -> complex:
    """Y_lmn(t) by adaptive two-dimensional quadrature."""
    a = float(basis.energy(1, m) - basis.energy(0, l))
    b = float(basis.energy(0, l) - basis.energy(1, n))

    def _part(fn):
        value, _ = integrate.dblquad(
            lambda t2, t1: fn(a * t1 + b * t2),
            0.0,
            t,
            0.0,
            lambda t1: t1,
            epsabs=tol,
            epsrel=tol,
        )
        return value

    return complex(_part(math.cos), _part(math.sin))


###########
# Overlap #
###########
@dataclass
class OverlapSeries:
    """Overlap terms η⁽⁰⁾, η⁽¹⁾, η⁽²⁾ for one (i, n, t)."""

    i: int
    n: int
    t: float
    eta0: complex
    eta1: complex = 0j
    eta2: complex = 0j
    order: int = 2

    def total(self, order: Optional[int] = None) -> complex:
        """Σ_{k ≤ order} η⁽ᵏ⁾."""
        order = self.order if order is None else order
        terms = (self.eta0, self.eta1, self.eta2)[: order + 1]
        return complex(sum(terms))

    def fidelity(self, order: Optional[int] = None) -> float:
        """|Σ η⁽ᵏ⁾|²."""
        return abs(self.total(order)) ** 2


def _check_index(i: int) -> None:
    if i not in (1, 2, 3, 4):
        raise ContractViolationError(f"logical index must be 1..4, got {i}")


def _sign(basis: DressedBasis) -> int:
    return 1 if basis.eff.delta > 0 else -1


def _spins(basis: DressedBasis, i: int) -> Tuple[np.ndarray, np.ndarray]:
    return logical_state(i), target_state(i, _sign(basis))


def _check_tail(total: complex, shell: complex, what: str) -> None:
    bound = max(C.Tolerance.SERIES_TAIL * abs(total), C.Tolerance.SERIES_FLOOR)
    if abs(shell) > bound:
        raise SeriesTruncationError(
            f"{what}: truncation shell contributes {abs(shell):.3e} "
            f"(bound {bound:.1e}); raise n_max"
        )


def eta0(basis: DressedBasis, i: int, n: int, t: float) -> complex:
    """Zeroth-order overlap ⟨Φ_i, n|U_MS(t)|φ_i, n⟩ from the dressed decomposition."""
    _check_index(i)
    initial, target = _spins(basis, i)
    c = basis.coefficients(initial, n)
    b = basis.coefficients(target, n)
    p = np.arange(basis.size)
    total = 0j
    for sector in SECTORS + (SINGLET,):
        phase = np.exp(-1j * basis.energy(sector, p) * t)
        total += np.sum(np.conj(b[sector]) * c[sector] * phase)
    return complex(np.exp(1j * basis.eff.delta * n * t) * total)


def eta1(basis: DressedBasis, i: int, n: int, t: float) -> complex:
    """First-order overlap.

    Zero for i = 2, 3 (no j = 0 component) and for n = 0 (the j = 0 state
    carries photon label n and H_AS scales with it). Otherwise

        η⁽¹⁾ = −i e^{iδnt} χ(n/√2) Σ_{j=±1} Σ_l d_nl(jα)²
               [Φ̄_j φ_0 e^{−iE_1l t} I(E_1l − E_0n) + Φ̄_0 φ_j e^{−iE_0n t} I(E_0n − E_1l)]

    with φ_j, Φ_j the S_x-sector amplitudes and I(x) = ∫_0^t e^{ixs} ds.
    """
    _check_index(i)
    if i in (2, 3) or n == 0:
        return 0j
    initial, target = _spins(basis, i)
    s = basis.spin_coefficients(initial)
    tt = basis.spin_coefficients(target)
    l = np.arange(basis.size)
    e1 = basis.energy(1, l)
    e0n = float(basis.energy(0, n))
    terms = np.zeros(basis.size, dtype=complex)
    for j in (1, -1):
        kernel = basis.eff.chi * n / math.sqrt(2) * np.abs(basis.displacement(j)[n, :]) ** 2
        down = np.conj(tt[j]) * s[0] * np.exp(-1j * e1 * t) * _i1(e1 - e0n, t)
        up = np.conj(tt[0]) * s[j] * np.exp(-1j * e0n * t) * _i1(e0n - e1, t)
        terms += kernel * (down + up)
    total = terms.sum()
    _check_tail(total, terms[-1], "eta1")
    return complex(-1j * np.exp(1j * basis.eff.delta * n * t) * total)


def eta2_vacuum(basis: DressedBasis, i: int, t: float) -> complex:
    """Second-order overlap for the vacuum start, η⁽²⁾_{i,0}.

    Only the path ±1 → 0 → ±1 contributes (the other path starts on the j = 0
    state with photon label 0, where H_AS vanishes):

        η⁽²⁾ = −(χ²/2) Σ_lmn l² e^{−iE_1m t} Y_lmn P_lm Q_ln
        P_lm = Σ_j Φ̄_j d_m0(−jα)* d_lm(jα)*,   Q_ln = Σ_j φ_j d_ln(jα) d_n0(−jα)

    For i = 1, 4 the sector sums reduce to (1 + (−1)^l) factors, for i = 2, 3
    to (1 − (−1)^l). η⁽²⁾_4 = η⁽²⁾_1 and η⁽²⁾_3 = η⁽²⁾_2 by the g ↔ e symmetry.
    """
    _check_index(i)
    i = {4: 1, 3: 2}.get(i, i)
    initial, target = _spins(basis, i)
    s = basis.spin_coefficients(initial)
    tt = basis.spin_coefficients(target)
    size = basis.size

    p_lm = np.zeros((size, size), dtype=complex)
    q_ln = np.zeros((size, size), dtype=complex)
    for j in (1, -1):
        d_j, d_mj = basis.displacement(j), basis.displacement(-j)
        p_lm += np.conj(tt[j]) * np.conj(d_mj[:, 0])[None, :] * np.conj(d_j)
        q_ln += s[j] * d_j * d_mj[:, 0][None, :]

    l = np.arange(size)[:, None, None]
    m = np.arange(size)[None, :, None]
    n = np.arange(size)[None, None, :]
    y = y_lmn(basis, l, m, n, t)
    phase = np.exp(-1j * basis.energy(1, m) * t)
    tensor = -(basis.eff.chi**2 / 2) * l**2 * phase * y * p_lm[:, :, None] * q_ln[:, None, :]

    total = tensor.sum()
    shell = np.maximum(np.maximum(l, m), n) >= size - 1
    _check_tail(total, tensor[np.broadcast_to(shell, tensor.shape)].sum(), "eta2")
    return complex(total)


def overlap_series(
    basis: DressedBasis, i: int, n: int, t: float, order: int = 2
) -> OverlapSeries:
    """η⁽⁰⁾..η⁽order⁾ by summing over every dressed path.

    A generic evaluation (any n, any sign of δ) used to cross-check the
    closed forms above.
    """
    _check_index(i)
    if order not in (0, 1, 2):
        raise ContractViolationError(f"order must be 0, 1 or 2, got {order}")
    initial, target = _spins(basis, i)
    c_parts = basis.coefficients(initial, n)
    b_parts = basis.coefficients(target, n)
    sectors = SECTORS + (SINGLET,)
    c = np.concatenate([c_parts[s] for s in sectors])
    b = np.concatenate([b_parts[s] for s in sectors])
    e = basis.energies
    a = basis.coupling_matrix()
    out_phase = np.conj(b) * np.exp(-1j * e * t)
    frame = np.exp(1j * basis.eff.delta * n * t)

    series = OverlapSeries(i, n, t, complex(frame * np.sum(out_phase * c)), order=order)
    if order >= 1:
        gaps = e[:, None] - e[None, :]
        first = _i1(gaps, t) * a
        series.eta1 = complex(-1j * frame * out_phase @ first @ c)
    if order >= 2:
        active = np.flatnonzero(np.any(a != 0, axis=0))
        ea = e[active]
        aa = a[np.ix_(active, active)]
        y = divided_difference2(
            0.0, (ea[:, None] - ea[None, :])[:, :, None], (ea[:, None, None] - ea[None, None, :]), t
        )
        paths = aa[:, :, None] * aa[None, :, :] * y
        series.eta2 = complex(
            -frame * np.einsum("k,kpq,q->", out_phase[active], paths, c[active])
        )
    return series


##################
# Dyson oracle   #
##################
def _quad(fn, t: float, tol: float) -> np.ndarray:
    value, _, info = integrate.quad_vec(
        fn, 0.0, t, epsabs=tol, epsrel=tol, limit=20000, full_output=True
    )
    if info.status != 0:
        raise QuadratureError(f"quad_vec: {info.message}")
    return value


def _stacked(vec: np.ndarray) -> np.ndarray:
    return np.concatenate([vec.real, vec.imag])


def _unstacked(vec: np.ndarray) -> np.ndarray:
    half = vec.shape[0] // 2
    return vec[:half] + 1j * vec[half:]


@log_func(logger_=logger)
def dyson_numeric(
    eff: EffectiveParams,
    order: int,
    i: int,
    n: int,
    t: float,
    n_max: int = 20,
    tol: float = 1e-11,
) -> complex:
    """k-th Dyson term of η_{i,n}(t) by adaptive quadrature (k = 1, 2).

    Works in the numerical eigenbasis of the truncated H′_MS, independent of
    the dressed-basis algebra.
    """
    _check_index(i)
    if order not in (1, 2):
        raise ContractViolationError(f"Dyson order must be 1 or 2, got {order}")
    layout = qops.HilbertLayout.qubits(n_max)
    h_ms, h_as = split_interaction(eff, layout)
    w, vecs = np.linalg.eigh(h_ms)
    a = vecs.conj().T @ h_as @ vecs
    sign = 1 if eff.delta > 0 else -1
    x0 = vecs.conj().T @ qops.with_photons(logical_state(i), layout, n)
    target = vecs.conj().T @ qops.with_photons(target_state(i, sign), layout, n)

    def _h(s: float, vec: np.ndarray) -> np.ndarray:
        return np.exp(1j * w * s) * (a @ (np.exp(-1j * w * s) * vec))

    if order == 1:
        x = -1j * _unstacked(_quad(lambda s: _stacked(_h(s, x0)), t, tol))
    else:

        def _inner(s1: float) -> np.ndarray:
            first = _unstacked(_quad(lambda s2: _stacked(_h(s2, x0)), s1, tol))
            return _stacked(_h(s1, first))

        x = -_unstacked(_quad(_inner, t, tol))

    return complex(np.exp(1j * eff.delta * n * t) * np.vdot(target, np.exp(-1j * w * t) * x))


def alpha_scaling_probe(
    i: int,
    alphas: Sequence[float] = (0.01, 0.02, 0.04),
    chi_over_delta: float = 0.1,
    delta_t: float = 7.0,
    n_max: int = 12,
) -> float:
    """Log-log slope of |η⁽²⁾_{i,0}| against α at fixed χ/δ and δt.

    δ = 1 sets the scale; α enters through g_eff = αδ.
    """
    _check_index(i)
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size < 2 or np.any(alphas <= 0) or np.unique(alphas).size < 2:
        raise FitError(f"need at least two distinct positive α values, got {alphas}")
    values = []
    for alpha in alphas:
        eff = EffectiveParams(chi=chi_over_delta, g_eff=alpha, delta=1.0)
        values.append(abs(eta2_vacuum(dressed_basis(eff, n_max), i, delta_t)))
    values = np.asarray(values)
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise FitError(f"|η2| must be positive and finite, got {values}")
    slope, _ = np.polyfit(np.log(alphas), np.log(values), 1)
    return float(slope)


def perturbative_overlap(basis: DressedBasis, i: int, t: float) -> OverlapSeries:
    """η⁽⁰⁾, η⁽¹⁾, η⁽²⁾ for the vacuum start from the closed forms."""
    return OverlapSeries(
        i, 0, t, eta0(basis, i, 0, t), eta1(basis, i, 0, t), eta2_vacuum(basis, i, t)
    )


def max_overlap_fidelity(
    basis: DressedBasis,
    i: int,
    window: Tuple[float, float],
    order: int = 2,
    points: int = 200,
) -> Tuple[float, float]:
    """max_t |η⁽⁰⁾ + … + η⁽order⁾|² for the vacuum start over a time window."""
    return max_over_time(
        lambda t: perturbative_overlap(basis, i, t).fidelity(order),
        window,
        points=points,
    )
