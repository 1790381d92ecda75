"""Hamiltonian builders.

Every Hamiltonian is held as a static part plus oscillating pairs,

    H(t) = H0 + Σ_k (A_k e^{−iω_k t} + A_k† e^{+iω_k t}),

so integrators evaluate it at any t from a handful of cached matrices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from typing_extensions import Literal

from cavityms.common import constant as C
from cavityms.lib import qops
from cavityms.lib.common.exception import (
    ContractViolationError,
    InvalidDimensionError,
    SingularParameterError,
)
from cavityms.lib.params import (
    EffectiveParams,
    RamanConfig,
    Rb87Config,
    arm_couplings,
    derive_effective,
    derive_rb87,
)

logger = logging.getLogger(__name__)

QUBIT = (C.Level.G, C.Level.E)


@dataclass(frozen=True, eq=False)
class TimeDependentHamiltonian:
    """H(t) = static + Σ (op e^{−iωt} + h.c.).

    Args:
        layout (HilbertLayout): Hilbert space the operators act on
        static (np.ndarray): Hermitian time-independent part
        terms (Tuple[Tuple[np.ndarray, float], ...]): (operator, ω) pairs

    """

    layout: qops.HilbertLayout
    static: np.ndarray
    terms: Tuple[Tuple[np.ndarray, float], ...] = ()
    _adjoints: Tuple[np.ndarray, ...] = field(
        init=False, repr=False, compare=False, default=()
    )

    def __post_init__(self) -> None:
        """Check shapes and hermiticity of the static part."""
        static = qops.check_operator(self.static, self.layout)
        if not qops.is_hermitian(static):
            raise ContractViolationError("static part must be Hermitian")
        terms = tuple(
            (qops.check_operator(op, self.layout), float(omega))
            for op, omega in self.terms
        )
        object.__setattr__(self, "static", static)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_adjoints", tuple(op.conj().T for op, _ in terms))

    def __call__(self, t: float) -> np.ndarray:
        """Dense H(t)."""
        h = self.static.copy()
        for (op, omega), adj in zip(self.terms, self._adjoints):
            phase = np.exp(-1j * omega * t)
            h += phase * op + np.conj(phase) * adj
        return h

    @property
    def frequencies(self) -> Tuple[float, ...]:
        """Oscillation frequencies ω_k."""
        return tuple(omega for _, omega in self.terms)

    @property
    def is_static(self) -> bool:
        """True when no term oscillates."""
        return all(omega == 0 for omega in self.frequencies)

    def static_equivalent(self) -> np.ndarray:
        """H(0); equals H(t) for every t when `is_static`."""
        return self(0.0)

    def norm_bound(self) -> float:
        """Upper bound on ‖H(t)‖₂ over t (largest singular values added up)."""
        bound = np.linalg.norm(self.static, 2)
        for op, _ in self.terms:
            bound += 2 * np.linalg.norm(op, 2)
        return float(bound)


def _merge_terms(terms: Iterable[Tuple[np.ndarray, float]]) -> List[Tuple[np.ndarray, float]]:
    """Sum operators that share a frequency; drop zero operators."""
    grouped: Dict[float, np.ndarray] = {}
    for op, omega in terms:
        omega = float(omega)
        grouped[omega] = grouped[omega] + op if omega in grouped else op.copy()
    return [(op, omega) for omega, op in grouped.items() if np.any(op)]


def _check_atoms(layout: qops.HilbertLayout, min_levels: int, what: str) -> None:
    if min(layout.atom_levels) < min_levels:
        raise InvalidDimensionError(
            f"{what} needs at least {min_levels} levels per atom, "
            f"layout has {layout.atom_levels}"
        )


################
# Four-level   #
################
def build_full_raman(
    cfg: RamanConfig, layout: qops.HilbertLayout
) -> TimeDependentHamiltonian:
    """Four-level Raman Hamiltonian H′ in the frame rotating with the drives.

    Per atom:
        −Δ1|r1⟩⟨r1| − Δ2|r2⟩⟨r2|
        + (Ω1/2)|r1⟩⟨e| e^{iδ1t/2} + (Ω2/2)|r2⟩⟨g| e^{iδ2t/2}
        + g a|r1⟩⟨g| e^{−iδ1t/2} + g a|r2⟩⟨e| e^{−iδ2t/2} + h.c.
    """
    _check_atoms(layout, 4, "the Raman model")
    if layout.n_atoms != cfg.n_atoms:
        raise InvalidDimensionError(
            f"config has {cfg.n_atoms} atoms, layout has {layout.n_atoms}"
        )
    lv = C.Level
    a = qops.annihilate(layout)
    static = -cfg.delta1_big * qops.level_sum(layout, lv.R1, lv.R1)
    static = static - cfg.delta2_big * qops.level_sum(layout, lv.R2, lv.R2)
    terms = [
        (0.5 * cfg.omega1 * qops.level_sum(layout, lv.R1, lv.E), -cfg.delta1 / 2),
        (0.5 * cfg.omega2 * qops.level_sum(layout, lv.R2, lv.G), -cfg.delta2 / 2),
        (cfg.g * qops.level_sum(layout, lv.R1, lv.G) @ a, cfg.delta1 / 2),
        (cfg.g * qops.level_sum(layout, lv.R2, lv.E) @ a, cfg.delta2 / 2),
    ]
    return TimeDependentHamiltonian(layout, static, tuple(_merge_terms(terms)))


def stark_frame(eff: EffectiveParams, layout: qops.HilbertLayout) -> np.ndarray:
    """H2 = N·Δ_c a†a + Σ_atoms (Δ_g|g⟩⟨g| + Δ_e|e⟩⟨e|).

    States of the eliminated model map into the H′_eff frame through
    e^{iH2 t}.
    """
    lv = C.Level
    return (
        layout.n_atoms * eff.stark_c * qops.number(layout)
        + eff.stark_g * qops.level_sum(layout, lv.G, lv.G)
        + eff.stark_e * qops.level_sum(layout, lv.E, lv.E)
    )


##############
# Effective  #
##############
def build_arms(
    layout: qops.HilbertLayout,
    chi: float,
    g_up: float,
    delta_up: float,
    g_down: float,
    delta_down: float,
    qubit_levels: Tuple[int, int] = QUBIT,
) -> TimeDependentHamiltonian:
    """χ a†a S_z + (g_up/2) a Σ|e⟩⟨g| e^{−iδ_up t} + (g_down/2) a Σ|g⟩⟨e| e^{−iδ_down t} + h.c.

    With equal couplings and detunings the two arms combine into
    g·(a e^{−iδt} + a† e^{iδt})·S_x.
    """
    _check_atoms(layout, 2, "the effective model")
    g, e = qubit_levels
    a = qops.annihilate(layout)
    static = chi * qops.number(layout) @ qops.collective_spin(layout, "z", qubit_levels)
    terms = [
        (0.5 * g_up * a @ qops.level_sum(layout, e, g), delta_up),
        (0.5 * g_down * a @ qops.level_sum(layout, g, e), delta_down),
    ]
    return TimeDependentHamiltonian(layout, static, tuple(_merge_terms(terms)))


def build_effective(
    eff: EffectiveParams, layout: qops.HilbertLayout
) -> TimeDependentHamiltonian:
    """H′_eff = χ a†a S_z + g_eff(e^{−iδt}a + e^{iδt}a†)S_x.

    Unequal Stark-corrected detunings δ′1 ≠ δ′2 keep the two arms at their own
    frequencies.
    """
    return build_arms(
        layout,
        eff.chi,
        eff.g_eff,
        eff.delta1_prime,
        eff.g_eff,
        eff.delta2_prime,
    )


def build_effective_from_raman(
    cfg: RamanConfig, layout: qops.HilbertLayout
) -> TimeDependentHamiltonian:
    """Effective model obtained by eliminating |r1⟩, |r2⟩ from `build_full_raman`.

    Arm couplings are gΩ1/Δ1 and gΩ2/Δ2 at δ′1 and δ′2; the dispersive term
    comes out as g²(1/Δ2 − 1/Δ1)·a†a·S_z.
    """
    eff = derive_effective(cfg)
    g_up, g_down = arm_couplings(cfg)
    return build_arms(
        layout, -eff.chi, g_up, eff.delta1_prime, g_down, eff.delta2_prime
    )


def build_rb87_effective(
    cfg: Rb87Config,
    layout: qops.HilbertLayout,
    g_eff_2: Optional[float] = None,
) -> TimeDependentHamiltonian:
    """87Rb effective model on (g, e, u) atoms; |u⟩ is a spectator.

    The a|e⟩⟨g| arm carries g_eff⁽¹⁾, the a|g⟩⟨e| arm g_eff⁽²⁾ (or the
    override), both at δ.
    """
    _check_atoms(layout, 3, "the 87Rb model")
    derived = derive_rb87(cfg)
    if not derived.balanced and g_eff_2 is None:
        logger.warning(
            "87Rb arms are unbalanced: g_eff1=%.6g, g_eff2=%.6g",
            derived.g_eff_1,
            derived.g_eff_2,
        )
    return build_arms(
        layout,
        derived.effective.chi,
        derived.g_eff_1,
        cfg.delta,
        derived.g_eff_2 if g_eff_2 is None else g_eff_2,
        cfg.delta,
    )


##########################
# Static interaction form #
##########################
def build_interaction_static(
    eff: EffectiveParams,
    layout: qops.HilbertLayout,
    photon_ordering: Literal["normal", "anti"] = "normal",
) -> np.ndarray:
    """H_I = χ a†a S_z + δ a†a + g_eff(a + a†)S_x.

    `anti` writes the free photon term as δ a a†, which adds δ·I.
    States in the H′_eff frame are `interaction_frame(t) @` states evolved
    with H_I.
    """
    if eff.delta == 0:
        raise SingularParameterError("δ must be nonzero for the static frame")
    _check_atoms(layout, 2, "the effective model")
    a = qops.annihilate(layout)
    n = qops.number(layout)
    h = (
        eff.chi * n @ qops.collective_spin(layout, "z")
        + eff.delta * n
        + eff.g_eff * (a + a.conj().T) @ qops.collective_spin(layout, "x")
    )
    if photon_ordering == "anti":
        h = h + eff.delta * np.eye(layout.dim)
    elif photon_ordering != "normal":
        raise ContractViolationError(f"unknown photon ordering {photon_ordering!r}")
    return h


def split_interaction(
    eff: EffectiveParams, layout: qops.HilbertLayout
) -> Tuple[np.ndarray, np.ndarray]:
    """(H′_MS, H_AS): the χ = 0 part of H_I and the dispersive term χ a†a S_z."""
    h_ms = build_interaction_static(eff.scaled(chi=0.0), layout)
    h_as = eff.chi * qops.number(layout) @ qops.collective_spin(layout, "z")
    return h_ms, h_as


def interaction_frame(layout: qops.HilbertLayout, delta: float, t: float) -> np.ndarray:
    """Diagonal of e^{iδ a†a t}, taking H_I-frame states to the H′_eff frame."""
    return np.exp(1j * delta * t * layout.photon_numbers())


def dressed_energies(eff: EffectiveParams, n_max: int) -> np.ndarray:
    """E_jn = δ(n − (jα)²) for j = −1, 0, 1 (rows) and n = 0..n_max (columns)."""
    alpha = eff.alpha
    j = np.array([-1.0, 0.0, 1.0])[:, None]
    n = np.arange(n_max + 1)[None, :]
    return eff.delta * (n - (j * alpha) ** 2)


@dataclass(frozen=True, eq=False)
class StarkFrame:
    """Map four-level states onto the qubit layout of the H′_eff frame.

    ψ′(t) = e^{iH2 t} P ψ(t), with P the projection onto the (g, e) levels.
    H2 is diagonal, so the map is a phase per kept basis state.

    Args:
        source (HilbertLayout): four-level layout
        target (HilbertLayout): qubit layout with the same photon cut-off
        keep (np.ndarray): indices of the qubit states inside `source`
        energies (np.ndarray): diagonal of H2 on the kept states

    """

    source: qops.HilbertLayout
    target: qops.HilbertLayout
    keep: np.ndarray
    energies: np.ndarray

    @classmethod
    def for_raman(cls, cfg: RamanConfig, layout: qops.HilbertLayout) -> StarkFrame:
        """Frame of the eliminated Raman model."""
        target, keep = layout.restrict(QUBIT)
        h2 = np.real(np.diag(stark_frame(derive_effective(cfg), layout)))
        return cls(layout, target, keep, h2[keep])

    def __call__(self, t: float, states: np.ndarray) -> np.ndarray:
        """Map a batch of kets (B, d) or density operators (B, d, d)."""
        phase = np.exp(1j * self.energies * t)
        if states.ndim == 2:
            return states[:, self.keep] * phase
        block = states[:, self.keep[:, None], self.keep[None, :]]
        return block * phase[:, None] * np.conj(phase)[None, :]
