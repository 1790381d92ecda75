"""Closed-form Mølmer–Sørensen gate.

H_MS(t) = g_eff(a e^{−iδt} + a† e^{iδt})S_x is solved exactly by

    U_MS(t) = exp(−i(α(t)a† + α*(t)a)S_x) · exp(iβ(t)S_x²)
    α(t) = i(g_eff/δ)(1 − e^{iδt})
    β(t) = (g_eff/δ)²(δt − sin δt)

The photon trajectory α(t) is a circle that returns to the origin every
τ = 2π/|δ|; after m loops the spin picks up β = sign(δ)·π/2 when
δ = 2√m·g_eff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from cavityms.lib import qops
from cavityms.lib.common.exception import ContractViolationError, SingularParameterError
from cavityms.lib.params import EffectiveParams

LOGICAL_LABELS = ("gg", "ge", "eg", "ee")


@dataclass(frozen=True)
class MsTrajectory:
    """Phase-space trajectory and geometric phase of the ideal gate.

    Args:
        g_eff (float): effective coupling
        delta (float): two-photon detuning δ

    """

    g_eff: float
    delta: float

    def __post_init__(self) -> None:
        """Reject δ = 0."""
        if self.delta == 0:
            raise SingularParameterError("δ must be nonzero")

    @classmethod
    def from_effective(cls, eff: EffectiveParams) -> MsTrajectory:
        """Trajectory of an effective parameter set."""
        return cls(eff.g_eff, eff.delta)

    @property
    def ratio(self) -> float:
        """g_eff/δ, the circle radius up to sign."""
        return self.g_eff / self.delta

    @property
    def tau(self) -> float:
        """Loop period 2π/|δ|."""
        return 2 * math.pi / abs(self.delta)

    @property
    def loop_index(self) -> float:
        """m = δ²/(4 g_eff²)."""
        if self.g_eff == 0:
            raise SingularParameterError("g_eff must be nonzero")
        return self.delta**2 / (4 * self.g_eff**2)

    @property
    def closes_exactly(self) -> bool:
        """The gate ends on a loop boundary (m is an integer)."""
        m = self.loop_index
        return abs(m - round(m)) < 1e-9 * max(1.0, m)

    def gate_time(self) -> float:
        """t_gate = π|δ|/(2 g_eff²) = m·τ."""
        if self.g_eff == 0:
            raise SingularParameterError("g_eff must be nonzero")
        return math.pi * abs(self.delta) / (2 * self.g_eff**2)

    def area(self) -> float:
        """Area π(g_eff/δ)² enclosed by one loop."""
        return math.pi * self.ratio**2

    def alpha_t(self, t: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
        """α(t) = i(g_eff/δ)(1 − e^{iδt})."""
        return 1j * self.ratio * (1 - np.exp(1j * self.delta * np.asarray(t)))

    def beta_t(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """β(t) = (g_eff/δ)²(δt − sin δt)."""
        x = self.delta * np.asarray(t, dtype=float)
        return self.ratio**2 * (x - np.sin(x))

    def photon_number(self, t: float, atomic: np.ndarray) -> float:
        """Mean photon number |α(t)|²⟨S_x²⟩ for an atomic ket, vacuum start."""
        atomic = np.asarray(atomic, dtype=complex)
        n_atoms = int(round(math.log2(atomic.shape[0])))
        sx = qops.atomic_spin("x", n_atoms)
        sx2 = float(np.real(np.vdot(atomic, sx @ sx @ atomic)))
        return float(abs(self.alpha_t(t)) ** 2 * sx2)

    def u_ms(self, t: float, layout: qops.HilbertLayout) -> np.ndarray:
        """U_MS(t) on a qubit ⊗ photon layout, factors in the order written above."""
        a = qops.annihilate(layout)
        sx = qops.collective_spin(layout, "x")
        alpha = complex(self.alpha_t(t))
        displacement = (alpha * a.conj().T + np.conj(alpha) * a) @ sx
        phase = sx @ sx
        return qops.expm_hermitian(displacement, 1.0) @ qops.expm_hermitian(
            phase, -float(self.beta_t(t))
        )

    def atomic_phase_gate(self, t: float, n_atoms: int = 2) -> np.ndarray:
        """e^{iβ(t)S_x²} on the bare qubits."""
        sx = qops.atomic_spin("x", n_atoms)
        return qops.expm_hermitian(sx @ sx, -float(self.beta_t(t)))


def _sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ContractViolationError(f"sign must be +1 or -1, got {sign}")
    return sign


def ideal_gate_map(sign: int = 1) -> np.ndarray:
    """Two-qubit truth-table unitary (I + i·sign·σ_x⊗σ_x)/√2.

    Equals e^{−i·sign·π/4} e^{i·sign·(π/2)S_x²}; sends |gg⟩ to
    (|gg⟩ + i·sign|ee⟩)/√2 and |ge⟩ to (|ge⟩ + i·sign|eg⟩)/√2.
    """
    s = _sign(sign)
    xx = np.fliplr(np.eye(4, dtype=complex))
    return (np.eye(4) + 1j * s * xx) / math.sqrt(2)


def logical_state(i: int) -> np.ndarray:
    """|φ_i⟩ for i = 1..4: |gg⟩, |ge⟩, |eg⟩, |ee⟩."""
    if i not in (1, 2, 3, 4):
        raise ContractViolationError(f"logical index must be 1..4, got {i}")
    ket = np.zeros(4, dtype=complex)
    ket[i - 1] = 1.0
    return ket


def target_state(i: int, sign: int = 1) -> np.ndarray:
    """|Φ_i^(±)⟩ = ideal_gate_map(sign)|φ_i⟩."""
    return ideal_gate_map(sign) @ logical_state(i)
