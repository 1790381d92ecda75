"""Parameter model.

Raw drive and cavity settings of the cavity-assisted Raman scheme, the
derived effective gate parameters, the Mølmer–Sørensen condition checks and
the 87Rb parameter derivation.

All frequencies are angular (ħ = 1). Configuration files quote values in
units of 2π·MHz; `mhz_to_angular` converts them to rad/μs, so times come out
in μs.

Sign conventions:
    * `EffectiveParams.chi` follows χ = g²(1/Δ1 − 1/Δ2). Eliminating the
      excited levels of the Raman model produces g²(1/Δ2 − 1/Δ1)·a†a·S_z,
      i.e. −χ; `hamiltonians.build_effective_from_raman` applies that sign.
      Average gate fidelities do not depend on the sign of χ.
    * Table-1 detunings are red detunings and enter as negative numbers.

"""

from __future__ import annotations

import math
from dataclasses import dataclass as std_dataclass
from dataclasses import field
from typing import Dict, List, Optional

from typing_extensions import Protocol

from cavityms.common import constant as C
from cavityms.common.model import dataclass
from cavityms.common.util.serialization import DataClassJSONSerializeMixin
from cavityms.lib.common.exception import (
    ContractViolationError,
    InvalidConfigurationError,
    SingularParameterError,
)

TWO_PI = 2.0 * math.pi


def mhz_to_angular(value: float) -> float:
    """2π·MHz → rad/μs."""
    return TWO_PI * value


def angular_to_mhz(value: float) -> float:
    """rad/μs → 2π·MHz."""
    return value / TWO_PI


def _require_nonzero(**values: float) -> None:
    for name, value in values.items():
        if value == 0:
            raise SingularParameterError(f"{name} must be nonzero")


def _require_nonnegative(obj: object, *names: str) -> None:
    for name in names:
        value = getattr(obj, name)
        if value < 0 or math.isnan(value):
            raise InvalidConfigurationError(f"must be >= 0, got {value}", key=name)


############
# Configs  #
############
@dataclass
class RamanConfig:
    """Raw inputs of the cavity-assisted Raman scheme.

    Args:
        g (float): atom-cavity coupling (vacuum Rabi half-frequency)
        omega1 (float): Rabi frequency of the laser driving |e⟩ ↔ |r1⟩
        omega2 (float): Rabi frequency of the laser driving |g⟩ ↔ |r2⟩
        delta1_big (float): one-photon detuning Δ1 of |r1⟩
        delta2_big (float): one-photon detuning Δ2 of |r2⟩
        delta1 (float): bare two-photon detuning δ1
        delta2 (float): bare two-photon detuning δ2
        kappa (float): cavity field amplitude decay rate
        gamma_1g, gamma_1e, gamma_2g, gamma_2e (float): spontaneous decay
            rates of |r1⟩, |r2⟩ into |g⟩, |e⟩
        n_atoms (int): atom count N

    """

    g: float
    omega1: float
    omega2: float
    delta1_big: float
    delta2_big: float
    delta1: float = 0.0
    delta2: float = 0.0
    kappa: float = 0.0
    gamma_1g: float = 0.0
    gamma_1e: float = 0.0
    gamma_2g: float = 0.0
    gamma_2e: float = 0.0
    n_atoms: int = 2

    def __post_init__(self) -> None:
        """Validate rates and atom count."""
        _require_nonnegative(
            self, "kappa", "gamma_1g", "gamma_1e", "gamma_2g", "gamma_2e"
        )
        if self.n_atoms < 1:
            raise InvalidConfigurationError("needs at least one atom", key="n_atoms")

    @classmethod
    def from_detunings(
        cls,
        g: float,
        omega1: float,
        omega2: float,
        cavity_detunings: tuple[float, float],
        laser_detunings: tuple[float, float],
        **rates: float,
    ) -> RamanConfig:
        """Build from cavity (Δ_C) and laser (Δ_L) detunings of both arms.

        δi = Δ_Ci − Δ_Li and Δi = (Δ_Ci + Δ_Li)/2.
        """
        (c1, c2), (l1, l2) = cavity_detunings, laser_detunings
        return cls(
            g=g,
            omega1=omega1,
            omega2=omega2,
            delta1_big=(c1 + l1) / 2,
            delta2_big=(c2 + l2) / 2,
            delta1=c1 - l1,
            delta2=c2 - l2,
            **rates,
        )

    @property
    def cavity_detunings(self) -> tuple[float, float]:
        """(Δ_C1, Δ_C2)."""
        return (
            self.delta1_big + self.delta1 / 2,
            self.delta2_big + self.delta2 / 2,
        )

    @property
    def laser_detunings(self) -> tuple[float, float]:
        """(Δ_L1, Δ_L2)."""
        return (
            self.delta1_big - self.delta1 / 2,
            self.delta2_big - self.delta2 / 2,
        )

    @property
    def adiabaticity_ratio(self) -> float:
        """max(|g|, |Ω1|, |Ω2|, |δ1|, |δ2|) / min(|Δ1|, |Δ2|)."""
        small = max(
            abs(self.g),
            abs(self.omega1),
            abs(self.omega2),
            abs(self.delta1),
            abs(self.delta2),
        )
        big = min(abs(self.delta1_big), abs(self.delta2_big))
        return math.inf if big == 0 else small / big

    @property
    def has_spontaneous_decay(self) -> bool:
        """True when any branch rate is positive."""
        return any((self.gamma_1g, self.gamma_1e, self.gamma_2g, self.gamma_2e))


@dataclass
class EffectiveParams:
    """Parameters of the effective qubit-photon Hamiltonian.

    Args:
        chi (float): dispersive shift χ
        g_eff (float): effective MS coupling
        delta (float): common two-photon detuning δ
        stark_c, stark_g, stark_e (float): ac-Stark shifts Δ_c, Δ_g, Δ_e
        delta1_prime, delta2_prime (float): Stark-corrected arm detunings;
            default to delta
        gamma_eff (float): effective spontaneous emission rate

    """

    chi: float
    g_eff: float
    delta: float
    stark_c: float = 0.0
    stark_g: float = 0.0
    stark_e: float = 0.0
    delta1_prime: Optional[float] = None
    delta2_prime: Optional[float] = None
    gamma_eff: float = 0.0

    def __post_init__(self) -> None:
        """Fill the arm detunings."""
        if self.delta1_prime is None:
            self.delta1_prime = self.delta
        if self.delta2_prime is None:
            self.delta2_prime = self.delta
        _require_nonnegative(self, "gamma_eff")

    @property
    def alpha(self) -> float:
        """Dressed-state displacement −g_eff/δ."""
        _require_nonzero(delta=self.delta)
        return -self.g_eff / self.delta

    def scaled(self, **changes: float) -> EffectiveParams:
        """Copy with some fields replaced."""
        values = {name: getattr(self, name) for name in _EFFECTIVE_FIELDS}
        if "delta" in changes:
            values["delta1_prime"] = values["delta2_prime"] = None
        values.update(changes)
        return EffectiveParams(**values)


_EFFECTIVE_FIELDS = (
    "chi",
    "g_eff",
    "delta",
    "stark_c",
    "stark_g",
    "stark_e",
    "delta1_prime",
    "delta2_prime",
    "gamma_eff",
)


@dataclass
class Rb87Config:
    """87Rb cavity-QED parameters.

    Args:
        g, kappa, delta1_big, delta2_big, omega1, delta (float): as in
            RamanConfig, angular units
        omega2 (float | None): second drive; solved from the coupling
            balance when omitted
        omega12 (float): hyperfine splitting ω′12 of the excited manifold
        gamma (float): half the excited-state decay rate (2γ = 2π·5.75 MHz)
        kappa (float): cavity field amplitude decay rate

    """

    g: float
    kappa: float
    delta1_big: float
    delta2_big: float
    omega1: float
    delta: float
    omega12: float
    gamma: float
    omega2: Optional[float] = None

    def __post_init__(self) -> None:
        """Validate and balance Ω2 when it is not given."""
        if not self.omega12 > 0:
            raise InvalidConfigurationError("must be positive", key="omega12")
        _require_nonnegative(self, "kappa", "gamma")
        _require_nonzero(
            delta1_big=self.delta1_big,
            delta2_big=self.delta2_big,
            delta2_plus_omega12=self.delta2_big + self.omega12,
        )
        if self.omega2 is None:
            self.omega2 = _balanced_omega2(
                self.omega1, self.delta1_big, self.delta2_big, self.omega12
            )

    @property
    def delta2_prime_big(self) -> float:
        """Detuning Δ2 + ω′12 of the upper excited hyperfine level."""
        return self.delta2_big + self.omega12


# Table 1 in units of 2π·MHz; detunings and drives are red (negative).
TABLE1: Dict[int, Dict[str, float]] = {
    1: dict(
        g=60.0,
        kappa=1.5,
        delta1_big=-10000.0,
        delta2_big=-3980.0,
        omega1=-50.0,
        omega2=-17.6,
        delta=19.6,
    ),
    2: dict(
        g=200.0,
        kappa=0.1,
        delta1_big=-20000.0,
        delta2_big=-13977.0,
        omega1=-50.0,
        omega2=-33.9,
        delta=16.3,
    ),
}
RB87_OMEGA12_MHZ = 812.0
RB87_TWO_GAMMA_MHZ = 5.75


def from_table1(set_id: int, balanced: bool = True) -> Rb87Config:
    """Table-1 parameter set in angular units (rad/μs).

    Args:
        set_id (int): 1 or 2
        balanced (bool): solve Ω2 from the coupling balance instead of using
            the rounded table value

    """
    if set_id not in TABLE1:
        raise InvalidConfigurationError(f"unknown parameter set {set_id}", key="set")
    row = {k: mhz_to_angular(v) for k, v in TABLE1[set_id].items()}
    if balanced:
        row.pop("omega2")
    return Rb87Config(
        omega12=mhz_to_angular(RB87_OMEGA12_MHZ),
        gamma=mhz_to_angular(RB87_TWO_GAMMA_MHZ) / 2,
        **row,
    )


#############
# Derivation #
#############
def derive_effective(cfg: RamanConfig) -> EffectiveParams:
    """Adiabatically eliminated parameters of the Raman scheme.

    Δ_c = (g²/2)(1/Δ1 + 1/Δ2), Δ_g = Ω2²/4Δ2, Δ_e = Ω1²/4Δ1,
    δ′1 = δ1 + N·Δ_c + Δ_g − Δ_e, δ′2 = δ2 + N·Δ_c + Δ_e − Δ_g,
    χ = g²(1/Δ1 − 1/Δ2), g_eff = gΩ1/Δ1.

    The cavity shift enters δ′ once per atom because every atom contributes
    g²a†a/Δ to the photon frequency.
    """
    _require_nonzero(delta1_big=cfg.delta1_big, delta2_big=cfg.delta2_big)
    g2 = cfg.g**2
    stark_c = 0.5 * g2 * (1 / cfg.delta1_big + 1 / cfg.delta2_big)
    stark_g = cfg.omega2**2 / (4 * cfg.delta2_big)
    stark_e = cfg.omega1**2 / (4 * cfg.delta1_big)
    # N·Δ_c: one cavity shift per atom, not the single Δ_c of a lone emitter
    cavity = cfg.n_atoms * stark_c
    delta1_prime = cfg.delta1 + cavity + stark_g - stark_e
    delta2_prime = cfg.delta2 + cavity + stark_e - stark_g

    return EffectiveParams(
        chi=g2 * (1 / cfg.delta1_big - 1 / cfg.delta2_big),
        g_eff=cfg.g * cfg.omega1 / cfg.delta1_big,
        delta=delta1_prime,
        stark_c=stark_c,
        stark_g=stark_g,
        stark_e=stark_e,
        delta1_prime=delta1_prime,
        delta2_prime=delta2_prime,
        gamma_eff=effective_decay_rate(raman_branches(cfg)),
    )


def arm_couplings(cfg: RamanConfig) -> tuple[float, float]:
    """Couplings gΩ1/Δ1 and gΩ2/Δ2 of the two Raman arms."""
    _require_nonzero(delta1_big=cfg.delta1_big, delta2_big=cfg.delta2_big)
    return cfg.g * cfg.omega1 / cfg.delta1_big, cfg.g * cfg.omega2 / cfg.delta2_big


def raman_for_effective(
    g_eff: float,
    delta: float,
    g: float,
    delta_big: float,
    n_atoms: int = 2,
    **rates: float,
) -> RamanConfig:
    """Symmetric Raman drive realising a given (g_eff, δ) with χ = 0.

    Δ1 = Δ2 = Δ and Ω1 = Ω2 = g_eff·Δ/g; the bare detunings are chosen so that
    the Stark-corrected δ′1 = δ′2 = δ.
    """
    _require_nonzero(g=g, delta_big=delta_big)
    omega = g_eff * delta_big / g
    bare = delta - n_atoms * g**2 / delta_big
    return RamanConfig(
        g=g,
        omega1=omega,
        omega2=omega,
        delta1_big=delta_big,
        delta2_big=delta_big,
        delta1=bare,
        delta2=bare,
        n_atoms=n_atoms,
        **rates,
    )


@std_dataclass
class MsConditionReport(DataClassJSONSerializeMixin):
    """Outcome of the Mølmer–Sørensen condition checks."""

    detuning_match: bool
    detuning_mismatch: float
    ratio_match: bool
    ratio_mismatch: float
    adiabaticity_ratio: float
    adiabatic: bool
    tolerance: float = C.Tolerance.CONDITION
    adiabatic_tolerance: float = C.Tolerance.ADIABATIC

    @property
    def passed(self) -> bool:
        """Both algebraic conditions hold."""
        return self.detuning_match and self.ratio_match


def _relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def check_ms_conditions(cfg: RamanConfig) -> MsConditionReport:
    """Check δ′1 = δ′2, Ω1/Ω2 = Δ1/Δ2 and report the adiabaticity ratio.

    Never raises; singular detunings show up as failed conditions.
    """
    adiabaticity = cfg.adiabaticity_ratio
    adiabatic = adiabaticity <= C.Tolerance.ADIABATIC
    try:
        eff = derive_effective(cfg)
    except SingularParameterError:
        return MsConditionReport(
            False, math.inf, False, math.inf, adiabaticity, adiabatic
        )

    detuning_gap = _relative_gap(eff.delta1_prime, eff.delta2_prime)
    if cfg.omega2 == 0:
        ratio_gap = math.inf
    else:
        ratio_gap = _relative_gap(
            cfg.omega1 / cfg.omega2, cfg.delta1_big / cfg.delta2_big
        )
    return MsConditionReport(
        detuning_match=detuning_gap <= C.Tolerance.CONDITION,
        detuning_mismatch=detuning_gap,
        ratio_match=ratio_gap <= C.Tolerance.CONDITION,
        ratio_mismatch=ratio_gap,
        adiabaticity_ratio=adiabaticity,
        adiabatic=adiabatic,
    )


def delta_for_loops(m: int, g_eff: float) -> float:
    """|δ| = 2√m·g_eff, closing m phase-space loops within the gate."""
    if m < 1 or int(m) != m:
        raise ContractViolationError(f"loop count must be a positive integer, got {m}")
    _require_nonzero(g_eff=g_eff)
    return 2.0 * math.sqrt(m) * abs(g_eff)


def gate_time(delta: float, g_eff: float) -> float:
    """t_gate = π|δ|/(2 g_eff²)."""
    _require_nonzero(g_eff=g_eff)
    return math.pi * abs(delta) / (2.0 * g_eff**2)


def loop_index(delta: float, g_eff: float) -> float:
    """δ²/(4 g_eff²); an integer when the gate closes exactly."""
    _require_nonzero(g_eff=g_eff)
    return delta**2 / (4.0 * g_eff**2)


##########
# 87Rb   #
##########
def _balanced_omega2(omega1: float, d1: float, d2: float, omega12: float) -> float:
    _require_nonzero(delta1_big=d1, delta2_big=d2, delta2_plus_omega12=d2 + omega12)
    return 2.0 * omega1 / (d1 * (1.0 / d2 + 1.0 / (d2 + omega12)))


def balance_omega2(cfg: Rb87Config) -> float:
    """Ω2 for which g_eff⁽¹⁾ = g_eff⁽²⁾."""
    return _balanced_omega2(cfg.omega1, cfg.delta1_big, cfg.delta2_big, cfg.omega12)


@std_dataclass
class Rb87Effective:
    """Derived 87Rb gate parameters."""

    effective: EffectiveParams
    g_eff_1: float
    g_eff_2: float
    mismatch: float = field(init=False)
    balanced: bool = field(init=False)

    def __post_init__(self) -> None:
        """Compare the two Raman-arm couplings."""
        self.mismatch = _relative_gap(self.g_eff_1, self.g_eff_2)
        self.balanced = self.mismatch <= C.Tolerance.CONDITION


def derive_rb87(cfg: Rb87Config) -> Rb87Effective:
    """87Rb couplings and dispersive shift.

    g_eff⁽¹⁾ = gΩ1/(√6 Δ1)
    g_eff⁽²⁾ = (gΩ2/2√6)(1/Δ2 + 1/(Δ2+ω′12))
    χ = g²(1/(4(Δ2+ω′12)) + 1/(12Δ2) − 1/(3Δ1))
    """
    d1, d2, d2p = cfg.delta1_big, cfg.delta2_big, cfg.delta2_prime_big
    _require_nonzero(delta1_big=d1, delta2_big=d2, delta2_plus_omega12=d2p)
    sqrt6 = math.sqrt(6.0)
    g_eff_1 = cfg.g * cfg.omega1 / (sqrt6 * d1)
    g_eff_2 = cfg.g * cfg.omega2 / (2 * sqrt6) * (1 / d2 + 1 / d2p)
    chi = cfg.g**2 * (1 / (4 * d2p) + 1 / (12 * d2) - 1 / (3 * d1))
    effective = EffectiveParams(
        chi=chi,
        g_eff=g_eff_1,
        delta=cfg.delta,
        gamma_eff=effective_decay_rate(rb87_branches(cfg)),
    )
    return Rb87Effective(effective, g_eff_1, g_eff_2)


###############
# Decay paths #
###############
@std_dataclass(frozen=True)
class DecayBranch:
    """One effective spontaneous-emission channel.

    The collapse operator on a given atom is
        √rate · (photon_coeff · a|to⟩⟨photon_from| + drive_coeff · |to⟩⟨drive_from|)

    Args:
        name (str): channel label, e.g. "1g"
        rate (float): decay rate of the channel
        to (int): final level
        photon_from (int): level the cavity-assisted path starts from
        photon_coeff (float): amplitude of the cavity-assisted path
        drive_from (int): level the laser-assisted path starts from
        drive_coeff (float): amplitude of the laser-assisted path

    """

    name: str
    rate: float
    to: int
    photon_from: int
    photon_coeff: float
    drive_from: int
    drive_coeff: float


def raman_branches(cfg: RamanConfig) -> List[DecayBranch]:
    """C_1g, C_1e, C_2g, C_2e of the four-level scheme (zero rates dropped)."""
    _require_nonzero(delta1_big=cfg.delta1_big, delta2_big=cfg.delta2_big)
    g_, e_ = C.Level.G, C.Level.E
    p1, d1 = cfg.g / cfg.delta1_big, cfg.omega1 / (2 * cfg.delta1_big)
    p2, d2 = cfg.g / cfg.delta2_big, cfg.omega2 / (2 * cfg.delta2_big)
    branches = [
        DecayBranch("1g", cfg.gamma_1g, g_, g_, p1, e_, d1),
        DecayBranch("1e", cfg.gamma_1e, e_, g_, p1, e_, d1),
        DecayBranch("2g", cfg.gamma_2g, g_, e_, p2, g_, d2),
        DecayBranch("2e", cfg.gamma_2e, e_, e_, p2, g_, d2),
    ]
    return [b for b in branches if b.rate > 0]


# (name, rate / γ, final level, photon factor, drive factor, manifold)
# photon amplitude = factor·g/Δ_m, drive amplitude = factor·Ω/Δ_m
_RB87_TABLE = (
    ("1g", 1 / 3, C.Level.G, 1 / math.sqrt(3), 1 / (2 * math.sqrt(2)), 1),
    ("1e", 1 / 2, C.Level.E, 1 / math.sqrt(3), 1 / (2 * math.sqrt(2)), 1),
    ("1u", 5 / 6, C.Level.U, 1 / (2 * math.sqrt(3)), 1 / (2 * math.sqrt(2)), 1),
    ("2g", 1 / 2, C.Level.G, 1 / (2 * math.sqrt(3)), 1 / (2 * math.sqrt(2)), 2),
    ("2e", 1 / 12, C.Level.E, 1 / (2 * math.sqrt(3)), 1 / (2 * math.sqrt(2)), 2),
    ("2u", 17 / 12, C.Level.U, 1 / (2 * math.sqrt(3)), 1 / (2 * math.sqrt(2)), 2),
    ("2'g", 1 / 6, C.Level.G, 1 / 2, 1 / (2 * math.sqrt(6)), 3),
    ("2'e", 1 / 4, C.Level.E, 1 / 2, 1 / (2 * math.sqrt(6)), 3),
    ("2'u", 19 / 12, C.Level.U, 1 / 2, 1 / (2 * math.sqrt(6)), 3),
)


def rb87_branching_sums() -> Dict[int, float]:
    """Total rate (in units of γ) leaving each excited manifold.

    Manifold 1 is |r1⟩, 2 is |r2⟩ and 3 the upper hyperfine level |r2′⟩. The
    |r1⟩ weights as printed add up to 5/3 rather than 2.
    """
    sums: Dict[int, float] = {}
    for *_, manifold in _RB87_TABLE:
        sums.setdefault(manifold, 0.0)
    for _, rate, *_, manifold in _RB87_TABLE:
        sums[manifold] += rate
    return sums


def rb87_branches(cfg: Rb87Config) -> List[DecayBranch]:
    """The nine collapse channels per atom of the 87Rb level scheme."""
    g_, e_ = C.Level.G, C.Level.E
    # manifold → (photon source, drive source, Δ_m, Ω_m)
    manifolds = {
        1: (g_, e_, cfg.delta1_big, cfg.omega1),
        2: (e_, g_, cfg.delta2_big, cfg.omega2),
        3: (e_, g_, cfg.delta2_prime_big, cfg.omega2),
    }
    branches = []
    for name, rate, to, photon, drive, manifold in _RB87_TABLE:
        photon_from, drive_from, detuning, omega = manifolds[manifold]
        branches.append(
            DecayBranch(
                name,
                rate * cfg.gamma,
                to,
                photon_from,
                photon * cfg.g / detuning,
                drive_from,
                drive * omega / detuning,
            )
        )
    return [b for b in branches if b.rate > 0]


def effective_decay_rate(branches: List[DecayBranch]) -> float:
    """γ_eff: mean over the qubit levels of half the laser-induced decay.

    For a single γ, Ω and Δ on both arms this is γΩ²/4Δ².
    """
    return 0.25 * sum(b.rate * b.drive_coeff**2 for b in branches)


@std_dataclass
class Diagnostics(DataClassJSONSerializeMixin):
    """Error-budget estimates of a gate configuration.

    Args:
        gamma_eff (float): effective spontaneous emission rate
        p_spont (float): spontaneous emission probability within t_gate
        p_kappa_scale (float): photon-loss scale 2κ·(g_eff/δ)²·t_gate
        t_gate (float): gate time
        loop_index (float): δ²/(4 g_eff²)

    """

    gamma_eff: float
    p_spont: float
    p_kappa_scale: float
    t_gate: float
    loop_index: float


class HasCavityDecay(Protocol):
    """Any configuration carrying the cavity decay rate."""

    @property
    def kappa(self) -> float:
        """Cavity field decay rate."""


def diagnostics(cfg: HasCavityDecay, eff: EffectiveParams) -> Diagnostics:
    """Error budget of a configuration and its effective parameters.

    P_spont = γ_eff·t_gate. With one rate γ on all four branches and
    Ω1/Δ1 = Ω2/Δ2, γ_eff = γΩ²/4Δ² and g_eff = gΩ/Δ, so this is πγδ/(8g²).
    Asymmetric arms and the 87Rb branching table keep the γ_eff·t_gate form.
    """
    _require_nonzero(g_eff=eff.g_eff, delta=eff.delta)
    kappa = cfg.kappa
    t_gate = gate_time(eff.delta, eff.g_eff)
    return Diagnostics(
        gamma_eff=eff.gamma_eff,
        p_spont=eff.gamma_eff * t_gate,
        p_kappa_scale=2 * kappa * (eff.g_eff / eff.delta) ** 2 * t_gate,
        t_gate=t_gate,
        loop_index=loop_index(eff.delta, eff.g_eff),
    )
