"""Derived gate parameters of a config file, in the file's units."""

from __future__ import annotations

from dataclasses import dataclass as std_dataclass
from dataclasses import field
from typing import Callable, Dict

from cavityms.common import constant as C
from cavityms.common.util.serialization import DataClassJSONSerializeMixin
from cavityms.lib.harness.config import SimulationConfig
from cavityms.lib.params import (
    EffectiveParams,
    HasCavityDecay,
    angular_to_mhz,
    balance_omega2,
    check_ms_conditions,
    derive_effective,
    derive_rb87,
    diagnostics,
)


@std_dataclass
class ParameterReport(DataClassJSONSerializeMixin):
    """What `derive-params` prints.

    Frequencies are in 2π·MHz and times in μs for `units = mhz`, in the
    file's own units otherwise.
    """

    model: str
    units: str
    values: Dict[str, float] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """Every check holds."""
        return all(self.checks.values())


def _effective_values(
    eff: EffectiveParams, cfg: HasCavityDecay, freq: Callable[[float], float]
) -> Dict[str, float]:
    diag = diagnostics(cfg, eff)
    return {
        "chi": freq(eff.chi),
        "g_eff": freq(eff.g_eff),
        "delta": freq(eff.delta),
        "stark_c": freq(eff.stark_c),
        "stark_g": freq(eff.stark_g),
        "stark_e": freq(eff.stark_e),
        "delta1_prime": freq(eff.delta1_prime),
        "delta2_prime": freq(eff.delta2_prime),
        "gamma_eff": freq(diag.gamma_eff),
        "p_spont": diag.p_spont,
        "p_kappa_scale": diag.p_kappa_scale,
        "t_gate": diag.t_gate,
        "loop_index": diag.loop_index,
    }


def derive_report(sim: SimulationConfig) -> ParameterReport:
    """Effective parameters, Stark shifts, MS conditions and error budget."""

    def freq(value: float) -> float:
        return angular_to_mhz(value) if sim.units == "mhz" else float(value)

    report = ParameterReport(model=sim.model, units=sim.units)
    if sim.model == C.Model.RAMAN:
        cfg = sim.raman()
        conditions = check_ms_conditions(cfg)
        report.values.update(_effective_values(derive_effective(cfg), cfg, freq))
        report.values.update(
            detuning_mismatch=conditions.detuning_mismatch,
            ratio_mismatch=conditions.ratio_mismatch,
            adiabaticity_ratio=conditions.adiabaticity_ratio,
        )
        report.checks.update(
            detuning_match=conditions.detuning_match,
            ratio_match=conditions.ratio_match,
            adiabatic=conditions.adiabatic,
        )
    elif sim.model == C.Model.RB87:
        cfg = sim.rb87()
        derived = derive_rb87(cfg)
        report.values.update(_effective_values(derived.effective, cfg, freq))
        report.values.update(
            g_eff_1=freq(derived.g_eff_1),
            g_eff_2=freq(derived.g_eff_2),
            omega2=freq(cfg.omega2),
            omega2_balanced=freq(balance_omega2(cfg)),
            coupling_mismatch=derived.mismatch,
        )
        report.checks["balanced"] = derived.balanced
    else:
        report.values.update(_effective_values(sim.effective(), sim, freq))
    return report
