"""Quick consistency checks with known exact answers.

Each check returns (name, passed, detail). Everything runs in well under a
second, so the `selftest` command is safe to run anywhere.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, List, Tuple

import numpy as np

from cavityms.lib import qops
from cavityms.lib.common.exception import BaseCavityMSLibException
from cavityms.lib.fidelity import (
    PAULIS,
    ChannelSample,
    avg_gate_fidelity,
    max_over_time,
    max_state_fidelity,
    state_fidelity,
)
from cavityms.lib.harness.emit import render_csv
from cavityms.lib.harness.scenarios import effective_setup
from cavityms.lib.harness.spec import ScanResult
from cavityms.lib.msgate import MsTrajectory, ideal_gate_map, logical_state, target_state
from cavityms.lib.params import derive_effective, gate_time, raman_for_effective

logger = logging.getLogger(__name__)

Check = Tuple[str, bool, str]
_CHECKS: List[Tuple[str, Callable[[], Tuple[bool, str]]]] = []


def _check(name: str):
    def _register(func: Callable[[], Tuple[bool, str]]):
        _CHECKS.append((name, func))
        return func

    return _register


@_check("state fidelity of a target state is 1")
def _target_fidelity() -> Tuple[bool, str]:
    layout = qops.HilbertLayout.qubits(2)
    value = state_fidelity(qops.with_photons(target_state(1), layout), layout, 1)
    return abs(value - 1) < 1e-12, f"F = {value:.15f}"


@_check("state fidelity of |gg⟩ to its target is 1/2")
def _half_fidelity() -> Tuple[bool, str]:
    layout = qops.HilbertLayout.qubits(2)
    value = state_fidelity(qops.with_photons(logical_state(1), layout), layout, 1)
    return abs(value - 0.5) < 1e-12, f"F = {value:.15f}"


@_check("identity channel against identity gives F̄ = 1")
def _identity_channel() -> Tuple[bool, str]:
    value = avg_gate_fidelity(ChannelSample(0.0, PAULIS.copy()), np.eye(4))
    return abs(value - 1) < 1e-12, f"F̄ = {value:.15f}"


@_check("full depolarization gives F̄ = 1/4")
def _depolarizing_channel() -> Tuple[bool, str]:
    outputs = np.zeros((16, 4, 4), dtype=complex)
    outputs[0] = np.eye(4)
    value = avg_gate_fidelity(ChannelSample(0.0, outputs), ideal_gate_map(1))
    return abs(value - 0.25) < 1e-12, f"F̄ = {value:.15f}"


@_check("a channel that loses every population gives F̄ = 0.2")
def _lossy_channel() -> Tuple[bool, str]:
    outputs = np.zeros((16, 4, 4), dtype=complex)
    value = avg_gate_fidelity(ChannelSample(0.0, outputs), ideal_gate_map(1))
    return abs(value - 0.2) < 1e-12, f"F̄ = {value:.15f}"


@_check("time maximization finds the vertex of −(t − 1)²")
def _parabola() -> Tuple[bool, str]:
    t, value = max_over_time(lambda t: -((t - 1) ** 2), (0.0, 2.0))
    return abs(t - 1) < 2e-4, f"t* = {t:.6f}, value = {value:.3e}"


@_check("closed-form U_MS(t_gate) realizes the truth table")
def _truth_table() -> Tuple[bool, str]:
    layout = qops.HilbertLayout.qubits(8)
    trajectory = MsTrajectory(g_eff=1.0, delta=2.0)
    u = trajectory.u_ms(trajectory.gate_time(), layout)
    worst = min(
        state_fidelity(u @ qops.with_photons(logical_state(i), layout), layout, i)
        for i in (1, 2, 3, 4)
    )
    return worst >= 1 - 1e-9, f"min F = {worst:.12f}"


@_check("χ = 0 evolution peaks at unity at g_eff·t = π")
def _chi_zero_peak() -> Tuple[bool, str]:
    setup = effective_setup(0.0, 2.0, n_max=10)
    peak = max_state_fidelity(setup, 1, setup.window(0.5, 1.5))
    ok = abs(peak.value - 1) < 1e-6 and abs(peak.t - math.pi) < 1e-3
    return ok, f"F = {peak.value:.9f} at t = {peak.t:.6f}"


@_check("balanced symmetric drive has χ = 0")
def _balanced_chi() -> Tuple[bool, str]:
    eff = derive_effective(raman_for_effective(1.0, 2.0, 10.0, 1000.0))
    return eff.chi == 0 and abs(eff.delta - 2.0) < 1e-9, f"χ = {eff.chi}, δ′ = {eff.delta}"


@_check("t_gate = π for δ = 2, g_eff = 1")
def _gate_time() -> Tuple[bool, str]:
    value = gate_time(2.0, 1.0)
    return abs(value - math.pi) < 1e-15, f"t_gate = {value}"


@_check("two-row table renders as header plus two lines")
def _csv_lines() -> Tuple[bool, str]:
    result = ScanResult("selftest", ["a", "b"], [[1.0, 2.0], [3.0, 4.0]])
    lines = render_csv(result).splitlines()
    return lines == ["a,b", "1,2", "3,4"], repr(lines)


def run_selftest() -> List[Check]:
    """Run every check; an exception fails the check instead of propagating."""
    results = []
    for name, func in _CHECKS:
        try:
            passed, detail = func()
        except BaseCavityMSLibException as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        logger.debug("%s: %s (%s)", name, passed, detail)
        results.append((name, bool(passed), detail))
    return results
