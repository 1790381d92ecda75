"""Shared fixtures."""

import pytest

from cavityms.common import constant as C
from cavityms.common.util.test_utils import make_fixture_group
from cavityms.lib import qops
from cavityms.lib.msgate import MsTrajectory
from cavityms.lib.params import EffectiveParams


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Keep the user's settings file and CAVITY_MS_* variables out of tests."""
    monkeypatch.setattr(C, "SETTINGS_FILE", tmp_path / "settings.json")
    for name in ("JOBS", "OUT_DIR", "REL_TOL"):
        monkeypatch.delenv(f"{C.CLIEnv.PREFIX}_{name}", raising=False)
    return tmp_path / "settings.json"


@pytest.fixture
def qubit_layout():
    """Two qubits and photons up to 10."""
    return qops.HilbertLayout.qubits(10)


@pytest.fixture
def ideal_params():
    """χ = 0, g_eff = 1, δ = 2: one loop, t_gate = π."""
    return EffectiveParams(chi=0.0, g_eff=1.0, delta=2.0)


@make_fixture_group("ideal_gate")
class IdealGate:
    """Ideal effective parameters with their layout and trajectory."""

    ideal_params: EffectiveParams
    qubit_layout: qops.HilbertLayout

    def __fixture__(self):
        self.trajectory = MsTrajectory.from_effective(self.ideal_params)
        self.t_gate = self.trajectory.gate_time()
