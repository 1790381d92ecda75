import math

import pytest

from cavityms.common import constant as C
from cavityms.lib.common.exception import InvalidConfigurationError
from cavityms.lib.harness.config import SimulationConfig, load_config, parse_config
from cavityms.lib.hamiltonians import StarkFrame

EFFECTIVE = """
[system]
units = natural
n_max = 6

[drive]
chi = 0.1    # dispersive shift
g_eff = 1.0
delta = 2.0

[decay]
kappa = 0.05
"""

RAMAN = """
[system]
model = raman
units = natural
n_max = 2

[drive]
g = 1.0
omega1 = 10.0
omega2 = 10.0
delta1_big = 1000.0
delta2_big = 1000.0
delta1 = 1.998
delta2 = 1.998
"""


def _sim(text):
    return SimulationConfig.from_config(parse_config(text))


def test_parse_config_types_values():
    config = parse_config(EFFECTIVE)
    assert config.query("system.n_max") == 6
    assert config.query("drive.chi") == 0.1
    assert config.query("decay.kappa") == 0.05


@pytest.mark.parametrize(
    "text, key",
    [
        ("[physics]\nx = 1\n", "physics"),
        ("[drive]\nphi = 1\n", "drive.phi"),
        ("[system]\nn_max = many\n", "system.n_max"),
    ],
)
def test_parse_config_rejects(text, key):
    with pytest.raises(InvalidConfigurationError) as e:
        parse_config(text)
    assert e.value.key == key


def test_parse_config_rejects_broken_ini():
    with pytest.raises(InvalidConfigurationError):
        parse_config("no section header")


def test_defaults():
    sim = _sim("[drive]\nchi = 0\ng_eff = 1\ndelta = 2\n")
    assert sim.model == C.Model.EFFECTIVE
    assert sim.units == "mhz"
    assert sim.n_max == 10
    assert sim.initial == 1
    assert sim.photons == 0
    assert sim.time_unit == "us"
    assert sim.effective().delta == pytest.approx(4 * math.pi)


@pytest.mark.parametrize(
    "extra, key",
    [
        ("atoms = 3", "system.atoms"),
        ("initial = 5", "system.initial"),
        ("photons = 6", "system.photons"),
        ("model = ion", "system.model"),
        ("units = ghz", "system.units"),
    ],
)
def test_system_validation(extra, key):
    text = EFFECTIVE.replace("[system]\n", f"[system]\n{extra}\n")
    with pytest.raises(InvalidConfigurationError) as e:
        _sim(text)
    assert e.value.key == key


def test_missing_drive():
    with pytest.raises(InvalidConfigurationError) as e:
        _sim("[system]\nunits = natural\n")
    assert e.value.key == "drive"


def test_effective_build():
    sim = _sim(EFFECTIVE)
    assert sim.time_unit == "1/freq"
    assert sim.kappa == 0.05
    setup = sim.build()
    assert setup.model.layout.dims == (2, 2, 7)
    assert len(setup.model.collapse_ops) == 1
    assert setup.t_gate == pytest.approx(math.pi)


def test_raman_build_uses_stark_frame():
    sim = _sim(RAMAN)
    eff = sim.effective()
    assert eff.chi == pytest.approx(0.0, abs=1e-15)
    assert eff.delta1_prime == pytest.approx(2.0)
    setup = sim.build()
    assert setup.model.layout.dims == (4, 4, 3)
    assert isinstance(setup.frame, StarkFrame)
    assert setup.model.is_closed


def test_effective_from_raman_drive():
    text = RAMAN.replace("model = raman", "model = effective")
    setup = _sim(text).build()
    assert setup.model.layout.dims == (2, 2, 3)


def test_rb87_table_set():
    sim = _sim("[system]\nmodel = rb87\n[drive]\nset = 2\n")
    assert sim.n_max == 4
    assert sim.rb87().kappa == pytest.approx(2 * math.pi * 0.1)
    with pytest.raises(InvalidConfigurationError):
        _sim("[system]\nmodel = rb87\nunits = natural\n[drive]\nset = 1\n")


def test_with_value_rebuilds():
    sim = _sim(EFFECTIVE)
    changed = sim.with_value("drive.delta", 4.0)
    assert changed.effective().delta == 4.0
    # the original stays untouched
    assert sim.effective().delta == 2.0
    with pytest.raises(InvalidConfigurationError):
        sim.with_value("drive.phase", 1.0)


def test_scan_spec_from_file():
    text = EFFECTIVE + "\n[scan]\nparameter = decay.kappa\nstart = 0\nstop = 0.2\npoints = 3\n"
    text += "\n[integrator]\nrel_tol = 1e-6\n"
    spec = _sim(text).scan_spec(jobs=2, t_stop=None)
    assert spec.scenario == C.Scenario.CUSTOM
    assert spec.parameter == "decay.kappa"
    assert spec.points == 3
    assert spec.jobs == 2
    assert spec.rel_tol == 1e-6
    assert spec.t_stop == 2.0


def test_custom_scan_needs_parameter():
    with pytest.raises(InvalidConfigurationError) as e:
        _sim(EFFECTIVE).scan_spec()
    assert e.value.key == "scan.parameter"
    assert _sim(EFFECTIVE).scan_spec(scenario="fig5").scenario == "fig5"


def test_integrator_precedence():
    sim = _sim(EFFECTIVE + "\n[integrator]\nrel_tol = 1e-5\nmax_step = 0.1\n")
    assert sim.integrator().rel_tol == 1e-5
    assert sim.integrator(1e-9).rel_tol == 1e-9
    assert sim.integrator().max_step == 0.1


def test_load_config(tmp_path):
    path = tmp_path / "gate.ini"
    path.write_text(EFFECTIVE, encoding="utf8")
    assert load_config(path).n_max == 6
    with pytest.raises(InvalidConfigurationError):
        load_config(tmp_path / "missing.ini")
