import logging

import numpy as np
import pytest

from cavityms.common import constant as C
from cavityms.common.util.config import Config
from cavityms.common.util.functool import arg_group, expand_arg_group, is_arg_group
from cavityms.common.util.log import ROOT_LOGGER, log_func, setup_logging
from cavityms.common.util.pretty import tabulate_mapping, tabulate_rows


@arg_group
class Window:
    start: float
    stop: float = 2.0


def test_config_query_and_add():
    config = Config()
    config.add("drive.g", 1.0)
    config.add("drive.omega1", 2.0)
    assert config.query("drive.g") == 1.0
    assert isinstance(config.query("drive"), Config)
    assert config.query("decay.kappa", None) is None
    with pytest.raises(KeyError):
        config.query("decay.kappa")
    with pytest.raises(KeyError):
        config.add("drive.g", 3.0)
    with pytest.raises(KeyError):
        config.query("")


def test_config_update_remove_flatten():
    config = Config()
    config.add("system.n_max", 4)
    config.update_key("system.n_max", 6)
    config.update_key("decay.kappa", 0.1)
    assert list(config.flatten()) == [("system.n_max", 6), ("decay.kappa", 0.1)]
    copy = config.copy()
    copy.remove("decay.kappa")
    assert config.query("decay.kappa") == 0.1
    with pytest.raises(KeyError):
        copy.remove("decay.kappa")


def test_constants_are_frozen():
    with pytest.raises(TypeError):
        C.Model.RAMAN = "x"
    assert "raman" in C.Model
    assert "ion" not in C.Model
    assert sorted(C.Model) == ["effective", "raman", "rb87"]


def test_tabulate_formats_cells():
    text = tabulate_rows([["a", 1 / 3, True], ["b", [1, 2, 3, 4], False]], ["x", "y", "z"])
    assert "0.333333" in text
    assert "pass" in text and "FAIL" in text
    assert "1, 2, 3 ..." in text
    assert "1+2j" in tabulate_mapping({"c": 1 + 2j})


def test_expand_arg_group():
    @expand_arg_group
    def span(name: str, window: Window) -> tuple:
        return name, window

    params = list(span.__signature__.parameters)
    assert params == ["name", "start", "stop"]
    name, window = span("w", 1.0)
    assert name == "w"
    assert window == Window(1.0, 2.0)
    assert is_arg_group(Window)
    assert not is_arg_group(Config)


def test_log_func_abbreviates_arrays(caplog):
    test_logger = logging.getLogger(f"{ROOT_LOGGER}.test")

    @log_func(logger_=test_logger)
    def trace(rho):
        return np.trace(rho)

    with caplog.at_level(logging.DEBUG, logger=ROOT_LOGGER):
        assert trace(np.eye(3)) == 3
    text = caplog.text
    assert "<array (3, 3) float64>" in text
    assert "seconds" in text


def test_setup_logging_adds_one_handler():
    root = logging.getLogger(ROOT_LOGGER)
    before = list(root.handlers)
    try:
        setup_logging(verbose=True)
        setup_logging()
        added = [h for h in root.handlers if h not in before]
        assert len(added) <= 1
        assert root.level == logging.WARNING
    finally:
        for handler in list(root.handlers):
            if handler not in before:
                root.removeHandler(handler)
