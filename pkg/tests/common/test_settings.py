import json
from typing import List, Optional

import pytest

from cavityms.lib.common.settings import FileBackedConfig, Settings, parse_value


def test_defaults_without_file(isolated_settings):
    settings = Settings.load()
    assert not isolated_settings.exists()
    assert settings.to_dict() == {"jobs": 1, "out_dir": ".", "rel_tol": 1e-8}


def test_save_and_reload(isolated_settings):
    settings = Settings.load()
    settings.set_from_string("jobs", "4")
    settings.out_dir = "results"
    settings.save()
    assert json.loads(isolated_settings.read_text()) == {"jobs": 4, "out_dir": "results"}
    reloaded = Settings.load()
    assert reloaded == settings
    assert reloaded.jobs == 4
    # no temporary files left behind
    assert [p.name for p in isolated_settings.parent.iterdir()] == ["settings.json"]


def test_unknown_key():
    with pytest.raises(KeyError):
        Settings.load().set_from_string("colour", "blue")


def test_environment_wins(monkeypatch, isolated_settings):
    isolated_settings.write_text(json.dumps({"rel_tol": 1e-6}))
    monkeypatch.setenv("CAVITY_MS_REL_TOL", "1e-9")
    settings = Settings.load()
    assert settings.rel_tol == 1e-9
    del settings.rel_tol
    # deleting drops the file value; the environment still applies
    assert settings.rel_tol == 1e-9


def test_parse_value():
    assert parse_value(int, "3") == 3
    assert parse_value(Optional[float], "null") is None
    assert parse_value(Optional[float], "0.5") == 0.5
    with pytest.raises(TypeError):
        parse_value(List[int], "[]")


def test_defaults_are_required():
    with pytest.raises(TypeError):

        class Broken(FileBackedConfig):  # pylint: disable=unused-variable
            jobs: int
