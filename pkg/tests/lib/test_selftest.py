from cavityms.lib.selftest import run_selftest


def test_every_check_passes():
    results = run_selftest()
    assert len(results) == 11
    failed = [(name, detail) for name, passed, detail in results if not passed]
    assert not failed
