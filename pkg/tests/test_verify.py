import pytest

from berezin.verify import SUITE_NAMES, run_suite


@pytest.mark.parametrize("suite", SUITE_NAMES)
def test_suite_passes(suite):
    checks = run_suite(suite)
    assert checks
    failed = [c.line() for c in checks if not c.passed]
    assert not failed, "\n".join(failed)


def test_unknown_suite_name():
    with pytest.raises(ValueError):
        run_suite("nonsense")


def test_full_run_aggregates_every_suite():
    combined = run_suite("all")
    separate = sum(len(run_suite(name)) for name in SUITE_NAMES)
    assert len(combined) == separate
