import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

# criterion id -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
