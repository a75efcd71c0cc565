import pytest
from hypothesis import settings

from platoon_headway import ControllerGains

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture
def cacc_gains():
    return ControllerGains(k_a=0.5, k_v=0.7, k_p=0.06, h_w=0.7, tau0=0.5)


@pytest.fixture
def acc_gains():
    return ControllerGains(k_a=0.0, k_v=0.8, k_p=0.1, h_w=1.2, tau0=0.5)


@pytest.fixture
def caccplus_gains():
    return ControllerGains(k_a=0.2, k_v=0.206, k_p=0.01, h_w=0.32, tau0=0.5, r=3)


# acceptance lines recorded by tests/test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
