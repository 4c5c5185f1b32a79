import numpy as np
import pytest

from envspec.core import SampledSignal

_CRITERIA = []


def tone(freq_hz, n, fs=5000.0, amp=1.0, phase=0.0, name="x", kind="cos"):
    t = np.arange(n) / fs
    f = np.cos if kind == "cos" else np.sin
    return SampledSignal(name, "N", fs, amp * f(2 * np.pi * freq_hz * t + phase))


def interior(n, margin=0.05):
    k = int(round(margin * n))
    return slice(k, n - k)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion_log():
    """Append (criterion, passed, detail) tuples; printed in the terminal summary."""
    return _CRITERIA


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(_CRITERIA, key=lambda r: int(r[0].split()[0][1:])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
