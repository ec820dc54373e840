import time

from hypothesis import HealthCheck, settings

from _support import ACCEPTANCE_LINES

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
        elapsed = time.perf_counter() - _START
        terminalreporter.write_line(f"suite runtime {elapsed:.1f}s (limit 300s)")
