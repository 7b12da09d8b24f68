import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("dyadlab", max_examples=60, deadline=None)
settings.load_profile("dyadlab")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" in props and rep.when == "call":
                status = "PASS" if rep.passed else "FAIL"
                lines.append((props["criterion"], f"{status}  criterion {props['criterion']:>2}: {props.get('detail', '')}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
