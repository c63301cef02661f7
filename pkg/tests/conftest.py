from __future__ import annotations

import os
import sys
from collections import OrderedDict
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

HERE = Path(__file__).resolve().parent
HELPERS = HERE / "helpers"
FIXTURES = HERE / "fixtures"

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

# criterion id -> list of (ok, detail)
_ACCEPTANCE: "OrderedDict[str, list[tuple[bool, str]]]" = OrderedDict()


@pytest.fixture
def acceptance():
    """Record one (ok, detail) outcome under a criterion id for the end-of-run summary."""
    def record(criterion: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, parts in sorted(_ACCEPTANCE.items(), key=lambda kv: int(kv[0].split()[0])):
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def scipy_solver_cmd() -> str:
    """External-solver command template backed by the scipy HiGHS helper."""
    return f"{sys.executable} {HELPERS / 'scipy_lp_solver.py'} {{lp}} {{sol}}"
