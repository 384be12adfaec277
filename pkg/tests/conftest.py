import pytest

from zeno_shuffling import MeasurementSchedule, PhysicalParams

REF_DELTAS = (1.0, 0.1, 0.01)

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def ref_params():
    return PhysicalParams(hbar=1.0, m=0.1, sigma0=0.5, x0=0.0, p0=0.0)


@pytest.fixture
def moving_params():
    # p0 / p_s = 1
    return PhysicalParams(hbar=1.0, m=0.1, sigma0=0.5, x0=0.0, p0=1.0)


@pytest.fixture(params=REF_DELTAS, ids=lambda d: f"dt={d:g}")
def ref_schedule(request):
    return MeasurementSchedule(delta_t=request.param, total_time=5.0, sample_dt=1e-4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
