import numpy as np
import pytest

from middev.params import Case, ModelConfig, sample_schedule
from middev.simulate import generate_with_noise


def kappa10_schedule(case=Case.I):
    # 100 ** 0.5 is exactly 10.0 in binary floating point
    return sample_schedule(ModelConfig(case, -1.0, -1.0, 0.5, n=100))


def hand_path(case=Case.I, V=(1.0, -1.0)):
    cfg = ModelConfig(case, -1.0, -1.0, 0.5, n=len(V))
    return generate_with_noise(cfg, np.array(V), schedule=kappa10_schedule(case))


@pytest.fixture
def hand_case1():
    return hand_path(Case.I)


@pytest.fixture
def hand_case2():
    return hand_path(Case.II)


ACCEPTANCE_LINES = []


def report_criterion(label, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
