import numpy as np
import pytest

from gmmcrit import MixtureParams, generate_sample


@pytest.fixture(scope="session")
def k7_sample():
    return generate_sample(7)


def random_params(rng, lo=-3.0, hi=3.0):
    return MixtureParams(
        float(rng.uniform(0.05, 0.95)),
        float(rng.uniform(lo, hi)),
        float(rng.uniform(lo, hi)),
        float(rng.uniform(0.3, 2.0)),
        float(rng.uniform(0.3, 2.0)),
    )


def random_points(rng, n, scale=2.0):
    return rng.normal(0.0, scale, size=n)


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))


ACCEPTANCE_RESULTS = {}


def record(number, passed, detail):
    """Store one acceptance line; reported again in the terminal summary."""
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_RESULTS[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[number])
