import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from discflux import preset
from discflux.cli import convergence_report


@pytest.fixture(scope="session")
def experiment1_study():
    """Convergence report for the first reference study, with its wall time."""
    start = time.perf_counter()
    report = convergence_report(preset("experiment1"))
    return report, time.perf_counter() - start


@pytest.fixture(scope="session")
def experiment2_study():
    start = time.perf_counter()
    report = convergence_report(preset("experiment2"))
    return report, time.perf_counter() - start
