import csv
import math
from pathlib import Path

import pytest

from podium_dp import _kernels_py

DATA = Path(__file__).parent / "data"

try:
    from podium_dp import _kernels as _compiled
except ImportError:
    _compiled = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
if _compiled is not None:
    BACKENDS.append(pytest.param(_compiled, id="cython"))


def parse_eps(text: str) -> float:
    text = text.strip()
    if text.startswith("log("):
        return math.log(float(text[4:-1]))
    return float(text)


def load_table(name):
    with open(DATA / name, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


_results = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for key, value in report.user_properties:
        if key == "criterion":
            number, title = value
            detail = dict(report.user_properties).get("detail", "")
            prev = _results.get(number)
            passed = report.outcome == "passed" and (prev is None or prev[1])
            details = [d for d in ((prev[2] if prev else ""), detail) if d]
            _results[number] = (title, passed, "; ".join(details))


@pytest.fixture(autouse=True)
def _criterion_tag(request):
    marker = request.node.get_closest_marker("criterion")
    if marker is not None:
        request.node.user_properties.append(("criterion", tuple(marker.args)))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, passed, detail = _results[number]
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
