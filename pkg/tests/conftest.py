import sys
from datetime import date
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from burstwatch import kernels  # noqa: E402
from burstwatch.events import CountSeries, TopicKey  # noqa: E402

MONDAY = date(2010, 1, 4)
TOPIC = TopicKey("cholera", "ao")


def make_series(counts, start=MONDAY, topic=TOPIC, languages=("en",)):
    return CountSeries(topic, start, tuple(counts), frozenset(languages))


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    return request.param


ACCEPTANCE_RESULTS: list[tuple[str, str, bool]] = []


class _Criterion:
    def __init__(self, ident, desc):
        self.ident, self.desc = ident, desc

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ACCEPTANCE_RESULTS.append((self.ident, self.desc, exc_type is None))
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for ident, desc, ok in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {ident}: {desc}")
