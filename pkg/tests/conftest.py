import numpy as np
import pytest

from pitchwarp.dtw import AlignmentPath

HOP = 128 / 22050


def random_path(rng, n, m):
    """Uniformly-stepped random warping path from (0, 0) to (n-1, m-1)."""
    i = j = 0
    pairs = [(0, 0)]
    while (i, j) != (n - 1, m - 1):
        options = []
        if i < n - 1 and j < m - 1:
            options.append((1, 1))
        if i < n - 1:
            options.append((1, 0))
        if j < m - 1:
            options.append((0, 1))
        di, dj = options[rng.integers(len(options))]
        i, j = i + di, j + dj
        pairs.append((i, j))
    return AlignmentPath(np.array(pairs))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """Echo the one-line verdicts recorded by the acceptance tests."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            lines.extend(v for k, v in getattr(rep, "user_properties", []) if k == "acceptance")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
