from __future__ import annotations

import numpy as np
import pytest

from fuzzdepth import BinaryMask, Ensemble, GridSpec, ProbMask

# Filled by the acceptance suite; echoed after the run so the per-criterion
# verdicts survive pytest's output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_fuzzy_ensemble(seed: int, n: int, dims, weighted: bool = False) -> Ensemble:
    rng = np.random.default_rng(seed)
    cells = int(np.prod(dims))
    weights = rng.uniform(0.5, 2.0, size=cells) if weighted else None
    grid = GridSpec(tuple(dims), weights)
    members = [
        ProbMask(grid, rng.uniform(0.0, 1.0, size=cells).astype(np.float32))
        for _ in range(n)
    ]
    return Ensemble(grid, members)


def make_binary_ensemble(seed: int, n: int, dims, weighted: bool = False) -> Ensemble:
    rng = np.random.default_rng(seed)
    cells = int(np.prod(dims))
    weights = rng.uniform(0.5, 2.0, size=cells) if weighted else None
    grid = GridSpec(tuple(dims), weights)
    members = []
    for _ in range(n):
        density = rng.uniform(0.2, 0.8)
        bits = rng.uniform(0.0, 1.0, size=cells) < density
        members.append(BinaryMask(grid, bits).to_prob())
    return Ensemble(grid, members)


@pytest.fixture
def nested_trio() -> Ensemble:
    """Three binary masks on a 4-cell line: c2 inside c1 inside c0-ish.

    c0 = [1,1,1,0], c1 = [0,1,1,0], c2 = [0,1,0,0].  Small enough that every
    pairwise inclusion is checkable by hand.
    """
    grid = GridSpec((4,))
    rows = [
        np.array([1, 1, 1, 0], dtype=np.float32),
        np.array([0, 1, 1, 0], dtype=np.float32),
        np.array([0, 1, 0, 0], dtype=np.float32),
    ]
    return Ensemble(grid, [ProbMask(grid, r) for r in rows], ids=["c0", "c1", "c2"])
