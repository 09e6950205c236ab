import time

import pytest

import splitep as sp

# Seeds 1..10 with dimensions cycling through {2, 5, 10, 20} in both roles.
ACCEPTANCE_CASES = [
    (1, 2, 2),
    (2, 2, 5),
    (3, 5, 2),
    (4, 5, 5),
    (5, 10, 10),
    (6, 10, 20),
    (7, 20, 10),
    (8, 20, 20),
    (9, 5, 10),
    (10, 10, 5),
]


@pytest.fixture(scope="session")
def weak_runs():
    """Planted weak-mode runs shared by several acceptance criteria."""
    runs = []
    started = time.perf_counter()
    for seed, n, m in ACCEPTANCE_CASES:
        problem = sp.generate_planted(n, m, seed=seed)
        runs.append((seed, problem, sp.weak_solve(problem)))
    elapsed = time.perf_counter() - started
    return runs, elapsed


@pytest.fixture(scope="session")
def strong_runs():
    runs = []
    for seed, n, m in ACCEPTANCE_CASES:
        problem = sp.generate_planted(n, m, seed=seed)
        runs.append((seed, problem, sp.strong_solve(problem)))
    return runs
