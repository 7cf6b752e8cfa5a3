from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from gammastack.linalg import LinearSystem, matrix_rank, solve_linear

F = Fraction


def test_identity_system():
    sys = LinearSystem(3)
    for i in range(3):
        sys.add_row({i: F(1)}, F(i + 1))
    res = solve_linear(sys)
    assert res.solvable
    assert res.solution == [F(1), F(2), F(3)]
    assert res.kernel == []


def test_zero_matrix_full_kernel():
    sys = LinearSystem(2)
    sys.add_row({}, 0)
    res = solve_linear(sys)
    assert res.solvable
    assert res.solution == [F(0), F(0)]
    assert len(res.kernel) == 2


def test_two_by_two():
    # x + y = 3, x - y = 1  ->  (2, 1)
    sys = LinearSystem(2)
    sys.add_row({0: F(1), 1: F(1)}, F(3))
    sys.add_row({0: F(1), 1: F(-1)}, F(1))
    res = solve_linear(sys)
    assert res.solution == [F(2), F(1)]
    assert res.kernel == []


def test_inconsistent_reported():
    sys = LinearSystem(1)
    sys.add_row({0: F(1)}, F(1))
    sys.add_row({0: F(1)}, F(2))
    res = solve_linear(sys)
    assert not res.solvable
    assert res.solution is None
    assert res.failure_row is not None


def _random_system(rng: random.Random, n_rows: int, n_cols: int) -> LinearSystem:
    sys = LinearSystem(n_cols)
    sol = [F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n_cols)]
    for _ in range(n_rows):
        row = {j: F(rng.randint(-3, 3)) for j in range(n_cols) if rng.random() < 0.6}
        b = sum((c * sol[j] for j, c in row.items()), F(0))
        sys.add_row(row, b)
    return sys


def test_random_systems_residual_exactly_zero():
    rng = random.Random(7)
    for _ in range(25):
        sys = _random_system(rng, rng.randint(1, 6), rng.randint(1, 5))
        res = solve_linear(sys)
        assert res.solvable
        for row, b in zip(sys.rows, sys.rhs):
            assert sum((c * res.solution[j] for j, c in row.items()), F(0)) == b
        # kernel vectors really are in the kernel
        for vec in res.kernel:
            for row in sys.rows:
                assert sum((c * vec[j] for j, c in row.items()), F(0)) == 0


def test_determinism():
    rng = random.Random(3)
    sys = _random_system(rng, 5, 4)
    r1 = solve_linear(sys)
    r2 = solve_linear(sys)
    assert r1.solution == r2.solution and r1.kernel == r2.kernel


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_rank_bounded(n_rows, n_cols, seed):
    rng = random.Random(seed)
    rows = [
        {j: F(rng.randint(-2, 2)) for j in range(n_cols) if rng.random() < 0.7}
        for _ in range(n_rows)
    ]
    rows = [{j: c for j, c in r.items() if c != 0} for r in rows]
    r = matrix_rank(rows, n_cols)
    assert 0 <= r <= min(n_rows, n_cols)
