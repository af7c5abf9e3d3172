import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from korngate.geometry import Cell
from korngate.rational import Q

settings.register_profile("korngate", max_examples=50, deadline=None, derandomize=True,
                           suppress_health_check=[HealthCheck.large_base_example, HealthCheck.too_slow])
settings.load_profile("korngate")

small_q = st.builds(lambda p, q: Q(p, q), st.integers(-6, 6), st.integers(1, 5))


@st.composite
def simplices(draw, d):
    """Random nondegenerate rational simplex."""
    while True:
        verts = [tuple(draw(small_q) for _ in range(d)) for _ in range(d + 1)]
        try:
            return Cell("simplex", verts)
        except ValueError:
            continue


def random_simplex(rng: random.Random, d: int) -> Cell:
    while True:
        verts = [tuple(Q(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(d)) for _ in range(d + 1)]
        try:
            return Cell("simplex", verts)
        except ValueError:
            continue


def random_affine(rng: random.Random, d: int):
    while True:
        A = [[Q(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(d)] for _ in range(d)]
        from korngate import linalg
        if linalg.det(A) != 0:
            return A, [Q(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(d)]


@pytest.fixture
def rng():
    return random.Random(20261016)


ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
