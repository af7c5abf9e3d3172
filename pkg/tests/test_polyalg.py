import itertools
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from korngate.geometry import Cell, faces_of, reference_simplex
from korngate.polyalg import (Poly, VecPoly, barycentric, curl2_scalar, curl2_vector, curl3, derivative, div,
                              grad, integrate_box, integrate_cell, integrate_face, integrate_reference_simplex,
                              monomials, pullback_affine, random_poly, random_vecpoly, restrict_to_face, strain)
from korngate.rational import Q

from conftest import random_affine, random_simplex, simplices

x, y = Poly.var(0, 2), Poly.var(1, 2)
X, Y, Z = (Poly.var(i, 3) for i in range(3))


# oracle: tensor Gauss-Legendre on the collapsed (Duffy) cube ---------------------------

def _gauss_simplex(p: Poly, T: Cell, n: int = 8) -> float:
    g, w = np.polynomial.legendre.leggauss(n)
    g, w = (g + 1) / 2, w / 2
    d = T.dim
    J = np.array([[float(a) for a in row] for row in T.jacobian()])
    v0 = np.array([float(a) for a in T.vertices[0]])
    total = 0.0
    for idx in itertools.product(range(n), repeat=d):
        u = [g[i] for i in idx]
        wt = np.prod([w[i] for i in idx])
        if d == 2:
            ref = [u[0], u[1] * (1 - u[0])]
            jac = 1 - u[0]
        else:
            ref = [u[0], u[1] * (1 - u[0]), u[2] * (1 - u[0]) * (1 - u[1])]
            jac = (1 - u[0]) ** 2 * (1 - u[1])
        pt = v0 + J @ np.array(ref)
        total += wt * jac * p.evaluate(tuple(float(c) for c in pt))
    return total * abs(np.linalg.det(J))


def _gauss_box(p: Poly, lo, hi, n: int = 6) -> float:
    g, w = np.polynomial.legendre.leggauss(n)
    lo, hi = np.array([float(a) for a in lo]), np.array([float(a) for a in hi])
    total = 0.0
    for idx in itertools.product(range(n), repeat=len(lo)):
        pt = lo + (hi - lo) * (np.array([g[i] for i in idx]) + 1) / 2
        total += np.prod([w[i] for i in idx]) * p.evaluate(tuple(float(c) for c in pt))
    return total * np.prod((hi - lo) / 2)


def test_monomial_counts():
    assert len(monomials(2, 2)) == 6
    assert len(monomials(3, 3)) == 20


def test_arithmetic_and_text_round_trip():
    p = (x + 2 * y) ** 2 - Q(1, 3) * x
    assert p.coeff((1, 1)) == 4
    assert p.degree() == 2
    assert Poly.from_text(p.to_text(), 2) == p


def test_evaluate_exact():
    p = x * y + Q(1, 2)
    assert p.evaluate((Q(1, 3), 3)) == Q(3, 2)


def test_grad_div_curl_examples():
    assert grad(x * x * y) == VecPoly([2 * x * y, x * x])
    assert div(VecPoly([x * x, y])) == 2 * x + 1
    assert curl2_scalar(x * y) == VecPoly([-x, y])
    assert curl2_vector(VecPoly([-y, x])) == Poly.const(2, 2)
    # displayed sign convention: the negative of the textbook curl
    assert curl3(VecPoly([-Y, X, Poly(3)])) == VecPoly.const(3, [0, 0, -2])
    assert curl3(VecPoly([Z, Poly(3), Poly(3)])) == VecPoly.const(3, [0, -1, 0])


def test_strain_of_shear():
    D = strain(VecPoly([y, Poly(2)]))
    assert D[0][1] == Poly.const(2, Q(1, 2))
    assert D[0][0].is_zero()


def test_reference_simplex_moments():
    assert integrate_reference_simplex(Poly.const(2, 1)) == Q(1, 2)
    assert integrate_reference_simplex(x) == Q(1, 6)
    assert integrate_reference_simplex(X * Y * Z) == Q(1, 720)


def test_integrate_box_unit():
    assert integrate_box(x * y, (0, 0), (1, 2)) == 1


@pytest.mark.parametrize("d", [2, 3])
def test_integrate_cell_matches_gauss(d):
    rng = random.Random(7 + d)
    for _ in range(5):
        T = random_simplex(rng, d)
        p = random_poly(rng, d, 4)
        assert float(integrate_cell(p, T)) == pytest.approx(_gauss_simplex(p, T), rel=1e-9, abs=1e-9)


def test_integrate_box_matches_gauss():
    rng = random.Random(3)
    p = random_poly(rng, 3, 5)
    T = Cell("box", [(0, Q(-1, 2), 1), (2, 1, Q(5, 3))])
    assert float(integrate_cell(p, T)) == pytest.approx(_gauss_box(p, *T.vertices), rel=1e-10)


def test_barycentric_partition_of_unity():
    T = Cell("simplex", [(0, 0), (3, 1), (1, 2)])
    lam = barycentric(T)
    assert sum(lam, Poly(2)) == Poly.const(2, 1)
    for i, v in enumerate(T.vertices):
        assert [l.evaluate(v) for l in lam] == [int(i == j) for j in range(3)]


def test_restriction_agrees_with_chart_point():
    rng = random.Random(11)
    T = random_simplex(rng, 3)
    v = random_vecpoly(rng, 3, 3, 2)
    for f in faces_of(T):
        tr = restrict_to_face(v, f)
        for s in [(0, 0), (Q(1, 3), Q(1, 5)), (Q(1, 2), Q(1, 2))]:
            assert tr.evaluate(s) == v.evaluate(f.chart_point(s))


def test_face_integral_matches_gauss_on_chart():
    rng = random.Random(5)
    T = random_simplex(rng, 3)
    p = random_poly(rng, 3, 3)
    for f in faces_of(T):
        q = restrict_to_face(p, f)
        ref = _gauss_simplex(q, reference_simplex(2))
        assert float(integrate_face(q, f)) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_pullback_change_of_variables():
    rng = random.Random(17)
    A, b = random_affine(rng, 2)
    p = random_poly(rng, 2, 3)
    T = reference_simplex(2)
    from korngate.geometry import affine_image
    from korngate import linalg
    img = affine_image(T, A, b)
    assert integrate_cell(p, img) == integrate_cell(pullback_affine(p, A, b), T) * abs(linalg.det(A))


@given(simplices(2))
def test_integral_of_constant_is_volume(T):
    assert integrate_cell(Poly.const(2, 1), T) == T.volume()


@given(st.integers(0, 10 ** 6))
def test_div_of_curl3_vanishes(seed):
    v = random_vecpoly(random.Random(seed), 3, 3, 3)
    assert div(curl3(v)).is_zero()


@given(st.integers(0, 10 ** 6))
def test_curl_of_grad_vanishes(seed):
    rng = random.Random(seed)
    p3 = random_poly(rng, 3, 4)
    p2 = random_poly(rng, 2, 4)
    assert curl3(grad(p3)).is_zero()
    assert curl2_vector(grad(p2)).is_zero()
    assert div(curl2_scalar(p2)).is_zero()


@given(st.integers(0, 10 ** 6))
def test_product_rule(seed):
    rng = random.Random(seed)
    p, q = random_poly(rng, 3, 2), random_poly(rng, 3, 2)
    for k in range(3):
        assert derivative(p * q, k) == derivative(p, k) * q + p * derivative(q, k)
