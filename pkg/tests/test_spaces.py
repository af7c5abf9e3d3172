import random

import pytest
from hypothesis import given, strategies as st

from korngate import linalg
from korngate.geometry import (GeometryError, faces_of, make_two_cube_domain, make_two_square_domain,
                               reference_simplex)
from korngate.polyalg import (Poly, VecPoly, div, integrate_cell, integrate_face, restrict_to_face,
                              strain)
from korngate.rational import Q
from korngate.sharpness import listed_boundary_fields
from korngate.spaces import (RigidMotion, SpaceBasis, assemble_enriched, basis_BDM1, basis_CR, basis_MTW,
                             basis_P1_vector, basis_Qfstar, basis_Qstar, basis_RM, basis_RM_boundary, basis_RT0_face,
                             basis_RT1, basis_V1, basis_Y, basis_enrichedCR, bubble_cell, bubble_face,
                             curl_bubble_part, edge_bubble_b, is_rigid, qf_image, trace_tangential_rm, y3_removed)

from conftest import random_simplex

T2 = reference_simplex(2)
T3 = reference_simplex(3)


def test_rm_bases():
    b2 = basis_RM(2)
    assert b2.rank == 3
    x, y = Poly.var(0, 2), Poly.var(1, 2)
    assert b2.span_equals(SpaceBasis([VecPoly.const(2, (1, 0)), VecPoly.const(2, (0, 1)), VecPoly([-y, x])]))
    assert basis_RM(3).rank == 6
    for d in (2, 3):
        for g in basis_RM(d):
            assert all(p.is_zero() for row in strain(g) for p in row)


def test_rigid_motion_round_trip():
    m = RigidMotion((1, Q(-2, 3), 4), (Q(1, 2), 0, -1))
    A = m.matrix()
    assert all(A[i][j] == -A[j][i] for i in range(3) for j in range(3))
    assert RigidMotion.from_vecpoly(m.as_vecpoly()) == m
    with pytest.raises(ValueError):
        RigidMotion.from_vecpoly(VecPoly([Poly.var(0, 2), Poly(2)]))


def test_rm_boundary_two_square():
    b = basis_RM_boundary(make_two_square_domain())
    assert b.rank == 1
    assert b.span_equals(SpaceBasis(listed_boundary_fields(2)))


def test_rm_boundary_two_cube():
    b = basis_RM_boundary(make_two_cube_domain())
    assert b.rank == 3
    assert b.span_equals(SpaceBasis(listed_boundary_fields(3)))


@pytest.mark.parametrize("d", [2, 3])
def test_constants_not_in_rm_boundary(d):
    mesh = make_two_square_domain() if d == 2 else make_two_cube_domain()
    b = basis_RM_boundary(mesh)
    for k in range(d):
        assert not b.contains(VecPoly.const(d, [int(i == k) for i in range(d)]))


def test_rt0_face_rank_and_barycenter():
    for f in faces_of(T3):
        b = basis_RT0_face(f)
        assert b.rank == 3
        s = (Q(1, 3), Q(1, 3))  # chart barycenter of the reference triangle
        vals = [g.evaluate(s) for g in b.generators]
        assert vals[0] == f.tangents_raw[0]
        assert vals[1] == f.tangents_raw[1]
        assert vals[2] == (0, 0, 0)


def test_rt0_rejected_on_edges():
    with pytest.raises(GeometryError):
        basis_RT0_face(faces_of(T2)[0])


def test_rigid_cross_normal_in_rt0():
    rng = random.Random(30)
    f = faces_of(random_simplex(rng, 3))[1]
    b = basis_RT0_face(f)
    for _ in range(30):
        m = RigidMotion([Q(rng.randint(-5, 5), 3) for _ in range(3)], [Q(rng.randint(-5, 5), 2) for _ in range(3)])
        assert b.contains(restrict_to_face(m.as_vecpoly(), f).cross(f.normal_raw))


def test_tangential_trace_2d_is_constant():
    rng = random.Random(2)
    for f in faces_of(random_simplex(rng, 2)):
        tr = trace_tangential_rm(f)
        assert tr.rank == 1
        assert all(g.degree() <= 0 for g in tr.generators)


def test_eta_zero_gives_constant_cross_trace():
    rng = random.Random(4)
    for f in faces_of(random_simplex(rng, 3)):
        n1, n2, n3 = f.normal_raw
        for params in linalg.nullspace([[-n3, n2, -n1]], 3):
            m = RigidMotion((0, 0, 0), params)
            assert restrict_to_face(m.as_vecpoly(), f).cross(f.normal_raw).degree() <= 0


def test_bubbles():
    bT = bubble_cell(T2)
    assert bT.evaluate((Q(1, 3), Q(1, 3))) == Q(1, 27)
    for i, f in enumerate(faces_of(T3)):
        assert restrict_to_face(bubble_cell(T3), f).is_zero()
        for j, g in enumerate(faces_of(T3)):
            if i != j:
                assert restrict_to_face(bubble_face(T3, i), g).is_zero()
        assert not restrict_to_face(bubble_face(T3, i), f).is_zero()


def test_edge_bubble_orthogonal_to_p1_on_edges():
    b = edge_bubble_b(T2)
    for f in faces_of(T2):
        tr = restrict_to_face(b, f)
        s = Poly.var(0, 1)
        assert integrate_face(tr, f) == 0
        assert integrate_face(tr * s, f) == 0


def test_standard_ranks():
    assert basis_BDM1(T2).rank == 6
    assert basis_BDM1(T3).rank == 12
    assert basis_RT1(T2).rank == 8
    assert basis_RT1(T3).rank == 15
    assert basis_CR(T2).rank == 6
    assert basis_P1_vector(T3).rank == 12


@pytest.mark.parametrize("kind,T,rank", [("Y1", T2, 3), ("Y4", T2, 3), ("Y2", T3, 12), ("Y3", T3, 8), ("Y5", T3, 8)])
def test_enrichment_ranks(kind, T, rank):
    assert basis_Y(kind, T).rank == rank


def test_y3_removed_rank():
    assert SpaceBasis(y3_removed(T3)).rank == 4


def test_y3_removed_fields_are_invisible_to_tangential_means():
    from korngate.dofs import DofSpec, build_dofs, dof_matrix
    dofs = build_dofs([DofSpec("cross_normal3d", "P0t")], T3)
    full = basis_Y("Y2", T3)
    D = dof_matrix(curl_bubble_part(T3, full), dofs)
    null = linalg.nullspace(D, len(full))
    assert len(null) == 4
    assert SpaceBasis([full.combination(c) for c in null]).span_equals(SpaceBasis(y3_removed(T3)))


def test_y3_complement_choice_changes_span_but_not_verdicts():
    from dataclasses import replace
    from korngate.dofs import build_dofs, unisolvence
    from korngate.elements import get_element
    from korngate.korn import dof_coverage_test
    spaces = {}
    for method in ("l2", "coordinate"):
        e = replace(get_element("t1-fem4-3d"),
                    builder=lambda T, m=method: assemble_enriched(basis_BDM1(T), basis_Y("Y3", T, m), T))
        assert unisolvence(e.space(T3), build_dofs(e.dofs, T3)).unisolvent
        assert dof_coverage_test(e).verdict == "fails"
        spaces[method] = e.space(T3)
    assert spaces["l2"].rank == spaces["coordinate"].rank == 20
    # curl(b_T k) is not in BDM1 for the removed k, so the quotient is not well defined on the sum
    assert not spaces["l2"].span_equals(spaces["coordinate"])


def test_unknown_family():
    with pytest.raises(ValueError):
        basis_Y("Y9", T3)


def test_qfstar():
    for i in range(4):
        q = basis_Qfstar(T3, i)
        assert q.rank == 3
        n = faces_of(T3)[i].normal_raw
        weight = bubble_cell(T3) * bubble_face(T3, i)
        for g in q.generators:
            for k in range(3):
                w = VecPoly.const(3, [int(j == k) for j in range(3)]).cross(n)
                assert integrate_cell(g.dot(w) * weight, T3) == 0
    assert len(qf_image(T3, 0)) == 5


def test_qstar_and_curl_dimension():
    q = basis_Qstar(T3)
    assert q.rank == 12
    assert curl_bubble_part(T3, q).rank == 12 == 4 * basis_Qfstar(T3, 0).rank


def test_mtw():
    m = basis_MTW(T2)
    assert m.rank == 9
    for g in m.generators:
        assert div(g).degree() <= 0
        for f in faces_of(T2):
            assert restrict_to_face(g, f).dot(f.normal_raw).degree() <= 1


def test_enriched_cr():
    assert basis_enrichedCR(T2, 2, "psi").rank == 9
    v = basis_enrichedCR(T2, 2, "curl")
    assert v.rank == 9
    for g in curl_bubble_part(T2, basis_Y("Y1", T2)).generators:
        for f in faces_of(T2):
            assert restrict_to_face(g, f).dot(f.normal_raw).is_zero()


def test_direct_sum_ranks():
    for V0, Y, T in [(basis_BDM1(T2), basis_Y("Y1", T2), T2), (basis_RT1(T3), basis_Y("Y2", T3), T3),
                     (basis_BDM1(T3), basis_Qstar(T3), T3)]:
        s = assemble_enriched(V0, Y, T)
        assert s.rank == V0.rank + curl_bubble_part(T, Y).rank
    assert basis_V1(T3).rank == 24


def test_curl_part_divergence_free():
    for g in curl_bubble_part(T3, basis_Y("Y2", T3)).generators:
        assert div(g).is_zero()


@given(st.permutations(list(range(8))))
def test_rank_is_order_independent(perm):
    gens = basis_RT1(T2).generators
    assert SpaceBasis([gens[i] for i in perm]).rank == 8


@given(st.integers(0, 10 ** 6))
def test_span_membership_exact(seed):
    rng = random.Random(seed)
    b = basis_BDM1(T2)
    coeffs = [Q(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(6)]
    v = b.combination(coeffs)
    assert b.contains(v)
    assert not b.contains(v + VecPoly([Poly.var(0, 2) ** 2, Poly(2)]))


@given(st.integers(0, 10 ** 6))
def test_rm_strain_free_and_kernel(seed):
    rng = random.Random(seed)
    d = rng.choice([2, 3])
    coeffs = [Q(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(3 if d == 2 else 6)]
    m = RigidMotion.from_coefficients(coeffs).as_vecpoly()
    assert all(p.is_zero() for row in strain(m) for p in row)
    assert is_rigid(m)
    # a P1 field with zero strain is rigid
    v = basis_P1_vector(reference_simplex(d)).combination(
        [Q(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(d * (d + 1))])
    zero_strain = all(p.is_zero() for row in strain(v) for p in row)
    assert zero_strain == is_rigid(v)
