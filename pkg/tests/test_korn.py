import random

import pytest
from hypothesis import given, strategies as st

from korngate import linalg
from korngate.elements import REGISTRY, get_element
from korngate.geometry import (Cell, GeometryError, Mesh, make_square_grid, make_two_cell_configuration,
                               make_two_cube_domain, make_two_square_domain, make_two_square_simplicial,
                               reference_simplex)
from korngate.korn import (PwField, PwSpace, coverage_via_kernel, dof_coverage_test, h1_seminorm_sq,
                           jump_deficiency, jump_on_face, korn_constant_estimate, korn_kernel_test, l2_project,
                           local_rm_projection, normal_weights, patch_sizes, phi_is_zero, phi_moments, phi_seminorm,
                           piecewise_p1_space, piecewise_rm_space, project_jump, strain_norm_sq, tangential_weights,
                           vertex_average_E)
from korngate.polyalg import (Poly, VecPoly, curl, integrate_cell, integrate_face, random_poly, random_vecpoly)
from korngate.rational import Q
from korngate.sharpness import CONDITIONS, build_counterexample, phi_matrix
from korngate.spaces import RigidMotion, basis_RM

from conftest import random_simplex

SQ = make_two_square_domain()
CUBE = make_two_cube_domain()


def _rm_field(mesh, c1, c2):
    return PwField(mesh, [RigidMotion.from_coefficients(c1).as_vecpoly(),
                          RigidMotion.from_coefficients(c2).as_vecpoly()])


def _face(mesh):
    return mesh.faces[mesh.interior_faces[0]]


def test_continuous_field_has_no_jump():
    v = VecPoly([Poly.var(0, 2) ** 2, Poly.var(1, 2)])
    jt = jump_on_face(PwField(SQ, [v, v]), _face(SQ))
    assert jt.jump.is_zero() and jt.normal_part.is_zero() and jt.tangential_part.is_zero()


def test_two_square_jump_parts():
    a1, b1, c1, a2, b2, c2 = map(Q, (1, 2, 3, -2, 5, Q(1, 2)))
    u = _rm_field(SQ, (a1, b1, c1), (a2, b2, c2))
    jt = jump_on_face(u, _face(SQ), reverse=True)
    s = Poly.var(0, 1)
    assert jt.normal_part == (a2 - a1) - (c2 - c1) * s
    assert jt.tangential_part == Poly.const(1, b2 - b1)


def test_two_cube_cross_jump():
    c1 = [Q(k, 3) for k in (1, -2, 4, 5, -1, 2)]
    c2 = [Q(k, 2) for k in (3, 1, -1, 2, 4, -3)]
    u = _rm_field(CUBE, c1, c2)
    jt = jump_on_face(u, _face(CUBE), reverse=True)
    ab, _, cb, _, eb, _ = [q - p for p, q in zip(c1, c2)]
    s1, s2 = Poly.var(0, 2), Poly.var(1, 2)
    assert jt.tangential_part == VecPoly([-(cb - eb * s1), Poly(2), ab + eb * s2])


def test_boundary_jump_is_trace():
    v = VecPoly([Poly.var(1, 2), Poly.const(2, 3)])
    u = PwField(SQ, [v, v])
    f = SQ.faces[SQ.boundary_faces[0]]
    from korngate.polyalg import restrict_to_face
    assert jump_on_face(u, f).jump == restrict_to_face(v, f)


def test_pi0_of_linear_on_edge():
    f = _face(SQ)
    y = Poly.var(1, 2)
    u = PwField(SQ, [VecPoly([y, Poly(2)]), VecPoly.zero(2, 2)])
    pr = project_jump(f, jump_on_face(u, f))
    assert pr["pi0_normal"] == Q(1, 2)
    assert pr["pi1_normal"] == Poly.var(0, 1)


def test_jump_deficiency_vanishes_on_rigid_and_continuous():
    m = RigidMotion.from_coefficients([1, 2, 3]).as_vecpoly()
    assert jump_deficiency(PwField(SQ, [m, m]))[0] == 0
    rng = random.Random(0)
    v = random_vecpoly(rng, 2, 2, 2)
    assert jump_deficiency(PwField(SQ, [v, v]))[0] == 0


def test_e3_deficiency_is_tangential():
    u = build_counterexample("E3").field
    total, per = jump_deficiency(u)
    normal, tangential = per[SQ.interior_faces[0]]
    assert normal == 0
    assert tangential == 1 * _face(SQ).chart_measure()
    assert total == tangential


def test_phi_of_constants_vanishes():
    for mesh in (SQ, CUBE):
        d = mesh.dim
        c = VecPoly.const(d, range(1, d + 1))
        u = PwField(mesh, [c, c])
        assert phi_is_zero(u)
        assert phi_seminorm(u) == 0


def test_phi_on_rigid_motions_only_kills_constants():
    for mesh in (SQ, CUBE):
        d = mesh.dim
        null = linalg.nullspace(phi_matrix(mesh), 2 * len(basis_RM(d)))
        k = len(basis_RM(d))
        # restrict to global rigid motions: equal coefficients on both cells
        glue = [[int(i == j) - int(i + k == j) for j in range(2 * k)] for i in range(k)]
        kernel = linalg.nullspace(phi_matrix(mesh) + glue, 2 * k)
        assert len(kernel) == d
        for z in kernel:
            assert all(v == 0 for v in z[d:k])
        assert len(null) > len(kernel)


def test_phi_irrational_boundary_raises():
    mesh = Mesh.from_cells([Cell("simplex", [(0, 0), (1, 0), (0, 1)])])
    u = PwField(mesh, [VecPoly.const(2, (1, 0))])
    with pytest.raises(GeometryError):
        phi_moments(u)


def test_local_rm_projection_hand_solve():
    x = Poly.var(0, 2)
    m = local_rm_projection(VecPoly([x * x, Poly(2)]), reference_simplex(2))
    assert m == RigidMotion((Q(1, 6), 0), (0,))


def test_local_rm_projection_fixes_rm():
    m = RigidMotion((1, 2, 3), (4, 5, 6))
    assert local_rm_projection(m.as_vecpoly(), reference_simplex(3)) == m


def test_vertex_average_two_triangles():
    mesh = make_two_square_simplicial()
    p = (0, 0)
    sizes = patch_sizes(mesh)
    assert sizes[p] == sum(1 for c in mesh.cells if p in c.vertices)
    w1, w2 = VecPoly.const(2, (2, 0)), VecPoly.const(2, (0, 4))
    fields = [w1 if c.id == 0 else w2 for c in mesh.cells]
    E = vertex_average_E(PwField(mesh, fields))
    count0 = sum(1 for c in mesh.cells if p in c.vertices and c.id == 0)
    expect = tuple((2 * count0 * (k == 0) + 4 * (sizes[p] - count0) * (k == 1)) / Q(sizes[p]) for k in range(2))
    assert E.on(0).evaluate(p) == expect


def test_vertex_average_rejects_boxes():
    with pytest.raises(GeometryError):
        vertex_average_E(PwField(SQ, [VecPoly.zero(2, 2)] * 2))


def test_norms_of_rotation():
    c = Q(3, 2)
    rot = RigidMotion((0, 0), (c,)).as_vecpoly()
    u = PwField(SQ, [rot, VecPoly.zero(2, 2)])
    assert h1_seminorm_sq(u) == 2 * c * c
    assert strain_norm_sq(u) == 0
    assert h1_seminorm_sq(build_counterexample("E1").field) == 1
    T = reference_simplex(2)
    one = Mesh.from_cells([T])
    assert strain_norm_sq(PwField(one, [VecPoly([Poly.var(0, 2), Poly(2)])])) == T.volume()


def test_continuous_p1_kernel():
    space = piecewise_p1_space(make_square_grid(2))
    r = korn_kernel_test(space, include_phi=False, jump_control="none", continuity="full")
    assert r.holds and r.kernel_dim == 3
    r = korn_kernel_test(space, include_phi=True, jump_control="none", continuity="full")
    assert r.holds and r.kernel_dim == 2


def test_piecewise_rm_without_jump_control_fails():
    r = korn_kernel_test(piecewise_rm_space(SQ), include_phi=False, jump_control="none")
    assert not r.holds
    assert (r.kernel_dim, r.expected_kernel_dim) == (6, 3)
    assert r.witness is not None and r.witness_h1_sq > 0


@pytest.mark.parametrize("mesh,dim", [(SQ, 2), (CUBE, 3)])
def test_minimal_control_with_phi_leaves_constants(mesh, dim):
    r = korn_kernel_test(piecewise_rm_space(mesh), include_phi=True, jump_control="minimal")
    assert r.holds and r.kernel_dim == dim


@pytest.mark.parametrize("d", [2, 3])
def test_sharpness_condition_sets_leave_constants(d):
    mesh = SQ if d == 2 else CUBE
    r = korn_kernel_test(piecewise_rm_space(mesh), include_phi=True, jump_control=CONDITIONS[d])
    assert r.holds and r.kernel_dim == d


def test_cr_fails_with_witness():
    e = get_element("cr-2d")
    space = PwSpace.from_builder(make_two_square_simplicial(), e.space, e.name)
    r = korn_kernel_test(space, include_phi=True, jump_control="none", continuity="dofs", dof_specs=e.dofs)
    assert not r.holds
    assert r.witness_h1_sq > 0
    assert strain_norm_sq(r.witness) == 0
    assert phi_is_zero(r.witness)


@pytest.mark.parametrize("name", ["t1-fem2-2d", "t1-fem4-3d", "t2-fem3-3d"])
def test_coverage_examples(name):
    e = get_element(name)
    r = dof_coverage_test(e)
    assert r.holds == e.korn_expected
    if not r.holds:
        assert r.witness is not None


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_coverage_and_kernel_agree(name):
    e = get_element(name)
    a, b = dof_coverage_test(e), coverage_via_kernel(e)
    assert a.verdict == b.verdict == ("holds" if e.korn_expected else "fails")


@pytest.mark.parametrize("name", ["t1-fem2-2d", "cr-2d", "t1-fem3-3d"])
def test_verdict_invariant_under_relabelling(name):
    e = get_element(name)
    mesh = make_two_cell_configuration(e.dimension)
    swapped = Mesh.from_cells(list(reversed(mesh.cells)))
    assert dof_coverage_test(e, swapped).verdict == dof_coverage_test(e, mesh).verdict


def test_constant_estimate_positive_on_continuous_space():
    space = piecewise_p1_space(make_square_grid(2))
    est = korn_constant_estimate(space, include_phi=True, jump_control="none", continuity="full")
    assert est["estimate"] > 1e-3


def test_constant_estimate_zero_with_counterexample_direction():
    space = piecewise_rm_space(SQ)
    full = korn_constant_estimate(space, include_phi=True, jump_control=CONDITIONS[2])
    assert full["estimate"] > 1e-3
    weak = korn_constant_estimate(space, include_phi=True, jump_control=CONDITIONS[2][1:])
    assert abs(weak["estimate"]) < 1e-10


# properties ----------------------------------------------------------------------------

@given(st.integers(0, 10 ** 6))
def test_rm_projection_idempotent_and_moment_exact(seed):
    rng = random.Random(seed)
    d = rng.choice([2, 3])
    T = random_simplex(rng, d)
    v = random_vecpoly(rng, d, d, 3, density=0.5)
    m = local_rm_projection(v, T)
    r = v - m.as_vecpoly()
    assert all(integrate_cell(c, T) == 0 for c in r.comps)
    c = curl(r)
    comps = [c] if isinstance(c, Poly) else c.comps
    assert all(integrate_cell(p, T) == 0 for p in comps)
    assert local_rm_projection(m.as_vecpoly(), T) == m


@given(st.integers(0, 10 ** 6))
def test_vertex_average_fixes_continuous_fields(seed):
    rng = random.Random(seed)
    mesh = make_square_grid(2)
    # a random continuous P1 field: nodal values interpolated on each cell
    nodal = {}
    for c in mesh.cells:
        for p in c.vertices:
            nodal.setdefault(p, tuple(Q(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(2)))
    from korngate.polyalg import barycentric
    fields = []
    for c in mesh.cells:
        lam = barycentric(c)
        fields.append(VecPoly([sum((lam[i] * nodal[p][k] for i, p in enumerate(c.vertices)), Poly(2))
                               for k in range(2)]))
    u = PwField(mesh, fields)
    assert vertex_average_E(u).fields == u.fields


@given(st.integers(0, 10 ** 6))
def test_face_projections_idempotent_and_orthogonal(seed):
    rng = random.Random(seed)
    d = rng.choice([2, 3])
    T = random_simplex(rng, d)
    from korngate.geometry import faces_of
    f = faces_of(T)[rng.randrange(d + 1)]
    for weights, part in ((normal_weights(f), random_poly(rng, d - 1, 3)),
                          (tangential_weights(f), random_poly(rng, 1, 3) if d == 2 else
                           random_vecpoly(rng, 2, 3, 2))):
        proj, _, _ = l2_project(part, weights, f)
        again, _, _ = l2_project(proj, weights, f)
        assert again == proj
        res = part - proj
        for w in weights:
            integrand = res * w if isinstance(res, Poly) else res.dot(w)
            assert integrate_face(integrand, f) == 0
