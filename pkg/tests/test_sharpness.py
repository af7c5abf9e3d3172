import pytest
from hypothesis import given, strategies as st

from korngate.korn import PwField
from korngate.rational import Q
from korngate.sharpness import (CASES, ConditionSet, all_cases, boundary_moment_table, build_counterexample,
                                canonical_mesh, case_name, generic_violation_possible, jump_table, run_case,
                                verify_sharpness)
from korngate.spaces import RigidMotion


@pytest.mark.parametrize("name", all_cases())
def test_case_verifies(name):
    rep = run_case(name)
    assert rep.passed, rep.checks
    assert all(rep.residuals[n] == 0 for n in CASES[name][0].retained)
    assert rep.residuals[rep.violated] != 0
    assert rep.strain_norm_sq == 0
    assert all(b == 0 for b in rep.phi_moments)
    assert rep.h1_seminorm_sq > 0


def test_nine_cases():
    assert all_cases() == ["E1", "E2", "E3", "F1", "F2", "F3", "F4", "F5", "F6"]


def test_e2_recipe():
    ce = build_counterexample("E2")
    c = ce.coefficients
    assert (c["c1"], c["c2"]) == (Q(1, 2), Q(-1, 2))
    assert c["a2"] - c["a1"] == (c["c2"] - c["c1"]) / 2
    assert c["b2"] == c["b1"]
    rep = verify_sharpness(ce, "E2")
    assert rep.residuals["pi10_normal"] == -(c["c2"] - c["c1"]) / 12


def test_f1_recipe():
    c = build_counterexample("F1").coefficients
    assert (c["d1"], c["d2"], c["f1"], c["f2"], c["e1"], c["e2"]) == (Q(-1, 2), Q(1, 2), Q(1, 2), Q(-1, 2), 0, 0)
    assert c["b2"] - c["b1"] == -Q(7, 6) * (c["f2"] - c["f1"])


def test_f6_recipe():
    c = build_counterexample("F6").coefficients
    bar = {k: c[k + "2"] - c[k + "1"] for k in "abcdef"}
    assert bar["c"] == bar["e"] / 2 == -bar["a"] != 0
    assert bar["b"] == bar["d"] == bar["f"] == 0
    assert c["e1"] + c["e2"] == 0


@pytest.mark.parametrize("name", ["E3", "F3", "F4", "F5"])
def test_printed_recipes_that_do_not_verify(name):
    rep = run_case(name)
    assert not rep.printed_recipe["passes"]
    assert rep.notes


@pytest.mark.parametrize("name", ["E1", "E2", "F1", "F2", "F6"])
def test_printed_recipes_that_verify(name):
    assert run_case(name).printed_recipe["passes"]


def test_continuous_rigid_motion_is_rejected():
    m = RigidMotion.from_coefficients([1, 2, 3]).as_vecpoly()
    u = PwField(canonical_mesh(2), [m, m])
    rep = verify_sharpness(u, "E1")
    assert not rep.passed
    assert rep.residuals["pi0_normal"] == 0


@pytest.mark.parametrize("name", all_cases())
def test_generic_violation(name):
    assert generic_violation_possible(CASES[name][0])


@given(st.sampled_from(all_cases()), st.integers(-9, 9).filter(bool), st.integers(1, 7))
def test_scaling_preserves_verdicts(name, p, q):
    ce = build_counterexample(name)
    rep = verify_sharpness(ce.field * Q(p, q), name)
    assert rep.checks == verify_sharpness(ce, name).checks


@pytest.mark.parametrize("d", [2, 3])
def test_printed_jump_tables_agree(d):
    assert all(row["agrees"] for row in jump_table(d))


def test_boundary_moment_2d():
    (row,) = boundary_moment_table("2d")
    assert row["agrees"] and row["in_boundary_rm_span"]
    assert row["computed"] == {"b1": "-4", "b2": "4", "c1": "9/2", "c2": "9/2"}


def test_boundary_moment_3d():
    rows = boundary_moment_table("3d")
    assert all(r["in_boundary_rm_span"] for r in rows)
    assert rows[1]["agrees"] and rows[2]["agrees"]
    assert rows[1]["computed"]["a2"] == "6" and rows[1]["computed"]["e2"] == "3"
    assert rows[1]["computed"]["d1"] == "37/6"
    # first line printed as (9/3)(e1 + e2); recomputed independently
    assert rows[0]["computed"] == {"e1": "3", "e2": "3"}
    assert rows[0]["printed"] == "(9/3)(e1 + e2)"


def test_case_names():
    assert case_name("2d", 1) == "E1"
    assert case_name("3D", 6) == "F6"
    with pytest.raises(ValueError):
        case_name("2d", 4)
    with pytest.raises(ValueError):
        ConditionSet("X", 2, "A1")
