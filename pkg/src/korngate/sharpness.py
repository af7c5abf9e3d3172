"""Counterexamples showing that no single minimal interface condition can be
dropped, on the two-square and two-cube domains.

Fields are piecewise rigid motions ``u_i = a_i + A_i x``. Coefficients are
named per cell (``a1``, ``c2``, ...) and "bar" values are differences
``k2 - k1``. Jumps here are taken as ``u_2 - u_1`` with the normal pointing
out of the first cell.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import linalg
from .geometry import Face, Mesh, make_two_cube_domain, make_two_square_domain
from .korn import (JumpCondition, PwField, h1_seminorm_sq, jump_on_face, phi_basis, phi_moments,
                   strain_norm_sq, _boundary_pair)
from .polyalg import Poly, VecPoly, chart_coordinates
from .rational import ZERO, Q, q_str
from .spaces import RigidMotion, basis_RM_boundary

NAMES = {2: ("a", "b", "c"), 3: ("a", "b", "c", "d", "e", "f")}


def canonical_mesh(d: int) -> Mesh:
    return make_two_square_domain() if d == 2 else make_two_cube_domain()


def interface(mesh: Mesh) -> Face:
    return mesh.faces[mesh.interior_faces[0]]


def _const(vals):
    return lambda f: VecPoly.const(f.chart_dim, vals)


def _normal_w(k):
    return lambda f: ([Poly.const(f.chart_dim, 1)] + chart_coordinates(f))[k]


def _radial_xz(f: Face):
    s1, s2 = chart_coordinates(f)
    return VecPoly([s1, Poly(2), s2])


CONDITIONS = {
    2: [
        JumpCondition("pi0_normal", "normal", _normal_w(0)),
        JumpCondition("pi10_normal", "normal", _normal_w(1)),
        JumpCondition("pi0_tangential", "tangential", lambda f: Poly.const(1, 1)),
    ],
    3: [
        JumpCondition("A1", "normal", _normal_w(0)),
        JumpCondition("A2", "normal", _normal_w(1)),
        JumpCondition("A3", "normal", _normal_w(2)),
        JumpCondition("A4", "tangential", _const((0, 0, 1))),
        JumpCondition("A5", "tangential", _const((1, 0, 0))),
        JumpCondition("A6", "tangential", _radial_xz),
    ],
}


@dataclass(frozen=True)
class ConditionSet:
    name: str
    dimension: int
    violated: str

    @property
    def conditions(self) -> list[JumpCondition]:
        return CONDITIONS[self.dimension]

    @property
    def retained(self) -> list[str]:
        return [c.name for c in self.conditions if c.name != self.violated]

    def __post_init__(self):
        names = [c.name for c in CONDITIONS[self.dimension]]
        if self.violated not in names:
            raise ValueError(f"{self.violated!r} is not a condition in {self.dimension}D")


@dataclass(frozen=True)
class Recipe:
    """Prescribed bar values; unlisted bars are zero.

    ``sums`` says how the per-cell sums of the rotation coefficients are
    fixed: ``"solve"`` (least-norm solution of the boundary-moment equations)
    or ``"zero"``. Translation sums are always zero.
    """

    bars: dict
    sums: str = "solve"


_H = Q(1, 2)

CASES: dict[str, tuple[ConditionSet, Recipe, Recipe, str]] = {}


def _case(name, d, violated, recipe, printed, note=""):
    CASES[name] = (ConditionSet(name, d, violated), Recipe(recipe), Recipe(*printed), note)


_case("E1", 2, "pi0_normal", {"a": Q(-2, 3), "c": -1}, ({"a": Q(-2, 3), "c": -1}, "zero"))
_case("E2", 2, "pi10_normal", {"a": -_H, "c": -1}, ({"a": -_H, "c": -1}, "zero"))
_case("E3", 2, "pi0_tangential", {"b": 1}, ({"b": 1, "c": -1}, "zero"),
      "printed choice c1 = -c2 = c/2 gives a nonzero rotation jump, contradicting the zero "
      "rotation jump it also requires; the rotation sum is solved from the boundary moment instead")
_case("F1", 3, "A1", {"d": 1, "f": -1, "b": Q(7, 6)}, ({"d": 1, "f": -1, "b": Q(7, 6)}, "zero"))
_case("F2", 3, "A2", {"d": 1, "b": _H}, ({"d": 1, "b": _H}, "zero"))
_case("F3", 3, "A3", {"f": 1, "b": -_H}, ({"f": 1, "b": _H}, "zero"),
      "printed normal jump b = f/2 breaks A1; b = -f/2 keeps A1 and A2")
_case("F4", 3, "A4", {"e": 1, "c": _H, "a": Q(-5, 6)}, ({"e": 1, "c": _H, "a": Q(-1, 6)}, "solve"),
      "printed a = -e/6 breaks A6; a = -5e/6 keeps A5 and A6. Printed d = 0 alongside "
      "b = d = f = 0 read as all normal-jump bars zero")
_case("F5", 3, "A5", {"e": 1, "a": -_H, "c": Q(5, 6)}, ({"e": 1, "a": -_H, "c": Q(1, 6)}, "solve"),
      "printed c = e/6 breaks A6; c = 5e/6 keeps A4 and A6. Normal-jump bars all zero")
_case("F6", 3, "A6", {"e": 1, "c": _H, "a": -_H}, ({"e": 1, "c": _H, "a": -_H}, "solve"),
      "normal-jump bars all zero")


def condition_set(name: str) -> ConditionSet:
    return CASES[name][0]


def case_name(domain: str, k: int) -> str:
    domain = domain.lower()
    if domain == "2d" and 1 <= k <= 3:
        return f"E{k}"
    if domain == "3d" and 1 <= k <= 6:
        return f"F{k}"
    raise ValueError(f"no counterexample {k} for domain {domain}")


# linear forms over the 2 x (3 or 6) cell coefficients -------------------------------

def coefficient_names(d: int) -> list[str]:
    return [f"{n}{i}" for i in (1, 2) for n in NAMES[d]]


def field_from_coefficients(mesh: Mesh, coeffs: Sequence) -> PwField:
    k = len(NAMES[mesh.dim])
    return PwField(mesh, [RigidMotion.from_coefficients(coeffs[:k]).as_vecpoly(),
                          RigidMotion.from_coefficients(coeffs[k:]).as_vecpoly()])


def linear_form(mesh: Mesh, fn: Callable[[PwField], object]) -> list:
    """Coefficient vector of a linear functional of piecewise rigid motions."""
    n = 2 * len(NAMES[mesh.dim])
    out = []
    for j in range(n):
        e = [ZERO] * n
        e[j] = Q(1)
        out.append(fn(field_from_coefficients(mesh, e)))
    return out


def condition_value(u: PwField, cond: JumpCondition):
    f = interface(u.mesh)
    return cond.moment(jump_on_face(u, f, reverse=True), f)


def phi_matrix(mesh: Mesh) -> list[list]:
    ms = phi_basis(mesh)
    return [linear_form(mesh, lambda u, m=m: _boundary_pair(mesh, u, m)) for m in ms]


@dataclass
class CounterexampleField:
    case: str
    field: PwField
    coefficients: dict
    bars: dict
    sums: dict


def _assemble(mesh: Mesh, recipe: Recipe) -> tuple[list, dict]:
    d = mesh.dim
    names = NAMES[d]
    k = len(names)
    bars = [Q(recipe.bars.get(n, 0)) for n in names]
    rot = list(range(d, k))
    sums = [ZERO] * k
    if recipe.sums == "solve":
        P = phi_matrix(mesh)
        # phi(u) = P1 (S - bar)/2 + P2 (S + bar)/2
        A = [[(row[j] + row[k + j]) / 2 for j in rot] for row in P]
        rhs = [-sum(((row[k + j] - row[j]) / 2 * bars[j] for j in range(k)), ZERO) for row in P]
        sol = linalg.min_norm_solution(A, rhs)
        for j, s in zip(rot, sol):
            sums[j] = s
    coeffs = [(sums[j] - bars[j]) / 2 for j in range(k)] + [(sums[j] + bars[j]) / 2 for j in range(k)]
    return coeffs, {n: sums[j] for j, n in enumerate(names)}


def build_counterexample(cs: ConditionSet | str, recipe: Recipe | None = None) -> CounterexampleField:
    """Piecewise rigid motion following the case recipe (scale fixed to 1)."""
    if isinstance(cs, str):
        cs = condition_set(cs)
    recipe = recipe or CASES[cs.name][1]
    mesh = canonical_mesh(cs.dimension)
    coeffs, sums = _assemble(mesh, recipe)
    u = field_from_coefficients(mesh, coeffs)
    names = coefficient_names(cs.dimension)
    bars = {n: Q(recipe.bars.get(n, 0)) for n in NAMES[cs.dimension]}
    return CounterexampleField(cs.name, u, dict(zip(names, coeffs)), bars, sums)


@dataclass
class SharpnessReport:
    case: str
    dimension: int
    violated: str
    coefficients: dict
    residuals: dict
    strain_norm_sq: object
    h1_seminorm_sq: object
    phi_moments: list
    checks: dict
    passed: bool
    generic_check: bool = True
    printed_recipe: dict = field(default_factory=dict)
    notes: str = ""


def verify_sharpness(u: CounterexampleField | PwField, cs: ConditionSet | str) -> SharpnessReport:
    if isinstance(cs, str):
        cs = condition_set(cs)
    fld = u.field if isinstance(u, CounterexampleField) else u
    coeffs = u.coefficients if isinstance(u, CounterexampleField) else {}
    residuals = {c.name: condition_value(fld, c) for c in cs.conditions}
    strain = strain_norm_sq(fld)
    h1 = h1_seminorm_sq(fld)
    phi = phi_moments(fld)
    checks = {
        "retained_zero": all(residuals[n] == 0 for n in cs.retained),
        "violated_nonzero": residuals[cs.violated] != 0,
        "strain_zero": strain == 0,
        "phi_zero": all(b == 0 for b in phi),
        "h1_positive": h1 > 0,
    }
    return SharpnessReport(cs.name, cs.dimension, cs.violated, coeffs, residuals, strain, h1, phi,
                           checks, all(checks.values()))


def generic_violation_possible(cs: ConditionSet) -> bool:
    """Independent check: the violated moment is not implied by the retained ones and Φ = 0."""
    mesh = canonical_mesh(cs.dimension)
    rows = {c.name: linear_form(mesh, lambda u, c=c: condition_value(u, c)) for c in cs.conditions}
    base = [rows[n] for n in cs.retained] + phi_matrix(mesh)
    return not linalg.in_span(base, rows[cs.violated])


def run_case(name: str) -> SharpnessReport:
    cs, recipe, printed, note = CASES[name]
    ce = build_counterexample(cs, recipe)
    rep = verify_sharpness(ce, cs)
    rep.generic_check = generic_violation_possible(cs)
    rep.passed = rep.passed and rep.generic_check
    rep.notes = note
    pr = verify_sharpness(build_counterexample(cs, printed), cs)
    rep.printed_recipe = {
        "bars": {k: q_str(v) for k, v in printed.bars.items()},
        "rotation_sums": printed.sums,
        "passes": pr.passed,
        "failed_checks": sorted(k for k, v in pr.checks.items() if not v),
        "residuals": {k: q_str(v) for k, v in pr.residuals.items()},
    }
    return rep


def all_cases() -> list[str]:
    return list(CASES)


# printed closed forms ------------------------------------------------------------------

def _expand_bars(d: int, form: dict) -> dict:
    out = {}
    for n, v in form.items():
        out[f"{n}2"] = Q(v)
        out[f"{n}1"] = -Q(v)
    return out


PRINTED_JUMP_TABLE = {
    2: {"pi0_normal": {"a": 1, "c": Q(-1, 2)},
        "pi10_normal": {"a": Q(1, 2), "c": Q(-1, 3)},
        "pi0_tangential": {"b": 1}},
    3: {"A1": {"b": 1, "d": Q(-1, 2), "f": Q(1, 2)},
        "A2": {"b": Q(1, 2), "d": Q(-1, 3), "f": Q(1, 4)},
        "A3": {"b": Q(1, 2), "d": Q(-1, 4), "f": Q(1, 3)},
        "A4": {"a": 1, "e": Q(1, 2)},
        "A5": {"c": -1, "e": Q(1, 2)},
        "A6": {"c": Q(-1, 2), "e": Q(2, 3), "a": Q(1, 2)}},
}


def _vec(d: int, named: dict) -> list:
    return [Q(named.get(n, 0)) for n in coefficient_names(d)]


def jump_table(d: int) -> list[dict]:
    """Recomputed interface moments as linear forms, diffed against the printed table."""
    mesh = canonical_mesh(d)
    out = []
    for c in CONDITIONS[d]:
        got = linear_form(mesh, lambda u, c=c: condition_value(u, c))
        want = _vec(d, _expand_bars(d, PRINTED_JUMP_TABLE[d][c.name]))
        out.append(_row(c.name, d, got, want, {k: q_str(v) for k, v in PRINTED_JUMP_TABLE[d][c.name].items()}))
    return out


def _row(name, d, got, want, printed) -> dict:
    names = coefficient_names(d)
    return {"name": name,
            "computed": {n: q_str(v) for n, v in zip(names, got) if v != 0},
            "printed": printed,
            "agrees": list(got) == list(want)}


def listed_boundary_fields(d: int) -> list[VecPoly]:
    if d == 2:
        x, y = Poly.var(0, 2), Poly.var(1, 2)
        return [VecPoly([1 - 2 * y, 2 * x])]
    x, y, z = (Poly.var(i, 3) for i in range(3))
    o = Poly(3)
    return [VecPoly([2 * z - 1, o, 1 - 2 * x]), VecPoly([2 * y, 1 - 2 * x, o]), VecPoly([y, z - x, -y])]


# printed boundary-moment lines as per-cell coefficients; the first 3D line is printed as (9/3)(e1 + e2)
PRINTED_BOUNDARY = {
    2: [{"b1": -4, "b2": 4, "c1": Q(9, 2), "c2": Q(9, 2)}],
    3: [{"e1": Q(9, 3), "e2": Q(9, 3)},
        {"a1": -6, "a2": 6, "e1": -3, "e2": 3, "d1": Q(37, 6), "d2": Q(37, 6)},
        {"a1": -3, "a2": 3, "c1": 3, "c2": -3, "e1": -3, "e2": 3,
         "d1": Q(37, 12), "d2": Q(37, 12), "f1": Q(37, 12), "f2": Q(37, 12)}],
}

PRINTED_BOUNDARY_TEXT = {
    2: ["4(b2 - b1) + (9/2)(c1 + c2)"],
    3: ["(9/3)(e1 + e2)", "6(a2 - a1) + 3(e2 - e1) + (37/6)(d1 + d2)",
        "3(a2 - a1) - 3(c2 - c1) + 3(e2 - e1) + (37/12)(d1 + d2 + f1 + f2)"],
}


def boundary_moment_table(domain: str | int) -> list[dict]:
    """``∫_{∂Ω} u·m_i`` as linear forms in the cell coefficients, against the printed lines."""
    d = domain if isinstance(domain, int) else int(str(domain)[0])
    mesh = canonical_mesh(d)
    span = basis_RM_boundary(mesh)
    out = []
    for i, m in enumerate(listed_boundary_fields(d)):
        got = linear_form(mesh, lambda u, m=m: _boundary_pair(mesh, u, m))
        want = _vec(d, PRINTED_BOUNDARY[d][i])
        row = _row(f"m{i + 1}", d, got, want, PRINTED_BOUNDARY_TEXT[d][i])
        row["field"] = m.to_text()
        row["in_boundary_rm_span"] = span.contains(m)
        out.append(row)
    return out
