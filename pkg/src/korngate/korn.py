"""Jumps, the boundary seminorm, local projections, and the two exact Korn
decision procedures (DOF coverage and kernel test), plus a floating-point
Korn-constant estimate.

Sign convention: the plus cell of an interior face is the one with the smaller
id and ``normal_raw`` points out of it; the jump is plus minus minus unless
``reverse=True`` is requested.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import linalg
from .dofs import DofFunctional, DofSpec, dof_matrix, eval_dof, face_weights
from .geometry import Cell, Face, GeometryError, Mesh, dot, make_two_cell_configuration
from .polyalg import (
    Poly, VecPoly, barycentric, chart_coordinates, coefficient_rows, curl, integrate_cell,
    integrate_face, jacobian_matrix, linear_combination, monomials, restrict_to_face, strain,
)
from .rational import ZERO, Q, q_str
from .spaces import (RigidMotion, SpaceBasis, basis_P1_vector, basis_RM, basis_RM_boundary,
                     basis_RM_cell, basis_RT0_face)


# piecewise fields ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PwField:
    mesh: Mesh
    fields: tuple

    def __post_init__(self):
        if len(self.fields) != len(self.mesh.cells):
            raise ValueError("one polynomial field per cell is required")
        object.__setattr__(self, "fields", tuple(self.fields))

    def on(self, cell_id: int) -> VecPoly:
        return self.fields[cell_id]

    def __add__(self, other: "PwField") -> "PwField":
        return PwField(self.mesh, [a + b for a, b in zip(self.fields, other.fields)])

    def __mul__(self, c) -> "PwField":
        return PwField(self.mesh, [a * Q(c) for a in self.fields])

    __rmul__ = __mul__

    def to_text(self) -> list[str]:
        return [v.to_text() for v in self.fields]

    @classmethod
    def from_rigid(cls, mesh: Mesh, motions: Sequence[RigidMotion]) -> "PwField":
        return cls(mesh, [m.as_vecpoly() for m in motions])


class PwSpace:
    """Broken space: an independent local basis on every cell."""

    def __init__(self, mesh: Mesh, bases: Sequence[SpaceBasis], name: str = ""):
        self.mesh = mesh
        self.bases = [b.independent() for b in bases]
        self.name = name
        self.offsets = [0]
        for b in self.bases:
            self.offsets.append(self.offsets[-1] + len(b))

    @classmethod
    def from_builder(cls, mesh: Mesh, builder: Callable[[Cell], SpaceBasis], name: str = "") -> "PwSpace":
        return cls(mesh, [builder(T) for T in mesh.cells], name)

    @property
    def ndofs(self) -> int:
        return self.offsets[-1]

    def local(self, coeffs: Sequence, cell_id: int):
        return coeffs[self.offsets[cell_id]:self.offsets[cell_id + 1]]

    def field(self, coeffs: Sequence) -> PwField:
        return PwField(self.mesh, [linear_combination(self.local(coeffs, i), b.generators)
                                   for i, b in enumerate(self.bases)])


def piecewise_rm_space(mesh: Mesh) -> PwSpace:
    return PwSpace.from_builder(mesh, basis_RM_cell, "piecewise RM")


def piecewise_p1_space(mesh: Mesh) -> PwSpace:
    return PwSpace.from_builder(mesh, basis_P1_vector, "piecewise P1")


# jumps --------------------------------------------------------------------------

@dataclass(frozen=True)
class JumpTrace:
    face: int
    jump: VecPoly
    normal_part: Poly
    tangential_part: object  # Poly in 2D, VecPoly (jump × n) in 3D


def _parts(f: Face, jump: VecPoly):
    normal = jump.dot(f.normal_raw)
    tang = jump.dot(f.tangents_raw[0]) if f.dim == 2 else jump.cross(f.normal_raw)
    return normal, tang


def face_trace_jump(f: Face, plus: VecPoly, minus: VecPoly | None, reverse: bool = False) -> VecPoly:
    tp = restrict_to_face(plus, f)
    if minus is None:
        return tp
    tm = restrict_to_face(minus, f)
    return tm - tp if reverse else tp - tm


def jump_on_face(u: PwField, f: Face, reverse: bool = False) -> JumpTrace:
    """Jump of ``u`` across ``f`` in chart variables (the trace on boundary faces)."""
    minus = None if f.is_boundary else u.on(f.minus_cell)
    j = face_trace_jump(f, u.on(f.plus_cell), minus, reverse)
    n, t = _parts(f, j)
    return JumpTrace(f.id, j, n, t)


@dataclass(frozen=True)
class JumpCondition:
    """``∫_f part(⟦u⟧) · w`` with ``part`` either ``normal`` or ``tangential``."""

    name: str
    part: str
    weight: Callable[[Face], object]

    def weight_on(self, f: Face):
        return self.weight(f)

    def functional(self, f: Face) -> DofFunctional:
        w = self.weight(f)
        if self.part == "normal":
            sel = "normal"
        elif f.dim == 2:
            sel = "tangential2d"
        else:
            sel = "cross_normal3d"
        return DofFunctional(sel, w, face=f, label=self.name)

    def moment(self, jt: JumpTrace, f: Face):
        part = jt.normal_part if self.part == "normal" else jt.tangential_part
        w = self.weight(f)
        integrand = part * w if isinstance(part, Poly) else part.dot(w)
        return integrate_face(integrand, f)


def _chart_weight(k: int):
    def w(f: Face):
        return ([Poly.const(f.chart_dim, 1)] + chart_coordinates(f))[k]
    return w


def _rt0_weight(k: int):
    return lambda f: basis_RT0_face(f).generators[k]


def _tangent_const(f: Face):
    return Poly.const(1, 1)


def minimal_conditions(d: int) -> list[JumpCondition]:
    """The minimal interface set: normal against P1(f), tangential against P0 (2D) or RT0(f) (3D)."""
    conds = [JumpCondition(f"normal_P1[{k}]", "normal", _chart_weight(k)) for k in range(d)]
    if d == 2:
        conds.append(JumpCondition("tangential_P0", "tangential", _tangent_const))
    else:
        conds += [JumpCondition(f"tangential_RT0[{k}]", "tangential", _rt0_weight(k)) for k in range(3)]
    return conds


def _gram_chart(weights: Sequence, f: Face) -> list[list]:
    n = len(weights)
    G = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            a, b = weights[i], weights[j]
            p = a * b if isinstance(a, Poly) else a.dot(b)
            G[i][j] = G[j][i] = integrate_face(p, f)
    return G


def l2_project(part, weights: Sequence, f: Face):
    """Exact chart-L2 projection of ``part`` onto ``span(weights)``; returns (projection, coeffs, moments)."""
    G = _gram_chart(weights, f)
    b = [integrate_face(part * w if isinstance(part, Poly) else part.dot(w), f) for w in weights]
    idx = linalg.independent_subset(G)
    Gk = [[G[i][j] for j in idx] for i in idx]
    ck = linalg.solve(Gk, [b[i] for i in idx]) if idx else []
    coeffs = [ZERO] * len(weights)
    for i, c in zip(idx, ck):
        coeffs[i] = c
    proj = linear_combination(coeffs, list(weights))
    return proj, coeffs, b


def normal_weights(f: Face) -> list:
    return [Poly.const(f.chart_dim, 1)] + chart_coordinates(f)


def tangential_weights(f: Face) -> list:
    return [Poly.const(1, 1)] if f.dim == 2 else list(basis_RT0_face(f).generators)


def project_jump(f: Face, jt: JumpTrace) -> dict:
    """L2(chart) projections of the jump parts.

    ``pi1_normal`` and ``rm_tangential`` are the projections entering the Korn
    right-hand side; ``pi0_normal`` is the normal mean and ``pi10_normal`` the
    normalised first moments ``(1/|f|)∫ (⟦u⟧·n) s_k``.
    """
    pi1, _, _ = l2_project(jt.normal_part, normal_weights(f), f)
    rm, _, _ = l2_project(jt.tangential_part, tangential_weights(f), f)
    meas = f.chart_measure()
    pi0 = integrate_face(jt.normal_part, f) / meas
    pi10 = [integrate_face(jt.normal_part * s, f) / meas for s in chart_coordinates(f)]
    return {"pi1_normal": pi1, "rm_tangential": rm, "pi0_normal": pi0, "pi10_normal": pi10}


def _norm_sq(p, f: Face):
    return integrate_face(p * p if isinstance(p, Poly) else p.dot(p), f)


def jump_deficiency(u: PwField, faces: Sequence[int] | None = None) -> tuple:
    """``Σ_f ‖π1(⟦u⟧·n)‖² + ‖π_RM(tangential part)‖²`` over interior faces (chart measure).

    Returns ``(total, {face_id: (normal_term, tangential_term)})``.
    """
    mesh = u.mesh
    faces = mesh.interior_faces if faces is None else faces
    total = ZERO
    per = {}
    for fid in faces:
        f = mesh.faces[fid]
        jt = jump_on_face(u, f)
        pr = project_jump(f, jt)
        a = _norm_sq(pr["pi1_normal"], f)
        b = _norm_sq(pr["rm_tangential"], f)
        per[fid] = (a, b)
        total += a + b
    return total, per


# boundary seminorm -----------------------------------------------------------------

def phi_basis(mesh: Mesh) -> list[VecPoly]:
    key = "_phi_basis"
    cached = mesh.__dict__.get(key)
    if cached is None:
        cached = basis_RM_boundary(mesh).generators
        object.__setattr__(mesh, key, cached)
    return cached


def _boundary_pair(mesh: Mesh, u: PwField | None, m: VecPoly, field_of=None):
    total = ZERO
    for fid in mesh.boundary_faces:
        f = mesh.faces[fid]
        metric = f.metric_factor_exact()
        if metric is None:
            raise GeometryError(f"boundary face {fid} has an irrational metric factor")
        v = field_of(f.plus_cell) if field_of else u.on(f.plus_cell)
        integrand = restrict_to_face(v, f).dot(restrict_to_face(m, f))
        total += integrate_face(integrand, f) * metric
    return total


def phi_moments(u: PwField) -> list:
    """``∫_{∂Ω} u·m_i`` (true measure) for a basis of zero-mean boundary rigid motions."""
    return [_boundary_pair(u.mesh, u, m) for m in phi_basis(u.mesh)]


def phi_gram(mesh: Mesh) -> list[list]:
    ms = phi_basis(mesh)
    return [[_boundary_pair(mesh, None, b, field_of=lambda _c, a=a: a) for b in ms] for a in ms]


def phi_is_zero(u: PwField) -> bool:
    return all(b == 0 for b in phi_moments(u))


def phi_seminorm(u: PwField) -> float:
    """``sup`` of ``∫_{∂Ω} u·m`` over unit-norm zero-mean boundary rigid motions."""
    b = phi_moments(u)
    if not b:
        return 0.0
    G = phi_gram(u.mesh)
    y = linalg.solve(G, b)
    return math.sqrt(float(sum((bi * yi for bi, yi in zip(b, y)), ZERO)))


# local operators -------------------------------------------------------------------

def _curl_mean(v: VecPoly, T: Cell) -> list:
    c = curl(v)
    if isinstance(c, Poly):
        return [integrate_cell(c, T)]
    return [integrate_cell(p, T) for p in c.comps]


def local_rm_projection(v: VecPoly, T: Cell) -> RigidMotion:
    """Rigid motion with the same cell mean and the same mean curl as ``v``."""
    gens = basis_RM(T.dim).generators

    def moments(w):
        return [integrate_cell(c, T) for c in w.comps] + _curl_mean(w, T)

    A = linalg.transpose([moments(g) for g in gens])
    x = linalg.solve(A, moments(v))
    return RigidMotion.from_coefficients(x)


def vertex_average_E(u: PwField) -> PwField:
    """Continuous piecewise-linear field whose nodal values are patch averages."""
    mesh = u.mesh
    if any(c.kind != "simplex" for c in mesh.cells):
        raise GeometryError("vertex averaging needs a simplicial mesh")
    for v in u.fields:
        if v.degree() > 1:
            raise ValueError("vertex averaging expects piecewise linear input")
    sums: dict = {}
    for c in mesh.cells:
        val = u.on(c.id)
        for p in c.vertices:
            vals = val.evaluate(p)
            acc = sums.setdefault(p, [[ZERO] * len(vals), 0])
            acc[0] = [a + b for a, b in zip(acc[0], vals)]
            acc[1] += 1
    out = []
    for c in mesh.cells:
        lam = barycentric(c)
        comps = []
        for k in range(c.dim):
            p = Poly(c.dim)
            for i, vert in enumerate(c.vertices):
                total, count = sums[vert]
                p = p + lam[i] * (total[k] / count)
            comps.append(p)
        out.append(VecPoly(comps))
    return PwField(mesh, out)


def patch_sizes(mesh: Mesh) -> dict:
    counts: dict = {}
    for c in mesh.cells:
        for p in c.corners():
            counts[p] = counts.get(p, 0) + 1
    return counts


def h1_seminorm_sq(u: PwField):
    total = ZERO
    for c in u.mesh.cells:
        J = jacobian_matrix(u.on(c.id))
        total += integrate_cell(sum((p * p for row in J for p in row), Poly(c.dim)), c)
    return total


def strain_norm_sq(u: PwField):
    total = ZERO
    for c in u.mesh.cells:
        D = strain(u.on(c.id))
        total += integrate_cell(sum((p * p for row in D for p in row), Poly(c.dim)), c)
    return total


# reports ---------------------------------------------------------------------------

@dataclass
class KornReport:
    element: str
    test: str
    verdict: str  # "holds" | "fails"
    kernel_dim: int
    expected_kernel_dim: int
    witness: PwField | None = None
    residuals: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)
    witness_h1_sq: object = None

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


# kernel test --------------------------------------------------------------------

def _strain_kernel(basis: SpaceBasis, T: Cell) -> list[VecPoly]:
    """Members of ``basis`` with zero strain (the local rigid motions it contains)."""
    gens = basis.generators
    d = T.dim
    fields = [VecPoly([D[i][j] for i in range(d) for j in range(i, d)]) for D in map(strain, gens)]
    rows, index = coefficient_rows(fields)
    A = linalg.transpose(rows) if index else []
    return [linear_combination(c, gens) for c in linalg.nullspace(A, len(gens))]


class _Reduced:
    """Piecewise space restricted to its per-cell strain kernel."""

    def __init__(self, space: PwSpace, restrict_strain: bool = True):
        self.mesh = space.mesh
        self.local = []
        for T, b in zip(space.mesh.cells, space.bases):
            gens = _strain_kernel(b, T) if restrict_strain else list(b.generators)
            self.local.append(gens)
        self.offsets = [0]
        for g in self.local:
            self.offsets.append(self.offsets[-1] + len(g))

    @property
    def n(self) -> int:
        return self.offsets[-1]

    def field(self, z) -> PwField:
        return PwField(self.mesh, [linear_combination(z[self.offsets[i]:self.offsets[i + 1]], g)
                                   if g else VecPoly.zero(self.mesh.dim, self.mesh.dim)
                                   for i, g in enumerate(self.local)])

    def face_rows(self, f: Face, per_gen: Callable[[VecPoly], list], sign_minus: int = -1) -> list[list]:
        """Rows of ``L(v+) - L(v-)`` for a vector-valued linear map ``L``."""
        nrows = None
        blocks = {}
        for cid, sgn in ((f.plus_cell, 1), (f.minus_cell, sign_minus)):
            if cid is None:
                continue
            vals = [per_gen(g) for g in self.local[cid]]
            blocks[cid] = (sgn, vals)
            if vals:
                nrows = len(vals[0])
        if nrows is None:
            return []
        rows = [[ZERO] * self.n for _ in range(nrows)]
        for cid, (sgn, vals) in blocks.items():
            off = self.offsets[cid]
            for j, col in enumerate(vals):
                for r in range(nrows):
                    rows[r][off + j] += sgn * col[r]
        return rows

    def cell_rows(self, cid: int, per_gen: Callable[[VecPoly], list]) -> list[list]:
        vals = [per_gen(g) for g in self.local[cid]]
        if not vals:
            return []
        rows = [[ZERO] * self.n for _ in range(len(vals[0]))]
        off = self.offsets[cid]
        for j, col in enumerate(vals):
            for r in range(len(col)):
                rows[r][off + j] = col[r]
        return rows


def _trace_coeff_rows(f: Face):
    """Coefficient map of the full trace on ``f`` (fixed monomial index up to degree 6)."""
    index = [(k, e) for k in range(f.dim) for e in monomials(f.chart_dim, 6)]

    def per_gen(g: VecPoly):
        tr = restrict_to_face(g, f)
        if tr.degree() > 6:
            raise ValueError("trace continuity is only set up for traces of degree <= 6")
        return [tr[k].coeff(e) for k, e in index]
    return per_gen


def _condition_rows(red: _Reduced, f: Face, conds: Sequence[JumpCondition]):
    funcs = [c.functional(f) for c in conds]
    return red.face_rows(f, lambda g: [eval_dof(phi, g) for phi in funcs])


def _dof_rows(red: _Reduced, f: Face, specs: Sequence[DofSpec]):
    face_specs = [s for s in specs if s.domain != "cell"]
    funcs = []
    for s in face_specs:
        for w in face_weights(s.weights, f):
            funcs.append(DofFunctional(s.selector, w, face=f))
    return red.face_rows(f, lambda g: [eval_dof(phi, g) for phi in funcs])


def _phi_rows(red: _Reduced):
    mesh = red.mesh
    ms = phi_basis(mesh)
    rows = [[ZERO] * red.n for _ in ms]
    for fid in mesh.boundary_faces:
        f = mesh.faces[fid]
        metric = f.metric_factor_exact()
        if metric is None:
            raise GeometryError(f"boundary face {fid} has an irrational metric factor")
        mtr = [restrict_to_face(m, f) for m in ms]
        cid = f.plus_cell
        off = red.offsets[cid]
        for j, g in enumerate(red.local[cid]):
            gt = restrict_to_face(g, f)
            for i, mt in enumerate(mtr):
                rows[i][off + j] += integrate_face(gt.dot(mt), f) * metric
    return rows


def _grad_rows(red: _Reduced):
    index = monomials(red.mesh.dim, 6)

    def per_gen(g):
        return [p.coeff(e) for row in jacobian_matrix(g) for p in row for e in index]
    rows = []
    for cid in range(len(red.mesh.cells)):
        rows += red.cell_rows(cid, per_gen)
    return rows


def resolve_conditions(jump_control, d: int) -> list[JumpCondition]:
    if jump_control in (None, "none"):
        return []
    if jump_control == "minimal":
        return minimal_conditions(d)
    return list(jump_control)


def korn_kernel_test(space: PwSpace, include_phi: bool = True, jump_control="minimal",
                     continuity: str = "none", dof_specs: Sequence[DofSpec] | None = None,
                     element: str = "") -> KornReport:
    """Exact kernel of the Korn right-hand side on a broken polynomial space.

    ``jump_control`` is ``"minimal"``, ``"none"`` or a list of
    :class:`JumpCondition`. ``continuity`` optionally imposes inter-cell
    constraints first: ``"dofs"`` (equal interface DOFs from ``dof_specs``)
    or ``"full"`` (equal traces).
    """
    mesh = space.mesh
    red = _Reduced(space)
    conds = resolve_conditions(jump_control, mesh.dim)
    rows: list[list] = []
    for fid in mesh.interior_faces:
        f = mesh.faces[fid]
        if continuity == "full":
            rows += red.face_rows(f, _trace_coeff_rows(f))
        elif continuity == "dofs":
            if dof_specs is None:
                raise ValueError("continuity='dofs' needs dof_specs")
            rows += _dof_rows(red, f, dof_specs)
        elif continuity != "none":
            raise ValueError(f"unknown continuity {continuity!r}")
        rows += _condition_rows(red, f, conds)
    if include_phi:
        rows += _phi_rows(red)
    N = linalg.nullspace([r for r in rows if any(r)], red.n)

    # expected kernel: zero full jump everywhere (+ zero gradient with the boundary term)
    erows = []
    for fid in mesh.interior_faces:
        erows += red.face_rows(mesh.faces[fid], _trace_coeff_rows(mesh.faces[fid]))
    if include_phi:
        erows += _grad_rows(red)
    E = linalg.nullspace([r for r in erows if any(r)], red.n)

    verdict = "holds" if len(N) == len(E) else "fails"
    witness, wh1, residuals = None, None, {}
    if verdict == "fails":
        best = None
        for z in N:
            if linalg.in_span(E, z) if E else not any(z):
                continue
            u = red.field(z)
            h = h1_seminorm_sq(u)
            if best is None or (best[1] == 0 and h != 0):
                best = (u, h)
            if h != 0:
                break
        witness, wh1 = best
        residuals = _residuals(witness, conds)
    settings = {"include_phi": include_phi, "continuity": continuity,
                "jump_control": jump_control if isinstance(jump_control, str) else [c.name for c in conds],
                "mesh_cells": len(mesh.cells), "space": space.name}
    return KornReport(element or space.name, "kernel", verdict, len(N), len(E), witness, residuals,
                      settings, wh1)


def _residuals(u: PwField, conds: Sequence[JumpCondition]) -> dict:
    out = {}
    for fid in u.mesh.interior_faces:
        f = u.mesh.faces[fid]
        jt = jump_on_face(u, f)
        out[f"face{fid}"] = {c.name: q_str(c.moment(jt, f)) for c in conds}
    if u.mesh.boundary_faces:
        try:
            out["phi_moments"] = [q_str(b) for b in phi_moments(u)]
        except GeometryError:
            pass
    return out


# DOF coverage ----------------------------------------------------------------------

def dof_coverage_test(element, mesh: Mesh | None = None) -> KornReport:
    """Do equal shared-face DOFs force the minimal jump moments to vanish?

    Works on a two-cell configuration: ``K`` is the set of local pairs with
    matching DOFs on the shared face and the verdict is whether every minimal
    jump moment vanishes on ``K``.
    """
    mesh = mesh or make_two_cell_configuration(element.dimension)
    if len(mesh.cells) != 2 or len(mesh.interior_faces) != 1:
        raise ValueError("coverage test needs exactly two cells sharing one face")
    face_specs = [s for s in element.dofs if s.domain != "cell"]
    if not face_specs:
        raise ValueError(f"element {element.name} has no interface DOFs")
    f = mesh.faces[mesh.interior_faces[0]]
    bases = [element.space(T).independent() for T in mesh.cells]
    n0, n1 = len(bases[0]), len(bases[1])
    funcs = []
    for s in face_specs:
        for w in face_weights(s.weights, f):
            funcs.append(DofFunctional(s.selector, w, face=f))
    Dp = dof_matrix(bases[f.plus_cell], funcs)
    Dm = dof_matrix(bases[f.minus_cell], funcs)

    def pair_rows(A, B):
        return [list(a) + [-x for x in b] for a, b in zip(A, B)]

    if f.plus_cell != 0:
        raise AssertionError("plus cell should be cell 0")
    C = pair_rows(Dp, Dm)
    K = linalg.nullspace(C, n0 + n1)
    conds = minimal_conditions(mesh.dim)
    jf = [c.functional(f) for c in conds]
    J = pair_rows(dof_matrix(bases[0], jf), dof_matrix(bases[1], jf))
    JK = [[sum((a * b for a, b in zip(row, k)), ZERO) for k in K] for row in J]
    holds = all(v == 0 for row in JK for v in row)
    kernel_dim = len(linalg.nullspace(C + J, n0 + n1))
    witness, residuals = None, {}
    if not holds:
        j = next(i for i in range(len(K)) if any(JK[r][i] != 0 for r in range(len(J))))
        z = K[j]
        witness = PwField(mesh, [linear_combination(z[:n0], bases[0].generators),
                                 linear_combination(z[n0:], bases[1].generators)])
        residuals = {f"face{f.id}": {c.name: q_str(JK[r][j]) for r, c in enumerate(conds)}}
    return KornReport(element.name, "dof_coverage", "holds" if holds else "fails", kernel_dim, len(K),
                      witness, residuals, {"shared_face_dofs": len(funcs), "minimal_conditions": len(conds)})


def coverage_via_kernel(element, mesh: Mesh | None = None) -> KornReport:
    """Kernel test with DOF continuity and no explicit jump terms on two cells."""
    mesh = mesh or make_two_cell_configuration(element.dimension)
    space = PwSpace.from_builder(mesh, element.space, element.name)
    return korn_kernel_test(space, include_phi=False, jump_control="none", continuity="dofs",
                            dof_specs=element.dofs, element=element.name)


# floating-point constant -------------------------------------------------------------

def _to_float(M) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in M], dtype=float) if M else np.zeros((0, 0))


def _cell_gram(space: PwSpace, integrand: Callable[[VecPoly, VecPoly], Poly]) -> list[list]:
    n = space.ndofs
    G = [[ZERO] * n for _ in range(n)]
    for cid, (T, b) in enumerate(zip(space.mesh.cells, space.bases)):
        off = space.offsets[cid]
        gens = b.generators
        for i in range(len(gens)):
            for j in range(i, len(gens)):
                v = integrate_cell(integrand(gens[i], gens[j]), T)
                G[off + i][off + j] = G[off + j][off + i] = v
    return G


def _grad_pair(a: VecPoly, b: VecPoly) -> Poly:
    Ja, Jb = jacobian_matrix(a), jacobian_matrix(b)
    return sum((p * q for ra, rb in zip(Ja, Jb) for p, q in zip(ra, rb)), Poly(a.nvars))


def _strain_pair(a: VecPoly, b: VecPoly) -> Poly:
    Da, Db = strain(a), strain(b)
    return sum((p * q for ra, rb in zip(Da, Db) for p, q in zip(ra, rb)), Poly(a.nvars))


def korn_constant_estimate(space: PwSpace, include_phi: bool = True, jump_control="minimal",
                           continuity: str = "none", dof_specs=None) -> dict:
    """Smallest generalised eigenvalue of the Korn right-hand side against ``|·|²_{H1}``.

    Double precision. Jump terms use true face measure, unit frames and the
    weight ``(diam f)^{-1}``; the result is ``inf RHS(u)/|u|²`` over fields with
    nonzero broken gradient.
    """
    mesh = space.mesh
    n = space.ndofs
    H = _to_float(_cell_gram(space, _grad_pair))
    R = _to_float(_cell_gram(space, _strain_pair))
    conds = resolve_conditions(jump_control, mesh.dim)
    red = _Reduced(space, restrict_strain=False)
    for fid in mesh.interior_faces:
        f = mesh.faces[fid]
        scale = f.metric_factor() / f.diameter()
        nn = float(dot(f.normal_raw, f.normal_raw))
        for part in ("normal", "tangential"):
            pc = [c for c in conds if c.part == part]
            if not pc:
                continue
            weights = [c.weight(f) for c in pc]
            G = _gram_chart(weights, f)
            idx = linalg.independent_subset(G)
            M = _to_float(_condition_rows(red, f, [pc[i] for i in idx]))
            Gi = np.linalg.inv(_to_float([[G[i][j] for j in idx] for i in idx]))
            R += (scale / nn) * (M.T @ Gi @ M)
    if include_phi:
        P = _to_float(_phi_rows(red))
        if P.size:
            Gm = _to_float(phi_gram(mesh))
            R += P.T @ np.linalg.solve(Gm, P)
    # optional inter-cell constraints: parametrise their nullspace exactly
    basis = np.eye(n)
    if continuity != "none":
        crow = []
        for fid in mesh.interior_faces:
            f = mesh.faces[fid]
            crow += red.face_rows(f, _trace_coeff_rows(f)) if continuity == "full" else _dof_rows(red, f, dof_specs)
        Z = linalg.nullspace([r for r in crow if any(r)], n)
        basis = _to_float(Z).T
    H = basis.T @ H @ basis
    R = basis.T @ R @ basis
    R = 0.5 * (R + R.T)
    H = 0.5 * (H + H.T)
    w, V = np.linalg.eigh(H)
    tol = 1e-10 * max(1.0, w.max(initial=0.0))
    U = V[:, w > tol]
    Zk = V[:, w <= tol]
    if U.shape[1] == 0:
        return {"estimate": math.inf, "weights": "diam^-1, true measure", "dim": 0}
    Ruu, Ruz, Rzz = U.T @ R @ U, U.T @ R @ Zk, Zk.T @ R @ Zk
    S = Ruu - Ruz @ np.linalg.pinv(Rzz, rcond=1e-12) @ Ruz.T if Zk.shape[1] else Ruu
    S = 0.5 * (S + S.T)
    lam = scipy.linalg.eigh(S, U.T @ H @ U, eigvals_only=True)
    return {"estimate": float(lam.min()), "smallest_eigenvalues": [float(x) for x in lam[:3]],
            "weights": "jump terms scaled by diam(f)^-1 in true measure with unit frames",
            "dim": int(U.shape[1])}
