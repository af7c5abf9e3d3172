"""Local polynomial spaces: rigid motions, face trace spaces, H(div) families,
bubble enrichments and the curl-enriched composites.

Every dimension is computed by exact row reduction of generator coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import linalg
from .geometry import Cell, Face, GeometryError, Mesh, cross, dot, faces_of
from .polyalg import (
    Poly, VecPoly, barycentric, chart_position, coefficient_rows, curl, div,
    integrate_cell, integrate_face, linear_combination, monomials, restrict_to_face,
    span_rank, strain,
)
from .rational import ONE, ZERO, Q


class SpaceBasis:
    """Generators of a polynomial space on a cell or face, with an exact rank."""

    def __init__(self, generators: Sequence, domain=None, name: str = ""):
        self.generators = list(generators)
        self.domain = domain
        self.name = name
        self._rank = None
        self._independent = None

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __repr__(self):
        return f"SpaceBasis({self.name or '?'}, {len(self.generators)} generators, rank {self.rank})"

    @property
    def rank(self) -> int:
        if self._rank is None:
            self._rank = span_rank(self.generators)
        return self._rank

    @property
    def dim(self) -> int:
        return self.rank

    def independent(self) -> "SpaceBasis":
        """Sub-basis of linearly independent generators (first-come order)."""
        if self._independent is None:
            if not self.generators:
                self._independent = self
            else:
                rows, _ = coefficient_rows(self.generators)
                keep = linalg.independent_subset(rows)
                self._independent = SpaceBasis([self.generators[i] for i in keep], self.domain, self.name)
                self._independent._rank = len(keep)
        return self._independent

    def contains(self, v) -> bool:
        return span_rank(self.generators + [v]) == self.rank

    def span_equals(self, other: "SpaceBasis") -> bool:
        joint = span_rank(self.generators + list(other.generators))
        return joint == self.rank == other.rank

    def __add__(self, other: "SpaceBasis") -> "SpaceBasis":
        name = f"{self.name}+{other.name}" if self.name and other.name else ""
        return SpaceBasis(self.generators + list(other.generators), self.domain, name)

    def combination(self, coeffs):
        return linear_combination(coeffs, self.generators)


# rigid motions ----------------------------------------------------------------

def _const_vec(d: int, values) -> VecPoly:
    return VecPoly.const(d, [Q(v) for v in values])


def _unit(d: int, k: int) -> tuple:
    return tuple(ONE if i == k else ZERO for i in range(d))


@dataclass(frozen=True)
class RigidMotion:
    """``a + A x`` with skew ``A``.

    In 2D ``A`` has one parameter ``c`` (``A x = c(-y, x)``); in 3D the
    parameters are ``(d, e, f)`` with ``A = [[0, d, e], [-d, 0, f], [-e, -f, 0]]``.
    """

    a: tuple
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(Q(v) for v in self.a))
        object.__setattr__(self, "params", tuple(Q(v) for v in self.params))
        d = len(self.a)
        if d not in (2, 3) or len(self.params) != (1 if d == 2 else 3):
            raise ValueError("rigid motion needs d translations and d(d-1)/2 rotation parameters")

    @property
    def dim(self) -> int:
        return len(self.a)

    def matrix(self) -> list[list]:
        if self.dim == 2:
            (c,) = self.params
            return [[ZERO, -c], [c, ZERO]]
        d, e, f = self.params
        return [[ZERO, d, e], [-d, ZERO, f], [-e, -f, ZERO]]

    def coefficients(self) -> tuple:
        """Coordinates in the :func:`basis_RM` generator order."""
        return self.a + self.params

    def as_vecpoly(self) -> VecPoly:
        n = self.dim
        A = self.matrix()
        return VecPoly(Poly.affine(A[i], self.a[i]) for i in range(n))

    @classmethod
    def from_coefficients(cls, coeffs: Sequence) -> "RigidMotion":
        d = 2 if len(coeffs) == 3 else 3
        if len(coeffs) not in (3, 6):
            raise ValueError("expected 3 or 6 coefficients")
        return cls(tuple(coeffs[:d]), tuple(coeffs[d:]))

    @classmethod
    def from_vecpoly(cls, v: VecPoly) -> "RigidMotion":
        """Inverse of :meth:`as_vecpoly`; raises if ``v`` is not rigid."""
        d = v.nvars
        basis = basis_RM(d).generators
        rows, index = coefficient_rows(basis + [v])
        A = linalg.transpose(rows[:-1])
        try:
            x = linalg.min_norm_solution(A, rows[-1])
        except ValueError as exc:
            raise ValueError("field is not a rigid motion") from exc
        return cls.from_coefficients(x)


def basis_RM(d: int) -> SpaceBasis:
    if d == 2:
        x, y = Poly.var(0, 2), Poly.var(1, 2)
        gens = [_const_vec(2, (1, 0)), _const_vec(2, (0, 1)), VecPoly([-y, x])]
    elif d == 3:
        x, y, z = (Poly.var(i, 3) for i in range(3))
        o = Poly(3)
        gens = [_const_vec(3, _unit(3, k)) for k in range(3)]
        gens += [VecPoly([y, -x, o]), VecPoly([z, o, -x]), VecPoly([o, z, -y])]
    else:
        raise ValueError("dimension must be 2 or 3")
    return SpaceBasis(gens, None, f"RM{d}")


def boundary_integral(mesh: Mesh, integrand) -> object:
    """Exact ``∫_{∂Ω} g ds`` in true measure for a scalar ambient polynomial ``g``.

    ``integrand`` may be a Poly or a callable ``face -> Poly`` (ambient).
    Raises :class:`GeometryError` when a boundary face has irrational measure.
    """
    total = ZERO
    for fid in mesh.boundary_faces:
        f = mesh.faces[fid]
        metric = f.metric_factor_exact()
        if metric is None:
            raise GeometryError(f"boundary face {fid} has an irrational metric factor")
        g = integrand if isinstance(integrand, Poly) else integrand(f)
        total += integrate_face(restrict_to_face(g, f), f) * metric
    return total


def basis_RM_boundary(mesh: Mesh) -> SpaceBasis:
    """Rigid motions with zero boundary mean (linear span, unnormalised)."""
    d = mesh.dim
    rm = basis_RM(d).generators
    moment = [[boundary_integral(mesh, g[k]) for g in rm] for k in range(d)]
    null = linalg.nullspace(moment, len(rm))
    gens = [linear_combination(c, rm) for c in null]
    return SpaceBasis(gens, mesh, "RM_boundary")


# face trace spaces --------------------------------------------------------------

def basis_RT0_face(f: Face) -> SpaceBasis:
    """``span{t1, t2, x - c_f}`` as ambient vector fields in the face chart."""
    if f.dim != 3:
        raise GeometryError("RT0(f) is defined on faces of 3D cells; use P0 on edges")
    m = f.chart_dim
    t1, t2 = f.tangents_raw
    radial = chart_position(f) - VecPoly.const(m, f.barycenter)
    return SpaceBasis([VecPoly.const(m, t1), VecPoly.const(m, t2), radial], f, "RT0(f)")


def trace_tangential_rm(f: Face, d: int | None = None) -> SpaceBasis:
    """``{(v·t)|_f}`` in 2D, ``{(v × n)|_f}`` in 3D, over all rigid motions."""
    d = d or f.dim
    gens = []
    for g in basis_RM(d).generators:
        tr = restrict_to_face(g, f)
        if d == 2:
            gens.append(tr.dot(f.tangents_raw[0]))
        else:
            gens.append(tr.cross(f.normal_raw))
    return SpaceBasis(gens, f, "RM_tangential_trace")


def tangential_projection(v: VecPoly, f: Face) -> VecPoly:
    """``|n|^2 v - (v·n) n``, i.e. the tangential part scaled by ``|n|^2``."""
    n = f.normal_raw
    return v * dot(n, n) - VecPoly([v.dot(n) * c for c in n])


# bubbles ----------------------------------------------------------------------

def _require_simplex(T: Cell):
    if T.kind != "simplex":
        raise GeometryError("this construction needs a simplex")


def bubble_cell(T: Cell) -> Poly:
    _require_simplex(T)
    out = Poly.const(T.dim, 1)
    for lam in barycentric(T):
        out = out * lam
    return out


def bubble_face(T: Cell, face_index: int) -> Poly:
    """Product of the barycentric coordinates that do not vanish on face ``face_index``."""
    _require_simplex(T)
    out = Poly.const(T.dim, 1)
    for i, lam in enumerate(barycentric(T)):
        if i != face_index:
            out = out * lam
    return out


def edge_bubble_b(T: Cell) -> Poly:
    _require_simplex(T)
    if T.dim != 2:
        raise GeometryError("the edge bubble b is two-dimensional")
    l0, l1, l2 = barycentric(T)
    return l0 * l1 + l1 * l2 + l2 * l0 - Q(1, 6)


# standard local spaces ------------------------------------------------------------

def _p1_scalars(d: int) -> list[Poly]:
    return [Poly.monomial(e) for e in monomials(d, 1)]


def vector_polys(d: int, degree: int) -> list[VecPoly]:
    """Monomial basis of ``(P_degree)^d`` in ``d`` variables."""
    out = []
    zero = Poly(d)
    for k in range(d):
        for e in monomials(d, degree):
            comps = [zero] * d
            comps[k] = Poly.monomial(e)
            out.append(VecPoly(comps))
    return out


def basis_P1_vector(T: Cell) -> SpaceBasis:
    return SpaceBasis(vector_polys(T.dim, 1), T, f"(P1)^{T.dim}")


def basis_CR(T: Cell, d: int | None = None) -> SpaceBasis:
    """Local Crouzeix-Raviart vector space ``(P1)^d`` (the DOFs make it nonconforming)."""
    _require_simplex(T)
    return SpaceBasis(vector_polys(T.dim, 1), T, "CR")


def basis_BDM1(T: Cell) -> SpaceBasis:
    _require_simplex(T)
    return SpaceBasis(vector_polys(T.dim, 1), T, "BDM1")


def basis_RT1(T: Cell) -> SpaceBasis:
    """``(P1)^d + P~1 x`` (homogeneous linears times the position vector)."""
    _require_simplex(T)
    d = T.dim
    xs = [Poly.var(i, d) for i in range(d)]
    extra = [VecPoly([xi * xj for xj in xs]) for xi in xs]
    return SpaceBasis(vector_polys(d, 1) + extra, T, "RT1")


def basis_RM_cell(T: Cell) -> SpaceBasis:
    return SpaceBasis(basis_RM(T.dim).generators, T, "RM")


# enrichment families -------------------------------------------------------------

def _face_normals(T: Cell) -> list[tuple]:
    return [f.normal_raw for f in faces_of(T)]


def y3_removed(T: Cell) -> list[VecPoly]:
    """The four fields ``(λ_i - 1/3) ∇λ_i`` factored out of ``(P1)^3``."""
    out = []
    for lam in barycentric(T):
        g = [lam.derivative(k) for k in range(3)]
        out.append(VecPoly([(lam - Q(1, 3)) * gk for gk in g]))
    return out


def l2_gram(fields: Sequence, T: Cell) -> list[list]:
    n = len(fields)
    G = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            a, b = fields[i], fields[j]
            p = a * b if isinstance(a, Poly) else a.dot(b)
            G[i][j] = G[j][i] = integrate_cell(p, T)
    return G


def quotient_complement(full: Sequence, removed: Sequence, T: Cell, method: str = "l2") -> list:
    """A complement of ``span(removed)`` inside ``span(full)``.

    ``method="l2"`` takes the exact L2(T)-orthogonal complement;
    ``method="coordinate"`` keeps the generators of ``full`` that extend a
    basis of ``removed`` (a different, non-orthogonal complement).
    """
    full = list(full)
    if method == "l2":
        G = l2_gram(full + list(removed), T)
        n = len(full)
        # removed expressed through full's coefficients is not needed: constrain <v, r> = 0
        cons = [[G[n + r][j] for j in range(n)] for r in range(len(removed))]
        null = linalg.nullspace(cons, n)
        return [linear_combination(c, full) for c in null]
    if method == "coordinate":
        rows, _ = coefficient_rows(list(removed) + full)
        keep = linalg.independent_subset(rows)
        return [full[i - len(removed)] for i in keep if i >= len(removed)]
    raise ValueError(f"unknown complement method {method!r}")


def basis_Y(kind: str, T: Cell, complement: str = "l2") -> SpaceBasis:
    """Enrichment families Y1..Y5 (Y1, Y4 scalar in 2D; the rest vector in 3D)."""
    _require_simplex(T)
    d = T.dim
    kind = kind.upper()
    if kind == "Y1":
        _need_dim(d, 2, kind)
        gens = _p1_scalars(2)
    elif kind == "Y2":
        _need_dim(d, 3, kind)
        gens = vector_polys(3, 1)
    elif kind == "Y3":
        _need_dim(d, 3, kind)
        gens = quotient_complement(vector_polys(3, 1), y3_removed(T), T, complement)
    elif kind == "Y4":
        _need_dim(d, 2, kind)
        gens = [bubble_face(T, i) for i in range(3)]
    elif kind == "Y5":
        _need_dim(d, 3, kind)
        gens = []
        for i, n in enumerate(_face_normals(T)):
            bf = bubble_face(T, i)
            for k in range(3):
                gens.append(VecPoly.const(3, cross(_unit(3, k), n)) * bf)
    else:
        raise ValueError(f"unknown enrichment family {kind!r}")
    return SpaceBasis(gens, T, kind)


def _need_dim(d, want, kind):
    if d != want:
        raise GeometryError(f"{kind} is defined for d = {want}")


def qf_image(T: Cell, face_index: int) -> list[VecPoly]:
    """Independent generators of ``{q × n_f : q ∈ RM}``."""
    n = faces_of(T)[face_index].normal_raw
    gens = [g.cross(n) for g in basis_RM(3).generators]
    return SpaceBasis(gens, T).independent().generators


def basis_Qfstar(T: Cell, face_index: int) -> SpaceBasis:
    """``q × n_f`` orthogonal to all ``w × n_f`` (w constant) in the ``b_T b_f`` weighted L2(T)."""
    _require_simplex(T)
    _need_dim(T.dim, 3, "Q*_f")
    n = faces_of(T)[face_index].normal_raw
    image = qf_image(T, face_index)
    weight = bubble_cell(T) * bubble_face(T, face_index)
    tests = [VecPoly.const(3, cross(_unit(3, k), n)) for k in range(3)]
    cons = [[integrate_cell(g.dot(w) * weight, T) for g in image] for w in tests]
    null = linalg.nullspace(cons, len(image))
    return SpaceBasis([linear_combination(c, image) for c in null], T, f"Q*_{face_index}")


def basis_Qstar(T: Cell) -> SpaceBasis:
    gens = []
    for i in range(T.dim + 1):
        bf = bubble_face(T, i)
        gens += [g * bf for g in basis_Qfstar(T, i).generators]
    return SpaceBasis(gens, T, "Q*")


def curl_bubble_part(T: Cell, Y: SpaceBasis) -> SpaceBasis:
    """``curl(b_T y)`` for every generator of ``Y``."""
    bT = bubble_cell(T)
    gens = []
    for y in Y.generators:
        gens.append(curl(y * bT))
    return SpaceBasis(gens, T, f"curl(bT {Y.name})")


def assemble_enriched(V0: SpaceBasis, Y: SpaceBasis, T: Cell | None = None) -> SpaceBasis:
    """``V0 + curl(b_T Y)``."""
    T = T or V0.domain
    part = curl_bubble_part(T, Y)
    for g in part.generators:
        if not div(g).is_zero():
            raise AssertionError("curl part is not divergence free")
    return SpaceBasis(V0.generators + part.generators, T, f"{V0.name}+{part.name}")


def basis_MTW(T: Cell) -> SpaceBasis:
    """Cubic fields with constant divergence and linear normal trace on each edge."""
    _require_simplex(T)
    _need_dim(T.dim, 2, "MTW")
    full = vector_polys(2, 3)
    n = len(full)
    exprs = []  # each constraint is a linear functional of the coefficient vector
    divs = [div(g) for g in full]
    for e in monomials(2, 2):
        if sum(e) >= 1:
            exprs.append([p.coeff(e) for p in divs])
    for f in faces_of(T):
        traces = [restrict_to_face(g, f).dot(f.normal_raw) for g in full]
        for k in (2, 3):
            exprs.append([p.coeff((k,)) for p in traces])
    null = linalg.nullspace(exprs, n)
    return SpaceBasis([linear_combination(c, full) for c in null], T, "MTW")


def psi_functions(T: Cell) -> list[VecPoly]:
    """``b (λ_i - λ_j) n_ij`` for the three edges; edge ``ij`` is opposite the third vertex."""
    _require_simplex(T)
    _need_dim(T.dim, 2, "psi")
    lam = barycentric(T)
    b = edge_bubble_b(T)
    fl = faces_of(T)
    out = []
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        n = fl[k].normal_raw
        out.append(VecPoly.const(2, n) * (b * (lam[i] - lam[j])))
    return out


def psi_edges() -> list[tuple]:
    """Edge labels ``(i, j, opposite)`` matching :func:`psi_functions`."""
    return [(0, 1, 2), (1, 2, 0), (2, 0, 1)]


def basis_enrichedCR(T: Cell, d: int | None = None, variant: str = "psi") -> SpaceBasis:
    d = d or T.dim
    if variant == "psi":
        _need_dim(d, 2, "psi-enriched CR")
        return SpaceBasis(basis_CR(T).generators + psi_functions(T), T, "ECR-psi")
    if variant == "curl":
        Y = basis_Y("Y1" if d == 2 else "Y2", T)
        return assemble_enriched(basis_CR(T), Y, T)
    raise ValueError(f"unknown variant {variant!r}")


def basis_V1(T: Cell) -> SpaceBasis:
    """``BDM1 + curl(b_T Q*)``."""
    return assemble_enriched(basis_BDM1(T), basis_Qstar(T), T)


def is_rigid(v: VecPoly) -> bool:
    return all(p.is_zero() for row in strain(v) for p in row)
