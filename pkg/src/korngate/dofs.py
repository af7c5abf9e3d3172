"""Moment degrees of freedom, DOF matrices and unisolvence decisions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import linalg
from .geometry import Cell, Face, faces_of
from .polyalg import (Poly, VecPoly, chart_coordinates, integrate_cell, integrate_face,
                      linear_combination, restrict_to_face)
from .rational import Q
from .spaces import SpaceBasis, basis_RT0_face

SELECTORS = ("normal", "tangential2d", "cross_normal3d", "full_vector", "interior")
WEIGHT_SPACES = ("P0", "P1", "RT0", "P0t", "const")


@dataclass(frozen=True, eq=False)
class DofFunctional:
    """``∫ sel(v) · w`` over a face (chart measure) or over the cell.

    ``selector`` picks ``v·n``, ``v·t`` (2D), ``v × n`` (3D), the full vector
    or, for ``interior``, the full vector integrated over ``cell``.
    """

    selector: str
    weight: object
    face: Face | None = None
    cell: Cell | None = None
    label: str = ""

    def __post_init__(self):
        if self.selector not in SELECTORS:
            raise ValueError(f"unknown selector {self.selector!r}")
        if self.selector == "interior":
            if self.cell is None:
                raise ValueError("interior moments need a cell")
            return
        if self.face is None:
            raise ValueError(f"{self.selector} moments need a face")
        d = self.face.dim
        if self.selector == "tangential2d" and d != 2:
            raise ValueError("tangential2d is only legal in 2D")
        if self.selector == "cross_normal3d" and d != 3:
            raise ValueError("cross_normal3d is only legal in 3D")
        if self.weight.nvars != self.face.chart_dim:
            raise ValueError("weight must live in the face chart")

    @property
    def domain(self):
        return self.cell if self.selector == "interior" else self.face


def selected_trace(selector: str, v: VecPoly, f: Face):
    """Restrict ``v`` to ``f`` and apply a face selector (raw frames)."""
    tr = restrict_to_face(v, f)
    if selector == "normal":
        return tr.dot(f.normal_raw)
    if selector == "tangential2d":
        return tr.dot(f.tangents_raw[0])
    if selector == "cross_normal3d":
        return tr.cross(f.normal_raw)
    if selector == "full_vector":
        return tr
    raise ValueError(f"selector {selector!r} is not a face selector")


def _pair(a, w) -> Poly:
    if isinstance(a, Poly):
        return a * w if isinstance(w, Poly) else None
    return a.dot(w)


def eval_dof(phi: DofFunctional, v: VecPoly):
    if phi.selector == "interior":
        if v.nvars != phi.cell.dim:
            raise ValueError("field dimension does not match the cell")
        return integrate_cell(v.dot(phi.weight), phi.cell)
    sel = selected_trace(phi.selector, v, phi.face)
    integrand = _pair(sel, phi.weight)
    if integrand is None:
        raise ValueError("vector selector needs a vector weight")
    return integrate_face(integrand, phi.face)


def dof_matrix(space: SpaceBasis | Sequence, dofs: Sequence[DofFunctional]) -> list[list]:
    gens = space.generators if isinstance(space, SpaceBasis) else list(space)
    return [[eval_dof(phi, g) for g in gens] for phi in dofs]


# weight sets -------------------------------------------------------------------

def face_weights(kind: str, f: Face) -> list:
    m = f.chart_dim
    if kind == "P0":
        return [Poly.const(m, 1)]
    if kind == "P1":
        return [Poly.const(m, 1)] + chart_coordinates(f)
    if kind == "RT0":
        return list(basis_RT0_face(f).generators)
    if kind == "P0t":
        return [VecPoly.const(m, t) for t in f.tangents_raw]
    if kind == "const":
        return [VecPoly.const(m, [1 if i == k else 0 for i in range(f.dim)]) for k in range(f.dim)]
    raise ValueError(f"unknown weight space {kind!r}")


def cell_weights(kind: str, T: Cell) -> list:
    if kind in ("const", "P0"):
        return [VecPoly.const(T.dim, [1 if i == k else 0 for i in range(T.dim)]) for k in range(T.dim)]
    raise ValueError(f"interior weights {kind!r} are not supported")


@dataclass(frozen=True)
class DofSpec:
    """Descriptor of a DOF family: selector, weight space and domain."""

    selector: str
    weights: str
    domain: str = "each_face"  # or "cell"

    def as_dict(self) -> dict:
        return {"selector": self.selector, "weight_space": self.weights, "domain": self.domain}


def build_dofs(specs: Sequence[DofSpec], T: Cell, faces: Sequence[Face] | None = None,
               only_faces: Sequence[int] | None = None, include_cell: bool = True) -> list[DofFunctional]:
    """Instantiate DOF descriptors on ``T``.

    ``faces`` may supply the mesh faces of ``T`` (so frames are shared with a
    neighbour); by default the cell's own outward faces are used.
    """
    faces = list(faces) if faces is not None else faces_of(T)
    out = []
    for spec in specs:
        if spec.domain == "cell":
            if include_cell:
                for w in cell_weights(spec.weights, T):
                    out.append(DofFunctional("interior", w, cell=T, label=f"cell:{spec.weights}"))
            continue
        for i, f in enumerate(faces):
            if only_faces is not None and i not in only_faces:
                continue
            for k, w in enumerate(face_weights(spec.weights, f)):
                out.append(DofFunctional(spec.selector, w, face=f,
                                         label=f"face{i}:{spec.selector}:{spec.weights}[{k}]"))
    return out


# decisions -----------------------------------------------------------------------

@dataclass
class UnisolvenceResult:
    verdict: str  # "unisolvent" | "singular" | "not-square"
    dim: int
    ndofs: int
    rank: int
    determinant: object = None
    nullvector: object = None

    @property
    def unisolvent(self) -> bool:
        return self.verdict == "unisolvent"


def unisolvence(space: SpaceBasis, dofs: Sequence[DofFunctional]) -> UnisolvenceResult:
    """Decide whether ``dofs`` determine every member of ``space`` uniquely."""
    basis = space.independent()
    D = dof_matrix(basis, dofs)
    n = len(basis)
    r = linalg.rank(D) if D else 0
    null = linalg.nullspace(D, n) if D else [[Q(int(i == j)) for i in range(n)] for j in range(n)]
    witness = linear_combination(null[0], basis.generators) if null else None
    if len(dofs) != n:
        return UnisolvenceResult("not-square", n, len(dofs), r, None, witness)
    det = linalg.det(D)
    if det == 0:
        return UnisolvenceResult("singular", n, len(dofs), r, det, witness)
    return UnisolvenceResult("unisolvent", n, len(dofs), r, det, None)


def span_dimension(generators: Sequence) -> int:
    return SpaceBasis(generators).rank


def interpolate(space: SpaceBasis, dofs: Sequence[DofFunctional], values: Sequence) -> VecPoly:
    """The unique member of ``space`` with the given DOF values."""
    basis = space.independent()
    D = dof_matrix(basis, dofs)
    if len(D) != len(basis):
        raise ValueError("interpolation needs a square DOF system")
    coeffs = linalg.solve(D, [Q(v) for v in values])
    return linear_combination(coeffs, basis.generators)


def eval_dofs(dofs: Sequence[DofFunctional], v: VecPoly) -> list:
    return [eval_dof(phi, v) for phi in dofs]


def rescaled(dofs: Sequence[DofFunctional], factors: Sequence) -> list[DofFunctional]:
    """Copies of ``dofs`` with weights multiplied by the given positive rationals."""
    out = []
    for phi, c in zip(dofs, factors):
        if c <= 0:
            raise ValueError("rescaling factors must be positive")
        out.append(DofFunctional(phi.selector, phi.weight * Q(c), phi.face, phi.cell, phi.label))
    return out
