"""Cells, faces with orientation frames, and small conforming meshes.

Normals and tangents are stored unnormalised so every coordinate stays
rational. A face carries an affine chart ``x = origin + M s``; for simplex
faces the chart domain is the reference simplex, for faces of axis-aligned
boxes it is the face itself expressed in its free coordinates (so chart
measure equals true measure there).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Sequence

from . import linalg
from .rational import ZERO, Q, q_str, rational_sqrt, to_q

Point = tuple


class GeometryError(ValueError):
    pass


class MeshFormatError(GeometryError):
    """Malformed mesh file; ``line`` is set when the position is known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _pt(p) -> Point:
    return tuple(to_q(c) for c in p)


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _scale(c, a):
    return tuple(c * x for x in a)


def dot(a, b):
    return sum((x * y for x, y in zip(a, b)), ZERO)


def cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def rot90(n):
    """2D tangent convention: ``t = (-n_y, n_x)``."""
    return (-n[1], n[0])


def _mean(points):
    k = len(points)
    return tuple(sum((p[i] for p in points), ZERO) / k for i in range(len(points[0])))


@dataclass(frozen=True)
class Cell:
    kind: str  # "simplex" | "box"
    vertices: tuple
    id: int = 0

    def __post_init__(self):
        verts = tuple(_pt(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if self.kind not in ("simplex", "box"):
            raise GeometryError(f"unknown cell kind {self.kind!r}")
        d = len(verts[0])
        if d not in (2, 3) or any(len(v) != d for v in verts):
            raise GeometryError("cells must live in 2 or 3 dimensions")
        if self.kind == "simplex":
            if len(verts) != d + 1:
                raise GeometryError(f"a {d}D simplex needs {d + 1} vertices")
            if self.jacobian_det() == 0:
                raise GeometryError("degenerate simplex (zero volume)")
        else:
            if len(verts) != 2:
                raise GeometryError("a box is given by its lo and hi corners")
            lo, hi = verts
            if any(a >= b for a, b in zip(lo, hi)):
                raise GeometryError("box needs lo < hi componentwise")

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def jacobian(self):
        """Columns ``v_i - v_0`` of the affine map from the reference simplex."""
        if self.kind != "simplex":
            raise GeometryError("jacobian is only defined for simplices")
        v0 = self.vertices[0]
        cols = [_sub(v, v0) for v in self.vertices[1:]]
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]

    def jacobian_det(self):
        return linalg.det(self.jacobian())

    def volume(self):
        if self.kind == "simplex":
            return abs(self.jacobian_det()) / math.factorial(self.dim)
        lo, hi = self.vertices
        v = Q(1)
        for a, b in zip(lo, hi):
            v *= b - a
        return v

    def centroid(self) -> Point:
        if self.kind == "simplex":
            return _mean(self.vertices)
        lo, hi = self.vertices
        return tuple((a + b) / 2 for a, b in zip(lo, hi))

    def corners(self) -> list[Point]:
        if self.kind == "simplex":
            return list(self.vertices)
        lo, hi = self.vertices
        return [tuple(hi[i] if bit else lo[i] for i, bit in enumerate(bits))
                for bits in product((0, 1), repeat=self.dim)]

    def diameter(self) -> float:
        pts = self.corners()
        return max(math.sqrt(float(dot(_sub(p, q), _sub(p, q)))) for p in pts for q in pts)


@dataclass(frozen=True, eq=False)
class Face:
    vertices: tuple
    normal_raw: tuple
    tangents_raw: tuple
    barycenter: tuple
    chart_kind: str  # "simplex" | "box"
    chart_origin: tuple
    chart_matrix: tuple  # d rows x (d-1) columns
    chart_lo: tuple = ()
    chart_hi: tuple = ()
    is_boundary: bool = True
    plus_cell: int | None = None
    minus_cell: int | None = None
    id: int = -1
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.normal_raw)

    @property
    def chart_dim(self) -> int:
        return self.dim - 1

    @property
    def key(self) -> frozenset:
        return frozenset(self.vertices)

    def chart_point(self, s: Sequence) -> Point:
        s = [to_q(v) for v in s]
        return tuple(self.chart_origin[i] + sum((self.chart_matrix[i][j] * s[j]
                                                 for j in range(self.chart_dim)), ZERO)
                     for i in range(self.dim))

    def chart_measure(self):
        """Measure of the chart domain (no metric factor)."""
        if self.chart_kind == "simplex":
            return Q(1, math.factorial(self.chart_dim))
        v = Q(1)
        for a, b in zip(self.chart_lo, self.chart_hi):
            v *= b - a
        return v

    def metric_factor_sq(self):
        """Gram determinant of the chart map; true measure = chart measure * sqrt of it."""
        M = [list(r) for r in self.chart_matrix]
        G = linalg.matmul(linalg.transpose(M), M)
        return linalg.det(G)

    def metric_factor_exact(self):
        """Exact metric factor when it is rational, else ``None``."""
        return rational_sqrt(self.metric_factor_sq())

    def metric_factor(self) -> float:
        return math.sqrt(float(self.metric_factor_sq()))

    def measure(self) -> float:
        return float(self.chart_measure()) * self.metric_factor()

    def diameter(self) -> float:
        pts = list(self.vertices)
        return max(math.sqrt(float(dot(_sub(p, q), _sub(p, q)))) for p in pts for q in pts)

    def describe(self) -> dict:
        return {
            "id": self.id,
            "vertices": [[q_str(c) for c in v] for v in self.vertices],
            "normal_raw": [q_str(c) for c in self.normal_raw],
            "boundary": self.is_boundary,
            "plus_cell": self.plus_cell,
            "minus_cell": self.minus_cell,
        }


def _orient(normal, bary, centroid):
    return normal if dot(normal, _sub(bary, centroid)) > 0 else _scale(-1, normal)


def _simplex_face(cell: Cell, opposite: int) -> Face:
    verts = [v for i, v in enumerate(cell.vertices) if i != opposite]
    d = cell.dim
    w0 = verts[0]
    dirs = [_sub(w, w0) for w in verts[1:]]
    bary = _mean(verts)
    if d == 2:
        (dx, dy), = dirs
        normal = _orient((dy, -dx), bary, cell.centroid())
        tangents = (rot90(normal),)
    else:
        t1 = dirs[0]
        t2 = _sub(dirs[1], _scale(dot(dirs[1], t1) / dot(t1, t1), t1))
        normal = _orient(cross(dirs[0], dirs[1]), bary, cell.centroid())
        tangents = (t1, t2)
    matrix = tuple(tuple(dirs[j][i] for j in range(d - 1)) for i in range(d))
    return Face(vertices=tuple(verts), normal_raw=normal, tangents_raw=tangents,
                barycenter=bary, chart_kind="simplex", chart_origin=w0,
                chart_matrix=matrix, plus_cell=cell.id)


def _box_faces(cell: Cell) -> list[Face]:
    lo, hi = cell.vertices
    d = cell.dim
    faces = []
    for axis in range(d):
        free = [i for i in range(d) if i != axis]
        for side, value in ((-1, lo[axis]), (1, hi[axis])):
            normal = tuple(Q(side) if i == axis else ZERO for i in range(d))
            corners = []
            for bits in product((0, 1), repeat=d - 1):
                p = [ZERO] * d
                p[axis] = value
                for k, i in enumerate(free):
                    p[i] = hi[i] if bits[k] else lo[i]
                corners.append(tuple(p))
            origin = tuple(value if i == axis else ZERO for i in range(d))
            matrix = tuple(tuple(Q(1) if i == free[j] else ZERO for j in range(d - 1))
                           for i in range(d))
            if d == 2:
                tangents = (rot90(normal),)
            else:
                tangents = tuple(tuple(Q(1) if i == f else ZERO for i in range(d)) for f in free)
            faces.append(Face(vertices=tuple(corners), normal_raw=normal, tangents_raw=tangents,
                              barycenter=_mean(corners), chart_kind="box", chart_origin=origin,
                              chart_matrix=matrix, chart_lo=tuple(lo[i] for i in free),
                              chart_hi=tuple(hi[i] for i in free), plus_cell=cell.id))
    return faces


def faces_of(cell: Cell) -> list[Face]:
    """Boundary facets of a cell with outward raw normals.

    For a simplex, face ``i`` is the one opposite vertex ``i``. For a box the
    order is (axis 0 low, axis 0 high, axis 1 low, ...).
    """
    if cell.kind == "simplex":
        return [_simplex_face(cell, i) for i in range(cell.dim + 1)]
    return _box_faces(cell)


@dataclass(frozen=True, eq=False)
class Mesh:
    cells: tuple
    faces: tuple
    cell_faces: tuple  # per cell: global face ids in the cell's local order
    interior_faces: tuple
    boundary_faces: tuple

    @property
    def dim(self) -> int:
        return self.cells[0].dim

    @classmethod
    def from_cells(cls, cells: Sequence[Cell]) -> "Mesh":
        cells = tuple(replace(c, id=i) if c.id != i else c for i, c in enumerate(cells))
        if not cells:
            raise GeometryError("empty mesh")
        if len({c.dim for c in cells}) != 1:
            raise GeometryError("mixed dimensions")
        owners: dict = {}
        local: list[list[Face]] = []
        for c in cells:
            fl = faces_of(c)
            local.append(fl)
            for k, f in enumerate(fl):
                owners.setdefault(f.key, []).append((c.id, k))
        faces: list[Face] = []
        cell_faces = [[-1] * len(fl) for fl in local]
        for key, owner in owners.items():
            if len(owner) > 2:
                raise GeometryError("a face is shared by more than two cells")
            (cp, kp) = min(owner)
            base = local[cp][kp]
            fid = len(faces)
            minus = max(owner)[0] if len(owner) == 2 else None
            faces.append(replace(base, id=fid, is_boundary=minus is None,
                                 plus_cell=cp, minus_cell=minus, _memo={}))
            for cid, k in owner:
                cell_faces[cid][k] = fid
        interior = tuple(f.id for f in faces if not f.is_boundary)
        boundary = tuple(f.id for f in faces if f.is_boundary)
        mesh = cls(cells=cells, faces=tuple(faces), cell_faces=tuple(tuple(x) for x in cell_faces),
                   interior_faces=interior, boundary_faces=boundary)
        if not mesh.is_connected():
            raise GeometryError("mesh is not connected through interior faces")
        return mesh

    def is_connected(self) -> bool:
        adj = {c.id: set() for c in self.cells}
        for fid in self.interior_faces:
            f = self.faces[fid]
            adj[f.plus_cell].add(f.minus_cell)
            adj[f.minus_cell].add(f.plus_cell)
        seen, stack = {0}, [0]
        while stack:
            for n in adj[stack.pop()]:
                if n not in seen:
                    seen.add(n)
                    stack.append(n)
        return len(seen) == len(self.cells)

    def local_faces(self, cell_id: int) -> list[Face]:
        return [self.faces[i] for i in self.cell_faces[cell_id]]

    def vertices(self) -> list[Point]:
        """Distinct cell corners in first-seen order."""
        out, seen = [], set()
        for c in self.cells:
            for p in c.corners():
                if p not in seen:
                    seen.add(p)
                    out.append(p)
        return out

    def boundary_measure(self):
        total = ZERO
        for fid in self.boundary_faces:
            f = self.faces[fid]
            m = f.metric_factor_exact()
            if m is None:
                raise GeometryError(f"face {fid} has an irrational measure")
            total += f.chart_measure() * m
        return total


def make_two_square_domain() -> Mesh:
    """``[-1,0]x[0,1]`` and ``[0,1]x[0,1]`` sharing the edge ``{0}x[0,1]``."""
    return Mesh.from_cells([
        Cell("box", [(-1, 0), (0, 1)], 0),
        Cell("box", [(0, 0), (1, 1)], 1),
    ])


def make_two_cube_domain() -> Mesh:
    """Unit cubes stacked in y: ``y in [-1,0]`` and ``y in [0,1]``, sharing ``{y=0}``."""
    return Mesh.from_cells([
        Cell("box", [(0, -1, 0), (1, 0, 1)], 0),
        Cell("box", [(0, 0, 0), (1, 1, 1)], 1),
    ])


def make_two_square_simplicial() -> Mesh:
    """The two-square domain with each square cut along a diagonal (4 triangles)."""
    return Mesh.from_cells([
        Cell("simplex", [(-1, 0), (0, 0), (0, 1)]),
        Cell("simplex", [(-1, 0), (0, 1), (-1, 1)]),
        Cell("simplex", [(0, 0), (1, 0), (1, 1)]),
        Cell("simplex", [(0, 0), (1, 1), (0, 1)]),
    ])


def make_square_grid(n: int = 2) -> Mesh:
    """``n x n`` grid on the unit square, each square split into two triangles."""
    h = Q(1, n)
    cells = []
    for i in range(n):
        for j in range(n):
            a = (i * h, j * h)
            b = ((i + 1) * h, j * h)
            c = ((i + 1) * h, (j + 1) * h)
            d = (i * h, (j + 1) * h)
            cells.append(Cell("simplex", [a, b, c]))
            cells.append(Cell("simplex", [a, c, d]))
    return Mesh.from_cells(cells)


def make_two_tet_domain() -> Mesh:
    """Two tetrahedra glued on ``z = 0``; all boundary faces have rational area."""
    return Mesh.from_cells([
        Cell("simplex", [(0, 0, 0), (2, 0, 0), (0, 1, 0), (0, 0, 1)]),
        Cell("simplex", [(0, 0, 0), (2, 0, 0), (0, 1, 0), (0, 0, -1)]),
    ])


def make_two_cell_configuration(d: int) -> Mesh:
    """Two simplices with a shared facet and no symmetry between the two sides."""
    if d == 2:
        return Mesh.from_cells([
            Cell("simplex", [(0, 0), (1, 0), (Q(1, 4), 1)]),
            Cell("simplex", [(0, 0), (1, 0), (Q(2, 3), Q(-4, 5))]),
        ])
    if d == 3:
        return Mesh.from_cells([
            Cell("simplex", [(0, 0, 0), (1, 0, 0), (0, 1, 0), (Q(1, 5), Q(1, 4), 1)]),
            Cell("simplex", [(0, 0, 0), (1, 0, 0), (0, 1, 0), (Q(1, 3), Q(1, 2), Q(-3, 4))]),
        ])
    raise GeometryError("dimension must be 2 or 3")


def reference_simplex(d: int, cell_id: int = 0) -> Cell:
    verts = [tuple(0 for _ in range(d))]
    for i in range(d):
        verts.append(tuple(1 if j == i else 0 for j in range(d)))
    return Cell("simplex", verts, cell_id)


def affine_image(cell: Cell, A, b) -> Cell:
    """Image of a simplex under ``x -> A x + b``."""
    verts = [tuple(sum((to_q(A[i][j]) * v[j] for j in range(cell.dim)), ZERO) + to_q(b[i])
                   for i in range(cell.dim)) for v in cell.vertices]
    return Cell(cell.kind, verts, cell.id)


BUILTIN_MESHES = {
    "two-square": make_two_square_domain,
    "two-cube": make_two_cube_domain,
    "two-square-tri": make_two_square_simplicial,
    "square-grid-2": lambda: make_square_grid(2),
    "two-tet": make_two_tet_domain,
    "two-cell-2d": lambda: make_two_cell_configuration(2),
    "two-cell-3d": lambda: make_two_cell_configuration(3),
}


def _line_of(text: str, needle: str) -> int | None:
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def parse_mesh(text: str) -> Mesh:
    """Parse the JSON mesh format.

    ``{"dimension": d, "vertices": [["p/q", ...], ...],
    "cells": [{"kind": "simplex"|"box", "vertex_ids": [...]}, ...]}``.
    Faces and adjacency are always derived.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshFormatError(exc.msg, exc.lineno) from exc
    if not isinstance(data, dict):
        raise MeshFormatError("top level must be an object", 1)
    for key in ("dimension", "vertices", "cells"):
        if key not in data:
            raise MeshFormatError(f"missing field {key!r}")
    d = data["dimension"]
    if d not in (2, 3):
        raise MeshFormatError("dimension must be 2 or 3", _line_of(text, '"dimension"'))
    verts = []
    for i, v in enumerate(data["vertices"]):
        if not isinstance(v, list) or len(v) != d:
            raise MeshFormatError(f"vertex {i} must have {d} coordinates", _line_of(text, '"vertices"'))
        try:
            verts.append(tuple(to_q(c if isinstance(c, str) else int(c)) if not isinstance(c, float)
                               else _reject_float(c) for c in v))
        except (ValueError, TypeError) as exc:
            raise MeshFormatError(f"vertex {i}: {exc}", _line_of(text, '"vertices"')) from exc
    cells = []
    for i, c in enumerate(data["cells"]):
        line = _line_of(text, '"cells"')
        if not isinstance(c, dict) or "kind" not in c or "vertex_ids" not in c:
            raise MeshFormatError(f"cell {i} needs 'kind' and 'vertex_ids'", line)
        try:
            ids = [int(k) for k in c["vertex_ids"]]
            cells.append(Cell(c["kind"], [verts[k] for k in ids], i))
        except IndexError as exc:
            raise MeshFormatError(f"cell {i} references an unknown vertex", line) from exc
        except GeometryError as exc:
            raise MeshFormatError(f"cell {i}: {exc}", line) from exc
    try:
        return Mesh.from_cells(cells)
    except GeometryError as exc:
        raise MeshFormatError(str(exc)) from exc


def _reject_float(c):
    raise ValueError(f"coordinate {c!r} is a float; write rationals as strings like \"1/3\"")


def mesh_to_json(mesh: Mesh) -> str:
    verts: list[Point] = []
    index: dict = {}
    cells = []
    for c in mesh.cells:
        ids = []
        for v in c.vertices:
            if v not in index:
                index[v] = len(verts)
                verts.append(v)
            ids.append(index[v])
        cells.append({"kind": c.kind, "vertex_ids": ids})
    return json.dumps({"dimension": mesh.dim,
                       "vertices": [[q_str(x) for x in v] for v in verts],
                       "cells": cells}, indent=2)
