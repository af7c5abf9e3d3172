"""Exact multivariate polynomials with rational coefficients.

A :class:`Poly` maps exponent tuples to nonzero rationals. Terms are kept in a
dict and emitted in graded-lexicographic order wherever order is observable
(text form, coefficient vectors), so output is reproducible.

Integration over faces is in *chart measure*: the integrand is pulled back to
the face chart and integrated there without the metric factor. On faces of
axis-aligned boxes the chart is the face's own coordinates, so chart and true
measure coincide.
"""
from __future__ import annotations

import math
import re
from typing import Iterable, Sequence

from .geometry import Cell, Face, GeometryError
from . import linalg
from .rational import ONE, ZERO, Q, q_str, to_q

_AMBIENT_NAMES = ("x", "y", "z")
_CHART_NAMES = ("s", "t")


def grlex_key(exp: tuple) -> tuple:
    return (-sum(exp), tuple(-e for e in exp))


def monomials(nvars: int, degree: int) -> list[tuple]:
    """All exponents of total degree <= ``degree`` in graded-lex order (high first)."""
    out: list[tuple] = []

    def rec(prefix, left, k):
        if k == nvars:
            out.append(tuple(prefix))
            return
        for e in range(left, -1, -1):
            rec(prefix + [e], left - e, k + 1)

    rec([], degree, 0)
    return sorted(out, key=grlex_key)


class Poly:
    """Immutable polynomial in ``nvars`` variables."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for e, c in terms.items():
                if len(e) != nvars:
                    raise ValueError("exponent length does not match nvars")
                if c != 0:
                    clean[tuple(e)] = Q(c)
        self.terms = clean
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: to_q(c) if not isinstance(c, type(ZERO)) else c})

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls(nvars)

    @classmethod
    def var(cls, i: int, nvars: int) -> "Poly":
        return cls(nvars, {tuple(1 if j == i else 0 for j in range(nvars)): ONE})

    @classmethod
    def monomial(cls, exp: Sequence[int], c=ONE) -> "Poly":
        return cls(len(exp), {tuple(exp): c})

    @classmethod
    def affine(cls, coeffs: Sequence, const=ZERO) -> "Poly":
        n = len(coeffs)
        t = {tuple(1 if j == i else 0 for j in range(n)): Q(c) for i, c in enumerate(coeffs)}
        t[(0,) * n] = Q(const)
        return cls(n, t)

    # basic queries --------------------------------------------------------
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, exp: Sequence[int]):
        return self.terms.get(tuple(exp), ZERO)

    def sorted_terms(self) -> list[tuple]:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different numbers of variables")
            return other
        return Poly.const(self.nvars, other)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, ZERO) + c
        return Poly(self.nvars, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = to_q(other) if not isinstance(other, type(ZERO)) else other
            if c == 0:
                return Poly(self.nvars)
            return Poly(self.nvars, {e: c * v for e, v in self.terms.items()})
        other = self._lift(other)
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, ZERO) + c1 * c2
        return Poly(self.nvars, t)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (ONE / to_q(c) if not isinstance(c, type(ZERO)) else ONE / c)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        try:
            return self.terms == Poly.const(self.nvars, other).terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # calculus -------------------------------------------------------------
    def derivative(self, axis: int) -> "Poly":
        if not 0 <= axis < self.nvars:
            raise ValueError(f"axis {axis} out of range for {self.nvars} variables")
        t = {}
        for e, c in self.terms.items():
            k = e[axis]
            if k:
                ne = list(e)
                ne[axis] -= 1
                t[tuple(ne)] = c * k
        return Poly(self.nvars, t)

    def __call__(self, *point):
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        """Exact value at a rational point, or a float value at a float point."""
        if len(point) != self.nvars:
            raise ValueError("point dimension mismatch")
        if any(isinstance(p, float) for p in point):
            return sum(float(c) * math.prod(p ** k for p, k in zip(point, e))
                       for e, c in self.terms.items())
        pt = [to_q(p) if not isinstance(p, type(ZERO)) else p for p in point]
        total = ZERO
        for e, c in self.terms.items():
            v = c
            for p, k in zip(pt, e):
                if k:
                    v *= p ** k
            total += v
        return total

    def compose(self, subs: Sequence["Poly"]) -> "Poly":
        """``p(subs[0], ..., subs[n-1])``; all substitutes share one variable count."""
        if len(subs) != self.nvars:
            raise ValueError("need one substitute per variable")
        m = subs[0].nvars
        cache: list[list[Poly]] = [[Poly.const(m, 1)] for _ in subs]
        out: dict = {}
        for e, c in self.terms.items():
            term = None
            for i, k in enumerate(e):
                while len(cache[i]) <= k:
                    cache[i].append(cache[i][-1] * subs[i])
                if k:
                    term = cache[i][k] if term is None else term * cache[i][k]
            if term is None:
                term = cache[0][0]
            for te, tc in term.terms.items():
                out[te] = out.get(te, ZERO) + c * tc
        return Poly(m, out)

    # text -----------------------------------------------------------------
    def to_text(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = _AMBIENT_NAMES if self.nvars <= 3 else tuple(f"x{i}" for i in range(self.nvars))
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = " ".join(f"{names[i]}^{k}" for i, k in enumerate(e) if k)
            parts.append(q_str(c) if not mono else f"{q_str(c)} * {mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Poly({self.to_text()})"

    @classmethod
    def from_text(cls, text: str, nvars: int, names: Sequence[str] | None = None) -> "Poly":
        if names is None:
            names = _AMBIENT_NAMES[:nvars] if nvars <= 3 else tuple(f"x{i}" for i in range(nvars))
        text = text.strip()
        if text == "0":
            return cls(nvars)
        t: dict = {}
        for part in text.split(" + "):
            if " * " in part:
                c_txt, mono = part.split(" * ", 1)
            elif re.fullmatch(r"-?\d+(/\d+)?", part.strip()):
                c_txt, mono = part, ""
            else:
                raise ValueError(f"bad term {part!r}")
            e = [0] * nvars
            for tok in mono.split():
                name, k = tok.split("^")
                e[names.index(name)] += int(k)
            t[tuple(e)] = t.get(tuple(e), ZERO) + to_q(c_txt.strip())
        return cls(nvars, t)


class VecPoly:
    """A tuple of :class:`Poly` sharing one variable count."""

    __slots__ = ("comps",)

    def __init__(self, comps: Iterable[Poly]):
        comps = tuple(comps)
        if not comps:
            raise ValueError("empty vector polynomial")
        if len({c.nvars for c in comps}) != 1:
            raise ValueError("components live in different numbers of variables")
        self.comps = comps

    @classmethod
    def const(cls, nvars: int, values: Sequence) -> "VecPoly":
        return cls(Poly.const(nvars, v) for v in values)

    @classmethod
    def zero(cls, nvars: int, ncomps: int) -> "VecPoly":
        return cls(Poly(nvars) for _ in range(ncomps))

    @property
    def nvars(self) -> int:
        return self.comps[0].nvars

    def __len__(self):
        return len(self.comps)

    def __iter__(self):
        return iter(self.comps)

    def __getitem__(self, i):
        return self.comps[i]

    def __add__(self, other: "VecPoly"):
        if len(other) != len(self):
            raise ValueError("length mismatch")
        return VecPoly(a + b for a, b in zip(self.comps, other.comps))

    def __sub__(self, other: "VecPoly"):
        if len(other) != len(self):
            raise ValueError("length mismatch")
        return VecPoly(a - b for a, b in zip(self.comps, other.comps))

    def __neg__(self):
        return VecPoly(-a for a in self.comps)

    def __mul__(self, other):
        """Scale by a rational or a scalar :class:`Poly`."""
        return VecPoly(a * other for a in self.comps)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, VecPoly) and self.comps == other.comps

    def __hash__(self):
        return hash(self.comps)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps)

    def degree(self) -> int:
        return max(c.degree() for c in self.comps)

    def dot(self, other) -> Poly:
        """Dot with another VecPoly or a constant vector."""
        if isinstance(other, VecPoly):
            return sum((a * b for a, b in zip(self.comps, other.comps)), Poly(self.nvars))
        return sum((a * to_q(b) if not isinstance(b, type(ZERO)) else a * b
                    for a, b in zip(self.comps, other)), Poly(self.nvars))

    def cross(self, other) -> "VecPoly":
        """3D cross product with another VecPoly or a constant vector."""
        if len(self) != 3:
            raise ValueError("cross product needs 3 components")
        b = other.comps if isinstance(other, VecPoly) else [Poly.const(self.nvars, v) for v in other]
        a = self.comps
        return VecPoly([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])

    def evaluate(self, point):
        return tuple(c.evaluate(point) for c in self.comps)

    def compose(self, subs: Sequence[Poly]) -> "VecPoly":
        return VecPoly(c.compose(subs) for c in self.comps)

    def to_text(self, names=None) -> str:
        return "(" + ", ".join(c.to_text(names) for c in self.comps) + ")"

    def __repr__(self):
        return f"VecPoly{self.to_text()}"


# calculus ------------------------------------------------------------------

def derivative(p: Poly, axis: int) -> Poly:
    return p.derivative(axis)


def grad(p: Poly) -> VecPoly:
    return VecPoly(p.derivative(i) for i in range(p.nvars))


def div(v: VecPoly) -> Poly:
    if len(v) != v.nvars:
        raise ValueError("divergence needs as many components as variables")
    return sum((v[i].derivative(i) for i in range(len(v))), Poly(v.nvars))


def curl2_scalar(q: Poly) -> VecPoly:
    """``(-dq/dy, dq/dx)``."""
    if q.nvars != 2:
        raise ValueError("scalar curl is two-dimensional")
    return VecPoly([-q.derivative(1), q.derivative(0)])


def curl2_vector(v: VecPoly) -> Poly:
    """Planar rotation ``dv2/dx - dv1/dy``."""
    if v.nvars != 2 or len(v) != 2:
        raise ValueError("vector rotation is two-dimensional")
    return v[1].derivative(0) - v[0].derivative(1)


def curl3(v: VecPoly) -> VecPoly:
    if v.nvars != 3 or len(v) != 3:
        raise ValueError("curl3 needs a 3-component field in 3 variables")
    q1, q2, q3 = v.comps
    # component order follows (dq2/dz - dq3/dy, dq3/dx - dq1/dz, dq1/dy - dq2/dx)
    return VecPoly([q2.derivative(2) - q3.derivative(1),
                    q3.derivative(0) - q1.derivative(2),
                    q1.derivative(1) - q2.derivative(0)])


def curl(v) -> object:
    """Dimension-dispatching curl: scalar or 1-component field in 2D, vector field in 3D."""
    if isinstance(v, Poly):
        return curl2_scalar(v)
    if v.nvars == 2 and len(v) == 1:
        return curl2_scalar(v[0])
    if v.nvars == 2:
        return curl2_vector(v)
    return curl3(v)


def strain(v: VecPoly) -> list[list[Poly]]:
    """Symmetric gradient ``(dv_i/dx_j + dv_j/dx_i) / 2``."""
    d = v.nvars
    if len(v) != d:
        raise ValueError("strain needs d components in d variables")
    half = Q(1, 2)
    return [[(v[i].derivative(j) + v[j].derivative(i)) * half for j in range(d)] for i in range(d)]


def jacobian_matrix(v: VecPoly) -> list[list[Poly]]:
    return [[c.derivative(j) for j in range(v.nvars)] for c in v.comps]


# affine maps and integration ------------------------------------------------

def affine_substitution(A: Sequence[Sequence], b: Sequence) -> list[Poly]:
    """Substitutes for ``x = A s + b`` (``A`` is n x m)."""
    m = len(A[0]) if A and len(A[0]) else 0
    return [Poly.affine([to_q(a) for a in row], to_q(bi)) if m else Poly.const(0, bi)
            for row, bi in zip(A, b)]


def pullback_affine(p: Poly, A: Sequence[Sequence], b: Sequence) -> Poly:
    """``p o (s -> A s + b)``."""
    if len(A) != p.nvars:
        raise ValueError("map target dimension must match the polynomial")
    return p.compose(affine_substitution(A, b))


def _dirichlet(exp: tuple):
    """Integral of ``s^exp`` over the reference simplex of dimension ``len(exp)``."""
    num = 1
    for k in exp:
        num *= math.factorial(k)
    return Q(num, math.factorial(sum(exp) + len(exp)))


def integrate_reference_simplex(p: Poly):
    return sum((c * _dirichlet(e) for e, c in p.terms.items()), ZERO)


def integrate_box(p: Poly, lo: Sequence, hi: Sequence):
    total = ZERO
    for e, c in p.terms.items():
        v = c
        for k, a, b in zip(e, lo, hi):
            v *= (Q(b) ** (k + 1) - Q(a) ** (k + 1)) / (k + 1)
        total += v
    return total


def _cell_subs(T: Cell) -> list[Poly]:
    return affine_substitution(T.jacobian(), T.vertices[0])


def _monomial_image(memo: dict, subs: list[Poly], exp: tuple) -> Poly:
    """Image of ``x^exp`` under the substitution, built incrementally and memoised."""
    hit = memo.get(exp)
    if hit is not None:
        return hit
    if sum(exp) == 0:
        out = Poly.const(subs[0].nvars, 1)
    else:
        i = next(k for k, e in enumerate(exp) if e)
        prev = list(exp)
        prev[i] -= 1
        out = _monomial_image(memo, subs, tuple(prev)) * subs[i]
    memo[exp] = out
    return out


_CELL_MEMO: dict = {}


def _cell_monomial_integral(T: Cell, exp: tuple):
    key = (T.kind, T.vertices)
    entry = _CELL_MEMO.get(key)
    if entry is None:
        if len(_CELL_MEMO) > 512:
            _CELL_MEMO.clear()
        entry = {"subs": _cell_subs(T) if T.kind == "simplex" else None,
                 "images": {}, "ints": {}, "det": abs(T.jacobian_det()) if T.kind == "simplex" else None}
        _CELL_MEMO[key] = entry
    ints = entry["ints"]
    v = ints.get(exp)
    if v is None:
        if T.kind == "simplex":
            img = _monomial_image(entry["images"], entry["subs"], exp)
            v = integrate_reference_simplex(img) * entry["det"]
        else:
            lo, hi = T.vertices
            v = integrate_box(Poly.monomial(exp), lo, hi)
        ints[exp] = v
    return v


def integrate_cell(p: Poly, T: Cell):
    """Exact ``∫_T p dx``."""
    if p.nvars != T.dim:
        raise ValueError("polynomial dimension does not match the cell")
    return sum((c * _cell_monomial_integral(T, e) for e, c in p.terms.items()), ZERO)


def face_substitution(f: Face) -> list[Poly]:
    subs = f._memo.get("subs")
    if subs is None:
        subs = affine_substitution(f.chart_matrix, f.chart_origin)
        f._memo["subs"] = subs
    return subs


def restrict_poly(p: Poly, f: Face) -> Poly:
    """Pull an ambient polynomial back to the face chart."""
    if p.nvars != f.dim:
        raise ValueError("polynomial dimension does not match the face")
    subs = face_substitution(f)
    images = f._memo.setdefault("images", {})
    out: dict = {}
    for e, c in p.terms.items():
        for te, tc in _monomial_image(images, subs, e).terms.items():
            out[te] = out.get(te, ZERO) + c * tc
    return Poly(f.chart_dim, out)


def restrict_to_face(v, f: Face):
    """Trace of an ambient scalar or vector polynomial in face-chart variables.

    Vector fields keep their ambient components.
    """
    if isinstance(v, Poly):
        return restrict_poly(v, f)
    return VecPoly(restrict_poly(c, f) for c in v.comps)


def integrate_face(p: Poly, f: Face):
    """Exact chart-measure integral of a chart polynomial over the face."""
    if p.nvars != f.chart_dim:
        raise ValueError("integrand must be expressed in face-chart variables")
    if f.chart_kind == "simplex":
        return integrate_reference_simplex(p)
    return integrate_box(p, f.chart_lo, f.chart_hi)


def chart_coordinates(f: Face) -> list[Poly]:
    return [Poly.var(i, f.chart_dim) for i in range(f.chart_dim)]


def chart_position(f: Face) -> VecPoly:
    """The ambient position ``x(s)`` as a chart vector polynomial."""
    return VecPoly(face_substitution(f))


def barycentric(T: Cell) -> list[Poly]:
    """Barycentric coordinates of a simplex as affine polynomials; ``λ_i(v_j) = δ_ij``."""
    if T.kind != "simplex":
        raise GeometryError("barycentric coordinates need a simplex")
    d = T.dim
    J = T.jacobian()
    inv_cols = []
    for k in range(d):
        e = [ONE if i == k else ZERO for i in range(d)]
        inv_cols.append(linalg.solve(J, e))
    # row i of J^{-1} is [inv_cols[k][i] for k]
    v0 = T.vertices[0]
    lam = []
    for i in range(d):
        row = [inv_cols[k][i] for k in range(d)]
        const = -sum((row[k] * v0[k] for k in range(d)), ZERO)
        lam.append(Poly.affine(row, const))
    lam0 = Poly.const(d, 1) - sum(lam, Poly(d))
    return [lam0] + lam


def random_poly(rng, nvars: int, degree: int, density: float = 1.0, num: int = 5, den: int = 4) -> Poly:
    """Random polynomial with small rational coefficients (test and property helper)."""
    t = {}
    for e in monomials(nvars, degree):
        if rng.random() <= density:
            t[e] = Q(rng.randint(-num, num), rng.randint(1, den))
    return Poly(nvars, t)


def random_vecpoly(rng, nvars: int, ncomps: int, degree: int, **kw) -> VecPoly:
    return VecPoly(random_poly(rng, nvars, degree, **kw) for _ in range(ncomps))


def coefficient_rows(fields: Sequence) -> tuple[list[list], list]:
    """Coefficient vectors of scalar or vector polynomials over a shared index.

    Returns ``(rows, index)`` where ``index`` lists ``(component, exponent)``
    in a fixed order and ``rows[k]`` is the vector of ``fields[k]``.
    """
    keys = set()
    vecs = [[f] if isinstance(f, Poly) else list(f.comps) for f in fields]
    for comps in vecs:
        for ci, c in enumerate(comps):
            for e in c.terms:
                keys.add((ci, e))
    index = sorted(keys, key=lambda k: (k[0], grlex_key(k[1])))
    pos = {k: i for i, k in enumerate(index)}
    rows = []
    for comps in vecs:
        row = [ZERO] * len(index)
        for ci, c in enumerate(comps):
            for e, v in c.terms.items():
                row[pos[(ci, e)]] = v
        rows.append(row)
    return rows, index


def span_rank(fields: Sequence) -> int:
    if not fields:
        return 0
    rows, index = coefficient_rows(fields)
    if not index:
        return 0
    return linalg.rank(rows)


def linear_combination(coeffs: Sequence, fields: Sequence):
    if not fields:
        raise ValueError("empty combination")
    acc = None
    for c, f in zip(coeffs, fields):
        if c == 0:
            continue
        term = f * c
        acc = term if acc is None else acc + term
    if acc is None:
        acc = fields[0] * 0
    return acc
