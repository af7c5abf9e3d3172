"""Exact linear algebra over the rationals.

Matrices are plain lists of rows. Every routine copies its input; nothing here
mutates caller data.
"""
from __future__ import annotations

from typing import Sequence

from .rational import ONE, ZERO, Q

Matrix = list[list]


def _copy(rows: Sequence[Sequence]) -> Matrix:
    return [[Q(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the pivot columns.

    Zero rows are dropped from the returned matrix, so ``len(R) == rank``.
    """
    m = _copy(rows)
    if not m:
        return [], []
    n = len(m[0]) if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        prow = m[r]
        inv = ONE / prow[c]
        if inv != 1:
            for j in range(c, n):
                if prow[j] != 0:
                    prow[j] *= inv
        nz = [j for j in range(c, n) if prow[j] != 0]
        for i in range(len(m)):
            if i == r:
                continue
            f = m[i][c]
            if f == 0:
                continue
            row = m[i]
            for j in nz:
                row[j] -= f * prow[j]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> Matrix:
    """Basis of ``{x : A x = 0}`` as a list of vectors (one free variable each)."""
    if ncols == 0:
        return []
    if not rows:
        return [[ONE if i == j else ZERO for i in range(ncols)] for j in range(ncols)]
    R, piv = rref(rows, ncols)
    free = [j for j in range(ncols) if j not in set(piv)]
    basis = []
    for fj in free:
        v = [ZERO] * ncols
        v[fj] = ONE
        for i, pc in enumerate(piv):
            v[pc] = -R[i][fj]
        basis.append(v)
    return basis


def transpose(rows: Sequence[Sequence]) -> Matrix:
    if not rows:
        return []
    return [list(col) for col in zip(*rows)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    Bt = transpose(B)
    return [[sum((a * b for a, b in zip(row, col)), ZERO) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence], x: Sequence) -> list:
    return [sum((a * b for a, b in zip(row, x)), ZERO) for row in A]


def det(A: Sequence[Sequence]):
    """Exact determinant by fraction Gaussian elimination."""
    m = _copy(A)
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("determinant of a non-square matrix")
    d = ONE
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return ZERO
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        inv = ONE / m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] * inv
            if f == 0:
                continue
            for j in range(c, n):
                m[i][j] -= f * m[c][j]
    return d


def solve(A: Sequence[Sequence], b: Sequence) -> list:
    """Unique solution of a square nonsingular system."""
    n = len(A)
    aug = [list(row) + [b[i]] for i, row in enumerate(A)]
    R, piv = rref(aug, n + 1)
    if piv != list(range(n)):
        raise ValueError("singular or inconsistent system")
    return [R[i][n] for i in range(n)]


def min_norm_solution(A: Sequence[Sequence], b: Sequence) -> list:
    """Least Euclidean-norm solution of a consistent system ``A x = b``.

    Computed as ``x = Aᵀ y`` with ``(A Aᵀ) y = b`` restricted to a maximal
    independent row subset, so the answer stays rational.
    """
    if not A:
        return []
    n = len(A[0])
    aug = [list(row) + [b[i]] for i, row in enumerate(A)]
    _, piv = rref(aug, n + 1)
    if n in piv:
        raise ValueError("inconsistent system")
    # independent rows of A
    keep: list[int] = []
    basis: Matrix = []
    for i, row in enumerate(A):
        if rank(basis + [list(row)]) > len(basis):
            basis.append(list(row))
            keep.append(i)
    if not keep:
        return [ZERO] * n
    Ak = [list(A[i]) for i in keep]
    bk = [b[i] for i in keep]
    gram = matmul(Ak, transpose(Ak))
    y = solve(gram, bk)
    return matvec(transpose(Ak), y)


def in_span(vectors: Sequence[Sequence], v: Sequence) -> bool:
    return rank(list(vectors) + [list(v)]) == rank(vectors)


def independent_subset(vectors: Sequence[Sequence]) -> list[int]:
    """Indices of a maximal linearly independent subset, earliest first."""
    if not vectors:
        return []
    _, piv = rref(transpose(vectors), len(vectors))
    return piv


def column_space_intersection_dim(A: Sequence[Sequence], B: Sequence[Sequence]) -> int:
    """``dim(span A ∩ span B)`` for two lists of vectors."""
    return rank(A) + rank(B) - rank(list(A) + list(B))
