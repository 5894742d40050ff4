"""Small exact linear algebra over Fractions or ParamExprs (lists of lists)."""
from __future__ import annotations

from fractions import Fraction


class DimensionMismatch(ValueError):
    pass


def shape(m) -> tuple[int, int]:
    return len(m), (len(m[0]) if m else 0)


def identity(n: int) -> list[list]:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(n: int, k: int | None = None) -> list[list]:
    return [[Fraction(0)] * (n if k is None else k) for _ in range(n)]


def mat_mul(a, b) -> list[list]:
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ca != rb:
        raise DimensionMismatch(f"cannot multiply {ra}x{ca} by {rb}x{cb}")
    out = []
    for i in range(ra):
        row = []
        for j in range(cb):
            acc = Fraction(0)
            for k in range(ca):
                if a[i][k] != 0 and b[k][j] != 0:
                    acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def mat_add(a, b, sign: int = 1) -> list[list]:
    if shape(a) != shape(b):
        raise DimensionMismatch(f"shapes {shape(a)} and {shape(b)} differ")
    return [[x + sign * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b) -> list[list]:
    return mat_add(a, b, -1)


def mat_scale(a, c) -> list[list]:
    return [[c * x for x in row] for row in a]


def commutator(a, b) -> list[list]:
    """AB - BA for square matrices of equal size."""
    if shape(a) != shape(b) or shape(a)[0] != shape(a)[1]:
        raise DimensionMismatch(f"commutator needs equal square matrices, got {shape(a)}, {shape(b)}")
    return mat_sub(mat_mul(a, b), mat_mul(b, a))


def is_zero_matrix(a) -> bool:
    return all(x == 0 for row in a for x in row)


def det_bareiss(m):
    """Determinant by fraction-free (Bareiss) elimination.

    Every division is exact in the coefficient ring, so for polynomial
    entries the intermediate values stay polynomials.
    """
    n, k = shape(m)
    if n != k:
        raise DimensionMismatch(f"determinant of non-square {n}x{k} matrix")
    if n == 0:
        return Fraction(1)
    a = [list(row) for row in m]
    sign = 1
    prev = Fraction(1)
    for p in range(n - 1):
        if a[p][p] == 0:
            for r in range(p + 1, n):
                if a[r][p] != 0:
                    a[p], a[r] = a[r], a[p]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(p + 1, n):
            for j in range(p + 1, n):
                a[i][j] = (a[i][j] * a[p][p] - a[i][p] * a[p][j]) / prev
        prev = a[p][p]
    return a[n - 1][n - 1] * sign


def null_space(m) -> list[list]:
    """Basis of the right null space via exact row reduction.

    Pivots are the first nonzero entry in each column (symbolic entries count
    as nonzero unless they normalize to 0).  Each basis vector has a 1 in its
    free coordinate.
    """
    rows, cols = shape(m)
    a = [list(r) for r in m]
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        piv = a[r][c]
        a[r] = [x / piv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fc]
        basis.append(v)
    return basis


def null_vector(m) -> list | None:
    """First null-space basis vector, scaled so its first nonzero entry is 1."""
    basis = null_space(m)
    if not basis:
        return None
    v = basis[0]
    lead = next(x for x in v if x != 0)
    return [x / lead for x in v]
