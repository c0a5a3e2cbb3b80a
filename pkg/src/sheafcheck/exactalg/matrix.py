"""Immutable exact matrices over Q, Z, and F_p, with the elimination suite.

All arithmetic is exact.  Row reduction over F_p is dispatched to the
int64 kernels in :mod:`sheafcheck._kernels`; Q uses ``Fraction`` and Z uses
arbitrary-precision integers.  Column vectors act on the right: a matrix with
``rows`` rows and ``cols`` columns is a map ``R^cols -> R^rows``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .rings import Ring, ValidationError, ZZ
from .. import _kernels


class Matrix:
    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring: Ring, rows: int, cols: int, entries: Iterable[Iterable]) -> None:
        if rows < 0 or cols < 0:
            raise ValidationError("negative matrix dimensions")
        canon = tuple(tuple(ring.canon(v) for v in row) for row in entries)
        if len(canon) != rows or any(len(row) != cols for row in canon):
            raise ValidationError(f"entry grid does not match shape {rows}x{cols}")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", canon)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def from_rows(ring: Ring, rows: Sequence[Sequence]) -> "Matrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        return Matrix(ring, nrows, ncols, rows)

    @staticmethod
    def identity(ring: Ring, n: int) -> "Matrix":
        one, zero = ring.one(), ring.zero()
        return Matrix(ring, n, n, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @staticmethod
    def zeros(ring: Ring, rows: int, cols: int) -> "Matrix":
        zero = ring.zero()
        return Matrix(ring, rows, cols, [[zero] * cols for _ in range(rows)])

    @staticmethod
    def column(ring: Ring, values: Sequence) -> "Matrix":
        return Matrix(ring, len(values), 1, [[v] for v in values])

    # -- basic algebra ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.ring == other.ring
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self) -> int:
        return hash((self.ring, self.rows, self.cols, self.entries))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(self.ring.scalar_str(v) for v in row) for row in self.entries)
        return f"Matrix({self.ring}, {self.rows}x{self.cols}: [{body}])"

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ring != other.ring or self.cols != other.rows:
            raise ValidationError("matrix product shape/ring mismatch")
        ring = self.ring
        zero = ring.zero()
        out = []
        for i in range(self.rows):
            row_i = self.entries[i]
            out_row = []
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    a = row_i[k]
                    if a != zero:
                        acc = ring.add(acc, ring.mul(a, other.entries[k][j]))
                out_row.append(acc)
            out.append(out_row)
        return Matrix(ring, self.rows, other.cols, out)

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.ring != other.ring or (self.rows, self.cols) != (other.rows, other.cols):
            raise ValidationError("matrix sum shape/ring mismatch")
        ring = self.ring
        return Matrix(
            ring,
            self.rows,
            self.cols,
            [
                [ring.add(a, b) for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ],
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def __neg__(self) -> "Matrix":
        ring = self.ring
        return Matrix(ring, self.rows, self.cols, [[ring.neg(v) for v in row] for row in self.entries])

    def scale(self, c) -> "Matrix":
        ring = self.ring
        c = ring.canon(c)
        return Matrix(ring, self.rows, self.cols, [[ring.mul(c, v) for v in row] for row in self.entries])

    def transpose(self) -> "Matrix":
        return Matrix(self.ring, self.cols, self.rows, list(zip(*self.entries)) if self.rows else [[] for _ in range(self.cols)])

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.ring != other.ring or self.rows != other.rows:
            raise ValidationError("hstack mismatch")
        return Matrix(self.ring, self.rows, self.cols + other.cols,
                      [ra + rb for ra, rb in zip(self.entries, other.entries)])

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.ring != other.ring or self.cols != other.cols:
            raise ValidationError("vstack mismatch")
        return Matrix(self.ring, self.rows + other.rows, self.cols, self.entries + other.entries)

    def col(self, j: int) -> "Matrix":
        return Matrix(self.ring, self.rows, 1, [[row[j]] for row in self.entries])

    def cols_slice(self, idx: Sequence[int]) -> "Matrix":
        return Matrix(self.ring, self.rows, len(idx), [[row[j] for j in idx] for row in self.entries])

    def is_zero(self) -> bool:
        zero = self.ring.zero()
        return all(v == zero for row in self.entries for v in row)

    def to_ring(self, ring: Ring) -> "Matrix":
        return Matrix(ring, self.rows, self.cols, self.entries)

    def column_vector(self, j: int = 0) -> tuple:
        return tuple(row[j] for row in self.entries)


def block_diag(ring: Ring, blocks: Sequence[Matrix]) -> Matrix:
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = [[ring.zero()] * cols for _ in range(rows)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                out[r0 + i][c0 + j] = b.entries[i][j]
        r0 += b.rows
        c0 += b.cols
    return Matrix(ring, rows, cols, out)


# -- field elimination ----------------------------------------------------------


def _rref_generic(m: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    ring = m.ring
    a = [list(row) for row in m.entries]
    rows, cols = m.rows, m.cols
    zero = ring.zero()
    piv: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        pivot_row = next((i for i in range(r, rows) if a[i][c] != zero), None)
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        inv = ring.inv(a[r][c])
        a[r] = [ring.mul(inv, v) for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != zero:
                f = a[i][c]
                a[i] = [ring.sub(v, ring.mul(f, w)) for v, w in zip(a[i], a[r])]
        piv.append(c)
        r += 1
    return Matrix(ring, rows, cols, a), tuple(piv)


def _to_int64(m: Matrix) -> np.ndarray:
    if m.rows == 0 or m.cols == 0:
        return np.zeros((m.rows, m.cols), dtype=np.int64)
    return np.array(m.entries, dtype=np.int64)


def rref(m: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form over a field; returns (reduced matrix, pivot cols)."""
    if not m.ring.is_field:
        raise ValidationError("rref needs a field; use smith_normal_form over Z")
    if m.ring.kind == "fp" and m.rows and m.cols:
        arr, piv = _kernels.rref_mod_p(_to_int64(m), m.ring.p)
        red = Matrix(m.ring, m.rows, m.cols, [[int(v) for v in row] for row in arr])
        return red, tuple(int(c) for c in piv)
    return _rref_generic(m)


def rank(m: Matrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.ring.kind == "fp":
        return _kernels.rank_mod_p(_to_int64(m), m.ring.p)
    if m.ring.kind == "z":
        return len(rref(m.to_ring(Ring("q")))[1])
    return len(rref(m)[1])


def kernel_basis(m: Matrix) -> Matrix:
    """Basis of the null space over a field (or of the integer kernel over Z).

    Returned as a matrix whose columns are the basis vectors, in a
    deterministic order (ascending free column over fields, transform order
    over Z).
    """
    if m.ring.kind == "z":
        d, _l, r = smith_normal_form(m)
        npiv = sum(1 for i in range(min(d.rows, d.cols)) if d.entries[i][i] != 0)
        return r.cols_slice(list(range(npiv, m.cols)))
    red, piv = rref(m)
    ring = m.ring
    piv_set = set(piv)
    free = [c for c in range(m.cols) if c not in piv_set]
    cols = []
    for f in free:
        v = [ring.zero()] * m.cols
        v[f] = ring.one()
        for r_idx, p_col in enumerate(piv):
            v[p_col] = ring.neg(red.entries[r_idx][f])
        cols.append(v)
    return Matrix(ring, m.cols, len(cols), list(zip(*cols)) if cols else [[] for _ in range(m.cols)])


def solve(m: Matrix, b: Matrix) -> Matrix | None:
    """One exact solution ``x`` of ``m @ x = b`` (column-wise), or None.

    Over a field the particular solution sets free variables to zero; over Z
    solvability is integral.
    """
    if m.ring.kind == "z":
        return _solve_integer(m, b)
    if m.rows != b.rows:
        raise ValidationError("solve shape mismatch")
    red, piv = rref(m.hstack(b))
    ring = m.ring
    zero = ring.zero()
    for c in piv:
        if c >= m.cols:
            return None
    out = [[zero] * b.cols for _ in range(m.cols)]
    for r_idx, p_col in enumerate(piv):
        for j in range(b.cols):
            out[p_col][j] = red.entries[r_idx][m.cols + j]
    return Matrix(ring, m.cols, b.cols, out)


def image_pivot_columns(m: Matrix) -> tuple[int, ...]:
    """Columns of ``m`` forming a basis of the column space (first-pivot rule)."""
    if m.ring.kind == "z":
        raise ValidationError("pivot column basis is a field operation")
    return rref(m)[1]


# -- Smith normal form over Z -------------------------------------------------


def smith_normal_form(m: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Diagonalize ``m``: returns (diagonal, left, right) with left@m@right = diagonal.

    Over Z the diagonal entries are nonnegative and divide in order, and the
    transforms are unimodular.  Over a field the diagonal is 1,...,1,0,...,0
    (row echelon with unit pivots, as the degenerate case).
    """
    if m.ring.is_field:
        return _snf_field(m)
    if m.ring.kind != "z":
        raise ValidationError("smith_normal_form is defined over Z and fields")
    a = [list(row) for row in m.entries]
    rows, cols = m.rows, m.cols
    left = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    right = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def row_sub(i, k, q):  # row_i -= q * row_k
        a[i] = [x - q * y for x, y in zip(a[i], a[k])]
        left[i] = [x - q * y for x, y in zip(left[i], left[k])]

    def col_sub(j, k, q):  # col_j -= q * col_k
        for row in a:
            row[j] -= q * row[k]
        for row in right:
            row[j] -= q * row[k]

    def row_swap(i, k):
        a[i], a[k] = a[k], a[i]
        left[i], left[k] = left[k], left[i]

    def col_swap(j, k):
        for row in a:
            row[j], row[k] = row[k], row[j]
        for row in right:
            row[j], row[k] = row[k], row[j]

    t = 0
    while t < min(rows, cols):
        # deterministic pivot: min |value|, ties by (row, col)
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = abs(a[i][j])
                if v and (pivot is None or v < pivot[0]):
                    pivot = (v, i, j)
        if pivot is None:
            break
        _, pi, pj = pivot
        if pi != t:
            row_swap(t, pi)
        if pj != t:
            col_swap(t, pj)
        while True:
            dirty = False
            for i in range(rows):
                if i != t and a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    row_sub(i, t, q)
                    if a[i][t] != 0:
                        row_swap(t, i)
                        dirty = True
            for j in range(cols):
                if j != t and a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    col_sub(j, t, q)
                    if a[t][j] != 0:
                        col_swap(t, j)
                        dirty = True
            if not dirty and all(a[i][t] == 0 for i in range(rows) if i != t) \
                    and all(a[t][j] == 0 for j in range(cols) if j != t):
                break
        # divisibility: every later entry must be a multiple of the pivot
        fixed = True
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % a[t][t] != 0:
                    row_i = a[i]
                    a[t] = [x + y for x, y in zip(a[t], row_i)]
                    left[t] = [x + y for x, y in zip(left[t], left[i])]
                    fixed = False
                    break
            if not fixed:
                break
        if not fixed:
            continue
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            left[t] = [-x for x in left[t]]
        t += 1
    return (
        Matrix(ZZ, rows, cols, a),
        Matrix(ZZ, rows, rows, left),
        Matrix(ZZ, cols, cols, right),
    )


def _snf_field(m: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    ring = m.ring
    a = [list(row) for row in m.entries]
    rows, cols = m.rows, m.cols
    left = [list(r) for r in Matrix.identity(ring, rows).entries]
    right = [list(r) for r in Matrix.identity(ring, cols).entries]
    zero = ring.zero()
    t = 0
    while t < min(rows, cols):
        pos = next(((i, j) for j in range(t, cols) for i in range(t, rows) if a[i][j] != zero), None)
        if pos is None:
            break
        pi, pj = pos
        a[t], a[pi] = a[pi], a[t]
        left[t], left[pi] = left[pi], left[t]
        if pj != t:
            for row in a:
                row[t], row[pj] = row[pj], row[t]
            for row in right:
                row[t], row[pj] = row[pj], row[t]
        inv = ring.inv(a[t][t])
        a[t] = [ring.mul(inv, v) for v in a[t]]
        left[t] = [ring.mul(inv, v) for v in left[t]]
        for i in range(rows):
            if i != t and a[i][t] != zero:
                f = a[i][t]
                a[i] = [ring.sub(x, ring.mul(f, y)) for x, y in zip(a[i], a[t])]
                left[i] = [ring.sub(x, ring.mul(f, y)) for x, y in zip(left[i], left[t])]
        for j in range(cols):
            if j != t and a[t][j] != zero:
                f = a[t][j]
                for row in a:
                    row[j] = ring.sub(row[j], ring.mul(f, row[t]))
                for row in right:
                    row[j] = ring.sub(row[j], ring.mul(f, row[t]))
        t += 1
    return (
        Matrix(ring, rows, cols, a),
        Matrix(ring, rows, rows, left),
        Matrix(ring, cols, cols, right),
    )


def elementary_divisors(m: Matrix) -> tuple:
    d, _, _ = smith_normal_form(m)
    return tuple(d.entries[i][i] for i in range(min(m.rows, m.cols)) if d.entries[i][i] != 0)


def _solve_integer(m: Matrix, b: Matrix) -> Matrix | None:
    if m.rows != b.rows:
        raise ValidationError("solve shape mismatch")
    d, left, right = smith_normal_form(m)
    y = left @ b
    npiv = sum(1 for i in range(min(m.rows, m.cols)) if d.entries[i][i] != 0)
    out = [[0] * b.cols for _ in range(m.cols)]
    for j in range(b.cols):
        for i in range(m.rows):
            val = y.entries[i][j]
            if i < npiv:
                di = d.entries[i][i]
                if val % di != 0:
                    return None
                out[i][j] = val // di
            elif val != 0:
                return None
    return right @ Matrix(ZZ, m.cols, b.cols, out)


def inverse(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise ValidationError("inverse of a non-square matrix")
    sol = solve(m, Matrix.identity(m.ring, m.rows))
    if sol is None or not (m @ sol == Matrix.identity(m.ring, m.rows)):
        raise ValidationError("matrix is not invertible")
    return sol


def is_invertible(m: Matrix) -> bool:
    if m.rows != m.cols:
        return False
    if m.ring.is_field:
        return rank(m) == m.rows
    return all(d == 1 for d in elementary_divisors(m)) and rank(m) == m.rows


def is_surjective(m: Matrix) -> bool:
    """Surjectivity of the map R^cols -> R^rows given by ``m``."""
    if m.ring.is_field:
        return rank(m) == m.rows
    divs = elementary_divisors(m)
    return len(divs) == m.rows and all(d == 1 for d in divs)


def is_injective(m: Matrix) -> bool:
    return rank(m) == m.cols


def abs_det(m: Matrix) -> int:
    """|det| of a square integer matrix (0 when singular)."""
    if m.ring.kind != "z" or m.rows != m.cols:
        raise ValidationError("abs_det needs a square integer matrix")
    divs = elementary_divisors(m)
    if len(divs) < m.rows:
        return 0
    out = 1
    for d in divs:
        out *= d
    return out
