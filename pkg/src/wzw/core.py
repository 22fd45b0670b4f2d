"""Exact rational linear algebra.

Everything is over ``fractions.Fraction``.  Vectors are sparse dicts
``{index: Fraction}`` internally; the public kernel/quotient functions hand
back dense tuples so results compare and serialize trivially.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Vector = dict  # index -> Fraction, zeros never stored


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def format_rational(x) -> str:
    """Exact string form: ``"p/q"``, or ``"p"`` when the denominator is 1."""
    return str(frac(x))


def vec_axpy(y: Vector, a: Fraction, x: Mapping) -> None:
    """``y += a * x`` in place, purging zeros."""
    if not a:
        return
    for k, v in x.items():
        s = y.get(k, 0) + a * v
        if s:
            y[k] = s
        else:
            y.pop(k, None)


def vec_scale(a, x: Mapping) -> Vector:
    if not a:
        return {}
    return {k: a * v for k, v in x.items()}


def vec_from_dense(values: Iterable) -> Vector:
    return {i: frac(v) for i, v in enumerate(values) if v}


def vec_to_dense(x: Mapping, n: int) -> tuple:
    out = [Fraction(0)] * n
    for k, v in x.items():
        out[k] = v
    return tuple(out)


class SparseMatrix:
    """Immutable sparse matrix with exact entries, stored row-major.

    Zero entries are never stored; indices are range-checked on construction.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, entries: Mapping | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative shape")
        self.rows = rows
        self.cols = cols
        data: dict[int, dict[int, Fraction]] = {}
        if entries:
            for (i, j), v in entries.items():
                if not (0 <= i < rows and 0 <= j < cols):
                    raise IndexError(f"entry ({i}, {j}) outside {rows}x{cols}")
                v = frac(v)
                if v:
                    data.setdefault(i, {})[j] = v
        self._data = data

    @classmethod
    def _from_rows(cls, rows: int, cols: int, data: dict) -> "SparseMatrix":
        m = cls.__new__(cls)
        m.rows, m.cols = rows, cols
        m._data = {i: r for i, r in data.items() if r}
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseMatrix":
        return cls._from_rows(rows, cols, {})

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls._from_rows(n, n, {i: {i: Fraction(1)} for i in range(n)})

    @classmethod
    def scalar(cls, n: int, value) -> "SparseMatrix":
        value = frac(value)
        if not value:
            return cls.zeros(n, n)
        return cls._from_rows(n, n, {i: {i: value} for i in range(n)})

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        data = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged rows")
            r = {j: frac(v) for j, v in enumerate(row) if v}
            if r:
                data[i] = r
        return cls._from_rows(nrows, ncols, data)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Mapping]) -> "SparseMatrix":
        """Assemble from sparse column vectors."""
        data: dict[int, dict[int, Fraction]] = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    if not 0 <= i < rows:
                        raise IndexError(i)
                    data.setdefault(i, {})[j] = v
        return cls._from_rows(rows, len(columns), data)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self._data.get(i, {}).get(j, Fraction(0))

    def entries(self) -> Iterable[tuple[int, int, Fraction]]:
        for i in sorted(self._data):
            row = self._data[i]
            for j in sorted(row):
                yield i, j, row[j]

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self._data.values())

    def row(self, i: int) -> Vector:
        return dict(self._data.get(i, {}))

    def column(self, j: int) -> Vector:
        return {i: r[j] for i, r in self._data.items() if j in r}

    def columns(self) -> list[Vector]:
        cols: list[Vector] = [{} for _ in range(self.cols)]
        for i, r in self._data.items():
            for j, v in r.items():
                cols[j][i] = v
        return cols

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for i, r in self._data.items():
            for j, v in r.items():
                out[i][j] = v
        return out

    def is_zero(self) -> bool:
        return not self._data

    def max_abs(self) -> Fraction:
        return max((abs(v) for r in self._data.values() for v in r.values()),
                   default=Fraction(0))

    @property
    def T(self) -> "SparseMatrix":
        data: dict[int, dict[int, Fraction]] = {}
        for i, r in self._data.items():
            for j, v in r.items():
                data.setdefault(j, {})[i] = v
        return SparseMatrix._from_rows(self.cols, self.rows, data)

    def apply(self, x: Mapping) -> Vector:
        """Matrix times sparse column vector."""
        out: Vector = {}
        if not x:
            return out
        for i, r in self._data.items():
            s = 0
            if len(r) < len(x):
                for j, v in r.items():
                    xj = x.get(j)
                    if xj:
                        s += v * xj
            else:
                for j, xj in x.items():
                    v = r.get(j)
                    if v:
                        s += v * xj
            if s:
                out[i] = Fraction(s)
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        odata = other._data
        data = {}
        for i, r in self._data.items():
            acc: Vector = {}
            for k, v in r.items():
                orow = odata.get(k)
                if orow:
                    vec_axpy(acc, v, orow)
            if acc:
                data[i] = acc
        return SparseMatrix._from_rows(self.rows, other.cols, data)

    def _combine(self, other: "SparseMatrix", sign: int) -> "SparseMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        data = {i: dict(r) for i, r in self._data.items()}
        for i, r in other._data.items():
            acc = data.setdefault(i, {})
            vec_axpy(acc, Fraction(sign), r)
        return SparseMatrix._from_rows(self.rows, self.cols, data)

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self._combine(other, 1)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self._combine(other, -1)

    def __neg__(self) -> "SparseMatrix":
        return self.scale(-1)

    def scale(self, a) -> "SparseMatrix":
        a = frac(a)
        if not a:
            return SparseMatrix.zeros(self.rows, self.cols)
        return SparseMatrix._from_rows(
            self.rows, self.cols,
            {i: {j: a * v for j, v in r.items()} for i, r in self._data.items()})

    def __mul__(self, a) -> "SparseMatrix":
        return self.scale(a)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(self.entries())))

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    def power(self, n: int) -> "SparseMatrix":
        if self.rows != self.cols:
            raise ValueError("power of non-square matrix")
        out = SparseMatrix.identity(self.rows)
        for _ in range(n):
            out = self @ out
        return out

    def kron(self, other: "SparseMatrix") -> "SparseMatrix":
        data: dict[int, dict[int, Fraction]] = {}
        for i, r in self._data.items():
            for k, s in other._data.items():
                row = data.setdefault(i * other.rows + k, {})
                for j, v in r.items():
                    base = j * other.cols
                    for l, w in s.items():
                        row[base + l] = v * w
        return SparseMatrix._from_rows(self.rows * other.rows,
                                       self.cols * other.cols, data)

    def select(self, rows: Sequence[int] | None = None,
               cols: Sequence[int] | None = None) -> "SparseMatrix":
        """Submatrix on the given row/column index lists (in that order)."""
        rmap = {r: a for a, r in enumerate(rows)} if rows is not None else None
        cmap = {c: b for b, c in enumerate(cols)} if cols is not None else None
        data: dict[int, dict[int, Fraction]] = {}
        for i, r in self._data.items():
            if rmap is not None:
                if i not in rmap:
                    continue
                ii = rmap[i]
            else:
                ii = i
            if cmap is None:
                data[ii] = dict(r)
            else:
                nr = {cmap[j]: v for j, v in r.items() if j in cmap}
                if nr:
                    data[ii] = nr
        return SparseMatrix._from_rows(
            len(rows) if rows is not None else self.rows,
            len(cols) if cols is not None else self.cols, data)

    @staticmethod
    def vstack(blocks: Sequence["SparseMatrix"], cols: int | None = None) -> "SparseMatrix":
        if cols is None:
            cols = blocks[0].cols if blocks else 0
        data = {}
        off = 0
        for b in blocks:
            if b.cols != cols:
                raise ValueError("column mismatch in vstack")
            for i, r in b._data.items():
                data[off + i] = dict(r)
            off += b.rows
        return SparseMatrix._from_rows(off, cols, data)

    @staticmethod
    def block_diag(blocks: Sequence["SparseMatrix"]) -> "SparseMatrix":
        data = {}
        ro = co = 0
        for b in blocks:
            for i, r in b._data.items():
                data[ro + i] = {co + j: v for j, v in r.items()}
            ro += b.rows
            co += b.cols
        return SparseMatrix._from_rows(ro, co, data)


class Echelon:
    """Incrementally maintained reduced row echelon form.

    Rows are normalized to a leading 1 at their pivot (the smallest column
    index in the row) and kept mutually reduced, so the state is the unique
    RREF of the span of everything inserted, independent of insertion order.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, Vector] = {}

    def reduce(self, v: Mapping) -> Vector:
        w = dict(v)
        for p in [p for p in w if p in self.pivots]:
            c = w.get(p)
            if c:
                vec_axpy(w, -c, self.pivots[p])
        return w

    def insert(self, v: Mapping) -> bool:
        """Add ``v`` to the span; return True when the rank grew."""
        w = self.reduce(v)
        if not w:
            return False
        q = min(w)
        inv = 1 / w[q]
        w = {k: x * inv for k, x in w.items()}
        for row in self.pivots.values():
            c = row.get(q)
            if c:
                vec_axpy(row, -c, w)
        self.pivots[q] = w
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def pivot_columns(self) -> list[int]:
        return sorted(self.pivots)

    def free_columns(self) -> list[int]:
        return [j for j in range(self.ncols) if j not in self.pivots]


def rref(m: SparseMatrix) -> tuple[list[Vector], list[int]]:
    """Reduced row echelon form of ``m``: (nonzero rows by pivot, pivots)."""
    ech = Echelon(m.cols)
    for i in range(m.rows):
        r = m._data.get(i)
        if r:
            ech.insert(r)
    piv = ech.pivot_columns()
    return [ech.pivots[p] for p in piv], piv


def rank(m: SparseMatrix) -> int:
    return len(rref(m)[1])


def kernel_basis(m: SparseMatrix) -> list[tuple]:
    """Basis of the null space, one vector per free column (ascending)."""
    rows, piv = rref(m)
    pset = set(piv)
    out = []
    for f in range(m.cols):
        if f in pset:
            continue
        v = {f: Fraction(1)}
        for p, r in zip(piv, rows):
            c = r.get(f)
            if c:
                v[p] = -c
        out.append(vec_to_dense(v, m.cols))
    return out


@dataclass(frozen=True)
class QuotientMap:
    """Linear surjection ``ambient -> ambient / span(generators)``.

    ``projection`` is (dim x ambient_dim), ``section`` is (ambient_dim x dim)
    with ``projection @ section == identity``.  ``free`` lists the ambient
    coordinates that survive as quotient coordinates.
    """

    ambient_dim: int
    dim: int
    projection: SparseMatrix
    section: SparseMatrix
    free: tuple = field(default=())

    def project(self, v: Mapping) -> Vector:
        return self.projection.apply(v)


def quotient_from_echelon(ech: Echelon) -> QuotientMap:
    n = ech.ncols
    free = ech.free_columns()
    fpos = {j: a for a, j in enumerate(free)}
    entries = {(fpos[j], j): 1 for j in free}
    for p, row in ech.pivots.items():
        for j, v in row.items():
            if j != p:
                entries[(fpos[j], p)] = -v
    proj = SparseMatrix(len(free), n, entries)
    sec = SparseMatrix(n, len(free), {(j, a): 1 for a, j in enumerate(free)})
    return QuotientMap(n, len(free), proj, sec, tuple(free))


def image_quotient(ambient_dim: int, generators: Iterable) -> QuotientMap:
    """Quotient of ``Q^ambient_dim`` by the span of ``generators``.

    Generators may be dense sequences or sparse dicts.
    """
    ech = Echelon(ambient_dim)
    for g in generators:
        if isinstance(g, Mapping):
            gv = {k: frac(v) for k, v in g.items() if v}
        else:
            if len(g) != ambient_dim:
                raise ValueError("generator length differs from ambient dimension")
            gv = vec_from_dense(g)
        if any(not 0 <= k < ambient_dim for k in gv):
            raise ValueError("generator index out of range")
        ech.insert(gv)
    return quotient_from_echelon(ech)


def inverse(m: SparseMatrix) -> SparseMatrix:
    """Exact inverse of a square matrix (raises on singular input)."""
    n = m.rows
    if m.cols != n:
        raise ValueError("inverse of non-square matrix")
    ech = Echelon(2 * n)
    for i in range(n):
        r = dict(m._data.get(i, {}))
        r[n + i] = Fraction(1)
        ech.insert(r)
    if any(p >= n for p in ech.pivots):
        raise ZeroDivisionError("singular matrix")
    data = {}
    for i in range(n):
        row = ech.pivots[i]
        data[i] = {j - n: v for j, v in row.items() if j >= n}
    return SparseMatrix._from_rows(n, n, data)


def express_columns(m: SparseMatrix) -> tuple[list[int], SparseMatrix]:
    """Pick the pivot columns of ``m`` and write every column in them.

    Returns ``(pivots, C)`` with ``m == m.select(cols=pivots) @ C``.
    """
    rows, piv = rref(m)
    C = SparseMatrix._from_rows(len(piv), m.cols, {a: dict(r) for a, r in enumerate(rows)})
    return piv, C


class TruncatedSeries:
    """Power series ``sum_{d<=order} c_d var^d`` with exact coefficients.

    Coefficients are Fractions or SparseMatrices (all of one shape).
    """

    __slots__ = ("var", "coeffs")

    def __init__(self, var: str, coeffs: Sequence):
        self.var = var
        self.coeffs = tuple(frac(c) if not isinstance(c, SparseMatrix) else c for c in coeffs)
        if not self.coeffs:
            raise ValueError("series needs at least the constant coefficient")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def monomial(cls, var: str, power: int, order: int, coeff=1) -> "TruncatedSeries":
        c = [Fraction(0)] * (order + 1)
        if 0 <= power <= order:
            c[power] = frac(coeff)
        return cls(var, c)

    def _check(self, other: "TruncatedSeries"):
        if self.var != other.var or self.order != other.order:
            raise ValueError("incompatible series")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.var, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.var, [c * other for c in self.coeffs])
        self._check(other)
        n = self.order
        out = []
        for d in range(n + 1):
            s = None
            for i in range(d + 1):
                term = self.coeffs[i] @ other.coeffs[d - i] if isinstance(
                    self.coeffs[i], SparseMatrix) else self.coeffs[i] * other.coeffs[d - i]
                s = term if s is None else s + term
            out.append(s)
        return TruncatedSeries(self.var, out)

    def is_zero(self) -> bool:
        return all((c.is_zero() if isinstance(c, SparseMatrix) else not c) for c in self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.var == other.var and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        terms = [f"{c}*{self.var}^{d}" for d, c in enumerate(self.coeffs)
                 if not (not isinstance(c, SparseMatrix) and not c)]
        return "TruncatedSeries(" + (" + ".join(terms) or "0") + f"; O({self.var}^{self.order + 1}))"


# -- JSON codec ---------------------------------------------------------------

def matrix_to_json(m: SparseMatrix) -> dict:
    return {"rows": m.rows, "cols": m.cols,
            "entries": [[i, j, format_rational(v)] for i, j, v in m.entries()]}


def matrix_from_json(obj: Mapping) -> SparseMatrix:
    return SparseMatrix(obj["rows"], obj["cols"],
                        {(i, j): Fraction(v) for i, j, v in obj["entries"]})


def vector_to_json(v: Sequence) -> list[str]:
    return [format_rational(x) for x in v]


def vector_from_json(v: Sequence[str]) -> tuple:
    return tuple(Fraction(x) for x in v)
