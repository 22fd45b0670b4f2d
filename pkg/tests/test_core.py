from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from wzw.core import (Echelon, SparseMatrix, TruncatedSeries, express_columns, format_rational,
                      image_quotient, inverse, kernel_basis, matrix_from_json, matrix_to_json,
                      rank, rref, vector_from_json, vector_to_json)

small = st.integers(-4, 4)


@st.composite
def dense_matrices(draw, max_rows=6, max_cols=6):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return [[Fraction(draw(small), draw(st.integers(1, 3))) for _ in range(c)] for _ in range(r)]


def sympy_rank(rows):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in rows]).rank()


def test_kernel_of_identity_is_empty():
    assert kernel_basis(SparseMatrix.identity(2)) == []


def test_kernel_of_row_one_one():
    assert kernel_basis(SparseMatrix.from_dense([[1, 1]])) == [(Fraction(-1), Fraction(1))]


def test_kernel_of_rank_three_6x4():
    A = SparseMatrix.from_dense([[1, 2, 0], [0, 1, 1], [3, 0, 1], [1, 1, 1], [2, 0, 5], [0, 0, 1]])
    B = SparseMatrix.from_dense([[1, 0, 2, 1], [0, 1, 1, 0], [1, 1, 0, 3]])
    M = A @ B
    assert rank(M) == 3
    ker = kernel_basis(M)
    assert len(ker) == 1
    assert M.apply(dict(enumerate(ker[0]))) == {}


@settings(max_examples=60, deadline=None)
@given(dense_matrices())
def test_rank_nullity_against_sympy(rows):
    M = SparseMatrix.from_dense(rows)
    r = rank(M)
    assert r == sympy_rank(rows)
    ker = kernel_basis(M)
    assert len(ker) + r == M.cols
    for v in ker:
        assert M.apply({i: x for i, x in enumerate(v) if x}) == {}


@settings(max_examples=40, deadline=None)
@given(dense_matrices())
def test_rref_is_deterministic_and_canonical(rows):
    M = SparseMatrix.from_dense(rows)
    a, b = rref(M), rref(SparseMatrix.from_dense(rows))
    assert a == b
    shuffled = SparseMatrix.from_dense(list(reversed(rows)))
    assert rref(shuffled) == a  # RREF depends only on the row space
    for row, p in zip(*a):
        assert row[p] == 1 and min(row) == p


def test_image_quotient_examples():
    q = image_quotient(3, [])
    assert q.dim == 3 and q.projection == SparseMatrix.identity(3)
    assert image_quotient(2, [(1, 0), (0, 1)]).dim == 0
    gens = [(1, 2, 0, 1), (0, 1, 1, 0), (1, 3, 1, 1)]
    q = image_quotient(4, gens)
    assert q.dim == 4 - sympy_rank([[Fraction(x) for x in g] for g in gens]) == 2
    for g in gens:
        assert q.project(dict(enumerate(g))) == {}
    assert q.projection @ q.section == SparseMatrix.identity(2)


@settings(max_examples=40, deadline=None)
@given(dense_matrices(max_rows=5, max_cols=6))
def test_image_quotient_properties(rows):
    n = len(rows[0])
    q = image_quotient(n, rows)
    assert q.dim == n - sympy_rank(rows)
    assert q.projection @ q.section == SparseMatrix.identity(q.dim)
    for g in rows:
        assert q.project({i: x for i, x in enumerate(g) if x}) == {}


def test_image_quotient_rejects_bad_generators():
    with pytest.raises(ValueError):
        image_quotient(3, [(1, 2)])
    with pytest.raises(ValueError):
        image_quotient(2, [{5: 1}])


def test_sparse_matrix_drops_zeros_and_checks_range():
    M = SparseMatrix(2, 2, {(0, 0): 0, (1, 1): Fraction(1, 2)})
    assert M.nnz == 1
    assert (M - M).nnz == 0
    with pytest.raises((IndexError, ValueError)):
        SparseMatrix(2, 2, {(2, 0): 1})


def test_kron_and_algebra():
    A = SparseMatrix.from_dense([[1, 2], [3, 4]])
    B = SparseMatrix.from_dense([[0, 1], [1, 0]])
    K = A.kron(B)
    assert K.shape == (4, 4)
    assert K[0, 1] == 1 and K[3, 2] == 4
    assert (A @ B).T == B.T @ A.T
    assert A.power(3) == A @ A @ A


def test_inverse_and_singular():
    A = SparseMatrix.from_dense([[2, 1], [1, 1]])
    assert A @ inverse(A) == SparseMatrix.identity(2)
    with pytest.raises(ZeroDivisionError):
        inverse(SparseMatrix.from_dense([[1, 2], [2, 4]]))


def test_express_columns():
    M = SparseMatrix.from_dense([[1, 2, 3], [2, 4, 7]])
    piv, C = express_columns(M)
    assert piv == [0, 2]
    assert M.select(cols=piv) @ C == M


def test_echelon_insert_reports_independence():
    e = Echelon(3)
    assert e.insert({0: 1, 1: 1})
    assert not e.insert({0: 2, 1: 2})
    assert e.insert({2: 5})
    assert e.rank == 2 and e.free_columns() == [1]


def test_truncated_series():
    a = TruncatedSeries("tau", [1, 1, 0])
    assert a.order == 2
    assert (a * a) == TruncatedSeries("tau", [1, 2, 1])
    assert (a * a * a) == TruncatedSeries("tau", [1, 3, 3])  # tau^3 truncated
    with pytest.raises(ValueError):
        a + TruncatedSeries("tau", [1])


def test_json_round_trip_is_exact():
    M = SparseMatrix(2, 3, {(0, 1): Fraction(-1, 3), (1, 2): 5})
    obj = matrix_to_json(M)
    assert obj["entries"] == [[0, 1, "-1/3"], [1, 2, "5"]]
    assert matrix_from_json(obj) == M
    v = (Fraction(1, 2), Fraction(0), Fraction(-7))
    assert vector_from_json(vector_to_json(v)) == v
    assert format_rational(Fraction(6, 4)) == "3/2"
