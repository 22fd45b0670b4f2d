import itertools
from fractions import Fraction

import pytest
from sympy.functions.combinatorial.numbers import partition as npartitions

from wzw.affine import (LoopElement, ModuleError, GradedVector, bracket_check, build_module,
                        central_charge, contravariant_pairing, derivation_property_check,
                        epsilon_eigen_check, epsilon_eigenvalue, epsilon_invariance_check,
                        epsilon_tensor, expand_node_function, invariant_duality, loop_act,
                        node_annihilation_check, sugawara, sugawara_block, vacuum_vector,
                        virasoro_check)
from wzw.core import SparseMatrix, TruncatedSeries, rank
from wzw.lie import build_algebra


@pytest.fixture(scope="module")
def sl2():
    return build_algebra("sl2")


@pytest.fixture(scope="module")
def fock():
    return build_module("oscillator", depth=8)


@pytest.fixture(scope="module")
def vac(sl2):
    return build_module("affine", sl2, (0,), 1, 4)


@pytest.fixture(scope="module")
def spin(sl2):
    return build_module("affine", sl2, (1,), 1, 4)


def level_one_sl2_dims(weight, depth):
    """Lattice-vertex-operator character: sum_n p(d - n^2 - n*w) over n in Z."""
    w = weight[0]
    out = []
    for d in range(depth + 1):
        s = 0
        for n in range(-depth - 2, depth + 3):
            e = n * n + n * w
            if 0 <= e <= d:
                s += npartitions(d - e)
        out.append(s)
    return out


def test_oscillator_dims_are_partition_counts(fock):
    assert list(fock.dims) == [npartitions(d) for d in range(9)]
    assert list(build_module("oscillator", depth=4).dims) == [1, 1, 2, 3, 5]


@pytest.mark.parametrize("weight", [(0,), (1,)])
def test_level_one_dims_match_lattice_character(sl2, weight):
    m = build_module("affine", sl2, weight, 1, 5)
    assert list(m.dims) == level_one_sl2_dims(weight, 5)


def test_level_two_degree_one(sl2):
    m = build_module("affine", sl2, (0,), 2, 2)
    assert m.dims[1] == 3
    # at level 2, (E t^-1)^2 v0 survives and (E t^-1)^3 v0 would need depth 3
    assert m.dims[2] == 9


def test_rejects_level_too_high(sl2):
    with pytest.raises(ModuleError):
        build_module("affine", sl2, (2,), 1, 1)
    with pytest.raises(ModuleError):
        build_module("affine", sl2, (0,), 1, -1)


def test_gram_symmetric_nondegenerate(vac, spin, fock):
    for m in (vac, spin, fock):
        for d, G in enumerate(m.gram):
            assert G == G.T
            assert rank(G) == m.dims[d]


def test_truncation_monotonicity(sl2, spin):
    small = build_module("affine", sl2, (1,), 1, 2)
    cut = spin.restrict(2)
    assert cut.dims == small.dims and cut.basis == small.basis and cut.gram == small.gram
    for a in range(sl2.dim):
        for k in range(-2, 3):
            for d in range(3):
                if 0 <= d - k <= 2:
                    assert cut.op(a, k, d) == small.op(a, k, d)


def test_loop_act_vacuum_and_central(vac, sl2):
    E = sl2.basis_vector(sl2.e[0])
    v0 = vacuum_vector(vac)
    for k in (1, 2, 3):
        assert loop_act(vac, LoopElement(E, k), v0).is_zero()
    c = loop_act(vac, LoopElement(tuple([0] * 3), 0, Fraction(1)), v0)
    assert c == GradedVector({0: {0: Fraction(1)}})
    w = loop_act(vac, LoopElement(E, -1), loop_act(vac, LoopElement(E, -1), v0))
    assert w.is_zero() and not w.truncated


def test_loop_act_flags_window_exit(vac, sl2):
    E = sl2.basis_vector(sl2.e[0])
    v = GradedVector({4: {0: Fraction(1)}})
    assert loop_act(vac, LoopElement(E, -1), v).truncated


def test_bracket_relations(vac, spin, fock):
    for m in (vac, spin, fock):
        assert bracket_check(m).ok


def test_sugawara_degree_zero_scalars(sl2, spin, vac, fock):
    assert sugawara_block(spin, 0, 0) == SparseMatrix.scalar(2, Fraction(-1, 4))
    assert sugawara_block(vac, 0, 0) == SparseMatrix.scalar(1, 0)
    for d in range(9):
        assert sugawara_block(fock, 0, d) == SparseMatrix.scalar(fock.dims[d], -d)


def test_positive_modes_kill_vacuum(vac):
    for k in range(1, 5):
        assert sugawara(vac, k).matrices.get(0) is None or sugawara(vac, k).matrices[0].is_zero()


def test_central_charges(vac, fock):
    assert central_charge(vac) == 1
    assert central_charge(fock) == 1
    sl3 = build_algebra("sl3")
    assert central_charge(build_module("affine", sl3, (0, 0), 2, 0)) == Fraction(16, 5)


def test_oscillator_virasoro(fock):
    rep = virasoro_check(fock, 3)
    assert rep.ok and rep.checked > 0


def test_oscillator_central_term_2_minus_2(fock):
    d = 6
    lhs = (sugawara_block(fock, 2, d + 2) @ sugawara_block(fock, -2, d)
           - sugawara_block(fock, -2, d - 2) @ sugawara_block(fock, 2, d))
    # [T_2, T_-2] = -4 T_0 + 1/2 on depth d (d - 2 >= 0)
    assert lhs == sugawara_block(fock, 0, d).scale(-4) + SparseMatrix.scalar(fock.dims[d], Fraction(1, 2))


def test_affine_virasoro(vac, spin):
    assert virasoro_check(vac, 3).ok
    assert virasoro_check(spin, 3).ok


def test_virasoro_check_preconditions(vac):
    with pytest.raises(ModuleError):
        virasoro_check(vac, 5)


def test_derivation_property(vac, fock, sl2):
    assert derivation_property_check(vac, range(-3, 4)).ok
    assert derivation_property_check(fock, [0], [-1]).ok
    assert derivation_property_check(vac, [1], [-1], [sl2.basis_vector(1)]).ok
    assert derivation_property_check(vac, range(-2, 3), [0]).ok


def test_normal_ordering_changes_by_central_scalar(fock):
    D = fock.depth
    for j in range(1, 4):
        for d in range(D - j + 1):
            ordered = fock.op(0, j, d + j) @ fock.op(0, -j, d)
            if d - j >= 0:
                ordered = ordered - fock.op(0, -j, d - j) @ fock.op(0, j, d)
            assert ordered == SparseMatrix.scalar(fock.dims[d], j)


def test_sl3_module_small(sl2):
    sl3 = build_algebra("sl3")
    m = build_module("affine", sl3, (1, 0), 1, 2)
    assert m.dims[0] == 3 and m.dims[1] == 9
    assert virasoro_check(m, 2).ok
    assert sugawara_block(m, 0, 0) == SparseMatrix.scalar(3, -Fraction(8, 3) / (2 * 4))


# -- pairing and epsilon ---------------------------------------------------------

@pytest.mark.parametrize("weight", [(0,), (1,)])
def test_contravariant_pairing(sl2, weight):
    m = build_module("affine", sl2, weight, 1, 3)
    assert contravariant_pairing(m, m, 0) == invariant_duality(m.bottom, m.bottom)
    for d in range(4):
        B = contravariant_pairing(m, m, d)
        assert B.shape == (m.dims[d], m.dims[d]) and rank(B) == m.dims[d]
        for d2 in range(4):
            if d2 != d:
                assert contravariant_pairing(m, m, d, d2).is_zero()
    # adjointness b(X t^k u, u') + b(u, X t^-k u') = 0
    for a, k, d in itertools.product(range(3), range(-2, 3), range(4)):
        if not 0 <= d - k <= 3:
            continue
        P = m.zero_or(m.op(a, k, d), d - k, d)
        Q = m.zero_or(m.op(a, -k, d - k), d, d - k)
        assert P.T @ contravariant_pairing(m, m, d - k) + contravariant_pairing(m, m, d) @ Q == \
            SparseMatrix.zeros(m.dims[d], m.dims[d - k])


def test_vacuum_pairing_degree_one_is_3x3(sl2):
    m = build_module("affine", sl2, (0,), 1, 1)
    B = contravariant_pairing(m, m, 1)
    assert B.shape == (3, 3) and rank(B) == 3


@pytest.mark.parametrize("weight", [(0,), (1,)])
def test_epsilon(sl2, weight):
    eps = epsilon_tensor(sl2, weight, 1, 3)
    assert epsilon_invariance_check(eps).ok
    assert epsilon_eigen_check(eps).ok
    if weight == (0,):
        assert eps.tensors[0] == SparseMatrix.identity(1)
    else:
        assert epsilon_eigenvalue(eps, 1) == Fraction(-5, 4)


def test_epsilon_sl3_dual_labels():
    sl3 = build_algebra("sl3")
    eps = epsilon_tensor(sl3, (1, 0), 1, 2)
    assert eps.minus.bottom.highest_weight == (0, 1)
    assert epsilon_invariance_check(eps).ok and epsilon_eigen_check(eps).ok


def test_expand_node_function():
    def series(*c):
        return TruncatedSeries("tau", list(c))
    plus, minus = expand_node_function({(1, 1): 1}, 3)
    assert plus == {0: series(0, 1, 0, 0)} and minus == {0: series(0, 1, 0, 0)}
    plus, minus = expand_node_function({(1, 0): 1}, 3)
    assert plus == {1: series(1, 0, 0, 0)} and minus == {-1: series(0, 1, 0, 0)}
    plus, minus = expand_node_function({(2, 1): 1}, 3)
    assert plus == {1: series(0, 1, 0, 0)} and minus == {-1: series(0, 0, 1, 0)}
    with pytest.raises(ModuleError):
        expand_node_function({(-1, 0): 1}, 2)


def test_node_annihilation(sl2):
    eps = epsilon_tensor(sl2, (1,), 1, 3)
    for a in range(3):
        x = sl2.basis_vector(a)
        for coeffs in ({(0, 0): 1}, {(1, 0): 1}, {(0, 1): 1}, {(1, 1): 2, (2, 0): -1}, {(2, 1): 1}):
            assert node_annihilation_check(eps, x, coeffs, 3).ok
