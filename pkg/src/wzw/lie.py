"""Simple Lie algebras sl_n, their normalized form, Casimir data and irreps.

The algebras are realized by traceless n x n matrices with the trace form,
which already gives the highest root length 2.  Irreducible representations
are grown weight space by weight space from a highest-weight vector by
lowering operators; each new weight space is cut down to the image of its
contravariant Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import (SparseMatrix, Vector, express_columns, inverse, vec_axpy)

SUPPORTED = ("sl2", "sl3", "sl4")


class LieError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SimpleLieAlgebra:
    """A (simple, or abelian rank-0) Lie algebra with a fixed basis.

    Elements are coordinate tuples in ``basis_labels`` order.
    ``brackets[a][b]`` is the coordinate dict of ``[X_a, X_b]``;
    ``recipe[a] = (b, c)`` writes a non-Chevalley basis element as the
    bracket ``[X_b, X_c]``, which is how irreps extend the Chevalley action.
    """

    name: str
    dim: int
    rank: int
    basis_labels: tuple
    matrices: tuple             # defining representation
    brackets: tuple
    form: SparseMatrix
    dual_pairs: tuple           # ((X_a coords), (X^a coords))
    e: tuple
    f: tuple
    h: tuple
    cartan_matrix: tuple
    highest_root: int           # basis index of the highest root vector
    highest_coroot: tuple       # coordinates of theta^vee
    dual_coxeter: Fraction
    sigma: tuple                # anti-involution e_i <-> f_i, h fixed, on basis indices
    root_of: tuple              # weight (fundamental coords) of each basis element
    recipe: dict = field(default_factory=dict)

    @property
    def is_abelian(self) -> bool:
        return self.rank == 0

    def basis_vector(self, a: int) -> tuple:
        return tuple(Fraction(int(i == a)) for i in range(self.dim))

    def bracket(self, x: Sequence, y: Sequence) -> tuple:
        out: Vector = {}
        for a, xa in enumerate(x):
            if not xa:
                continue
            for b, yb in enumerate(y):
                if yb:
                    vec_axpy(out, xa * yb, self.brackets[a][b])
        return tuple(out.get(i, Fraction(0)) for i in range(self.dim))

    def pair(self, x: Sequence, y: Sequence) -> Fraction:
        s = Fraction(0)
        for i, j, v in self.form.entries():
            s += x[i] * v * y[j]
        return s

    def matrix_of(self, x: Sequence) -> SparseMatrix:
        out = SparseMatrix.zeros(*self.matrices[0].shape)
        for a, xa in enumerate(x):
            if xa:
                out = out + self.matrices[a].scale(xa)
        return out

    def coords_of(self, m: SparseMatrix) -> tuple:
        return _sl_coords(self, m)

    def dual_weight(self, weight: Sequence[int]) -> tuple:
        """lambda* = -w0(lambda); for sl_n this reverses the coordinates."""
        return tuple(reversed(tuple(weight)))

    def level(self, weight: Sequence[int]) -> int:
        """<lambda, theta^vee>; every simple coroot enters theta^vee once in sl_n."""
        return sum(weight)


def _sl_coords(alg: SimpleLieAlgebra, m: SparseMatrix) -> tuple:
    n = m.rows
    if alg.is_abelian:
        return (m[0, 0],)
    out = [Fraction(0)] * alg.dim
    idx = {lab: a for a, lab in enumerate(alg.basis_labels)}
    partial = Fraction(0)
    for k in range(n - 1):
        partial += m[k, k]
        out[k] = partial
    if partial + m[n - 1, n - 1]:
        raise LieError("matrix is not traceless")
    for i, j, v in m.entries():
        if i != j:
            out[idx[f"E{i + 1}{j + 1}"]] = v
    return tuple(out)


def build_algebra(name: str) -> SimpleLieAlgebra:
    """sl2, sl3 or sl4 with Chevalley basis H_k, E_ij (i<j), E_ji."""
    if name not in SUPPORTED:
        raise LieError(f"unsupported algebra {name!r}; expected one of {SUPPORTED}")
    n = int(name[2:])
    labels, mats = [], []
    for k in range(n - 1):
        labels.append(f"H{k + 1}")
        mats.append(SparseMatrix(n, n, {(k, k): 1, (k + 1, k + 1): -1}))
    upper = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in upper:
        labels.append(f"E{i + 1}{j + 1}")
        mats.append(SparseMatrix(n, n, {(i, j): 1}))
    for i, j in upper:
        labels.append(f"E{j + 1}{i + 1}")
        mats.append(SparseMatrix(n, n, {(j, i): 1}))
    dim = len(labels)
    idx = {lab: a for a, lab in enumerate(labels)}
    rank = n - 1

    proto = SimpleLieAlgebra(
        name=name, dim=dim, rank=rank, basis_labels=tuple(labels), matrices=tuple(mats),
        brackets=(), form=SparseMatrix.zeros(0, 0), dual_pairs=(), e=(), f=(), h=(),
        cartan_matrix=(), highest_root=0, highest_coroot=(), dual_coxeter=Fraction(0),
        sigma=(), root_of=())

    brackets = []
    for a in range(dim):
        row = []
        for b in range(dim):
            comm = mats[a] @ mats[b] - mats[b] @ mats[a]
            c = _sl_coords(proto, comm)
            row.append({i: v for i, v in enumerate(c) if v})
        brackets.append(tuple(row))

    form = SparseMatrix(dim, dim, {
        (a, b): _trace(mats[a] @ mats[b]) for a in range(dim) for b in range(dim)})
    pairs = dual_pairs_for_basis(form, [tuple(Fraction(int(i == a)) for i in range(dim))
                                        for a in range(dim)])

    e = tuple(idx[f"E{k + 1}{k + 2}"] for k in range(rank))
    f = tuple(idx[f"E{k + 2}{k + 1}"] for k in range(rank))
    h = tuple(range(rank))
    cartan = tuple(tuple(2 if i == j else (-1 if abs(i - j) == 1 else 0)
                         for j in range(rank)) for i in range(rank))
    sigma = tuple(idx[_transpose_label(lab)] for lab in labels)
    root_of = []
    for a in range(dim):
        wt = []
        for k in h:
            c = brackets[k][a].get(a, Fraction(0))
            wt.append(int(c))
        root_of.append(tuple(wt))
    recipe = {}
    for i, j in upper:
        if j > i + 1:
            recipe[idx[f"E{i + 1}{j + 1}"]] = (idx[f"E{i + 1}{j}"], idx[f"E{j}{j + 1}"])
            recipe[idx[f"E{j + 1}{i + 1}"]] = (idx[f"E{j + 1}{j}"], idx[f"E{j}{i + 1}"])

    alg = SimpleLieAlgebra(
        name=name, dim=dim, rank=rank, basis_labels=tuple(labels), matrices=tuple(mats),
        brackets=tuple(brackets), form=form, dual_pairs=pairs, e=e, f=f, h=h,
        cartan_matrix=cartan, highest_root=idx[f"E1{n}"],
        highest_coroot=tuple(Fraction(int(a < rank)) for a in range(dim)),
        dual_coxeter=Fraction(0), sigma=sigma, root_of=tuple(root_of), recipe=recipe)
    object.__setattr__(alg, "dual_coxeter", _adjoint_half_scalar(alg))
    return alg


def abelian_algebra() -> SimpleLieAlgebra:
    """The one-dimensional abelian algebra k with form (1|1) = 1.

    Loop modules over it are the oscillator (Fock) modules; its dual Coxeter
    number is 0.
    """
    one = SparseMatrix.identity(1)
    return SimpleLieAlgebra(
        name="u1", dim=1, rank=0, basis_labels=("J",), matrices=(one,),
        brackets=(({},),), form=one, dual_pairs=(((Fraction(1),), (Fraction(1),)),),
        e=(), f=(), h=(), cartan_matrix=(), highest_root=0, highest_coroot=(Fraction(0),),
        dual_coxeter=Fraction(0), sigma=(0,), root_of=((),))


def _trace(m: SparseMatrix) -> Fraction:
    return sum((m[i, i] for i in range(m.rows)), Fraction(0))


def _transpose_label(lab: str) -> str:
    return lab if lab.startswith("H") else f"E{lab[2]}{lab[1]}"


def dual_pairs_for_basis(form: SparseMatrix, basis: Sequence[Sequence]) -> tuple:
    """Pairs (Y_a, Y^a) with (Y_a | Y^b) = delta_ab for an arbitrary basis Y."""
    dim = form.rows
    B = SparseMatrix.from_dense([list(v) for v in basis])      # rows = basis vectors
    gram = B @ form @ B.T
    ginv = inverse(gram)
    dual = ginv @ B                                             # rows = dual vectors
    pairs = []
    for a in range(len(basis)):
        ya = tuple(B[a, i] for i in range(dim))
        yd = tuple(dual[a, i] for i in range(dim))
        pairs.append((ya, yd))
    return tuple(pairs)


def _adjoint_half_scalar(alg: SimpleLieAlgebra) -> Fraction:
    scalar = None
    for y in range(alg.dim):
        Y = alg.basis_vector(y)
        acc = [Fraction(0)] * alg.dim
        for xa, xd in alg.dual_pairs:
            inner = alg.bracket(xd, Y)
            outer = alg.bracket(xa, inner)
            acc = [s + t for s, t in zip(acc, outer)]
        ratio = acc[y]
        if any(acc[i] for i in range(alg.dim) if i != y):
            raise LieError("adjoint Casimir is not scalar")
        if scalar is None:
            scalar = ratio
        elif scalar != ratio:
            raise LieError("adjoint Casimir is not scalar")
    return scalar / 2


def dual_coxeter_number(alg: SimpleLieAlgebra) -> Fraction:
    return alg.dual_coxeter


def casimir_tensor(alg: SimpleLieAlgebra, basis: Sequence[Sequence] | None = None) -> tuple:
    """Dual pairs realizing sum_a X_a (x) X^a; optionally relative to another basis."""
    if basis is None:
        return alg.dual_pairs
    return dual_pairs_for_basis(alg.form, basis)


def casimir_as_tensor(pairs) -> dict:
    """The Casimir as a coefficient dict {(a, b): coeff} on basis_a (x) basis_b."""
    out: dict = {}
    for x, y in pairs:
        for a, xa in enumerate(x):
            if not xa:
                continue
            for b, yb in enumerate(y):
                if yb:
                    key = (a, b)
                    s = out.get(key, 0) + xa * yb
                    if s:
                        out[key] = s
                    else:
                        out.pop(key, None)
    return out


@dataclass(frozen=True, eq=False)
class FiniteIrrep:
    """Irreducible finite-dimensional representation with explicit matrices.

    ``weights[i]`` is the weight of basis vector i (fundamental coordinates);
    ``form`` is the contravariant form on the chosen basis (nondegenerate).
    """

    algebra: SimpleLieAlgebra
    highest_weight: tuple
    dim: int
    weights: tuple
    actions: tuple
    form: SparseMatrix
    casimir_scalar: Fraction
    level: int

    def act(self, x: Sequence) -> SparseMatrix:
        out = SparseMatrix.zeros(self.dim, self.dim)
        for a, xa in enumerate(x):
            if xa:
                out = out + self.actions[a].scale(xa)
        return out

    def casimir_operator(self, pairs=None) -> SparseMatrix:
        out = SparseMatrix.zeros(self.dim, self.dim)
        for x, y in (pairs if pairs is not None else self.algebra.dual_pairs):
            out = out + self.act(x) @ self.act(y)
        return out


def weyl_dimension(alg: SimpleLieAlgebra, weight: Sequence[int]) -> int:
    """Weyl dimension formula for sl_n."""
    n = alg.rank + 1
    num = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            num *= Fraction(sum(weight[i:j]) + j - i, j - i)
    return int(num)


def build_irrep(alg: SimpleLieAlgebra, highest_weight: Sequence[int]) -> FiniteIrrep:
    hw = tuple(int(x) for x in highest_weight)
    if len(hw) != alg.rank:
        raise LieError(f"weight {hw} has wrong length for {alg.name}")
    if any(x < 0 for x in hw):
        raise LieError(f"weight {hw} is not dominant")
    if alg.is_abelian:
        zero = SparseMatrix.zeros(1, 1)
        return FiniteIrrep(alg, (), 1, ((),), (zero,), SparseMatrix.identity(1), Fraction(0), 0)

    r = alg.rank
    alpha = alg.cartan_matrix              # alpha_i in fundamental coordinates = row i

    def shift(mu, i, sign):
        return tuple(m + sign * a for m, a in zip(mu, alpha[i]))

    dims: dict[tuple, int] = {hw: 1}
    grams: dict[tuple, SparseMatrix] = {hw: SparseMatrix.identity(1)}
    e_maps: list[dict] = [dict() for _ in range(r)]   # e_i: V_mu -> V_{mu+alpha_i}
    f_maps: list[dict] = [dict() for _ in range(r)]   # f_i: V_mu -> V_{mu-alpha_i}
    order = [hw]
    frontier = [hw]
    while frontier:
        targets = sorted({shift(nu, i, -1) for nu in frontier for i in range(r)}, reverse=True)
        new_frontier = []
        for mu in targets:
            cands = [(i, b) for i in range(r) if shift(mu, i, 1) in dims
                     for b in range(dims[shift(mu, i, 1)])]
            if not cands:
                continue
            # e_j applied to each candidate f_i b, as a vector in V_{mu + alpha_j}
            upper = [j for j in range(r) if shift(mu, j, 1) in dims]
            e_img = {j: [] for j in upper}
            for i, b in cands:
                up_i = shift(mu, i, 1)
                for j in upper:
                    vec: Vector = {}
                    top = shift(up_i, j, 1)
                    if top in dims:
                        eb = e_maps[j][up_i].column(b)
                        vec = f_maps[i][top].apply(eb)
                    if i == j:
                        vec_axpy(vec, Fraction(up_i[i]), {b: Fraction(1)})
                    e_img[j].append(vec)
            entries = {}
            for c1, (i, b) in enumerate(cands):
                grow = grams[shift(mu, i, 1)].row(b)
                for c2 in range(len(cands)):
                    v = e_img[i][c2]
                    s = sum((grow[k] * x for k, x in v.items() if k in grow), Fraction(0))
                    if s:
                        entries[(c1, c2)] = s
            gram = SparseMatrix(len(cands), len(cands), entries)
            if gram.is_zero():
                continue
            piv, C = express_columns(gram)
            dims[mu] = len(piv)
            grams[mu] = gram.select(piv, piv)
            for j in upper:
                e_maps[j][mu] = SparseMatrix.from_columns(
                    dims[shift(mu, j, 1)], [e_img[j][p] for p in piv])
            for i in range(r):
                src = shift(mu, i, 1)
                if src in dims:
                    cols = [C.column(c) for c, (ii, b) in enumerate(cands) if ii == i]
                    f_maps[i][src] = SparseMatrix.from_columns(dims[mu], cols)
            order.append(mu)
            new_frontier.append(mu)
        frontier = new_frontier

    offset, pos = {}, 0
    weights = []
    for mu in order:
        offset[mu] = pos
        pos += dims[mu]
        weights.extend([mu] * dims[mu])
    total = pos

    def globalize(maps, sign):
        out = []
        for i, m in enumerate(maps):
            ent = {}
            for src, mat in m.items():
                dst = shift(src, i, sign)
                for a, b, v in mat.entries():
                    ent[(offset[dst] + a, offset[src] + b)] = v
            out.append(SparseMatrix(total, total, ent))
        return out

    E = globalize(e_maps, 1)
    F = globalize(f_maps, -1)
    H = [SparseMatrix(total, total, {(p, p): weights[p][k] for p in range(total)})
         for k in range(r)]
    actions: list = [None] * alg.dim
    for k in range(r):
        actions[alg.e[k]] = E[k]
        actions[alg.f[k]] = F[k]
        actions[alg.h[k]] = H[k]

    def resolve(a):
        if actions[a] is None:
            b, c = alg.recipe[a]
            A, B = resolve(b), resolve(c)
            actions[a] = A @ B - B @ A
        return actions[a]

    for a in range(alg.dim):
        resolve(a)
    form = SparseMatrix.block_diag([grams[mu] for mu in order])
    proto = FiniteIrrep(alg, hw, total, tuple(weights), tuple(actions), form, Fraction(0),
                        alg.level(hw))
    cas = proto.casimir_operator()
    c0 = cas[0, 0]
    if cas != SparseMatrix.scalar(total, c0):
        raise LieError("Casimir does not act by a scalar")
    return FiniteIrrep(alg, hw, total, tuple(weights), tuple(actions), form, c0,
                       alg.level(hw))


def level_of(irrep: FiniteIrrep) -> int:
    return irrep.level


def nilpotency_level(irrep: FiniteIrrep, x: Sequence) -> int:
    """Smallest m with rho(x)^(m+1) = 0 (x must act nilpotently)."""
    X = irrep.act(x)
    P = SparseMatrix.identity(irrep.dim)
    for m in range(irrep.dim + 1):
        P = X @ P
        if P.is_zero():
            return m
    raise LieError("element does not act nilpotently")


def enumerate_P_ell(alg: SimpleLieAlgebra, ell: int) -> list[tuple]:
    """Dominant weights of level <= ell, by level then descending lex order."""
    if ell < 0:
        raise LieError("level must be non-negative")
    if alg.is_abelian:
        return [()]
    out = []
    for m in range(ell + 1):
        out.extend(sorted(_compositions(m, alg.rank), reverse=True))
    return out


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def casimir_formula(alg: SimpleLieAlgebra, weight: Sequence[int]) -> Fraction:
    """(lambda | lambda + 2 rho) via the inverse Cartan matrix (sl_n)."""
    r = alg.rank
    # (omega_i | omega_j) = min(i,j) (n - max(i,j)) / n for sl_n
    n = r + 1
    lam = [Fraction(x) for x in weight]
    lr = [x + 2 for x in lam]
    s = Fraction(0)
    for i in range(r):
        for j in range(r):
            g = Fraction(min(i + 1, j + 1) * (n - max(i + 1, j + 1)), n)
            s += lam[i] * g * lr[j]
    return s


def algebra_descriptor(alg: SimpleLieAlgebra) -> dict:
    return {
        "name": alg.name,
        "dimension": alg.dim,
        "rank": alg.rank,
        "dual_coxeter": str(alg.dual_coxeter),
        "basis": list(alg.basis_labels),
    }


def irrep_descriptor(rep: FiniteIrrep) -> dict:
    return {
        "highest_weight": list(rep.highest_weight),
        "dimension": rep.dim,
        "casimir": str(rep.casimir_scalar),
        "level": rep.level,
        "dual": list(rep.algebra.dual_weight(rep.highest_weight)),
    }
