"""Genus-zero conformal blocks and the KZ connection.

With insertions (z_i, lambda_i) on the projective line, the space of covacua
is the quotient of V_1 (x) ... (x) V_N by the diagonal g-images and by the
image of (sum_i z_i X_(i))^(level+1), X a nilpotent in the minimal orbit
(a root vector of the highest root).

Every relation is weight-homogeneous for that X, so by default only the
weight-zero subspace is reduced; ``method="full"`` reduces the whole tensor
product and accepts an arbitrary nilpotent ``X``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .core import Echelon, QuotientMap, SparseMatrix, Vector, frac, inverse, quotient_from_echelon
from .lie import FiniteIrrep, SimpleLieAlgebra, build_irrep


class BlockError(ValueError):
    pass


@dataclass(frozen=True)
class Insertion:
    point: Fraction
    label: tuple

    def __post_init__(self):
        object.__setattr__(self, "point", frac(self.point))
        object.__setattr__(self, "label", tuple(int(x) for x in self.label))


class TensorSpace:
    """V_1 (x) ... (x) V_N with per-slot and diagonal operators (cached)."""

    def __init__(self, alg: SimpleLieAlgebra, labels: Sequence[Sequence[int]]):
        self.algebra = alg
        self.labels = [tuple(l) for l in labels]
        self.irreps: list[FiniteIrrep] = [_irrep(alg, l) for l in self.labels]
        self.dims = [r.dim for r in self.irreps]
        self.dim = 1
        for d in self.dims:
            self.dim *= d
        self._slot: dict = {}
        self._diag: dict = {}

    @cached_property
    def weights(self) -> list[tuple]:
        out = [tuple(0 for _ in range(self.algebra.rank))]
        for rep in self.irreps:
            out = [tuple(x + y for x, y in zip(w, wv)) for w in out for wv in rep.weights]
        return out

    def indices_of_weight(self, weight: Sequence[int]) -> list[int]:
        weight = tuple(weight)
        return [i for i, w in enumerate(self.weights) if w == weight]

    def slot(self, i: int, x: Sequence) -> SparseMatrix:
        x = tuple(frac(v) for v in x)
        key = (i, x)
        if key not in self._slot:
            left = 1
            for d in self.dims[:i]:
                left *= d
            right = 1
            for d in self.dims[i + 1:]:
                right *= d
            M = self.irreps[i].act(x)
            self._slot[key] = (SparseMatrix.identity(left).kron(M)
                               .kron(SparseMatrix.identity(right)))
        return self._slot[key]

    def diagonal(self, x: Sequence) -> SparseMatrix:
        x = tuple(frac(v) for v in x)
        if x not in self._diag:
            out = SparseMatrix.zeros(self.dim, self.dim)
            for i in range(len(self.dims)):
                out = out + self.slot(i, x)
            self._diag[x] = out
        return self._diag[x]

    def casimir(self, i: int, j: int) -> SparseMatrix:
        """c^(i,j) = sum_a X_a on slot i times X^a on slot j."""
        key = ("cas", min(i, j), max(i, j))
        if key not in self._slot:
            out = SparseMatrix.zeros(self.dim, self.dim)
            for x, xd in self.algebra.dual_pairs:
                out = out + self.slot(i, x) @ self.slot(j, xd)
            self._slot[key] = out
        return self._slot[key]


_IRREP_CACHE: dict = {}


def _irrep(alg: SimpleLieAlgebra, label) -> FiniteIrrep:
    key = (alg.name, tuple(label))
    if key not in _IRREP_CACHE:
        _IRREP_CACHE[key] = build_irrep(alg, label)
    return _IRREP_CACHE[key]


def _basis_dict(i: int) -> Vector:
    return {i: Fraction(1)}


def _lift(local: QuotientMap, support: Sequence[int], n: int) -> QuotientMap:
    """Extend a quotient of span(e_i : i in support) to Q^n, killing the rest."""
    proj = SparseMatrix(local.dim, n, {(r, support[c]): v for r, c, v in local.projection.entries()})
    sec = SparseMatrix(n, local.dim, {(support[r], c): v for r, c, v in local.section.entries()})
    return QuotientMap(n, local.dim, proj, sec, tuple(support[j] for j in local.free))


def _nilpotent_power_columns(space: TensorSpace, Y: SparseMatrix, power: int,
                             sources: Sequence[int]):
    for s in sources:
        v = _basis_dict(s)
        for _ in range(power):
            if not v:
                break
            v = Y.apply(v)
        if v:
            yield v


def nilpotent_operator(space: TensorSpace, points: Sequence, x: Sequence) -> SparseMatrix:
    """sum_i z_i X_(i) on the tensor product."""
    Y = SparseMatrix.zeros(space.dim, space.dim)
    for i, z in enumerate(points):
        if z:
            Y = Y + space.slot(i, x).scale(z)
    return Y


def default_nilpotent(alg: SimpleLieAlgebra) -> tuple:
    return alg.basis_vector(alg.highest_root)


def regular_nilpotent(alg: SimpleLieAlgebra) -> tuple:
    """Sum of the simple raising generators."""
    return tuple(Fraction(int(a in alg.e)) for a in range(alg.dim))


def conjugate_nilpotent(alg: SimpleLieAlgebra, x: Sequence, rng: random.Random) -> tuple:
    """g x g^{-1} for a random rational unipotent-times-unipotent g in SL_n."""
    n = alg.rank + 1
    lower = {(i, i): 1 for i in range(n)}
    upper = {(i, i): 1 for i in range(n)}
    for i in range(n):
        for j in range(i):
            lower[(i, j)] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
            upper[(j, i)] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    g = SparseMatrix(n, n, lower) @ SparseMatrix(n, n, upper)
    X = alg.matrix_of(x)
    return alg.coords_of(g @ X @ inverse(g))


def _is_homogeneous(alg: SimpleLieAlgebra, x: Sequence) -> tuple | None:
    roots = {alg.root_of[a] for a, v in enumerate(x) if v}
    return roots.pop() if len(roots) == 1 else None


def _diagonal_generators(space: TensorSpace, support: set | None):
    alg = space.algebra
    for a in range(alg.dim):
        root = alg.root_of[a]
        D = space.diagonal(alg.basis_vector(a))
        if support is None:
            for col in D.columns():
                if col:
                    yield col
        elif any(root):
            src = space.indices_of_weight(tuple(-r for r in root))
            cols = D.select(cols=src).columns()
            for col in cols:
                if col:
                    yield col


def covariants(alg: SimpleLieAlgebra, labels: Sequence[Sequence[int]],
               method: str = "weight", space: TensorSpace | None = None) -> QuotientMap:
    """(V_1 (x) ... (x) V_N) / g.(V_1 (x) ... (x) V_N)."""
    space = space or TensorSpace(alg, labels)
    if method == "full":
        ech = Echelon(space.dim)
        for g in _diagonal_generators(space, None):
            ech.insert(g)
        return quotient_from_echelon(ech)
    zero = space.indices_of_weight([0] * alg.rank)
    pos = {g: i for i, g in enumerate(zero)}
    ech = Echelon(len(zero))
    for g in _diagonal_generators(space, set(zero)):
        ech.insert({pos[i]: v for i, v in g.items()})
    return _lift(quotient_from_echelon(ech), zero, space.dim)


@dataclass
class BlockSpace:
    algebra: SimpleLieAlgebra
    level: int
    insertions: tuple
    space: TensorSpace
    covariant: QuotientMap
    quotient: QuotientMap
    nilpotent: tuple
    method: str
    relations: Echelon = field(repr=False, default=None)

    @property
    def tensor_dim(self) -> int:
        return self.space.dim

    @property
    def covariant_dim(self) -> int:
        return self.covariant.dim

    @property
    def dim(self) -> int:
        return self.quotient.dim

    @property
    def points(self) -> list:
        return [ins.point for ins in self.insertions]

    def nilpotent_operator(self) -> SparseMatrix:
        return nilpotent_operator(self.space, self.points, self.nilpotent)

    def generators(self):
        """Relation vectors, diagonal images first then nilpotent-power images."""
        yield from _diagonal_generators(self.space, None)
        yield from _nilpotent_power_columns(self.space, self.nilpotent_operator(),
                                            self.level + 1, range(self.space.dim))


def _check_insertions(alg, level, insertions):
    pts = [ins.point for ins in insertions]
    if len(set(pts)) != len(pts):
        raise BlockError(f"coincident insertion points {pts}")
    for ins in insertions:
        if len(ins.label) != alg.rank:
            raise BlockError(f"label {ins.label} has wrong length for {alg.name}")
        if any(x < 0 for x in ins.label):
            raise BlockError(f"label {ins.label} is not dominant")
        if alg.level(ins.label) > level:
            raise BlockError(f"label {ins.label} has level {alg.level(ins.label)} > {level}")


def make_insertions(points: Sequence, labels: Sequence) -> tuple:
    if len(points) != len(labels):
        raise BlockError("points and labels differ in length")
    return tuple(Insertion(frac(z), tuple(l)) for z, l in zip(points, labels))


def block(alg: SimpleLieAlgebra, level: int, insertions: Sequence[Insertion],
          nilpotent: Sequence | None = None, method: str | None = None) -> BlockSpace:
    insertions = tuple(insertions)
    _check_insertions(alg, level, insertions)
    x = tuple(frac(v) for v in (nilpotent if nilpotent is not None else default_nilpotent(alg)))
    root = _is_homogeneous(alg, x)
    if method is None:
        method = "weight" if root is not None else "full"
    if method == "weight" and root is None:
        raise BlockError("weight method needs a root-vector nilpotent")
    labels = [ins.label for ins in insertions]
    space = TensorSpace(alg, labels)
    points = [ins.point for ins in insertions]
    Y = nilpotent_operator(space, points, x)
    power = level + 1
    if method == "full":
        cov = covariants(alg, labels, "full", space)
        ech = Echelon(space.dim)
        for g in _diagonal_generators(space, None):
            ech.insert(g)
        for g in _nilpotent_power_columns(space, Y, power, range(space.dim)):
            ech.insert(g)
        quot = quotient_from_echelon(ech)
    else:
        cov = covariants(alg, labels, "weight", space)
        zero = space.indices_of_weight([0] * alg.rank)
        pos = {g: i for i, g in enumerate(zero)}
        ech = Echelon(len(zero))
        for g in _diagonal_generators(space, set(zero)):
            ech.insert({pos[i]: v for i, v in g.items()})
        src = space.indices_of_weight([-power * r for r in root])
        for g in _nilpotent_power_columns(space, Y, power, src):
            ech.insert({pos[i]: v for i, v in g.items()})
        quot = _lift(quotient_from_echelon(ech), zero, space.dim)
    return BlockSpace(alg, level, insertions, space, cov, quot, x, method, ech)


def relation_space(b: BlockSpace) -> dict:
    """Canonical (RREF) description of the relation subspace in the full tensor product."""
    ech = Echelon(b.space.dim)
    for g in b.generators():
        ech.insert(g)
    return {p: dict(sorted(r.items())) for p, r in sorted(ech.pivots.items())}


@dataclass
class BlockReport:
    name: str
    values: dict

    @property
    def ok(self) -> bool:
        return bool(self.values.get("ok"))

    def to_json(self) -> dict:
        return {"check": self.name, **self.values}


def propagation_check(alg: SimpleLieAlgebra, level: int, insertions: Sequence[Insertion],
                      extra_point) -> BlockReport:
    insertions = tuple(insertions)
    before = block(alg, level, insertions).dim
    trivial = tuple(0 for _ in range(alg.rank))
    after = block(alg, level, insertions + (Insertion(frac(extra_point), trivial),)).dim
    return BlockReport("propagation", {"before": before, "after": after, "ok": before == after})


# -- KZ ----------------------------------------------------------------------

@dataclass
class KZSystem:
    block: BlockSpace
    kappa: Fraction                # 1 / (level + dual Coxeter)
    A: list                        # connection matrices on the tensor product

    @property
    def points(self):
        return self.block.points

    def dA(self, i: int, j: int) -> SparseMatrix:
        """d A_j / d z_i, computed term by term from d/dz (1/(z_m - z_j))."""
        z = self.points
        sp = self.block.space
        out = SparseMatrix.zeros(sp.dim, sp.dim)
        for m in range(len(z)):
            if m == j:
                continue
            diff = z[m] - z[j]
            if i == m:
                coeff = -1 / diff ** 2
            elif i == j:
                coeff = 1 / diff ** 2
            else:
                continue
            out = out + sp.casimir(j, m).scale(self.kappa * coeff)
        return out

    def curvature(self, i: int, j: int) -> SparseMatrix:
        Ai, Aj = self.A[i], self.A[j]
        return self.dA(i, j) - self.dA(j, i) + Ai @ Aj - Aj @ Ai


def kz_system(b: BlockSpace) -> KZSystem:
    kappa = 1 / (Fraction(b.level) + b.algebra.dual_coxeter)
    sp = b.space
    z = b.points
    A = []
    for i in range(len(z)):
        Ai = SparseMatrix.zeros(sp.dim, sp.dim)
        for j in range(len(z)):
            if j != i:
                Ai = Ai + sp.casimir(i, j).scale(kappa / (z[j] - z[i]))
        A.append(Ai)
    return KZSystem(b, kappa, A)


def descent_check(k: KZSystem) -> BlockReport:
    """The lifted connection preserves the relation subbundle.

    For diagonal relations this is [A_i, diagonal X] = 0. For the
    nilpotent-power relations Y(z)^n v the derivative is taken with
    d_i - A_i, the quotient-side partner of d + omega on invariant
    functionals: (d_i Y^n) v - A_i Y^n v must project to zero.
    """
    b = k.block
    sp = b.space
    alg = b.algebra
    worst = Fraction(0)
    P = b.quotient.projection
    for a in range(alg.dim):
        D = sp.diagonal(alg.basis_vector(a))
        for Ai in k.A:
            worst = max(worst, (Ai @ D - D @ Ai).max_abs())
    n = b.level + 1
    Y = b.nilpotent_operator()
    Yp = [SparseMatrix.identity(sp.dim)]
    for _ in range(n):
        Yp.append(Y @ Yp[-1])
    for i, Ai in enumerate(k.A):
        Xi = sp.slot(i, b.nilpotent)
        dY = SparseMatrix.zeros(sp.dim, sp.dim)
        for p in range(n):
            dY = dY + Yp[p] @ Xi @ Yp[n - 1 - p]
        worst = max(worst, (P @ (dY - Ai @ Yp[n])).max_abs())
    return BlockReport("kz-descent", {"max_residual": str(worst), "ok": worst == 0})


def flatness_check(k: KZSystem) -> BlockReport:
    b = k.block
    N = len(k.A)
    if N < 2:
        raise BlockError("flatness needs at least two insertions")
    P, S = b.quotient.projection, b.quotient.section
    up = Fraction(0)
    down = Fraction(0)
    for i in range(N):
        for j in range(i + 1, N):
            F = k.curvature(i, j)
            up = max(up, F.max_abs())
            down = max(down, (P @ F @ S).max_abs())
    return BlockReport("kz-flatness", {
        "max_residual": str(down), "tensor_residual": str(up),
        "block_dimension": b.dim, "ok": down == 0})


def kz_json(k: KZSystem) -> dict:
    from .core import matrix_to_json
    return {
        "kappa": str(k.kappa),
        "points": [str(z) for z in k.points],
        "A": [matrix_to_json(A) for A in k.A],
    }
