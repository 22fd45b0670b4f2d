"""Depth-truncated loop-algebra modules, Sugawara operators and epsilon-tensors.

A module is built depth by depth.  The depth-d piece is spanned by formal
symbols ``X_a t^{-k} b`` (``b`` a basis vector of depth ``d-k``); the action of
every positive mode on those symbols follows from the commutator

    [X t^m, Y t^n] = [X, Y] t^{m+n} + level * m * delta_{m+n,0} (X|Y)

and the contravariant Gram matrix (anti-involution ``X t^k -> X^T t^{-k}``)
decides which symbols survive in the irreducible quotient.

Depth conventions: ``X t^k`` maps depth ``d`` to depth ``d - k``.  The
oscillator module is the same construction over the abelian algebra with
level 1 (the zero mode acts as 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import (SparseMatrix, TruncatedSeries, Vector, express_columns, frac,
                   inverse, kernel_basis, vec_axpy)
from .lie import (FiniteIrrep, SimpleLieAlgebra, abelian_algebra, build_irrep)

MODES = ("oscillator", "affine")


class ModuleError(ValueError):
    pass


class OutOfWindow(LookupError):
    """The requested operator would leave the truncation window."""


@dataclass(frozen=True)
class LoopElement:
    """``X (x) t^exponent + central * c``; ``coords`` are algebra coordinates."""

    coords: tuple
    exponent: int
    central: Fraction = Fraction(0)


@dataclass
class GradedVector:
    parts: dict                  # depth -> sparse Vector
    truncated: bool = False      # some component fell beyond the window

    def __eq__(self, other):
        if not isinstance(other, GradedVector):
            return NotImplemented
        a = {d: v for d, v in self.parts.items() if v}
        b = {d: v for d, v in other.parts.items() if v}
        return a == b and self.truncated == other.truncated

    def is_zero(self) -> bool:
        return not any(self.parts.values())


class GradedAffineModule:
    """Irreducible level-``level`` module truncated at depth ``depth``.

    ``basis[d][i]`` records how basis vector i at depth d was produced:
    ``("v", i)`` at depth 0, ``(a, k, b)`` meaning ``X_a t^{-k}`` applied to
    basis vector ``b`` of depth ``d - k`` otherwise.
    """

    def __init__(self, mode, algebra, level, bottom, depth):
        self.mode = mode
        self.algebra: SimpleLieAlgebra = algebra
        self.level = level
        self.bottom: FiniteIrrep = bottom
        self.depth = depth
        self.dims: list[int] = []
        self.basis: list[list] = []
        self.gram: list[SparseMatrix] = []
        self._ops: dict = {}
        self._combo_cache: dict = {}

    # -- operators --------------------------------------------------------

    def in_window(self, d: int) -> bool:
        return 0 <= d <= self.depth

    def op(self, a: int, k: int, d: int) -> SparseMatrix | None:
        """Matrix of ``X_a t^k`` from depth d to depth d-k (None: exactly zero)."""
        if not self.in_window(d):
            raise OutOfWindow(f"source depth {d} outside 0..{self.depth}")
        if d - k < 0:
            return None
        if d - k > self.depth:
            raise OutOfWindow(f"target depth {d - k} outside 0..{self.depth}")
        return self._ops[(a, k, d)]

    def op_combo(self, x: Sequence, k: int, d: int) -> SparseMatrix | None:
        x = tuple(frac(v) for v in x)
        key = (x, k, d)
        if key in self._combo_cache:
            return self._combo_cache[key]
        out = None
        for a, xa in enumerate(x):
            if xa:
                m = self.op(a, k, d)
                if m is None:
                    return None
                term = m.scale(xa)
                out = term if out is None else out + term
        if out is None:
            if d - k < 0:
                return None
            out = SparseMatrix.zeros(self.dims[d - k], self.dims[d])
        self._combo_cache[key] = out
        return out

    def zero_or(self, m: SparseMatrix | None, rows_depth: int, cols_depth: int) -> SparseMatrix:
        if m is not None:
            return m
        return SparseMatrix.zeros(self.dims[rows_depth] if rows_depth >= 0 else 0,
                                  self.dims[cols_depth])

    def restrict(self, depth: int) -> "GradedAffineModule":
        """The same module truncated at a smaller depth."""
        if depth > self.depth:
            raise ModuleError("cannot restrict to a larger depth")
        m = GradedAffineModule(self.mode, self.algebra, self.level, self.bottom, depth)
        m.dims = self.dims[:depth + 1]
        m.basis = self.basis[:depth + 1]
        m.gram = self.gram[:depth + 1]
        m._ops = {key: v for key, v in self._ops.items()
                  if key[2] <= depth and 0 <= key[2] - key[1] <= depth}
        return m

    def descriptor(self) -> dict:
        return {
            "mode": self.mode,
            "algebra": self.algebra.name,
            "level": int(self.level),
            "weight": list(self.bottom.highest_weight),
            "depth": self.depth,
            "dimensions": list(self.dims),
        }


def build_module(mode: str, alg: SimpleLieAlgebra | None = None, weight=(), level: int = 1,
                 depth: int = 0) -> GradedAffineModule:
    if mode not in MODES:
        raise ModuleError(f"unknown mode {mode!r}")
    if depth < 0:
        raise ModuleError("depth must be non-negative")
    if mode == "oscillator":
        alg = abelian_algebra()
        weight = ()
        level = 1
    else:
        if alg is None:
            raise ModuleError("affine mode needs an algebra")
        if level < 1:
            raise ModuleError("level must be positive")
        weight = tuple(weight)
        if alg.level(weight) > level:
            raise ModuleError(f"weight {weight} has level {alg.level(weight)} > {level}")
    bottom = build_irrep(alg, weight)
    m = GradedAffineModule(mode, alg, Fraction(level), bottom, depth)
    _fill_depth_zero(m)
    for d in range(1, depth + 1):
        _fill_depth(m, d)
    return m


def _fill_depth_zero(m: GradedAffineModule) -> None:
    rep = m.bottom
    m.dims.append(rep.dim)
    m.basis.append([("v", i) for i in range(rep.dim)])
    m.gram.append(rep.form)
    for a in range(m.algebra.dim):
        m._ops[(a, 0, 0)] = rep.actions[a]


def _fill_depth(m: GradedAffineModule, d: int) -> None:
    alg = m.algebra
    dimg = alg.dim
    ell = m.level
    cands = [(a, k, b) for k in range(1, d + 1) for a in range(dimg)
             for b in range(m.dims[d - k])]
    cindex = {c: i for i, c in enumerate(cands)}

    # ann[(y, mm)][c] = image of candidate c under X_y t^mm at depth d - mm
    ann: dict = {}
    for mm in range(1, d + 1):
        for y in range(dimg):
            cols = []
            for a, k, b in cands:
                vec: Vector = {}
                if mm <= d - k:
                    w = m._ops[(y, mm, d - k)].column(b)
                    if w:
                        vec = m._ops[(a, -k, d - k - mm)].apply(w)
                for z, s in alg.brackets[y][a].items():
                    M = m._ops.get((z, mm - k, d - k))
                    if M is not None:
                        vec_axpy(vec, s, M.column(b))
                if mm == k:
                    g = alg.form[y, a]
                    if g:
                        vec_axpy(vec, ell * mm * g, {b: Fraction(1)})
                cols.append(vec)
            ann[(y, mm)] = cols

    entries = {}
    for c1, (a, k, b) in enumerate(cands):
        grow = m.gram[d - k].row(b)
        if not grow:
            continue
        images = ann[(alg.sigma[a], k)]
        for c2, v in enumerate(images):
            s = 0
            for j, x in v.items():
                gj = grow.get(j)
                if gj:
                    s += gj * x
            if s:
                entries[(c1, c2)] = s
    gram = SparseMatrix(len(cands), len(cands), entries)
    piv, C = express_columns(gram)
    dim = len(piv)
    m.dims.append(dim)
    m.basis.append([cands[p] for p in piv])
    m.gram.append(gram.select(piv, piv))

    for (y, mm), cols in ann.items():
        m._ops[(y, mm, d)] = SparseMatrix.from_columns(m.dims[d - mm], [cols[p] for p in piv])
    Ccols = C.columns()
    for k in range(1, d + 1):
        for a in range(dimg):
            m._ops[(a, -k, d - k)] = SparseMatrix.from_columns(
                dim, [Ccols[cindex[(a, k, b)]] for b in range(m.dims[d - k])])
    # zero modes: Y X_a t^{-k} b = X_a t^{-k} (Y b) + [Y, X_a] t^{-k} b
    for y in range(dimg):
        cols = []
        for p in piv:
            a, k, b = cands[p]
            cvec: Vector = {}
            for bb, v in m._ops[(y, 0, d - k)].column(b).items():
                vec_axpy(cvec, v, {cindex[(a, k, bb)]: Fraction(1)})
            for z, s in alg.brackets[y][a].items():
                vec_axpy(cvec, s, {cindex[(z, k, b)]: Fraction(1)})
            out: Vector = {}
            for c, v in cvec.items():
                vec_axpy(out, v, Ccols[c])
            cols.append(out)
        m._ops[(y, 0, d)] = SparseMatrix.from_columns(dim, cols)


# -- loop action ---------------------------------------------------------------

def loop_act(m: GradedAffineModule, x: LoopElement, v: GradedVector | Mapping) -> GradedVector:
    """Apply ``x`` to a graded vector; components leaving the window are dropped
    and flagged in ``truncated``."""
    parts = v.parts if isinstance(v, GradedVector) else dict(v)
    truncated = bool(getattr(v, "truncated", False))
    out: dict = {}
    for d, vec in parts.items():
        if not vec:
            continue
        if x.central:
            acc = out.setdefault(d, {})
            vec_axpy(acc, x.central * m.level, vec)
        if not any(x.coords):
            continue
        target = d - x.exponent
        if target < 0:
            continue
        if target > m.depth:
            truncated = True
            continue
        M = m.op_combo(x.coords, x.exponent, d)
        acc = out.setdefault(target, {})
        vec_axpy(acc, Fraction(1), M.apply(vec))
    return GradedVector({d: w for d, w in out.items() if w}, truncated)


def vacuum_vector(m: GradedAffineModule, i: int = 0) -> GradedVector:
    return GradedVector({0: {i: Fraction(1)}})


# -- Sugawara ----------------------------------------------------------------

@dataclass
class SugawaraOperator:
    module: GradedAffineModule
    mode_index: int
    matrices: dict               # source depth d -> matrix d -> d - k


def sugawara_block(m: GradedAffineModule, k: int, d: int) -> SparseMatrix:
    """Normal-ordered Sugawara mode on depth d (target d-k must be in window)."""
    key = ("T", k, d)
    if key in m._combo_cache:
        return m._combo_cache[key]
    if not (m.in_window(d) and m.in_window(d - k)):
        raise OutOfWindow(f"T({k}) on depth {d}")
    alg = m.algebra
    pref = Fraction(-1, 2) / (m.level + alg.dual_coxeter)
    total = SparseMatrix.zeros(m.dims[d - k], m.dims[d])
    jmin = -(-k // 2)  # ceil(k / 2)
    for j in range(jmin, d + 1):
        mult = 1 if 2 * j == k else 2
        for x, xd in alg.dual_pairs:
            first = m.op_combo(xd, j, d)
            if first is None:
                continue
            second = m.op_combo(x, k - j, d - j)
            if second is None:
                continue
            total = total + (second @ first).scale(mult)
    total = total.scale(pref)
    m._combo_cache[key] = total
    return total


def sugawara(m: GradedAffineModule, k: int) -> SugawaraOperator:
    if abs(k) > m.depth:
        raise ModuleError(f"|k| = {abs(k)} exceeds depth {m.depth}")
    mats = {d: sugawara_block(m, k, d) for d in range(m.depth + 1) if m.in_window(d - k)}
    return SugawaraOperator(m, k, mats)


def central_charge(m: GradedAffineModule) -> Fraction:
    """level * dim g / (level + dual Coxeter); 1 for the oscillator."""
    return m.level * m.algebra.dim / (m.level + m.algebra.dual_coxeter)


@dataclass
class IdentityReport:
    name: str
    checked: int = 0
    max_residual: Fraction = Fraction(0)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.checked > 0 and self.max_residual == 0

    def record(self, label, residual: SparseMatrix) -> None:
        self.checked += 1
        r = residual.max_abs()
        if r:
            self.failures.append(label)
            if r > self.max_residual:
                self.max_residual = r

    def to_json(self) -> dict:
        return {"identity": self.name, "checked": self.checked,
                "max_residual": str(self.max_residual), "ok": self.ok,
                "failures": [list(f) if isinstance(f, tuple) else f for f in self.failures[:20]]}


def virasoro_check(m: GradedAffineModule, K: int, D: int | None = None) -> IdentityReport:
    """[T_k, T_l] = (l - k) T_{k+l} + delta_{k+l,0} (k^3 - k)/12 * Z on in-window depths."""
    D = m.depth if D is None else D
    if K > D or D > m.depth:
        raise ModuleError("need K <= D <= module depth")
    Z = central_charge(m)
    rep = IdentityReport("virasoro")

    def ok(d):
        return 0 <= d <= D

    for k in range(-K, K + 1):
        for l in range(-K, K + 1):
            for d in range(D + 1):
                if not (ok(d - k) and ok(d - l) and ok(d - k - l)):
                    continue
                lhs = (sugawara_block(m, k, d - l) @ sugawara_block(m, l, d)
                       - sugawara_block(m, l, d - k) @ sugawara_block(m, k, d))
                rhs = sugawara_block(m, k + l, d).scale(l - k)
                if k + l == 0:
                    rhs = rhs + SparseMatrix.scalar(m.dims[d], Fraction(k ** 3 - k, 12) * Z)
                rep.record((k, l, d), lhs - rhs)
    return rep


def derivation_property_check(m: GradedAffineModule, k_range: Iterable[int],
                              m_range: Iterable[int] | None = None,
                              elements: Sequence[Sequence] | None = None) -> IdentityReport:
    """[T(D_k), X t^n] = n X t^{k+n} on every in-window depth."""
    alg = m.algebra
    elements = elements if elements is not None else [alg.basis_vector(a) for a in range(alg.dim)]
    m_range = list(m_range) if m_range is not None else list(range(-m.depth, m.depth + 1))
    rep = IdentityReport("derivation")
    for k in k_range:
        for n in m_range:
            for x in elements:
                for d in range(m.depth + 1):
                    if not all(m.in_window(e) for e in (d - n, d - k, d - k - n)):
                        continue
                    A = m.zero_or(m.op_combo(x, n, d), d - n, d)
                    B = m.zero_or(m.op_combo(x, n, d - k), d - k - n, d - k)
                    lhs = sugawara_block(m, k, d - n) @ A - B @ sugawara_block(m, k, d)
                    rhs = m.zero_or(m.op_combo(x, k + n, d), d - k - n, d).scale(n)
                    rep.record((k, n, d), lhs - rhs)
    return rep


def bracket_check(m: GradedAffineModule) -> IdentityReport:
    """Central-extension commutator on every in-window triple of basis modes."""
    alg = m.algebra
    rep = IdentityReport("loop-bracket")
    D = m.depth
    for a in range(alg.dim):
        for b in range(alg.dim):
            br = tuple(alg.brackets[a][b].get(i, Fraction(0)) for i in range(alg.dim))
            for p in range(-D, D + 1):
                for q in range(-D, D + 1):
                    for d in range(D + 1):
                        if not all(m.in_window(e) for e in (d - p, d - q, d - p - q)):
                            continue
                        ea, eb = alg.basis_vector(a), alg.basis_vector(b)
                        lhs = (m.zero_or(m.op_combo(ea, p, d - q), d - p - q, d - q)
                               @ m.zero_or(m.op_combo(eb, q, d), d - q, d)
                               - m.zero_or(m.op_combo(eb, q, d - p), d - p - q, d - p)
                               @ m.zero_or(m.op_combo(ea, p, d), d - p, d))
                        rhs = m.zero_or(m.op_combo(br, p + q, d), d - p - q, d)
                        if p + q == 0:
                            rhs = rhs + SparseMatrix.scalar(m.dims[d], m.level * p * alg.form[a, b])
                        rep.record((a, b, p, q, d), lhs - rhs)
    return rep


# -- pairings and epsilon ------------------------------------------------------

def invariant_duality(plus: FiniteIrrep, minus: FiniteIrrep) -> SparseMatrix:
    """A g-invariant pairing b(u, u') = u^T B u' between V and its dual."""
    n, p = plus.dim, minus.dim
    rows = []
    for a in range(plus.algebra.dim):
        Xp, Xm = plus.actions[a], minus.actions[a]
        # (Xp^T B + B Xm)[i, j] = 0 with vec index i * p + j
        eq: dict = {}
        for i, j_, v in Xp.entries():       # Xp[i, j_] contributes to (j_, col)
            for c in range(p):
                eq.setdefault((j_, c), {})
                vec_axpy(eq[(j_, c)], v, {i * p + c: Fraction(1)})
        for i, j_, v in Xm.entries():       # B[r, i] Xm[i, j_] contributes to (r, j_)
            for r in range(n):
                eq.setdefault((r, j_), {})
                vec_axpy(eq[(r, j_)], v, {r * p + i: Fraction(1)})
        rows.extend(e for e in eq.values() if e)
    system = SparseMatrix.from_columns(n * p, rows).T if rows else SparseMatrix.zeros(0, n * p)
    ker = kernel_basis(system)
    if len(ker) != 1:
        raise ModuleError(f"expected a unique invariant pairing, found {len(ker)}")
    vec = ker[0]
    return SparseMatrix(n, p, {(i, j): vec[i * p + j] for i in range(n) for j in range(p)})


def contravariant_pairing(plus: GradedAffineModule, minus: GradedAffineModule,
                          d: int, d2: int | None = None) -> SparseMatrix:
    """b(u, u') on depth d of ``plus`` times depth d2 (default d) of ``minus``.

    Characterized by b(X t^k u, u') + b(u, X t^{-k} u') = 0.
    """
    d2 = d if d2 is None else d2
    cache = plus._combo_cache.setdefault(("pair", id(minus)), {})
    if (d, d2) in cache:
        return cache[(d, d2)]
    if d == 0 and d2 == 0:
        out = invariant_duality(plus.bottom, minus.bottom)
    elif d == 0:
        # b(v, X t^{-k} b') = -b(X t^k v, b') and positive modes kill depth 0
        out = SparseMatrix.zeros(plus.dims[0], minus.dims[d2])
    else:
        rows = {}
        for i, (a, k, b) in enumerate(plus.basis[d]):
            if d2 - k < 0:
                continue
            prev = contravariant_pairing(plus, minus, d - k, d2 - k)
            A = minus.op(a, k, d2)
            row = SparseMatrix(1, prev.cols, {(0, j): v for j, v in prev.row(b).items()}) @ A
            r = row.row(0)
            if r:
                rows[i] = {j: -v for j, v in r.items()}
        out = SparseMatrix(plus.dims[d], minus.dims[d2],
                           {(i, j): v for i, r in rows.items() for j, v in r.items()})
    cache[(d, d2)] = out
    return out


@dataclass
class EpsilonTensor:
    """Per-depth inverse of the contravariant pairing, as matrices E_d with
    epsilon_d = sum_ij E_d[i, j] u_i (x) u'_j."""

    label: tuple
    depth: int
    plus: GradedAffineModule
    minus: GradedAffineModule
    tensors: list


def epsilon_tensor(alg: SimpleLieAlgebra, weight, level: int, depth: int,
                   plus: GradedAffineModule | None = None,
                   minus: GradedAffineModule | None = None) -> EpsilonTensor:
    weight = tuple(weight)
    plus = plus or build_module("affine", alg, weight, level, depth)
    dual = alg.dual_weight(weight)
    if minus is None:
        minus = plus if dual == weight else build_module("affine", alg, dual, level, depth)
    tensors = [inverse(contravariant_pairing(plus, minus, d)).T for d in range(depth + 1)]
    return EpsilonTensor(weight, depth, plus, minus, tensors)


def epsilon_invariance_check(eps: EpsilonTensor) -> IdentityReport:
    """(X t_+^k (x) 1) eps_{d+k} + (1 (x) X t_-^{-k}) eps_d = 0."""
    rep = IdentityReport("epsilon-invariance")
    alg = eps.plus.algebra
    D = eps.depth
    for a in range(alg.dim):
        for k in range(-D, D + 1):
            for d in range(D + 1):
                if not 0 <= d + k <= D:
                    continue
                P = eps.plus.zero_or(eps.plus.op(a, k, d + k), d, d + k)
                Q = eps.minus.op(a, -k, d)
                res = P @ eps.tensors[d + k] + eps.tensors[d] @ Q.T
                rep.record((a, k, d), res)
    return rep


def epsilon_eigenvalue(eps: EpsilonTensor, d: int) -> Fraction:
    m = eps.plus
    return -d - m.bottom.casimir_scalar / (2 * (m.level + m.algebra.dual_coxeter))


def epsilon_eigen_check(eps: EpsilonTensor) -> IdentityReport:
    """T(t_+ d/dt_+) on the first slot of eps_d is -d - c(lambda) / (2 (level + h))."""
    rep = IdentityReport("epsilon-eigenvalue")
    for d in range(eps.depth + 1):
        T0 = sugawara_block(eps.plus, 0, d)
        E = eps.tensors[d]
        rep.record(d, T0 @ E - E.scale(epsilon_eigenvalue(eps, d)))
    return rep


def expand_node_function(coeffs: Mapping, order: int) -> tuple[dict, dict]:
    """Expand sum a_{m,n} t_+^m t_-^n on the two branches of a node, tau = t_+ t_-.

    Returns ``(plus, minus)``: dicts mapping a power of t_+ (resp. t_-) to
    the tau-series that multiplies it, truncated at tau^order.
    """
    plus: dict = {}
    minus: dict = {}
    for (mm, nn), a in sorted(coeffs.items()):
        if mm < 0 or nn < 0:
            raise ModuleError("node functions have non-negative exponents")
        a = frac(a)
        if not a:
            continue
        for side, power, tpow in ((plus, mm - nn, nn), (minus, nn - mm, mm)):
            if tpow > order:
                continue
            term = TruncatedSeries.monomial("tau", tpow, order, a)
            side[power] = side[power] + term if power in side else term
    plus = {p: s for p, s in plus.items() if not s.is_zero()}
    minus = {p: s for p, s in minus.items() if not s.is_zero()}
    return plus, minus


def node_annihilation_check(eps: EpsilonTensor, x: Sequence, coeffs: Mapping,
                            order: int) -> IdentityReport:
    """The element x (x) f, f in k[[t_+, t_-]], kills sum_d eps_d tau^d up to tau^order.

    Uses the branch expansion of f: the tau^s coefficient of the action is
    sum over branch terms, collected by bidegree.
    """
    plus_exp, minus_exp = expand_node_function(coeffs, order)
    rep = IdentityReport("node-annihilation")
    D = eps.depth
    for s in range(order + 1):
        acc: dict = {}
        for power, series in plus_exp.items():
            for tp, a in enumerate(series.coeffs):
                d = s - tp
                if not a or not 0 <= d <= D or d - power > D:
                    continue
                P = eps.plus.op_combo(x, power, d)
                if P is None:
                    continue
                key = (d - power, d)
                term = (P @ eps.tensors[d]).scale(a)
                acc[key] = acc[key] + term if key in acc else term
        for power, series in minus_exp.items():
            for tp, a in enumerate(series.coeffs):
                d = s - tp
                if not a or not 0 <= d <= D or d - power > D:
                    continue
                Q = eps.minus.op_combo(x, power, d)
                if Q is None:
                    continue
                key = (d, d - power)
                term = (eps.tensors[d] @ Q.T).scale(a)
                acc[key] = acc[key] + term if key in acc else term
        for key, M in sorted(acc.items()):
            rep.record((s,) + key, M)
    return rep
