"""Fusion rules from three-point blocks, the Verlinde recursion and monodromy data."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .affine import epsilon_eigen_check, epsilon_eigenvalue, epsilon_tensor
from .blocks import BlockError, block, make_insertions
from .lie import SimpleLieAlgebra, build_algebra, casimir_formula, enumerate_P_ell

FUSION_POINTS = (0, 1, 2)


class FusionError(ValueError):
    pass


def block_dim(alg: SimpleLieAlgebra, level: int, labels: Sequence, points=None) -> int:
    labels = [tuple(l) for l in labels]
    if points is None:
        points = range(len(labels))
    return block(alg, level, make_insertions(list(points), labels)).dim


def _triple_dim(args) -> int:
    name, level, triple = args
    return block_dim(build_algebra(name), level, triple, FUSION_POINTS)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("WZW_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass
class FusionRing:
    algebra: SimpleLieAlgebra
    level: int
    labels: list
    coefficients: dict        # (lam, mu, nu) -> N_{lam mu}^nu

    def N(self, lam, mu, nu) -> int:
        return self.coefficients[(tuple(lam), tuple(mu), tuple(nu))]

    def dual(self, lam) -> tuple:
        return self.algebra.dual_weight(lam)

    @property
    def vacuum(self) -> tuple:
        return tuple(0 for _ in range(self.algebra.rank))

    def symmetric_N(self, a, b, c) -> int:
        """N_{abc} := N_{ab}^{c*}."""
        return self.N(a, b, self.dual(c))

    def violations(self) -> list[str]:
        """Every failed ring axiom, as readable strings (empty when all hold)."""
        bad = []
        P = self.labels
        for a, b, c in itertools.product(P, repeat=3):
            if self.N(a, b, c) != self.N(b, a, c):
                bad.append(f"commutativity {a} {b} {c}")
            vals = {self.symmetric_N(*p) for p in itertools.permutations((a, b, c))}
            if len(vals) != 1:
                bad.append(f"duality symmetry {a} {b} {c}")
        for a, b in itertools.product(P, repeat=2):
            if self.N(self.vacuum, a, b) != int(a == b):
                bad.append(f"unit {a} {b}")
        for a, b, c, d in itertools.product(P, repeat=4):
            lhs = sum(self.N(a, b, s) * self.N(s, c, d) for s in P)
            rhs = sum(self.N(b, c, s) * self.N(a, s, d) for s in P)
            if lhs != rhs:
                bad.append(f"associativity {a} {b} {c} {d}")
        return bad

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra.name,
            "level": self.level,
            "labels": [list(l) for l in self.labels],
            "coefficients": [
                {"lambda": list(a), "mu": list(b), "nu": list(c), "N": n}
                for (a, b, c), n in sorted(self.coefficients.items())
            ],
        }


def fusion_ring(alg: SimpleLieAlgebra, level: int, workers: int | None = None) -> FusionRing:
    if level < 1:
        raise FusionError("fusion rings need level >= 1")
    P = enumerate_P_ell(alg, level)
    triples = [(a, b, c) for a in P for b in P for c in P]
    jobs = [(alg.name, level, (a, b, alg.dual_weight(c))) for a, b, c in triples]
    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            dims = list(pool.map(_triple_dim, jobs))
    else:
        dims = [block_dim(alg, level, j[2], FUSION_POINTS) for j in jobs]
    return FusionRing(alg, level, P, dict(zip(triples, dims)))


def verlinde_dim(ring: FusionRing, genus: int, labels: Sequence = (),
                 order: Sequence[int] | None = None) -> int:
    """Block dimension by pair-of-pants recursion.

    ``order`` permutes the labels before the recursion; handles are cut
    first, each contributing a pair (mu, mu*).
    """
    if genus < 0:
        raise FusionError("genus must be non-negative")
    labels = [tuple(l) for l in labels]
    for l in labels:
        if l not in ring.labels:
            raise FusionError(f"label {l} is not in P_{ring.level}")
    if order is not None:
        if sorted(order) != list(range(len(labels))):
            raise FusionError("order must be a permutation of the label positions")
        labels = [labels[i] for i in order]

    @lru_cache(maxsize=None)
    def sphere(ls: tuple) -> int:
        n = len(ls)
        if n == 0:
            return 1
        if n == 1:
            return int(ls[0] == ring.vacuum)
        if n == 2:
            return int(ls[1] == ring.dual(ls[0]))
        if n == 3:
            return ring.N(ls[0], ls[1], ring.dual(ls[2]))
        return sum(ring.N(ls[0], ls[1], mu) * sphere((mu,) + ls[2:]) for mu in ring.labels)

    def surface(g: int, ls: tuple) -> int:
        if g == 0:
            return sphere(ls)
        return sum(surface(g - 1, ls + (mu, ring.dual(mu))) for mu in ring.labels)

    return surface(genus, tuple(labels))


@dataclass
class FactorizationReport:
    labels: list
    split: tuple
    total: int
    terms: list              # (mu, left dim, right dim)

    @property
    def channel_sum(self) -> int:
        return sum(l * r for _, l, r in self.terms)

    @property
    def ok(self) -> bool:
        return self.total == self.channel_sum

    def to_json(self) -> dict:
        return {
            "check": "factorization",
            "labels": [list(l) for l in self.labels],
            "split": [list(s) for s in self.split],
            "total": self.total,
            "terms": [{"mu": list(m), "left": l, "right": r} for m, l, r in self.terms],
            "channel_sum": self.channel_sum,
            "ok": self.ok,
        }


def factorization_check(alg: SimpleLieAlgebra, level: int, labels: Sequence,
                        split: Sequence[int]) -> FactorizationReport:
    """dim block(labels) = sum_mu dim block(left + mu) dim block(right + mu*).

    ``split`` lists the positions of the first part; the rest form the second.
    """
    labels = [tuple(l) for l in labels]
    left_idx = tuple(sorted(set(split)))
    right_idx = tuple(i for i in range(len(labels)) if i not in left_idx)
    if not left_idx or not right_idx or any(i < 0 or i >= len(labels) for i in left_idx):
        raise FusionError("split must partition the labels into two nonempty parts")
    left = [labels[i] for i in left_idx]
    right = [labels[i] for i in right_idx]
    total = block_dim(alg, level, labels)
    terms = []
    for mu in enumerate_P_ell(alg, level):
        terms.append((mu, block_dim(alg, level, left + [mu]),
                      block_dim(alg, level, right + [alg.dual_weight(mu)])))
    return FactorizationReport(labels, (left_idx, right_idx), total, terms)


@dataclass(frozen=True)
class MonodromyDatum:
    label: tuple
    exponent: Fraction         # eigenvalue exp(i pi r)
    order: int

    def to_json(self) -> dict:
        return {"label": list(self.label), "exponent": str(self.exponent), "order": self.order}


def eigenvalue_order(r: Fraction) -> int:
    """Smallest n >= 1 with n r in 2Z."""
    r = Fraction(r)
    return 2 * r.denominator // math.gcd(r.numerator, 2)


def monodromy(alg: SimpleLieAlgebra, level: int, lam) -> MonodromyDatum:
    lam = tuple(lam)
    if len(lam) != alg.rank or any(x < 0 for x in lam):
        raise FusionError(f"{lam} is not a dominant weight of {alg.name}")
    if alg.level(lam) > level:
        raise FusionError(f"label {lam} has level {alg.level(lam)} > {level}")
    r = casimir_formula(alg, lam) / (level + alg.dual_coxeter)
    return MonodromyDatum(lam, r, eigenvalue_order(r))


def degeneration_operator_check(alg: SimpleLieAlgebra, level: int, lam, depth: int):
    """Per-degree eigenvalue of the Sugawara operator on the gluing tensor."""
    if alg.level(lam) > level:
        raise FusionError(f"label {tuple(lam)} has level {alg.level(lam)} > {level}")
    eps = epsilon_tensor(alg, tuple(lam), level, depth)
    rep = epsilon_eigen_check(eps)
    rep.name = "degeneration-operator"
    return rep, [str(epsilon_eigenvalue(eps, d)) for d in range(depth + 1)]


__all__ = [
    "BlockError", "FusionError", "FusionRing", "FactorizationReport", "MonodromyDatum",
    "block_dim", "fusion_ring", "verlinde_dim", "factorization_check", "monodromy",
    "eigenvalue_order", "degeneration_operator_check",
]
