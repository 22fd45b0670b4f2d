"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest -v tests/test_acceptance.py`` or as a script.
"""

import itertools
import random
import sys
from fractions import Fraction


from wzw.affine import (build_module, central_charge, derivation_property_check,
                        epsilon_eigen_check, epsilon_eigenvalue, epsilon_invariance_check,
                        epsilon_tensor, virasoro_check)
from wzw.blocks import block, flatness_check, kz_system, make_insertions, propagation_check
from wzw.fusion import block_dim, factorization_check, fusion_ring, monodromy, verlinde_dim
from wzw.lie import build_algebra, casimir_formula, enumerate_P_ell

SL2 = build_algebra("sl2")


def verdict(n, ok, detail, capsys=None):
    line = f"[acceptance {n:2d}] {'PASS' if ok else 'FAIL'}: {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


def label_multisets(level, n_min, n_max):
    P = enumerate_P_ell(SL2, level)
    for n in range(n_min, n_max + 1):
        yield from itertools.combinations_with_replacement(P, n)


def rational_points(rng, n):
    while True:
        pts = [Fraction(rng.randint(-30, 30), rng.randint(1, 7)) for _ in range(n)]
        if len(set(pts)) == n:
            return pts


def test_01_oscillator_virasoro(capsys):
    m = build_module("oscillator", depth=8)
    rep = virasoro_check(m, 3)
    verdict(1, rep.ok and central_charge(m) == 1,
            f"oscillator depth 8, |k|,|l|<=3: {rep.checked} blocks, max residual {rep.max_residual}",
            capsys)


def test_02_affine_virasoro(capsys):
    m = build_module("affine", SL2, (0,), 1, 4)
    Z = central_charge(m)
    rep = virasoro_check(m, 3)
    verdict(2, rep.ok and Z == 1,
            f"sl2 level 1 vacuum depth 4: Z={Z}, {rep.checked} blocks, max residual {rep.max_residual}",
            capsys)


def test_03_derivation(capsys):
    m = build_module("affine", SL2, (0,), 1, 4)
    rep = derivation_property_check(m, range(-4, 5), range(-4, 5))
    verdict(3, rep.ok, f"sl2 level 1 depth 4, all in-window (k, m): {rep.checked} blocks, "
            f"max residual {rep.max_residual}", capsys)


def test_04_genus_zero_dimensions(capsys):
    rng = random.Random(4)
    cases = [(1, 2, 1), (1, 3, 0), (1, 4, 1), (2, 4, 2)]
    bad = []
    for level, n, expected in cases:
        for pts in [list(range(n))] + [rational_points(rng, n) for _ in range(3)]:
            d = block(SL2, level, make_insertions(pts, [(1,)] * n)).dim
            if d != expected:
                bad.append((level, n, [str(p) for p in pts], d))
    verdict(4, not bad, "sl2 dims 1,0,1 (level 1; 2,3,4 points) and 2 (level 2; 4 points) "
            f"at 4 configurations each; mismatches: {bad}", capsys)


def test_05_kz_flatness(capsys):
    rng = random.Random(5)
    worst = []
    for level in (1, 2):
        for _ in range(3):
            pts = rational_points(rng, 4)
            k = kz_system(block(SL2, level, make_insertions(pts, [(1,)] * 4)))
            rep = flatness_check(k)
            worst.append(rep.values["max_residual"])
    verdict(5, all(w == "0" for w in worst),
            f"N=4 sl2 levels 1,2 at 3 random configurations: residuals {worst}", capsys)


def test_06_factorization(capsys):
    checked, bad = 0, []
    for level in (1, 2):
        for labs in label_multisets(level, 2, 4):
            for r in range(1, len(labs)):
                for split in itertools.combinations(range(len(labs)), r):
                    checked += 1
                    rep = factorization_check(SL2, level, labs, split)
                    if not rep.ok:
                        bad.append((level, labs, split))
    verdict(6, not bad, f"{checked} splits over all multisets N<=4, levels 1,2; failures {bad[:5]}",
            capsys)


def test_07_verlinde(capsys):
    checked, bad = 0, []
    for level in (1, 2):
        ring = fusion_ring(SL2, level)
        for labs in label_multisets(level, 1, 4):
            checked += 1
            if verlinde_dim(ring, 0, labs) != block_dim(SL2, level, labs):
                bad.append((level, labs))
    g1 = verlinde_dim(fusion_ring(SL2, 1), 1)
    P1 = len(enumerate_P_ell(SL2, 1))
    verdict(7, not bad and g1 == 2 == P1,
            f"genus 0 agrees on {checked} multisets (failures {bad[:5]}); genus 1 level 1 = {g1}",
            capsys)


def test_08_epsilon(capsys):
    lines, ok = [], True
    for lam in [(0,), (1,)]:
        eps = epsilon_tensor(SL2, lam, 1, 3)
        inv, eig = epsilon_invariance_check(eps), epsilon_eigen_check(eps)
        expected = [-d - casimir_formula(SL2, lam) / (2 * 3) for d in range(4)]
        got = [epsilon_eigenvalue(eps, d) for d in range(4)]
        ok = ok and inv.ok and eig.ok and got == expected
        lines.append(f"{lam}: invariance {inv.max_residual}, eigen {eig.max_residual}, "
                     f"eigenvalues {[str(g) for g in got]}")
    verdict(8, ok, "; ".join(lines), capsys)


def test_09_monodromy(capsys):
    ok = True
    for level in (1, 2):
        for lam in enumerate_P_ell(SL2, level):
            m = monodromy(SL2, level, lam)
            r = casimir_formula(SL2, lam) / (level + 2)
            ok = ok and m.exponent == r and isinstance(m.exponent, Fraction)
            ok = ok and m.order >= 1 and (m.order * m.exponent) % 2 == 0
    a, b = monodromy(SL2, 1, (1,)), monodromy(SL2, 2, (2,))
    ok = ok and (a.exponent, a.order) == (Fraction(1, 2), 4) and (b.exponent, b.order) == (1, 2)
    verdict(9, ok, f"r((1),l=1)={a.exponent} order {a.order}; r((2),l=2)={b.exponent} order {b.order}",
            capsys)


def test_10_propagation(capsys):
    checked, bad = 0, []
    for level in (1, 2):
        for labs in label_multisets(level, 1, 4):
            checked += 1
            rep = propagation_check(SL2, level, make_insertions(range(len(labs)), labs), len(labs))
            if not rep.ok:
                bad.append((level, labs, rep.values))
    verdict(10, not bad, f"trivial insertion preserves dimension on {checked} multisets; "
            f"failures {bad[:5]}", capsys)


def main() -> int:
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn(None)
            except AssertionError:
                failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
