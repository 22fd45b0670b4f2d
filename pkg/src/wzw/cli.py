"""Command-line front end: ``wzw <group> <command> [options]``.

JSON goes to stdout, diagnostics to stderr. Exit status is 0 when every
requested check has zero residual, 1 when some identity fails and 2 on
argument or precondition errors.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import affine, blocks, fusion, lie
from .core import matrix_to_json


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    algebra: str = "sl2"
    level: int = 1
    depth: int = 3
    labels: list = field(default_factory=list)
    points: list = field(default_factory=list)
    genus: int = 0
    output: str = "json"
    seed: int = 0

    def alg(self) -> lie.SimpleLieAlgebra:
        return lie.build_algebra(self.algebra)

    def validate(self) -> None:
        if self.algebra not in lie.SUPPORTED:
            raise UsageError(f"unknown algebra {self.algebra!r}; choose from {', '.join(lie.SUPPORTED)}")
        if self.level < 1:
            raise UsageError("--level must be >= 1")
        if self.depth < 0:
            raise UsageError("--depth must be >= 0")
        if self.genus < 0:
            raise UsageError("--genus must be >= 0")
        alg = self.alg()
        for lab in self.labels:
            if len(lab) != alg.rank:
                raise UsageError(f"label {':'.join(map(str, lab))} needs {alg.rank} coordinates")
            if any(x < 0 for x in lab):
                raise UsageError(f"label {lab} is not dominant")
            if alg.level(lab) > self.level:
                raise UsageError(f"label {lab} has level {alg.level(lab)} > {self.level}")
        if len(set(self.points)) != len(self.points):
            raise UsageError("insertion points must be distinct")


def parse_labels(text: str) -> list[tuple]:
    """``1,1`` -> [(1,), (1,)]; ``1:0,0:1`` -> [(1, 0), (0, 1)]; '' -> []."""
    text = text.strip()
    if not text:
        return []
    try:
        return [tuple(int(c) for c in part.split(":")) for part in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse labels {text!r}") from None


def parse_points(text: str) -> list[Fraction]:
    text = text.strip()
    if not text:
        return []
    try:
        return [Fraction(p.strip()) for p in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse points {text!r}") from None


def _config(ns) -> RunConfig:
    cfg = RunConfig(
        algebra=getattr(ns, "algebra", "sl2"),
        level=getattr(ns, "level", 1),
        depth=getattr(ns, "depth", 3),
        labels=parse_labels(getattr(ns, "labels", "") or ""),
        points=parse_points(getattr(ns, "points", "") or ""),
        genus=getattr(ns, "genus", 0),
        output=ns.format,
        seed=ns.seed,
    )
    label = getattr(ns, "label", None)
    if label is not None:
        cfg.labels = parse_labels(label)
        if len(cfg.labels) != 1:
            raise UsageError("--label takes a single weight")
    if cfg.points == [] and cfg.labels and hasattr(ns, "points"):
        cfg.points = [Fraction(i) for i in range(len(cfg.labels))]
    if hasattr(ns, "points") and len(cfg.points) != len(cfg.labels):
        raise UsageError("--points and --labels must have the same length")
    cfg.validate()
    return cfg


# -- commands ------------------------------------------------------------------
# Each returns (report dict, ok flag, failed identity names).

def cmd_lie_info(cfg: RunConfig):
    alg = cfg.alg()
    out = lie.algebra_descriptor(alg)
    out["cartan_matrix"] = [list(r) for r in alg.cartan_matrix]
    out["highest_root"] = alg.basis_labels[alg.highest_root]
    out["irreps"] = [lie.irrep_descriptor(lie.build_irrep(alg, w))
                     for w in lie.enumerate_P_ell(alg, cfg.level)]
    out["level"] = cfg.level
    return out, True, []


def _module_from(cfg: RunConfig, mode: str):
    if mode == "oscillator":
        return affine.build_module("oscillator", depth=cfg.depth)
    weight = cfg.labels[0] if cfg.labels else tuple(0 for _ in range(cfg.alg().rank))
    return affine.build_module("affine", cfg.alg(), weight, cfg.level, cfg.depth)


def cmd_module_build(cfg: RunConfig, mode: str = "affine", operators: bool = False):
    m = _module_from(cfg, mode)
    out = m.descriptor()
    out["central_charge"] = str(affine.central_charge(m))
    out["gram"] = [matrix_to_json(g) for g in m.gram]
    if operators:
        out["sugawara_zero_mode"] = [matrix_to_json(affine.sugawara_block(m, 0, d))
                                     for d in range(m.depth + 1)]
    return out, True, []


def cmd_virasoro_check(cfg: RunConfig, mode: str = "affine", K: int | None = None):
    m = _module_from(cfg, mode)
    K = min(3, m.depth) if K is None else K
    if K > m.depth:
        raise UsageError("-K must not exceed --depth")
    rep = affine.virasoro_check(m, K)
    out = {"module": m.descriptor(), "central_charge": str(affine.central_charge(m)),
           "K": K, "report": rep.to_json()}
    return out, rep.ok, [] if rep.ok else ["virasoro"]


def _block_of(cfg: RunConfig):
    alg = cfg.alg()
    return blocks.block(alg, cfg.level, blocks.make_insertions(cfg.points, cfg.labels))


def cmd_blocks_dim(cfg: RunConfig):
    b = _block_of(cfg)
    return {"dimension": b.dim}, True, []


def cmd_blocks_kz(cfg: RunConfig):
    b = _block_of(cfg)
    if len(cfg.labels) < 2:
        raise UsageError("KZ needs at least two insertions")
    k = blocks.kz_system(b)
    flat = blocks.flatness_check(k)
    desc = blocks.descent_check(k)
    out = {"dimension": b.dim, **blocks.kz_json(k),
           "curvature": flat.to_json(), "descent": desc.to_json()}
    failed = [r.name for r in (flat, desc) if not r.ok]
    return out, not failed, failed


def cmd_fusion_table(cfg: RunConfig):
    ring = fusion.fusion_ring(cfg.alg(), cfg.level)
    bad = ring.violations()
    out = ring.to_json()
    out["axioms_ok"] = not bad
    if bad:
        out["violations"] = bad[:20]
    return out, not bad, ["fusion ring axioms"] if bad else []


def cmd_fusion_verlinde(cfg: RunConfig):
    ring = fusion.fusion_ring(cfg.alg(), cfg.level)
    dim = fusion.verlinde_dim(ring, cfg.genus, cfg.labels)
    return {"genus": cfg.genus, "labels": [list(l) for l in cfg.labels], "dimension": dim}, True, []


def cmd_fusion_monodromy(cfg: RunConfig):
    if len(cfg.labels) != 1:
        raise UsageError("--label is required")
    d = fusion.monodromy(cfg.alg(), cfg.level, cfg.labels[0])
    return {"exponent": str(d.exponent), "order": d.order}, True, []


# -- verify all ------------------------------------------------------------------

def _v_lie(cfg: RunConfig):
    alg = cfg.alg()
    bad = []
    for w in lie.enumerate_P_ell(alg, cfg.level):
        rep = lie.build_irrep(alg, w)
        if rep.dim != lie.weyl_dimension(alg, w):
            bad.append(f"weyl dimension {w}")
        if rep.casimir_scalar != lie.casimir_formula(alg, w):
            bad.append(f"casimir scalar {w}")
        C = rep.casimir_operator()
        if C != C.scalar(rep.dim, rep.casimir_scalar):
            bad.append(f"casimir operator {w}")
    return {"check": "lie", "ok": not bad, "failures": bad}


def _v_oscillator(cfg: RunConfig):
    D = max(cfg.depth, 3)
    m = affine.build_module("oscillator", depth=D)
    return affine.virasoro_check(m, 3).to_json() | {"check": "oscillator-virasoro"}


def _v_affine(cfg: RunConfig):
    alg = cfg.alg()
    out = []
    for w in lie.enumerate_P_ell(alg, cfg.level):
        m = affine.build_module("affine", alg, w, cfg.level, cfg.depth)
        K = min(3, cfg.depth)
        for rep in (affine.virasoro_check(m, K),
                    affine.derivation_property_check(m, range(-K, K + 1)),
                    affine.bracket_check(m)):
            out.append(rep.to_json() | {"check": f"{rep.name} {list(w)}"})
    return out


def _v_epsilon(cfg: RunConfig):
    alg = cfg.alg()
    D = min(cfg.depth, 3)
    out = []
    for w in lie.enumerate_P_ell(alg, cfg.level):
        eps = affine.epsilon_tensor(alg, w, cfg.level, D)
        for rep in (affine.epsilon_invariance_check(eps), affine.epsilon_eigen_check(eps)):
            out.append(rep.to_json() | {"check": f"{rep.name} {list(w)}"})
    return out


def _multisets(P, n_max):
    for n in range(1, n_max + 1):
        yield from itertools.combinations_with_replacement(P, n)


def _v_blocks(cfg: RunConfig):
    alg = cfg.alg()
    rng = random.Random(cfg.seed)
    P = lie.enumerate_P_ell(alg, cfg.level)
    n_max = 4 if alg.rank == 1 else 3
    bad = []
    checked = 0
    for labs in _multisets(P, n_max):
        dims = set()
        for _ in range(2):
            pts = rng.sample(range(-20, 21), len(labs))
            pts = [Fraction(p, rng.randint(1, 4)) for p in pts]
            if len(set(pts)) != len(pts):
                pts = list(range(len(labs)))
            dims.add(blocks.block(alg, cfg.level, blocks.make_insertions(pts, labs)).dim)
        prop = blocks.propagation_check(alg, cfg.level,
                                        blocks.make_insertions(range(len(labs)), labs), len(labs))
        checked += 1
        if len(dims) != 1:
            bad.append(f"point dependence {labs}")
        if not prop.ok:
            bad.append(f"propagation {labs}")
    return {"check": "blocks", "checked": checked, "ok": not bad, "failures": bad}


def _v_kz(cfg: RunConfig):
    alg = cfg.alg()
    rng = random.Random(cfg.seed + 1)
    lam = tuple([1] + [0] * (alg.rank - 1))
    labs = [lam, alg.dual_weight(lam), lam, alg.dual_weight(lam)]
    out = []
    pts = []
    while len(set(pts)) != 4:
        pts = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(4)]
    k = blocks.kz_system(blocks.block(alg, cfg.level, blocks.make_insertions(pts, labs)))
    for rep in (blocks.flatness_check(k), blocks.descent_check(k)):
        out.append(rep.to_json())
    return out


def _v_fusion(cfg: RunConfig):
    alg = cfg.alg()
    ring = fusion.fusion_ring(alg, cfg.level)
    bad = ring.violations()
    n_max = 4 if alg.rank == 1 else 3
    checked = 0
    for labs in _multisets(ring.labels, n_max):
        direct = fusion.block_dim(alg, cfg.level, labs)
        for order in (None, list(reversed(range(len(labs))))):
            if fusion.verlinde_dim(ring, 0, labs, order) != direct:
                bad.append(f"verlinde {labs} order {order}")
        for r in range(1, len(labs)):
            for split in itertools.combinations(range(len(labs)), r):
                checked += 1
                if not fusion.factorization_check(alg, cfg.level, labs, split).ok:
                    bad.append(f"factorization {labs} {split}")
    if fusion.verlinde_dim(ring, 1) != sum(fusion.block_dim(alg, cfg.level, [l, alg.dual_weight(l)])
                                           for l in ring.labels):
        bad.append("genus one")
    for w in ring.labels:
        d = fusion.monodromy(alg, cfg.level, w)
        if d.exponent != fusion.monodromy(alg, cfg.level, alg.dual_weight(w)).exponent:
            bad.append(f"monodromy duality {w}")
        if (d.order * d.exponent) % 2:
            bad.append(f"monodromy order {w}")
    return {"check": "fusion", "checked": checked, "ok": not bad, "failures": bad[:20]}


VERIFY_ITEMS: list[tuple[str, Callable]] = [
    ("lie", _v_lie),
    ("oscillator", _v_oscillator),
    ("affine", _v_affine),
    ("epsilon", _v_epsilon),
    ("blocks", _v_blocks),
    ("kz", _v_kz),
    ("fusion", _v_fusion),
]


def _run_item(args):
    name, cfg = args
    res = dict(VERIFY_ITEMS)[name](cfg)
    return res if isinstance(res, list) else [res]


def cmd_verify_all(cfg: RunConfig):
    workers = fusion.default_workers()
    jobs = [(name, cfg) for name, _ in VERIFY_ITEMS]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_item, jobs))
    else:
        results = [_run_item(j) for j in jobs]
    reports = [r for group in results for r in group]
    failed = [r.get("check") or r.get("identity") for r in reports if not r["ok"]]
    return {"algebra": cfg.algebra, "level": cfg.level, "depth": cfg.depth,
            "seed": cfg.seed, "reports": reports, "ok": not failed}, not failed, failed


# -- output -------------------------------------------------------------------------

def _table_lines(obj, prefix="") -> list[str]:
    if isinstance(obj, dict):
        lines = []
        for k in obj:
            lines += _table_lines(obj[k], f"{prefix}{k}.")
        return lines
    if isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        lines = []
        for i, v in enumerate(obj):
            lines += _table_lines(v, f"{prefix}{i}.")
        return lines
    return [f"{prefix.rstrip('.')}\t{json.dumps(obj, default=_exact)}"]


def fusion_table_text(report: dict) -> str:
    labels = [":".join(map(str, l)) for l in report["labels"]]
    N = {(tuple(c["lambda"]), tuple(c["mu"]), tuple(c["nu"])): c["N"] for c in report["coefficients"]}
    lab_t = [tuple(l) for l in report["labels"]]
    rows = []
    for nu, nu_s in zip(lab_t, labels):
        rows.append([f"nu={nu_s}"] + labels)
        for lam, lam_s in zip(lab_t, labels):
            rows.append([lam_s] + [str(N[(lam, mu, nu)]) for mu in lab_t])
        rows.append([])
    width = max(len(c) for r in rows for c in r) + 1
    return "\n".join("".join(c.rjust(width) for c in r) for r in rows).rstrip() + "\n"


def _exact(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render(report: dict, output: str, command: str) -> str:
    if output == "json":
        return json.dumps(report, indent=2, sort_keys=True, default=_exact) + "\n"
    if command == "fusion table":
        return fusion_table_text(report)
    lines = _table_lines(report)
    width = max(len(l.split("\t")[0]) for l in lines)
    return "\n".join(f"{a.ljust(width)}  {b}" for a, b in (l.split("\t", 1) for l in lines)) + "\n"


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized configurations")
    common.add_argument("-v", "--verbose", action="store_true")

    def alg_opts(p, depth=False, level=True):
        p.add_argument("--algebra", default="sl2", choices=lie.SUPPORTED)
        if level:
            p.add_argument("--level", type=int, default=1)
        if depth:
            p.add_argument("--depth", type=int, default=3)

    parser = argparse.ArgumentParser(prog="wzw", description="Exact WZW / affine Lie algebra computations.")
    groups = parser.add_subparsers(dest="group", required=True)

    g = groups.add_parser("lie").add_subparsers(dest="command", required=True)
    p = g.add_parser("info", parents=[common])
    alg_opts(p)

    g = groups.add_parser("module").add_subparsers(dest="command", required=True)
    p = g.add_parser("build", parents=[common])
    alg_opts(p, depth=True)
    p.add_argument("--label", default=None, help="bottom weight (default: vacuum)")
    p.add_argument("--mode", choices=affine.MODES, default="affine")
    p.add_argument("--operators", action="store_true", help="also emit the Sugawara zero mode")

    g = groups.add_parser("virasoro").add_subparsers(dest="command", required=True)
    p = g.add_parser("check", parents=[common])
    alg_opts(p, depth=True)
    p.add_argument("--label", default=None)
    p.add_argument("--mode", choices=affine.MODES, default="affine")
    p.add_argument("-K", type=int, default=None, help="mode range |k|,|l| <= K")

    g = groups.add_parser("blocks").add_subparsers(dest="command", required=True)
    for name in ("dim", "kz"):
        p = g.add_parser(name, parents=[common])
        alg_opts(p)
        p.add_argument("--labels", required=True)
        p.add_argument("--points", default="")

    g = groups.add_parser("fusion").add_subparsers(dest="command", required=True)
    p = g.add_parser("table", parents=[common])
    alg_opts(p)
    p = g.add_parser("verlinde", parents=[common])
    alg_opts(p)
    p.add_argument("--genus", type=int, default=0)
    p.add_argument("--labels", default="")
    p = g.add_parser("monodromy", parents=[common])
    alg_opts(p)
    p.add_argument("--label", required=True)

    g = groups.add_parser("verify").add_subparsers(dest="command", required=True)
    p = g.add_parser("all", parents=[common])
    alg_opts(p, depth=True)
    return parser


def _dispatch(ns, cfg: RunConfig):
    key = f"{ns.group} {ns.command}"
    if key == "lie info":
        return cmd_lie_info(cfg)
    if key == "module build":
        return cmd_module_build(cfg, ns.mode, ns.operators)
    if key == "virasoro check":
        return cmd_virasoro_check(cfg, ns.mode, ns.K)
    return {
        "blocks dim": cmd_blocks_dim,
        "blocks kz": cmd_blocks_kz,
        "fusion table": cmd_fusion_table,
        "fusion verlinde": cmd_fusion_verlinde,
        "fusion monodromy": cmd_fusion_monodromy,
        "verify all": cmd_verify_all,
    }[key](cfg)


DOMAIN_ERRORS = (UsageError, lie.LieError, affine.ModuleError, blocks.BlockError, fusion.FusionError)


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, stream=stderr,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _config(ns)
        report, ok, failed = _dispatch(ns, cfg)
    except DOMAIN_ERRORS as exc:
        parser.print_usage(stderr)
        print(f"wzw: error: {exc}", file=stderr)
        return 2
    stdout.write(render(report, cfg.output, f"{ns.group} {ns.command}"))
    for name in failed:
        print(f"FAILED: {name}", file=stderr)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
