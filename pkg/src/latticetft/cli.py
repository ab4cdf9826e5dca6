"""Command line front end.

Exit status: 0 when every requested check passes, 1 when a verification
fails, 2 when the input cannot be parsed or validated.
"""
from __future__ import annotations

import argparse
import itertools
import sys

import numpy as np

from . import centrefun as cf
from . import exactlin as el
from . import io
from . import surface as sf
from . import verify as vf
from .algebra import NotFrobenius, standard_library
from .bimodule import cyclic_tensor, hom_space
from .onedim import LabelMismatch, evaluate_1d
from .tft import TFT

SUITES = ("moves", "functoriality", "amplitudes", "cardy", "adjunction", "lax", "coherence", "invertibility")


class InputError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _scene(args) -> io.Scene:
    if not args.scene:
        raise InputError("--scene is required")
    return io.load_scene(args.scene, args.field)


def _sig(sc: io.Scene):
    if sc.signature is None:
        raise InputError("the scene has no signature")
    return sc.signature


def _strings(a):
    return el.to_strings(np.asarray(a, dtype=object))


def _emit(args, report: dict) -> None:
    if args.json:
        sys.stdout.write(io.dumps(report))
        return
    for k in sorted(report):
        v = report[k]
        if isinstance(v, list) and v and isinstance(v[0], list):
            print(f"{k}:")
            for row in v:
                print("  " + " ".join(map(str, row)))
        else:
            print(f"{k}: {v}")


def _named(reg: dict, key: str, what: str):
    if key not in reg:
        raise InputError(f"unknown {what} {key!r}; known: {', '.join(sorted(reg)) or 'none'}")
    return reg[key]


# ---------------------------------------------------------------- algebra and bimodule reports

def algebra_report(A) -> dict:
    zdim = A.centre().dim
    qdim = A.commutator_quotient()[0]
    frob = A.is_frobenius()
    return {"name": A.name, "dim": A.dim, "commutative": A.is_commutative(), "frobenius": frob,
            "dim_centre": zdim, "dim_quotient": qdim,
            # the centre/quotient equality is only asserted for Frobenius algebras
            "lemma33_applies": frob, "lemma33_consistent": (zdim == qdim) if frob else True}


def _load_algebra(args):
    target = args.path
    if target.startswith("builtin:"):
        lib = standard_library(args.field or el.QQ)
        return _named(lib, target.split(":", 1)[1], "builtin algebra")
    doc = io.load_json(target)
    f = args.field or el.field_from_spec(doc.get("field", "q"))
    if doc.get("kind") == "algebra" or "builtin" in doc:
        A = io.algebra_from_doc(doc, f)
        bad = A.violations()
        if bad:
            raise io.SceneError("algebra: " + "; ".join(bad[:5]))
        return A
    sc = io.scene_from_doc(doc, args.field)
    return _pick(sc.algebras, args.name, "algebra")


def _pick(reg, name, what):
    if name:
        return _named(reg, name, what)
    if len(reg) != 1:
        raise InputError(f"the scene holds {len(reg)} {what}s; choose one with --name")
    return next(iter(reg.values()))


def cmd_check_algebra(args) -> int:
    _emit(args, algebra_report(_load_algebra(args)))
    return 0


def cmd_check_bimodule(args) -> int:
    sc = io.load_scene(args.path, args.field)
    X = _pick(sc.bimodules, args.name, "bimodule")
    rep = {"dim": X.dim, "left_dim": X.left.dim, "right_dim": X.right.dim,
           "dim_endomorphisms": len(hom_space(X, X)), "violations": []}
    if X.left.same_as(X.right):
        rep["dim_cyclic_tensor"] = cyclic_tensor(X).dim
    _emit(args, rep)
    return 0


# ---------------------------------------------------------------- surfaces

def cmd_state_space(args) -> int:
    sc = _scene(args)
    sig = _sig(sc)
    c = io.parse_word_circle(args.circle)
    if args.domain and not c.slots:
        c = sf.circle_from_word(sig, (), args.domain)
    S = TFT(sig).state_space(c)
    _emit(args, {"circle": io.circle_to_doc(c), "dim": S.dim, "ambient_dims": list(S.ambient_dims),
                 "basis": _strings(S.splitting.embed)})
    return 0


def cmd_evaluate(args) -> int:
    sc = _scene(args)
    if sc.dimension == 1:
        d = _named(sc.diagrams, args.name, "diagram")
        mat, scalar = evaluate_1d(sc.theory, d)
        _emit(args, {"matrix": _strings(mat), "scalar": sc.field.format(scalar)})
        return 0
    M = _named(sc.bordisms, args.name, "bordism")
    amp = TFT(_sig(sc)).evaluate(M)
    _emit(args, amp.report(sc.field.format))
    return 0


def cmd_defect_op(args) -> int:
    sc = _scene(args)
    sig = _sig(sc)
    w = _named(sig.walls, args.wall, "wall")
    D = TFT(sig).defect_operator(args.wall)
    _emit(args, {"wall": args.wall, "source": w.source, "target": w.target, "matrix": _strings(D)})
    return 0


def cmd_cardy(args) -> int:
    sc = _scene(args)
    sig = _sig(sc)
    walls = args.walls or [x for x, w in sorted(sig.walls.items()) if w.source == w.target]
    for x in walls:
        _named(sig.walls, x, "wall")
    return _report_checks(args, vf.cardy(TFT(sig), walls))


# ---------------------------------------------------------------- cospans

def _cospan_report(C: cf.Cospan) -> dict:
    return {"source_dim": C.A.dim, "target_dim": C.B.dim, "middle_dim": C.T.dim,
            "alpha": _strings(C.alpha.matrix), "beta": _strings(C.beta.matrix),
            "valid": not C.violations()}


def cmd_cospan_compose(args) -> int:
    sc = _scene(args)
    S = _named(sc.cospans, args.outer, "cospan")
    T = _named(sc.cospans, args.inner, "cospan")
    try:
        C = cf.compose_cospans(S, T)
    except cf.AlgebraMismatch as exc:
        raise InputError(f"cannot compose: {exc}") from None
    rep = _cospan_report(C)
    rep["invertible"] = cf.cospan_invertibility(C).as_dict()
    _emit(args, rep)
    return 0 if rep["valid"] else 1


def cmd_centre_cospan(args) -> int:
    sc = _scene(args)
    f = _named(sc.maps, args.map, "map")
    C = cf.centre_cospan(f)
    rep = _cospan_report(C)
    rep["invertible"] = cf.cospan_invertibility(C).as_dict()
    rep["containments"] = cf.centre_containments(f)
    _emit(args, rep)
    return 0 if rep["valid"] and rep["containments"] else 1


def cmd_lax_check(args) -> int:
    sc = _scene(args)
    f = _named(sc.maps, args.first, "map")
    g = _named(sc.maps, args.second, "map")
    if not f.target.same_as(g.source):
        raise InputError("maps are not composable: target of the first differs from source of the second")
    r = cf.lax_report(f, g)
    rep = r.as_dict()
    if not (r.injective and r.surjective):
        rep["note"] = f"m not invertible ({r.source_dim}→{r.target_dim})"
    _emit(args, rep)
    return 0 if r.valid and r.triangles else 1


# ---------------------------------------------------------------- verification suites

def _report_checks(args, checks: list) -> int:
    ok = all(c.ok for c in checks)
    if args.json:
        sys.stdout.write(io.dumps({"ok": ok, "checks": [c.as_dict() for c in checks]}))
    else:
        for c in checks:
            print(f"{'PASS' if c.ok else 'FAIL'} {c.suite} {c.name}")
            if not c.ok:
                print(f"     {c.detail}")
        print(f"{sum(c.ok for c in checks)}/{len(checks)} passed")
    return 0 if ok else 1


def _opts(sc: io.Scene, suite: str) -> dict:
    v = sc.checks.get(suite, {})
    return v if isinstance(v, dict) else {"items": v}


def _parallel_walls(sig, n: int, limit: int, self_only: bool = False) -> list:
    groups = {}
    for x, w in sorted(sig.walls.items(), key=lambda kv: (kv[1].bimodule.dim, kv[0])):
        if not self_only or w.source == w.target:
            groups.setdefault((w.source, w.target), []).append(x)
    out = []
    for labels in groups.values():
        out.extend(itertools.islice(itertools.product(labels, repeat=n), limit - len(out)))
    return out


def _suite_moves(sc, T, args):
    o = _opts(sc, "moves")
    names = o.get("items") or o.get("bordisms") or sorted(sc.bordisms)
    checks = vf.moves(T, {n: _named(sc.bordisms, n, "bordism") for n in names}, o.get("limit"))
    for c in checks:
        if not c.ok:
            c.detail["surface"] = io.surface_to_doc(sc.bordisms[c.name])
    return checks


def _suite_functoriality(sc, T, args):
    o = _opts(sc, "functoriality")
    sig = T.sig
    names = o.get("decompositions") or sorted(sc.bordisms)
    out = vf.decomposition_independence(T, {n: _named(sc.bordisms, n, "bordism") for n in names},
                                        seed=args.seed, walks=o.get("walks", 2))
    circles = o.get("cylinders")
    if circles is None:
        circles = {f"@{a}": io.parse_word_circle(f"@{a}") for a in sorted(sig.domains)}
        circles.update({f"{x}+": io.parse_word_circle(f"{x}+") for x, w in sorted(sig.walls.items())
                        if w.source == w.target})
    else:
        circles = {c: io.parse_word_circle(c) for c in circles}
    out += vf.cylinders(T, circles)
    pairs = o.get("glue", [])
    out += vf.gluing(T, [(f"{a}|{b}", _named(sc.bordisms, a, "bordism"), _named(sc.bordisms, b, "bordism"))
                         for a, b in pairs])
    return out


def _suite_amplitudes(sc, T, args):
    o = _opts(sc, "amplitudes")
    sig = T.sig
    out = [vf.pair_projector(T, x, y) for x, y in o.get("pair_projector", _parallel_walls(sig, 2, 4))]
    out += [vf.cup_annulus(T, x) for x in o.get("cup_annulus", sorted(sig.walls))]
    out += [vf.defect_unit(T, a) for a in o.get("defect_unit", sorted(sig.domains))]
    pairs = o.get("defect_composition")
    if pairs is None:
        pairs = [(x, y) for x, y in itertools.product(sorted(sig.walls), repeat=2)
                 if sig.walls[x].target == sig.walls[y].source][:6]
    out += [vf.defect_composition(T, x, y) for x, y in pairs]
    return out


def _suite_cardy(sc, T, args):
    walls = _opts(sc, "cardy").get("items") or [x for x, w in sorted(T.sig.walls.items())
                                                 if w.source == w.target]
    return vf.cardy(T, walls)


def _suite_adjunction(sc, T, args):
    o = _opts(sc, "adjunction")
    # snake identities grow exponentially with the wall dimension, so the default keeps small walls
    small = [x for x, w in sorted(T.sig.walls.items()) if w.bimodule.dim <= 2]
    out = [vf.zigzags(T, x) for x in o.get("zigzag", small)]
    # interchange composes horizontally, which needs self-walls
    triples = o.get("interchange", _parallel_walls(T.sig, 3, 3, self_only=True))
    out += [vf.interchange(T, t, seed=args.seed) for t in triples]
    out += [vf.delta_compatibility(T, t, seed=args.seed) for t in o.get("delta", triples)]
    return out


def _composable(maps: dict, n: int) -> list:
    out = []
    for names in itertools.product(sorted(maps), repeat=n):
        ms = [maps[k] for k in names]
        if all(a.target.same_as(b.source) for a, b in zip(ms, ms[1:])):
            out.append(names)
    return out


def _suite_lax(sc, T, args):
    o = _opts(sc, "lax")
    pairs = o.get("items") or _composable(sc.maps, 2)
    return [c for f, g in pairs
            for c in vf.lax_chain(_named(sc.maps, f, "map"), _named(sc.maps, g, "map"), f"{g}∘{f}")]


def _suite_coherence(sc, T, args):
    o = _opts(sc, "coherence")
    triples = o.get("triples") or _composable(sc.maps, 3)[:12]
    triples = [("·".join(t), tuple(_named(sc.maps, n, "map") for n in t)) for t in triples]
    chains = [(" ".join(ch), [_named(sc.cospans, n, "cospan") for n in ch]) for ch in o.get("chains", [])]
    return vf.coherence(triples, chains)


def _suite_invertibility(sc, T, args):
    return vf.cospan_witnesses(sorted(sc.cospans.items()))


def cmd_verify(args) -> int:
    sc = _scene(args)
    needs_sig = args.suite in ("moves", "functoriality", "amplitudes", "cardy", "adjunction")
    T = TFT(_sig(sc)) if needs_sig else None
    checks = globals()[f"_suite_{args.suite}"](sc, T, args)
    if not checks:
        raise InputError(f"the scene requests no instances for suite {args.suite!r}")
    return _report_checks(args, checks)


# ---------------------------------------------------------------- parser

def _field(text: str):
    try:
        return el.field_from_spec(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scene", help="scene JSON file")
    common.add_argument("--field", type=_field, default=None, help="q or fp:<p>; overrides the scene")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised instance generation")

    p = argparse.ArgumentParser(prog="latticetft", description="Exact lattice TFT evaluator and verifier.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("check-algebra", parents=[common], help="Frobenius, centre and commutator quotient")
    s.add_argument("path", help="algebra document, scene, or builtin:<name>")
    s.add_argument("--name", help="algebra id when PATH is a scene")
    s.set_defaults(run=cmd_check_algebra)

    s = sub.add_parser("check-bimodule", parents=[common], help="validate a bimodule from a scene")
    s.add_argument("path")
    s.add_argument("--name")
    s.set_defaults(run=cmd_check_bimodule)

    s = sub.add_parser("state-space", parents=[common], help="state space of a boundary circle")
    s.add_argument("circle", help='word such as "x+ y-", or "@a" for a plain circle')
    s.add_argument("--domain")
    s.set_defaults(run=cmd_state_space)

    s = sub.add_parser("evaluate", parents=[common], help="amplitude of a named bordism or 1d diagram")
    s.add_argument("name")
    s.set_defaults(run=cmd_evaluate)

    s = sub.add_parser("defect-op", parents=[common], help="defect operator of a wall")
    s.add_argument("wall")
    s.set_defaults(run=cmd_defect_op)

    s = sub.add_parser("cardy", parents=[common], help="Cardy condition for self-walls")
    s.add_argument("walls", nargs="*")
    s.set_defaults(run=cmd_cardy)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("suite", choices=SUITES)
    s.set_defaults(run=cmd_verify)

    s = sub.add_parser("cospan-compose", parents=[common], help="compose two cospans (outer after inner)")
    s.add_argument("outer")
    s.add_argument("inner")
    s.set_defaults(run=cmd_cospan_compose)

    s = sub.add_parser("centre-cospan", parents=[common], help="centre cospan of an algebra map")
    s.add_argument("map")
    s.set_defaults(run=cmd_centre_cospan)

    s = sub.add_parser("lax-check", parents=[common], help="lax comparison for FIRST then SECOND")
    s.add_argument("first")
    s.add_argument("second")
    s.set_defaults(run=cmd_lax_check)
    return p


INPUT_ERRORS = (InputError, io.SceneError, sf.ValidationFailed, sf.UnknownLabel, sf.BoundaryMismatch,
                LabelMismatch, NotFrobenius, cf.CospanMismatch, cf.InvalidCospan)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except INPUT_ERRORS as exc:
        print(f"latticetft: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
