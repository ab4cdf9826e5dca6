"""JSON documents and scenes.

Scalars are written as strings (``"3/4"``, or a residue for ``fp:<p>``).
Structure constants are stored sparsely as ``[i, j, k, "c"]`` entries; maps
and covectors are dense. Documents may also name a constructor (``builtin``,
``construct`` or ``build``); dumping always writes the explicit form, so
``dump(load(dump(x)))`` equals ``dump(x)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import centrefun as cf
from . import exactlin as el
from . import surface as sf
from .algebra import Algebra, AlgebraMap, standard_library
from .bimodule import Bimodule, direct_sum, module_from_map, regular, twist
from .onedim import Circle, Interval, OneDimDiagram, OneDimTheory, Wall


class SceneError(ValueError):
    """Malformed or inconsistent input document."""


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------- arrays

def _sparse(a: np.ndarray, f) -> list:
    return [[*map(int, idx), f.format(x)] for idx, x in np.ndenumerate(a) if x != 0]


def _from_sparse(entries, shape, f) -> np.ndarray:
    out = el.zeros(shape, f)
    for e in entries:
        *idx, c = e
        if len(idx) != len(shape):
            raise SceneError(f"sparse entry {e} does not match shape {shape}")
        try:
            out[tuple(idx)] = f.parse(str(c))
        except IndexError:
            raise SceneError(f"sparse entry {e} out of range for shape {shape}") from None
    return out


def _dense(a, f) -> list:
    return el.to_strings(np.asarray(a, dtype=object), f)


def _from_dense(data, f, shape=None) -> np.ndarray:
    try:
        a = el.array(data, f)
    except (ValueError, TypeError) as exc:
        raise SceneError(f"bad numeric data: {exc}") from None
    if shape is not None and a.shape != tuple(shape):
        if a.size == 0 and 0 in shape:
            return el.zeros(shape, f)
        raise SceneError(f"expected shape {tuple(shape)}, got {a.shape}")
    return a


# ---------------------------------------------------------------- algebras and maps

def algebra_to_doc(A: Algebra) -> dict:
    f = A.field
    return {"kind": "algebra", "name": A.name, "dim": A.dim,
            "mult": _sparse(A.mult, f), "unit": _dense(A.unit, f)}


def algebra_from_doc(doc: dict, f=el.QQ) -> Algebra:
    if "builtin" in doc:
        lib = standard_library(f)
        if doc["builtin"] not in lib:
            raise SceneError(f"unknown builtin algebra {doc['builtin']!r}; known: {sorted(lib)}")
        return lib[doc["builtin"]]
    try:
        n = int(doc["dim"])
        A = Algebra(_from_sparse(doc["mult"], (n, n, n), f), _from_dense(doc["unit"], f, (n,)),
                    doc.get("name", ""))
    except KeyError as exc:
        raise SceneError(f"algebra document lacks {exc}") from None
    except ValueError as exc:
        raise SceneError(str(exc)) from None
    return A


def map_to_doc(m: AlgebraMap, names: dict) -> dict:
    return {"kind": "map", "source": names.name(m.source), "target": names.name(m.target),
            "matrix": _dense(m.matrix, m.target.field)}


def map_from_doc(doc: dict, algebras: dict, f=el.QQ) -> AlgebraMap:
    A, B = _ref(algebras, doc, "source"), _ref(algebras, doc, "target")
    return AlgebraMap(A, B, _from_dense(doc["matrix"], f, (B.dim, A.dim)))


def bimodule_to_doc(X: Bimodule, names: dict) -> dict:
    f = X.field
    return {"kind": "bimodule", "name": X.name, "dim": X.dim,
            "left": names.name(X.left), "right": names.name(X.right),
            "lam": _sparse(X.lam, f), "rho": _sparse(X.rho, f)}


def bimodule_from_doc(doc: dict, algebras: dict, maps: dict, bimodules: dict, f=el.QQ) -> Bimodule:
    kind = doc.get("construct")
    if kind == "regular":
        return regular(_ref(algebras, doc, "algebra"))
    if kind == "from_map":
        return module_from_map(_ref(maps, doc, "map"))
    if kind == "twist":
        X = _ref(bimodules, doc, "bimodule")
        left = maps[doc["left"]] if doc.get("left") else None
        right = maps[doc["right"]] if doc.get("right") else None
        return twist(X, left, right)
    if kind == "sum":
        return direct_sum(*[_lookup(bimodules, k, "bimodule") for k in doc["of"]])
    if kind is not None:
        raise SceneError(f"unknown bimodule constructor {kind!r}")
    A, B = _ref(algebras, doc, "left"), _ref(algebras, doc, "right")
    n = int(doc["dim"])
    return Bimodule(A, B, _from_sparse(doc["lam"], (A.dim, n, n), f),
                    _from_sparse(doc["rho"], (n, B.dim, n), f), doc.get("name", ""))


def _lookup(reg: dict, key, what: str):
    try:
        return reg[key]
    except (KeyError, TypeError):
        raise SceneError(f"unknown {what} {key!r}") from None


def _ref(reg: dict, doc: dict, key: str):
    if key not in doc:
        raise SceneError(f"document lacks field {key!r}")
    return _lookup(reg, doc[key], key)


# ---------------------------------------------------------------- circles and surfaces

def circle_to_doc(c: sf.BoundaryCircle) -> dict:
    slots = [{"domain": s.domain} if isinstance(s, sf.Plain) else {"wall": s.wall, "eps": s.eps}
             for s in c.slots]
    return {"slots": slots, "base": c.base}


def circle_from_doc(doc) -> sf.BoundaryCircle:
    if isinstance(doc, str):
        return parse_word_circle(doc)
    slots = []
    for s in doc["slots"]:
        slots.append(sf.Plain(s["domain"]) if "domain" in s else sf.Marked(s["wall"], int(s["eps"])))
    return sf.BoundaryCircle(tuple(slots), int(doc.get("base", 0)))


def parse_word(text: str) -> tuple:
    """``"x+ y-"`` -> ((x, 1), (y, -1))."""
    out = []
    for tok in text.split():
        if tok[-1] not in "+-" or len(tok) < 2:
            raise SceneError(f"letter {tok!r} must end in + or -")
        out.append((tok[:-1], 1 if tok[-1] == "+" else -1))
    return tuple(out)


def parse_word_circle(text: str) -> sf.BoundaryCircle:
    """A word, or ``"@a"`` / ``"@a*3"`` for a plain circle with 1 or 3 slots."""
    text = text.strip()
    if text.startswith("@"):
        label, _, n = text[1:].partition("*")
        return sf.BoundaryCircle(tuple(sf.Plain(label) for _ in range(int(n or 1))))
    return sf.BoundaryCircle(tuple(sf.Marked(x, e) for x, e in parse_word(text)))


def surface_to_doc(M: sf.DecoratedSurface) -> dict:
    return {
        "kind": "surface",
        "vertices": M.vertices,
        "edges": [[E.tail, E.head] + ([E.wall[0], E.wall[1]] if E.wall else []) for E in M.edges],
        "polygons": [{"slots": [list(s) for s in p.slots], "corners": list(p.corners),
                      **({"junction": list(p.junction)} if p.junction else {})} for p in M.polygons],
        "inputs": [{"circle": circle_to_doc(a.circle), "edges": list(a.edges)} for a in M.inputs],
        "outputs": [{"circle": circle_to_doc(a.circle), "edges": list(a.edges)} for a in M.outputs],
    }


def _explicit_surface(doc: dict) -> sf.DecoratedSurface:
    edges = tuple(sf.Edge(e[0], e[1], (e[2], int(e[3])) if len(e) > 2 else None) for e in doc["edges"])
    polys = tuple(sf.Polygon(tuple((int(a), int(b)) for a, b in p["slots"]), tuple(p["corners"]),
                             (p["junction"][0], int(p["junction"][1])) if p.get("junction") else None)
                  for p in doc["polygons"])

    def att(a):
        return sf.Attachment(circle_from_doc(a["circle"]), tuple(int(e) for e in a["edges"]))

    return sf.DecoratedSurface(int(doc["vertices"]), edges, polys,
                               tuple(att(a) for a in doc.get("inputs", ())),
                               tuple(att(a) for a in doc.get("outputs", ())))


def surface_from_doc(doc: dict, sig: sf.DefectSignature, known: dict) -> sf.DecoratedSurface:
    """Explicit surfaces or ``{"build": ...}`` recipes over the library builders."""
    build = doc.get("build")
    if build is None:
        return _explicit_surface(doc)
    a = doc
    if build == "standard":
        lib = sf.standard_bordisms(sig)
        return _lookup(lib, a["name"], "standard bordism")
    if build == "cylinder":
        return sf.cylinder(sig, circle_from_doc(a["circle"]))
    if build == "defect_annulus":
        return sf.defect_annulus(sig, a["wall"], int(a.get("cells", 1)))
    if build == "disc":
        return sf.plain_disc(sig, a["domain"], int(a.get("slots", 2)))
    if build == "torus":
        return sf.torus(sig, a.get("wall"), a.get("domain"), a.get("cut", "cylinder"))
    if build == "junction_disc":
        return sf.junction_disc(sig, a["junction"], int(a.get("sign", 1)))
    if build == "chord_disc":
        return sf.chord_disc(sig, circle_from_doc(a["circle"]), int(a.get("offset", 0)))
    if build == "ring":
        return sf.ring(sig, circle_from_doc(a["in"]), circle_from_doc(a["out"]),
                       [tuple(c) for c in a["cells"]])
    if build == "glue":
        return sf.glue(_lookup(known, a["first"], "bordism"), _lookup(known, a["second"], "bordism"))
    raise SceneError(f"unknown surface recipe {build!r}")


# ---------------------------------------------------------------- one-dimensional theories

def theory_from_doc(doc: dict, f=el.QQ) -> OneDimTheory:
    dims = {k: int(v) for k, v in doc["dims"].items()}
    walls = {}
    for x, w in doc.get("walls", {}).items():
        s, t = dims.get(w["source"]), dims.get(w["target"])
        if s is None or t is None:
            raise SceneError(f"wall {x!r} uses an unknown label")
        walls[x] = Wall(w["source"], w["target"], _from_dense(w["plus"], f, (t, s)),
                        _from_dense(w["minus"], f, (s, t)))
    return OneDimTheory(dims, walls)


def theory_to_doc(th: OneDimTheory) -> dict:
    f = th.field
    return {"dims": dict(th.dims),
            "walls": {x: {"source": w.source, "target": w.target, "plus": _dense(w.plus, f),
                          "minus": _dense(w.minus, f)} for x, w in th.walls.items()}}


def diagram_from_doc(doc: dict) -> OneDimDiagram:
    comps = []
    for c in doc["components"]:
        if "interval" in c:
            i = c["interval"]
            comps.append(Interval(i["start"], tuple((x, int(s)) for x, s in i.get("points", ())), i.get("end")))
        elif "circle" in c:
            i = c["circle"]
            comps.append(Circle(tuple((x, int(s)) for x, s in i.get("points", ())), i.get("label")))
        else:
            raise SceneError(f"unknown 1d component {c}")
    return OneDimDiagram(tuple(comps))


def diagram_to_doc(d: OneDimDiagram) -> dict:
    out = []
    for c in d.components:
        pts = [[x, s] for x, s in c.points]
        if isinstance(c, Interval):
            out.append({"interval": {"start": c.start, "points": pts, "end": c.end}})
        else:
            out.append({"circle": {"points": pts, "label": c.label}})
    return {"components": out}


# ---------------------------------------------------------------- scenes

class _Namer(dict):
    """id(algebra) -> registry key, inventing keys for unregistered algebras."""

    def __init__(self, registry: dict):
        super().__init__()
        self.table = {}
        for k, A in registry.items():
            self.add(A, k)

    def add(self, A, key):
        if id(A) not in self:
            while key in self.table:
                key = key + "'"
            self[id(A)] = key
            self.table[key] = A

    def __missing__(self, ident):
        raise KeyError(ident)

    def name(self, A) -> str:
        self.add(A, A.name or f"alg{len(self.table)}")
        return self[id(A)]


@dataclass
class Scene:
    dimension: int = 2
    field: object = el.QQ
    algebras: dict = dc_field(default_factory=dict)
    maps: dict = dc_field(default_factory=dict)
    bimodules: dict = dc_field(default_factory=dict)
    signature: sf.DefectSignature | None = None
    standard_signature: bool = False
    bordisms: dict = dc_field(default_factory=dict)
    cospans: dict = dc_field(default_factory=dict)
    theory: OneDimTheory | None = None
    diagrams: dict = dc_field(default_factory=dict)
    checks: dict = dc_field(default_factory=dict)

    def to_doc(self) -> dict:
        doc = {"dimension": self.dimension, "field": self.field.name, "checks": self.checks}
        if self.dimension == 1:
            doc["theory"] = theory_to_doc(self.theory) if self.theory else None
            doc["diagrams"] = {k: diagram_to_doc(d) for k, d in self.diagrams.items()}
            return doc
        names = _Namer(self.algebras)
        if self.signature is not None:
            for a, A in self.signature.domains.items():
                names.add(A, a)
        doc["maps"] = {k: map_to_doc(m, names) for k, m in self.maps.items()}
        doc["bimodules"] = {k: bimodule_to_doc(X, names) for k, X in self.bimodules.items()}
        if self.signature is not None:
            doc["signature"] = self._signature_doc(names)
        doc["bordisms"] = {k: surface_to_doc(M) for k, M in self.bordisms.items()}
        doc["cospans"] = {k: self._cospan_doc(C, names) for k, C in self.cospans.items()}
        doc["algebras"] = {k: algebra_to_doc(A) for k, A in names.table.items()}
        return doc

    def _signature_doc(self, names) -> dict:
        sig = self.signature
        f = sig.field
        walls = {}
        for x, w in sig.walls.items():
            walls[x] = {"source": w.source, "target": w.target,
                        "bimodule": bimodule_to_doc(w.bimodule, names)}
        juncs = {}
        for u, J in sig.junctions.items():
            legs = tuple(J.legs)
            d = {"legs": [list(l) for l in legs], "psi": _dense(J.phi[legs].reshape(-1), f)}
            if J.phi_minus:
                lm = tuple((x, -e) for x, e in legs)
                key = lm if lm in J.phi_minus else next(iter(J.phi_minus))
                d["psi_minus"] = {"legs": [list(l) for l in key],
                                  "psi": _dense(J.phi_minus[key].reshape(-1), f)}
            juncs[u] = d
        return {"domains": {a: names.name(A) for a, A in sig.domains.items()},
                "walls": walls, "junctions": juncs}

    @staticmethod
    def _cospan_doc(C: cf.Cospan, names) -> dict:
        f = C.field
        return {"A": algebra_to_doc(C.A), "B": algebra_to_doc(C.B), "T": algebra_to_doc(C.T),
                "alpha": _dense(C.alpha.matrix, f), "beta": _dense(C.beta.matrix, f)}

    def dumps(self) -> str:
        return dumps(self.to_doc())


def load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SceneError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def scene_from_doc(doc: dict, field_override=None) -> Scene:
    f = field_override or el.field_from_spec(doc.get("field", "q"))
    sc = Scene(dimension=int(doc.get("dimension", 2)), field=f, checks=doc.get("checks") or {})
    try:
        if sc.dimension == 1:
            sc.theory = theory_from_doc(doc["theory"], f)
            sc.diagrams = {k: diagram_from_doc(d) for k, d in doc.get("diagrams", {}).items()}
            return sc
        _load_registry(sc, doc, f)
        _load_signature(sc, doc, f)
        for k, d in doc.get("bordisms", {}).items():
            if sc.signature is None:
                raise SceneError("bordisms need a signature")
            M = surface_from_doc(d, sc.signature, sc.bordisms)
            bad = sf.validate(sc.signature, M)
            if bad:
                raise SceneError(f"bordism {k!r}: " + "; ".join(bad[:5]))
            sc.bordisms[k] = M
        for k, d in doc.get("cospans", {}).items():
            sc.cospans[k] = _cospan_from_doc(d, sc, f)
    except SceneError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SceneError(f"{type(exc).__name__}: {exc}") from None
    return sc


def _load_registry(sc: Scene, doc: dict, f) -> None:
    for k, d in doc.get("algebras", {}).items():
        A = algebra_from_doc(d, f)
        bad = A.violations()
        if bad:
            raise SceneError(f"algebra {k!r}: " + "; ".join(bad[:5]))
        sc.algebras[k] = A
    for k, d in doc.get("maps", {}).items():
        m = map_from_doc(d, sc.algebras, f)
        bad = m.violations()
        if bad:
            raise SceneError(f"map {k!r}: " + "; ".join(map(str, bad[:5])))
        sc.maps[k] = m
    for k, d in doc.get("bimodules", {}).items():
        X = bimodule_from_doc(d, sc.algebras, sc.maps, sc.bimodules, f)
        bad = X.violations()
        if bad:
            raise SceneError(f"bimodule {k!r}: " + "; ".join(bad[:5]))
        sc.bimodules[k] = X


def _load_signature(sc: Scene, doc: dict, f) -> None:
    sdoc = doc.get("signature")
    if sdoc is None:
        return
    if sdoc == "standard":
        from .library import standard_signature
        sc.signature = standard_signature(f)
        sc.standard_signature = True
        return
    domains = {a: _lookup(sc.algebras, k, "algebra") for a, k in sdoc["domains"].items()}
    walls = {}
    for x, w in sdoc.get("walls", {}).items():
        b = w["bimodule"]
        X = (bimodule_from_doc(b, sc.algebras, sc.maps, sc.bimodules, f) if isinstance(b, dict)
             else _lookup(sc.bimodules, b, "bimodule"))
        walls[x] = sf.WallData(w["source"], w["target"], X)
    sig = sf.DefectSignature(domains, walls)
    for u, j in sdoc.get("junctions", {}).items():
        legs = tuple((x, int(e)) for x, e in j["legs"])
        phi = sf.junction_family(sig, legs, _from_dense(j["psi"], f))
        minus = None
        if "psi_minus" in j:
            lm = tuple((x, int(e)) for x, e in j["psi_minus"]["legs"])
            minus = sf.junction_family(sig, lm, _from_dense(j["psi_minus"]["psi"], f))
        sig.junctions[u] = sf.JunctionData(legs, phi, minus)
    bad = sig.violations()
    if bad:
        raise SceneError("signature: " + "; ".join(bad[:5]))
    sc.signature = sig


def _cospan_from_doc(d: dict, sc: Scene, f) -> cf.Cospan:
    kind = d.get("construct")
    if kind == "I":
        C = cf.cospan_I(_ref(sc.maps, d, "map"))
    elif kind == "centre":
        C = cf.centre_cospan(_ref(sc.maps, d, "map"))
    elif kind == "identity":
        C = cf.identity_cospan(_ref(sc.algebras, d, "algebra"))
    elif kind == "compose":
        C = cf.compose_cospans(_lookup(sc.cospans, d["outer"], "cospan"),
                               _lookup(sc.cospans, d["inner"], "cospan"))
    elif kind is None:
        A, B, T = (algebra_from_doc(d[k], f) if isinstance(d[k], dict) else _lookup(sc.algebras, d[k], "algebra")
                   for k in ("A", "B", "T"))
        alpha = AlgebraMap(A, T, _from_dense(d["alpha"], f, (T.dim, A.dim)))
        beta = AlgebraMap(B, T, _from_dense(d["beta"], f, (T.dim, B.dim)))
        C = cf.Cospan(A, B, T, alpha, beta)
    else:
        raise SceneError(f"unknown cospan constructor {kind!r}")
    bad = C.violations()
    if bad:
        raise SceneError("cospan: " + "; ".join(bad[:5]))
    return C


def load_scene(path, field_override=None) -> Scene:
    return scene_from_doc(load_json(path), field_override)
