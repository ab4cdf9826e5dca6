"""Ready-made signatures used by the tests, demos and CLI scenes."""
from __future__ import annotations

import numpy as np

from . import exactlin as el
from .algebra import AlgebraMap, standard_library
from .bimodule import direct_sum, module_from_map, regular, twist
from .surface import DefectSignature, JunctionData, WallData, junction_family


def unit_map(A, B) -> AlgebraMap:
    """k -> B, 1 ↦ 1 (A must be the ground field)."""
    return AlgebraMap(A, B, B.one().reshape(-1, 1).copy())


def swap_map(A) -> AlgebraMap:
    """The coordinate swap of k⊕k."""
    f = A.field
    return AlgebraMap(A, A, el.array([[0, 1], [1, 0]], f))


def augmentation(A, k) -> AlgebraMap:
    """k[G] -> k sending every group element to 1."""
    return AlgebraMap(A, k, el.array([[1] * A.dim], A.field))


def sign_map(A) -> AlgebraMap:
    """The automorphism g ↦ -g of k[Z/2] in the basis (1, g)."""
    return AlgebraMap(A, A, el.array([[1, 0], [0, -1]], A.field))


def standard_signature(field=el.QQ, junctions: bool = True) -> DefectSignature:
    """Domains k, M2, Z2, kk and a handful of walls between them.

    Self-walls: r2 (regular M2), z2 (regular Z2), ee (Z2 ⊕ Z2), zt (Z2 with
    the right action twisted by g ↦ -g), rk (regular kk), sw (kk with the
    right action twisted by the swap). Walls between different domains:
    u: k -> M2, v: M2 -> k, g: Z2 -> k, d: k -> kk.
    """
    lib = standard_library(field)
    k, M2, Z2, kk = lib["k"], lib["M2"], lib["Z2"], lib["kk"]
    f_u = unit_map(k, M2)
    walls = {
        "r2": WallData("M2", "M2", regular(M2)),
        "z2": WallData("Z2", "Z2", regular(Z2)),
        "ee": WallData("Z2", "Z2", direct_sum(regular(Z2), regular(Z2))),
        "sw": WallData("kk", "kk", twist(regular(kk), right=swap_map(kk))),
        "rk": WallData("kk", "kk", regular(kk)),
        "zt": WallData("Z2", "Z2", twist(regular(Z2), right=sign_map(Z2))),
        "u": WallData("k", "M2", module_from_map(f_u)),
        "v": WallData("M2", "k", twist(regular(M2), left=f_u)),
        "g": WallData("Z2", "k", module_from_map(augmentation(Z2, k))),
        "d": WallData("k", "kk", module_from_map(unit_map(k, kk))),
    }
    sig = DefectSignature({"k": k, "M2": M2, "Z2": Z2, "kk": kk}, walls)
    if junctions:
        add_standard_junctions(sig)
    return sig.check()


def add_standard_junctions(sig: DefectSignature) -> None:
    f = sig.field
    # evaluation X ⊗ X* -> k on a self-wall, and its mirror image
    X = sig.wall("r2").bimodule
    ev = el.identity(X.dim, f).reshape(-1)
    legs = (("r2", 1), ("r2", -1))
    sig.junctions["ev"] = JunctionData(legs, junction_family(sig, legs, ev),
                                       junction_family(sig, legs, ev))
    # one leg: the counit of Z2 on the regular bimodule
    Z2 = sig.algebra("Z2")
    legs1 = (("z2", 1),)
    sig.junctions["cu"] = JunctionData(legs1, junction_family(sig, legs1, Z2.counit),
                                       junction_family(sig, ((("z2", -1),)), Z2.counit))
    # three legs u, v, r2*: a generic covector made invariant
    legs3 = (("u", 1), ("v", 1), ("r2", -1))
    dims = [Y.dim for Y in sig.chain(legs3)]
    psi = [(i % 5) - 2 for i in range(int(np.prod(dims)))]
    sig.junctions["t3"] = JunctionData(legs3, junction_family(sig, legs3, psi))
