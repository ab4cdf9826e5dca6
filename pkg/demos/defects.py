"""State spaces, defect operators and the Cardy condition on the standard signature.

Run with ``python demos/defects.py``.
"""
from latticetft import TFT, standard_signature
from latticetft import exactlin as el
from latticetft import surface as sf

sig = standard_signature()
T = TFT(sig)

for word in [(("u", 1), ("v", 1)), (("z2", 1), ("z2", -1)), (("sw", 1),)]:
    c = sf.circle_from_word(sig, word)
    print(f"dim state space on {word}: {T.state_space(c).dim}")

D = T.defect_operator("sw")
print("defect operator of sw on Z(Z2):")
print(el.to_strings(D))

for x in ["z2", "ee", "zt", "rk", "sw", "r2"]:
    r = T.cardy_check(x)
    print(f"{x:>3}: dim invariants {r.lhs}, trace D {r.rhs}, tori {r.torus_cylinder} / {r.torus_annulus}")

M = sf.standard_bordisms(sig)["junction[t3]"]
print("junction disc amplitude:", el.to_strings(T.evaluate(M).matrix))
