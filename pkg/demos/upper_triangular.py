"""Upper-triangular 2x2 matrices: where the lattice construction breaks down.

Run with ``python demos/upper_triangular.py``.
"""
import numpy as np

from latticetft import NotFrobenius, standard_library
from latticetft import centrefun as cf
from latticetft import exactlin as el
from latticetft import verify as vf

T2 = standard_library()["T2"]
e22 = el.unit_vector(3, 2)
print("trace of left multiplication by E22: ", np.trace(T2.left_matrix(e22)))
print("trace of right multiplication by E22:", np.trace(T2.right_matrix(e22)))
print("dim Z(T2) =", T2.centre().dim, " dim T2/[T2,T2] =", T2.commutator_quotient()[0])
try:
    T2.frobenius()
except NotFrobenius as exc:
    print("trace pairing:", exc)

# k⊕k -> T2 -> k⊕k: the centre functor is only lax here
maps = vf.lax_maps()
r = cf.lax_report(maps["diag"], maps["proj"])
print(f"comparison map {r.source_dim} -> {r.target_dim}, rank {r.rank},",
      "surjective" if r.surjective else "not surjective",
      "and injective" if r.injective else "but not injective")
