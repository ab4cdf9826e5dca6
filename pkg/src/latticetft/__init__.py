"""Exact lattice topological field theories with defects."""
from .algebra import Algebra, AlgebraMap, NotFrobenius, standard_library
from .bimodule import Bimodule, regular, tensor_bimodule
from .exactlin import QQ, PrimeField, field_from_spec
from .library import standard_signature
from .tft import TFT

__all__ = ["Algebra", "AlgebraMap", "Bimodule", "NotFrobenius", "PrimeField", "QQ", "TFT",
           "field_from_spec", "regular", "standard_library", "standard_signature", "tensor_bimodule"]
