"""BN254 arithmetic with a compiled core and a pure-Python fallback.

The compiled extension (`_fast`, Cython) is preferred when importable;
`TTCS_CURVE_BACKEND=pure|fast` forces a choice.  Both backends expose
the same functional interface over plain ints/tuples.
"""

import os

from . import pure
from .params import ATE_LOOP_COUNT, BN_U, G1_GEN, G2_GEN, P, R

_choice = os.environ.get("TTCS_CURVE_BACKEND", "").strip().lower()

if _choice == "pure":
    backend = pure
elif _choice == "fast":
    from . import _fast as backend  # noqa: F401  (raises if not built)
else:
    try:
        from . import _fast as backend
    except ImportError:
        backend = pure

BACKEND_NAME = backend.NAME

g1_add = backend.g1_add
g1_neg = backend.g1_neg
g1_mul = backend.g1_mul
g1_multi_mul = backend.g1_multi_mul
g1_is_on_curve = backend.g1_is_on_curve
g2_add = backend.g2_add
g2_neg = backend.g2_neg
g2_mul = backend.g2_mul
g2_is_on_curve = backend.g2_is_on_curve
g2_in_subgroup = backend.g2_in_subgroup
pairing = backend.pairing
gt_mul = backend.gt_mul
gt_inv = backend.gt_inv
gt_pow = backend.gt_pow
gt_multi_pow = backend.gt_multi_pow
GT_ONE = backend.GT_ONE

fp_sqrt = pure.fp_sqrt
f2_sqrt = pure.f2_sqrt
f2_neg = pure.f2_neg

__all__ = [
    "ATE_LOOP_COUNT",
    "BACKEND_NAME",
    "BN_U",
    "G1_GEN",
    "G2_GEN",
    "GT_ONE",
    "P",
    "R",
    "backend",
    "pure",
]
