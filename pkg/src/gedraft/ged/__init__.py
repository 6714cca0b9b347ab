"""Exact graph edit distance under unit costs.

The search kernel has a compiled (Cython) implementation and a pure-Python
fallback with identical semantics; the compiled one is preferred at import
time. Set ``GEDRAFT_PURE=1`` to force the pure-Python kernel.
"""

from .core import (
    BACKEND,
    DEFAULT_BUDGET,
    EditOp,
    GedBudgetExceeded,
    GedResult,
    apply_edit_path,
    ged_bruteforce,
    ged_exact,
    lower_bound_labels,
    nged,
    similarity,
)

__all__ = [
    "BACKEND",
    "DEFAULT_BUDGET",
    "EditOp",
    "GedBudgetExceeded",
    "GedResult",
    "apply_edit_path",
    "ged_bruteforce",
    "ged_exact",
    "lower_bound_labels",
    "nged",
    "similarity",
]
