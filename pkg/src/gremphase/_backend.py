"""Backend selection for the hot enumeration kernels.

GREMPHASE_BACKEND=numpy forces the vectorized pure-numpy fallback even when
numba is installed; GREMPHASE_BACKEND=numba fails loudly when it is missing.
The default uses numba when importable.
"""
from __future__ import annotations

import os

_choice = os.environ.get("GREMPHASE_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"GREMPHASE_BACKEND must be 'numba' or 'numpy', got {_choice!r}"
    )

if _choice == "numpy":
    USE_NUMBA = False
else:
    try:
        import numba  # noqa: F401

        USE_NUMBA = True
    except ImportError:
        if _choice == "numba":
            raise
        USE_NUMBA = False
