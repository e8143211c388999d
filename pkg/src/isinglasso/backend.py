"""Backend selection: compiled extension when present, pure NumPy otherwise.

Set ISINGLASSO_PURE=1 to force the pure backend even when the extension is
built.  Chains are bit-equal across backends; replay evaluations agree to
machine precision.
"""

from __future__ import annotations

import os

if os.environ.get("ISINGLASSO_PURE"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND: str = kernels.NAME

gibbs_chain = kernels.gibbs_chain
ChainEvaluator = kernels.ChainEvaluator
