"""Kernel backend selection.

The default backend is the numba-jitted one; set GMMSEARCH_BACKEND=numpy to
force the pure-numpy fallback (or =numba to fail loudly when numba is
missing). Both backends expose the same functions and tie-breaking rules;
low-order floating-point bits may differ between them because summation
orders differ. Results are deterministic within a backend.
"""

import os

_requested = os.environ.get("GMMSEARCH_BACKEND", "auto").strip().lower()

if _requested in ("", "auto"):
    try:
        from . import _kernels_numba as _impl

        BACKEND = "numba"
    except ImportError:
        from . import _kernels_numpy as _impl

        BACKEND = "numpy"
elif _requested == "numba":
    from . import _kernels_numba as _impl

    BACKEND = "numba"
elif _requested == "numpy":
    from . import _kernels_numpy as _impl

    BACKEND = "numpy"
else:
    raise RuntimeError(
        f"GMMSEARCH_BACKEND={_requested!r} not recognized; use 'numba', 'numpy' or 'auto'"
    )

LINKAGE_SINGLE = _impl.LINKAGE_SINGLE
LINKAGE_COMPLETE = _impl.LINKAGE_COMPLETE
LINKAGE_AVERAGE = _impl.LINKAGE_AVERAGE
LINKAGE_WARD = _impl.LINKAGE_WARD

sq_l2_dists = _impl.sq_l2_dists
l1_dists = _impl.l1_dists
cosine_dists = _impl.cosine_dists
linkage_merges = _impl.linkage_merges
lloyd = _impl.lloyd
log_prob_full = _impl.log_prob_full
log_prob_tied = _impl.log_prob_tied
log_prob_diag = _impl.log_prob_diag
scatter_full = _impl.scatter_full
