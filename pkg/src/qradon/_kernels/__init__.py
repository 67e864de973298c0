"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled Cython module is preferred when importable; setting the
environment variable QRADON_FORCE_FALLBACK=1 forces the numpy fallback
(useful for benchmarking and for installs without a C compiler).
"""

import os

if os.environ.get("QRADON_FORCE_FALLBACK") == "1":
    from . import _ref as _impl

    BACKEND = "fallback"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _ref as _impl

        BACKEND = "fallback"

exp_cis_sum = _impl.exp_cis_sum
weighted_exp_cis_sum = _impl.weighted_exp_cis_sum
# fused lattice sweeps exist only in the compiled core; None selects the
# generic chunked-numpy path in theta.py
theta_sum_k1 = getattr(_impl, "theta_sum_k1", None)
theta_sum_k2 = getattr(_impl, "theta_sum_k2", None)

__all__ = [
    "BACKEND",
    "exp_cis_sum",
    "weighted_exp_cis_sum",
    "theta_sum_k1",
    "theta_sum_k2",
]
