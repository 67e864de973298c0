"""Pure-numpy fallback for the compiled phase-sum kernels.

numpy's pairwise reduction is deterministic for a fixed input array, which
is all the callers require; accuracy is comparable to the compensated
loops in _core.pyx.
"""

import numpy as np


def exp_cis_sum(decay: np.ndarray, phase: np.ndarray) -> complex:
    """Sum of exp(-decay[i]) * (cos(phase[i]) + i sin(phase[i]))."""
    w = np.exp(-decay)
    return complex(np.sum(w * np.cos(phase)), np.sum(w * np.sin(phase)))


def weighted_exp_cis_sum(
    wre: np.ndarray, wim: np.ndarray, decay: np.ndarray, phase: np.ndarray
) -> complex:
    """Sum of (wre[i] + i wim[i]) * exp(-decay[i]) * cis(phase[i])."""
    w = np.exp(-decay)
    c = w * np.cos(phase)
    s = w * np.sin(phase)
    return complex(np.sum(wre * c - wim * s), np.sum(wre * s + wim * c))
