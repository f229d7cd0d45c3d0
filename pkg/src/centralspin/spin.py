"""Angular momentum matrices in the |j, m> basis, m = j, j-1, ..., -j."""

import numpy as np


def spin_operators(j: float):
    """Return (Jx, Jy, Jz) for spin ``j``."""
    m = np.arange(j, -j - 1, -1)
    jp = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), k=1)
    jz = np.diag(m)
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / 2j
    return jx.astype(complex), jy, jz.astype(complex)


def raising(j: float) -> np.ndarray:
    m = np.arange(j, -j - 1, -1)
    return np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
