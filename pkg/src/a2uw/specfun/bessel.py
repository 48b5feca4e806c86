"""Modified Bessel function of the second kind for real order."""

import numpy as np
from scipy import special

from ..errors import DomainError


def bessel_k(nu, x):
    """K_nu(x) for real ``nu`` and ``x > 0`` (broadcasts)."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("bessel_k requires x > 0")
    out = special.kv(np.abs(np.asarray(nu, dtype=float)), x)
    return out[()] if np.ndim(out) == 0 else out


def log_bessel_k(nu, x):
    """log K_nu(x), stable for large ``x`` via the scaled function."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("log_bessel_k requires x > 0")
    out = np.log(special.kve(np.abs(np.asarray(nu, dtype=float)), x)) - x
    return out[()] if np.ndim(out) == 0 else out
