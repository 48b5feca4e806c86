"""Complex log-gamma via the Lanczos approximation (g=7, n=9)."""

import numpy as np

from ..errors import DomainError

_G = 7.0
_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _lanczos(z):
    # valid for Re z >= 0.5
    w = z - 1.0
    acc = np.full_like(w, _COEF[0])
    for i in range(1, len(_COEF)):
        acc = acc + _COEF[i] / (w + i)
    t = w + _G + 0.5
    return _HALF_LOG_2PI + (w + 0.5) * np.log(t) - t + np.log(acc)


def loggamma(z):
    """Vectorised principal-branch log Gamma without pole checks.

    For Re z < 0.5 the argument is shifted up with the recurrence
    ``log G(z) = log G(z + n) - sum log(z + k)``, which keeps the branch
    continuous across the left half plane (branch cut on the negative axis).
    Poles evaluate to ``inf``.
    """
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    right = z.real >= 0.5
    out[right] = _lanczos(z[right])
    if not right.all():
        zl = z[~right]
        n = np.ceil(0.5 - zl.real).astype(np.int64)
        shift = zl + n
        acc = _lanczos(shift)
        with np.errstate(divide="ignore", invalid="ignore"):
            for k in range(int(n.max())):
                active = k < n
                acc = acc - np.where(active, np.log(np.where(active, zl + k, 1.0)), 0.0)
        out[~right] = acc
    return out


def log_gamma_complex(z):
    """Principal branch of log Gamma(z) for complex ``z``.

    Matches the analytic continuation used by mpmath and scipy (``loggamma``).
    Raises ``DomainError`` at the poles z = 0, -1, -2, ...
    """
    arr = np.asarray(z, dtype=np.complex128)
    pole = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))
    if np.any(pole):
        raise DomainError(f"log Gamma has a pole at {arr[pole].ravel()[0].real:g}")
    out = loggamma(arr)
    return out[()] if out.ndim == 0 else out
