"""Mellin-Barnes contour quadrature for Meijer-G and Fox-H functions.

Conventions follow the usual (DLMF 16.17.1 / Mittal-Gupta) definitions with
``x**s`` in the integrand::

    G(x) = 1/(2 pi i) int prod_{j<=m} G(b_j - s) prod_{j<=n} G(1 - a_j + s)
                          / [prod_{j>m} G(1 - b_j + s) prod_{j>n} G(a_j - s)] x**s ds

The bivariate H-function couples two such kernels through an outer factor in
``s1 + s2`` (with linear coefficients); see :class:`FoxHBivariateSpec`.

Every integral is evaluated along straight vertical lines ``Re s = c`` with
composite Gauss-Legendre panels.  Internally a kernel is described as a list
of gamma factors ``Gamma(coef + ks*s + kt*t) ** power`` with power +-1.
"""

from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy import special
from scipy.optimize import minimize_scalar
from scipy.special import loggamma  # compiled; the in-house Lanczos is cross-checked in tests

from ..errors import AccuracyWarning, ConfigurationError, DomainError

_GL_ORDER = 20
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)
_PROBE = 129
_PROBE_2D = 65
_POLE_MARGIN = 0.25
_TAIL_MARGIN = 1e-3
_OSC_RAD = 10.0


@dataclass(frozen=True)
class MellinBarnesConfig:
    """Quadrature controls for the contour integrals.

    ``c1``/``c2`` override the automatic abscissae when given.  ``half_length``
    is the starting truncation of each contour; it is grown until the tail of
    the integrand envelope falls below ``tol``.  ``epsilon_shift`` is the
    smallest admissible gap between opposite pole families.
    """

    c1: float | None = None
    c2: float | None = None
    half_length: float = 8.0
    nodes_per_unit: int = 16
    tol: float = 1e-10
    epsilon_shift: float = 1e-6
    max_half_length: float = 600.0

    def __post_init__(self):
        if not self.half_length > 0:
            raise ConfigurationError("half_length must be positive")
        if self.nodes_per_unit < 8:
            raise ConfigurationError("nodes_per_unit must be >= 8")
        if not 0 < self.epsilon_shift <= 1e-4:
            raise ConfigurationError("epsilon_shift must lie in (0, 1e-4]")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")


DEFAULT_CONFIG = MellinBarnesConfig()


@dataclass(frozen=True)
class MeijerGSpec:
    """Orders and parameters of G^{m,n}_{p,q}(x | a; b)."""

    m: int
    n: int
    a_params: tuple = ()
    b_params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a_params", tuple(float(v) for v in self.a_params))
        object.__setattr__(self, "b_params", tuple(float(v) for v in self.b_params))
        if self.m < 0 or self.n < 0:
            raise ConfigurationError("orders must be nonnegative")
        if self.m > self.q or self.n > self.p:
            raise ConfigurationError(f"need m <= q and n <= p, got m={self.m}, n={self.n}, "
                                     f"p={self.p}, q={self.q}")

    @property
    def p(self):
        return len(self.a_params)

    @property
    def q(self):
        return len(self.b_params)


@dataclass(frozen=True)
class InnerParams:
    """One single-variable kernel of a bivariate H-function.

    ``c`` holds ``(c_j, gamma_j)`` pairs: the first ``n`` give numerator
    factors ``Gamma(1 - c_j + gamma_j s)``, the rest denominator factors
    ``Gamma(c_j - gamma_j s)``.  ``d`` holds ``(d_j, delta_j)``: the first
    ``m`` give ``Gamma(d_j - delta_j s)``, the rest ``1/Gamma(1 - d_j + delta_j s)``.
    """

    m: int
    n: int
    c: tuple = ()
    d: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "c", tuple((float(v), float(e)) for v, e in self.c))
        object.__setattr__(self, "d", tuple((float(v), float(e)) for v, e in self.d))
        if not (0 <= self.m <= len(self.d) and 0 <= self.n <= len(self.c)):
            raise ConfigurationError("inner orders do not match parameter list lengths")
        if any(e <= 0 for _, e in self.c + self.d):
            raise ConfigurationError("all exponents must be positive")


@dataclass(frozen=True)
class OuterParams:
    """Coupling kernel in (s, t).

    ``a`` holds ``(a_j, alpha_j, A_j)``: the first ``n`` give
    ``Gamma(1 - a_j + alpha_j s + A_j t)``, the rest ``1/Gamma(a_j - alpha_j s - A_j t)``;
    ``b`` entries ``(b_j, beta_j, B_j)`` give ``1/Gamma(1 - b_j + beta_j s + B_j t)``.
    """

    n: int
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(tuple(float(v) for v in e) for e in self.a))
        object.__setattr__(self, "b", tuple(tuple(float(v) for v in e) for e in self.b))
        if not 0 <= self.n <= len(self.a):
            raise ConfigurationError("outer order n exceeds len(a)")
        if any(len(e) != 3 for e in self.a + self.b):
            raise ConfigurationError("outer entries are (value, exponent_1, exponent_2)")
        if any(e1 <= 0 or e2 <= 0 for _, e1, e2 in self.a + self.b):
            raise ConfigurationError("all exponents must be positive")


@dataclass(frozen=True)
class FoxHBivariateSpec:
    """Bivariate Fox-H function H[x1, x2] with kernel outer(s,t) * inner1(s) * inner2(t)."""

    outer: OuterParams
    inner1: InnerParams
    inner2: InnerParams

    def is_meijer(self):
        exps = [e for _, e in self.inner1.c + self.inner1.d + self.inner2.c + self.inner2.d]
        exps += [e for _, e1, e2 in self.outer.a + self.outer.b for e in (e1, e2)]
        return all(e == 1.0 for e in exps)


@dataclass
class QuadratureInfo:
    """Diagnostics returned with ``full_output=True``."""

    abscissae: tuple
    half_lengths: tuple
    nodes: tuple
    truncation: float
    imag_residual: float
    warnings: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# kernel description
# ---------------------------------------------------------------------------

class _Kernel:
    """Gamma factors Gamma(coef + ks*s + kt*t)**power."""

    def __init__(self, coef, ks, kt, power):
        self.coef = np.asarray(coef, dtype=np.complex128)
        self.ks = np.asarray(ks, dtype=float)
        self.kt = np.asarray(kt, dtype=float)
        self.power = np.asarray(power, dtype=float)

    @classmethod
    def empty(cls):
        return cls([], [], [], [])

    def __add__(self, other):
        return _Kernel(np.concatenate([self.coef, other.coef]), np.concatenate([self.ks, other.ks]),
                       np.concatenate([self.kt, other.kt]), np.concatenate([self.power, other.power]))

    def select(self, mask):
        return _Kernel(self.coef[mask], self.ks[mask], self.kt[mask], self.power[mask])

    def log(self, s, t=0.0):
        """log of the kernel on broadcast grids s, t."""
        s = np.asarray(s)
        t = np.asarray(t)
        out = np.zeros(np.broadcast(s, t).shape, dtype=np.complex128)
        for c, a, b, p in zip(self.coef, self.ks, self.kt, self.power):
            out = out + p * loggamma(c + a * s + b * t)
        return out

    def dlog_ds(self, s, t=0.0):
        s = np.asarray(s)
        t = np.asarray(t)
        out = np.zeros(np.broadcast(s, t).shape, dtype=np.complex128)
        for c, a, b, p in zip(self.coef, self.ks, self.kt, self.power):
            if a != 0:
                out = out + p * a * special.psi(c + a * s + b * t)
        return out

    def dlog_dt(self, s, t=0.0):
        s = np.asarray(s)
        t = np.asarray(t)
        out = np.zeros(np.broadcast(s, t).shape, dtype=np.complex128)
        for c, a, b, p in zip(self.coef, self.ks, self.kt, self.power):
            if b != 0:
                out = out + p * b * special.psi(c + a * s + b * t)
        return out


def _inner_kernel(inner, axis):
    coef, slope, power = [], [], []
    for j, (cj, gj) in enumerate(inner.c):
        if j < inner.n:
            coef.append(1.0 - cj); slope.append(gj); power.append(1.0)
        else:
            coef.append(cj); slope.append(-gj); power.append(-1.0)
    for j, (dj, ej) in enumerate(inner.d):
        if j < inner.m:
            coef.append(dj); slope.append(-ej); power.append(1.0)
        else:
            coef.append(1.0 - dj); slope.append(ej); power.append(-1.0)
    zeros = [0.0] * len(coef)
    if axis == 0:
        return _Kernel(coef, slope, zeros, power)
    return _Kernel(coef, zeros, slope, power)


def _outer_kernel(outer):
    coef, ks, kt, power = [], [], [], []
    for j, (aj, e1, e2) in enumerate(outer.a):
        if j < outer.n:
            coef.append(1.0 - aj); ks.append(e1); kt.append(e2); power.append(1.0)
        else:
            coef.append(aj); ks.append(-e1); kt.append(-e2); power.append(-1.0)
    for bj, e1, e2 in outer.b:
        coef.append(1.0 - bj); ks.append(e1); kt.append(e2); power.append(-1.0)
    return _Kernel(coef, ks, kt, power)


def meijer_kernel(spec):
    coef, slope, power = [], [], []
    for j, b in enumerate(spec.b_params):
        if j < spec.m:
            coef.append(b); slope.append(-1.0); power.append(1.0)
        else:
            coef.append(1.0 - b); slope.append(1.0); power.append(-1.0)
    for j, a in enumerate(spec.a_params):
        if j < spec.n:
            coef.append(1.0 - a); slope.append(1.0); power.append(1.0)
        else:
            coef.append(a); slope.append(-1.0); power.append(-1.0)
    return _Kernel(coef, slope, [0.0] * len(coef), power)


# ---------------------------------------------------------------------------
# contour placement
# ---------------------------------------------------------------------------

def _strip(coef, slope, power):
    """(L, R): rightmost left-family pole and leftmost right-family pole."""
    coef = np.real(coef)
    num = power > 0
    left = num & (slope > 0)
    right = num & (slope < 0)
    lo = np.max(-coef[left] / slope[left]) if left.any() else -np.inf
    hi = np.min(-coef[right] / slope[right]) if right.any() else np.inf
    return lo, hi


def _pick_abscissa(lo, hi, objective, eps):
    """Abscissa inside (lo, hi) minimising the real-axis integrand magnitude.

    A margin keeps the line away from the nearest poles; inside the margin
    the magnitude minimiser (a saddle-point choice) limits cancellation.
    """
    if hi - lo < eps:
        raise ConfigurationError(f"pole families are not separable (gap {hi - lo:.3g})")
    if np.isfinite(lo) and np.isfinite(hi):
        margin = min(_POLE_MARGIN, (hi - lo) / 4.0)
        a, b = lo + margin, hi - margin
        if b <= a:
            return 0.5 * (lo + hi)
        return _minimise(objective, a, b)
    if np.isfinite(lo):
        a = lo + _POLE_MARGIN
        span = 32.0
        while True:
            x = _minimise(objective, a, a + span)
            if x < a + 0.9 * span or span > 1e5:
                return x
            span *= 4.0
    if np.isfinite(hi):
        b = hi - _POLE_MARGIN
        span = 32.0
        while True:
            x = _minimise(objective, b - span, b)
            if x > b - 0.9 * span or span > 1e5:
                return x
            span *= 4.0
    span = 32.0
    while True:
        x = _minimise(objective, -span, span)
        if abs(x) < 0.9 * span or span > 1e5:
            return x
        span *= 4.0


def _minimise(objective, a, b):
    grid = np.linspace(a, b, 161)
    vals = objective(grid)
    vals = np.where(np.isfinite(vals), vals, np.inf)
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi <= lo:
        return float(grid[i])
    res = minimize_scalar(lambda v: float(objective(np.array([v]))[0]), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-6 * max(1.0, abs(lo))})
    return float(res.x) if res.fun <= vals[i] else float(grid[i])


# the t-line is shared by every x2 of a call, so it snaps more coarsely
_T_STEP = 0.5


def _quantise(c, lo, hi, step=0.125):
    """Snap abscissae to a grid so that nearby arguments share a contour."""
    if np.isfinite(lo) and np.isfinite(hi):
        step = min(step, (hi - lo) / 16.0)
        base = lo
    elif np.isfinite(lo):
        base = lo
    elif np.isfinite(hi):
        base = hi
    else:
        base = 0.0
    q = base + np.round((c - base) / step) * step
    margin = min(_POLE_MARGIN, (hi - lo) / 4.0) if np.isfinite(hi - lo) else _POLE_MARGIN
    if np.isfinite(lo):
        q = np.maximum(q, lo + margin)
    if np.isfinite(hi):
        q = np.minimum(q, hi - margin)
    return q


# ---------------------------------------------------------------------------
# quadrature nodes
# ---------------------------------------------------------------------------

def _line_nodes(half_length, width):
    """Symmetric composite Gauss-Legendre nodes on [-H, H]."""
    npan = max(1, int(np.ceil(half_length / width)))
    w = half_length / npan
    edges = np.arange(npan) * w
    y = (edges[:, None] + 0.5 * w * (_GL_X[None, :] + 1.0)).ravel()
    wt = np.tile(0.5 * w * _GL_W, npan)
    return np.concatenate([-y[::-1], y]), np.concatenate([wt[::-1], wt])


def _panel_width(cfg, dlog_max, pole_gap=np.inf):
    base = _GL_ORDER / cfg.nodes_per_unit
    # a pole closer than half a panel to the line slows Gauss-Legendre convergence
    return min(base * min(1.0, _OSC_RAD / max(dlog_max, 1e-12)), 2.0 * max(pole_gap, 1e-3))


def _pole_gap(kernel, s, t, axis):
    """Distance from the line to the nearest numerator pole, in the integration variable."""
    slope = kernel.ks if axis == 0 else kernel.kt
    gaps = [np.inf]
    for c, a, b, p, k in zip(kernel.coef, kernel.ks, kernel.kt, kernel.power, slope):
        if p <= 0 or k == 0:
            continue
        z = float(np.real(c + a * s + b * t))
        d = z if z > 0 else abs(z - np.round(z))
        gaps.append(d / abs(k))
    return min(gaps)


def _grow_1d(logmag, cfg):
    """Half-length at which the envelope tail drops below tol * peak."""
    h = cfg.half_length
    thresh = np.log(cfg.tol * _TAIL_MARGIN)
    while True:
        y = np.linspace(-h, h, _PROBE)
        lm = logmag(y)
        peak = np.max(lm)
        tail = max(lm[0], lm[-1])
        if tail - peak < thresh or h >= cfg.max_half_length:
            return min(h, cfg.max_half_length), float(np.exp(tail - peak)), y, lm
        h *= 1.6


# ---------------------------------------------------------------------------
# univariate
# ---------------------------------------------------------------------------

def mellin_barnes_1d(kernel, x, cfg=DEFAULT_CONFIG, c=None, full_output=False):
    """(1/2 pi i) int kernel(s) x**s ds along Re s = c, vectorised over x > 0."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)):
        raise DomainError("Mellin-Barnes argument must be positive")
    logx = np.log(x)
    lo, hi = _strip(kernel.coef, kernel.ks, kernel.power)
    if c is None:
        cs = np.array([_pick_abscissa(lo, hi, lambda g, lx=lx: np.real(kernel.log(g)) + g * lx,
                                      cfg.epsilon_shift) for lx in _unique_logs(logx)])
        cmap = dict(zip(_unique_logs(logx), _quantise(cs, lo, hi)))
        cvec = np.array([cmap[lx] for lx in _round_logs(logx)])
    else:
        if not lo < c < hi:
            raise ConfigurationError(f"abscissa {c} does not separate the poles ({lo}, {hi})")
        cvec = np.full_like(logx, float(c))
    out = np.empty_like(logx)
    infos = []
    for cg in np.unique(cvec):
        sel = cvec == cg
        vals, info = _line_integral(kernel, cg, logx[sel], cfg)
        out[sel] = vals
        infos.append(info)
    result = out if out.size > 1 else out[0]
    if full_output:
        return result, infos
    return result


def _round_logs(logx):
    return np.round(logx, 6)


def _unique_logs(logx):
    return list(np.unique(_round_logs(logx)))


def _line_integral(kernel, c, logx, cfg):
    lx_max = np.max(np.abs(logx))

    def logmag(y):
        return np.real(kernel.log(c + 1j * y))

    h, trunc, ygrid, _ = _grow_1d(logmag, cfg)
    dl = np.abs(kernel.dlog_ds(c + 1j * ygrid)) + lx_max
    width = _panel_width(cfg, np.max(dl), _pole_gap(kernel, c, 0.0, 0))
    y, w = _line_nodes(h, width)
    s = c + 1j * y
    lk = kernel.log(s)
    shift = np.max(lk.real)
    base = w * np.exp(lk - shift)
    phase = np.exp(1j * np.outer(logx, y))
    total = phase @ base
    vals = total * np.exp(shift + c * logx) / (2.0 * np.pi)
    imag = float(np.max(np.abs(vals.imag) / np.maximum(np.abs(vals.real), 1e-300)))
    info = QuadratureInfo((c,), (h,), (len(y),), trunc, imag)
    scale = np.exp(shift + c * logx) * np.sum(np.abs(base)) / (2.0 * np.pi)
    rel_trunc = trunc * np.max(scale / np.maximum(np.abs(vals.real), 1e-300)) if trunc > 0 else 0.0
    if h >= cfg.max_half_length or rel_trunc > max(cfg.tol, 1e-6) * 1e3:
        msg = f"contour truncation error estimate {rel_trunc:.2e} exceeds tol {cfg.tol:.1e}"
        info.warnings.append(msg)
        warnings.warn(msg, AccuracyWarning, stacklevel=3)
    return vals.real, info


def meijer_g(spec, x, cfg=DEFAULT_CONFIG, full_output=False):
    """Meijer G^{m,n}_{p,q}(x | a; b) by a single Mellin-Barnes line integral.

    ``x`` may be an array; arguments that need different contours are
    grouped automatically.  With ``full_output`` a list of
    :class:`QuadratureInfo` (one per contour) is returned as well.
    """
    return mellin_barnes_1d(meijer_kernel(spec), x, cfg, c=cfg.c1, full_output=full_output)


# ---------------------------------------------------------------------------
# bivariate
# ---------------------------------------------------------------------------

def bivariate_kernels(spec):
    return _outer_kernel(spec.outer), _inner_kernel(spec.inner1, 0), _inner_kernel(spec.inner2, 1)


def _t_strip(outer, k1, k2):
    t_only = k2 + outer.select(outer.ks == 0)
    return _strip(t_only.coef, t_only.kt, t_only.power)


def _s_strip(outer, k1, c2):
    coupled = outer.select(outer.ks != 0)
    coef = np.concatenate([np.real(k1.coef), np.real(coupled.coef) + coupled.kt * np.real(c2)])
    slope = np.concatenate([k1.ks, coupled.ks])
    power = np.concatenate([k1.power, coupled.power])
    return _strip(coef, slope, power)


def _choose_c1(outer, k1, c2, logx1, cfg, lo=None, hi=None):
    if cfg.c1 is not None:
        return cfg.c1
    if lo is None:
        lo, hi = _s_strip(outer, k1, c2)

    def obj(g):
        return np.real(k1.log(g) + outer.log(g, c2)) + g * logx1

    return float(_quantise(np.array([_pick_abscissa(lo, hi, obj, cfg.epsilon_shift)]), lo, hi)[0])


def _joint_objective(kernels, g, logx1, logx2, n_s=97):
    """Real-plane log magnitude at t = g, minimised over s on a grid.

    Placing c2 on the t-marginal alone ignores the coupling factor, which
    grows with t; the joint minimiser keeps the line where both contours
    see the least cancellation.
    """
    outer, k1, k2 = kernels
    g = np.atleast_1d(np.asarray(g, dtype=float))
    coupled = outer.select(outer.ks != 0)
    coef = np.concatenate([np.broadcast_to(np.real(k1.coef), (g.size, k1.coef.size)),
                           np.real(coupled.coef)[None, :] + g[:, None] * coupled.kt[None, :]], axis=1)
    slope = np.concatenate([k1.ks, coupled.ks])
    num = np.concatenate([k1.power, coupled.power]) > 0
    left, right = num & (slope > 0), num & (slope < 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        roots = -coef / slope
    lo = np.max(np.where(left, roots, -np.inf), axis=1) if left.any() else np.full(g.size, -np.inf)
    hi = np.min(np.where(right, roots, np.inf), axis=1) if right.any() else np.full(g.size, np.inf)
    r = np.linspace(0.0, 1.0, n_s)[None, :]
    m = np.where(np.isfinite(hi - lo), np.minimum(_POLE_MARGIN, (hi - lo) / 4.0), _POLE_MARGIN)[:, None]
    lo_, hi_ = lo[:, None], hi[:, None]
    with np.errstate(all="ignore"):
        s = np.where(np.isfinite(lo_) & np.isfinite(hi_), lo_ + m + r * (hi_ - lo_ - 2 * m),
                     np.where(np.isfinite(lo_), lo_ + m + 32.0 * r,
                              np.where(np.isfinite(hi_), hi_ - m - 32.0 * r, -32.0 + 64.0 * r)))
        v = np.real(k1.log(s) + outer.log(s, g[:, None])) + s * logx1
    v = np.where(np.isfinite(v), v, np.inf).min(axis=1)
    v = np.where(hi > lo, v, np.inf)
    return np.real(k2.log(0.0, g)) + g * logx2 + v


def _grow_2d(log_abs, cfg, h1, h2):
    """Grow both half-lengths until the marginal envelopes decay to tol."""
    thresh = np.log(cfg.tol * _TAIL_MARGIN)
    while True:
        u = np.linspace(-h1, h1, _PROBE_2D)
        y = np.linspace(-h2, h2, _PROBE_2D)
        lm = log_abs(u[:, None], y[None, :])
        m_s = special.logsumexp(lm, axis=1)
        m_t = special.logsumexp(lm, axis=0)
        tail_s = max(m_s[0], m_s[-1]) - np.max(m_s)
        tail_t = max(m_t[0], m_t[-1]) - np.max(m_t)
        grow_s = tail_s > thresh and h1 < cfg.max_half_length
        grow_t = tail_t > thresh and h2 < cfg.max_half_length
        if not (grow_s or grow_t):
            return h1, h2, float(np.exp(max(tail_s, tail_t))), u, y
        if grow_s:
            h1 = min(h1 * 1.6, cfg.max_half_length)
        if grow_t:
            h2 = min(h2 * 1.6, cfg.max_half_length)


def _bivariate_group(kernels, c1, c2, logx1, logx2, cfg, t_nodes=None):
    """Tensor-product quadrature for one (c1, c2) pair, vectorised over x2."""
    outer, k1, k2 = kernels
    lx2_max = np.max(np.abs(logx2))

    def log_abs(u, y):
        s = c1 + 1j * u
        t = c2 + 1j * y
        return np.real(k1.log(s) + outer.log(s, t) + k2.log(0.0, t))

    h1, h2, trunc, u, y = _grow_2d(log_abs, cfg, cfg.half_length, cfg.half_length)
    sg = c1 + 1j * u[::4, None]
    tg = c2 + 1j * y[None, ::4]
    ds = np.abs(k1.dlog_ds(sg) + outer.dlog_ds(sg, tg)).max() + abs(logx1)
    dt = np.abs(k2.dlog_dt(0.0, tg) + outer.dlog_dt(sg, tg)).max() + lx2_max
    gap_s = min(_pole_gap(k1, c1, c2, 0), _pole_gap(outer, c1, c2, 0))
    gap_t = min(_pole_gap(k2, c1, c2, 1), _pole_gap(outer, c1, c2, 1))
    us, ws = _line_nodes(h1, _panel_width(cfg, ds, gap_s))
    yt, wt = _line_nodes(h2, _panel_width(cfg, dt, gap_t))
    s = c1 + 1j * us
    t = c2 + 1j * yt
    l1 = k1.log(s) + 1j * us * logx1
    lo_ = outer.log(s[:, None], t[None, :])
    big = l1[:, None] + lo_
    shift1 = np.max(big.real)
    inner_s = (ws[:, None] * np.exp(big - shift1)).sum(axis=0)
    l2 = k2.log(0.0, t)
    shift2 = np.max(l2.real)
    base = wt * np.exp(l2 - shift2) * inner_s
    phase = np.exp(1j * np.outer(logx2, yt))
    total = phase @ base
    mag = np.exp(shift1 + shift2 + c1 * logx1 + c2 * logx2) / (2.0 * np.pi) ** 2
    vals = total * mag
    scale = mag * np.sum(np.abs(base))
    info = QuadratureInfo((c1, c2), (h1, h2), (len(us), len(yt)), trunc,
                          float(np.max(np.abs(vals.imag) / np.maximum(np.abs(vals.real), 1e-300))))
    rel_trunc = trunc * np.max(scale / np.maximum(np.abs(vals.real), 1e-300))
    if max(h1, h2) >= cfg.max_half_length or rel_trunc > max(cfg.tol, 1e-6) * 1e3:
        msg = f"contour truncation error estimate {rel_trunc:.2e} exceeds tol {cfg.tol:.1e}"
        info.warnings.append(msg)
        warnings.warn(msg, AccuracyWarning, stacklevel=3)
    return vals.real, info


def fox_h_bivariate(spec, x1, x2, cfg=DEFAULT_CONFIG, full_output=False):
    """Bivariate Fox-H function by double Mellin-Barnes quadrature.

    ``x1`` is a positive scalar, ``x2`` a positive scalar or array.  The
    t-contour is placed first (from the inner2 pole families), then the
    s-contour from inner1 and the outer coupling evaluated at that t-line.
    The real part is returned; the imaginary residual is reported in the
    diagnostics and must stay below 1e-6 of the magnitude.
    """
    x1 = float(x1)
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if not x1 > 0 or np.any(~(x2 > 0)):
        raise DomainError("bivariate H arguments must be positive")
    kernels = bivariate_kernels(spec)
    outer, k1, k2 = kernels
    logx1 = np.log(x1)
    logx2 = np.log(x2)
    lo, hi = _t_strip(outer, k1, k2)
    if cfg.c2 is not None:
        c2v = np.full_like(logx2, cfg.c2)
    else:
        keys = _unique_logs(logx2)
        picks = [_pick_abscissa(lo, hi, lambda g, lx=lx: _joint_objective(kernels, g, logx1, lx),
                               cfg.epsilon_shift) for lx in keys]
        cmap = dict(zip(keys, _quantise(np.array(picks), lo, hi, _T_STEP)))
        c2v = np.array([cmap[k] for k in _round_logs(logx2)])
    out = np.empty_like(logx2)
    infos = []
    for c2 in np.unique(c2v):
        sel = c2v == c2
        c1 = _choose_c1(outer, k1, c2, logx1, cfg)
        vals, info = _bivariate_group(kernels, c1, c2, logx1, logx2[sel], cfg)
        if info.imag_residual > 1e-6:
            info.warnings.append(f"imaginary residual {info.imag_residual:.2e}")
            warnings.warn(info.warnings[-1], AccuracyWarning, stacklevel=2)
        out[sel] = vals
        infos.append(info)
    result = out if out.size > 1 else out[0]
    if full_output:
        return result, infos
    return result


def meijer_g_bivariate(spec, x1, x2, cfg=DEFAULT_CONFIG, full_output=False):
    """Bivariate Meijer-G: the all-exponents-one case of :func:`fox_h_bivariate`."""
    if not spec.is_meijer():
        raise ValueError("bivariate Meijer-G requires every exponent to equal 1")
    return fox_h_bivariate(spec, x1, x2, cfg, full_output=full_output)


# ---------------------------------------------------------------------------
# residue expansion in the second variable
# ---------------------------------------------------------------------------

def _t_poles(k2, depth):
    """Left poles of the inner2 kernel with their net orders, descending in Re t."""
    num = k2.select((k2.power > 0) & (k2.kt > 0))
    den = k2.select((k2.power < 0) & (k2.kt > 0))
    cand = []
    for c, b in zip(np.real(num.coef), num.kt):
        k = 0
        while True:
            p = -(c + k) / b
            if p < -depth:
                break
            cand.append(p)
            k += 1
    cand = np.unique(np.round(cand, 12))
    poles = []
    for p in cand:
        order = 0
        for c, b in zip(np.real(num.coef), num.kt):
            v = c + b * p
            if v <= 1e-9 and abs(v - np.round(v)) < 1e-9:
                order += 1
        for c, b in zip(np.real(den.coef), den.kt):
            v = c + b * p
            if v <= 1e-9 and abs(v - np.round(v)) < 1e-9:
                order -= 1
        if order > 0:
            poles.append((p, order))
    poles.sort(key=lambda e: -e[0])
    return poles


def _cluster(poles, radius):
    groups = []
    for p, o in poles:
        if groups and groups[-1][-1][0] - p < radius:
            groups[-1].append((p, o))
        else:
            groups.append([(p, o)])
    return groups


def left_pole_clusters(spec, depth=10.0, radius=0.05):
    """Pole clusters of the inner2 kernel, rightmost first, as lists of (pole, order)."""
    _, _, k2 = bivariate_kernels(spec)
    return _cluster(_t_poles(k2, depth), radius)


def fox_h_bivariate_residues(spec, x1, x2, cfg=DEFAULT_CONFIG, n_clusters=1, n_circle=64,
                             select=None, per_cluster=False):
    """Leading terms of the large-x2 expansion of a bivariate H-function.

    The t-contour is closed to the left: each of the first ``n_clusters``
    pole clusters of the inner2 kernel contributes its residue, computed by
    a trapezoidal contour integral on a small circle around the cluster (so
    coincident and near-coincident poles, and the logarithms they generate,
    are handled exactly).  The s-integral is evaluated by line quadrature at
    every circle node.  Requires the inner1 kernel to have no right-family
    poles, so that the s-integral is entire in t.

    ``select`` (pole locations) replaces the first ``n_clusters`` by the
    clusters containing those poles; ``per_cluster`` returns one
    contribution per cluster.
    """
    x1 = float(x1)
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    kernels = bivariate_kernels(spec)
    outer, k1, k2 = kernels
    if np.any((k1.power > 0) & (k1.ks < 0)):
        raise ConfigurationError("residue expansion needs inner1 without right-family poles")
    lo, hi = _t_strip(outer, k1, k2)
    depth = max(10.0, -lo + 10.0, 2.0 - min(select or (), default=0.0))
    all_poles = _t_poles(k2, depth=depth)
    clusters = _cluster(all_poles, 0.05)
    if select is None:
        groups = clusters[:n_clusters]
    else:
        groups = [cl for cl in clusters if any(abs(p - q) < 1e-9 for p, _ in cl for q in select)]
    rights = _right_poles(k2)
    logx1, logx2 = np.log(x1), np.log(x2)
    parts = []
    for g in groups:
        pts = np.array([p for p, _ in g])
        centre = 0.5 * (pts.max() + pts.min())
        spread = 0.5 * (pts.max() - pts.min())
        others = [p for p, _ in all_poles if p not in pts] + rights
        gap = min([abs(o - centre) - spread for o in others], default=1.0)
        r = spread + min(0.5 * gap, 0.5)
        theta = 2.0 * np.pi * (np.arange(n_circle) + 0.5) / n_circle
        tn = centre + r * np.exp(1j * theta)
        lo1 = max(_s_strip(outer, k1, tv)[0] for tv in tn.real)
        hi1 = min(_s_strip(outer, k1, tv)[1] for tv in tn.real)
        c1 = _choose_c1(outer, k1, centre, logx1, cfg, lo1, hi1) if cfg.c1 is None else cfg.c1
        s_part = _s_integral(kernels, c1, tn, logx1, cfg)
        f = np.exp(k2.log(0.0, tn)) * s_part * (tn - centre) / n_circle
        parts.append(np.real(np.exp(np.outer(logx2, tn)) @ f))
    if per_cluster:
        return parts
    total = np.sum(parts, axis=0) if parts else np.zeros_like(logx2)
    return total if total.size > 1 else total[0]


def _right_poles(k2):
    num = k2.select((k2.power > 0) & (k2.kt < 0))
    return [float(-c / b) for c, b in zip(np.real(num.coef), num.kt)]


def _s_integral(kernels, c1, t, logx1, cfg):
    """(1/2 pi i) int outer(s,t) inner1(s) x1**s ds for each complex t."""
    outer, k1, _ = kernels

    def logmag(u):
        s = c1 + 1j * u
        return np.max(np.real(k1.log(s)[:, None] + outer.log(s[:, None], t[None, :])), axis=1)

    h, _, ug, _ = _grow_1d(logmag, cfg)
    sg = c1 + 1j * ug[::4]
    d = np.abs(k1.dlog_ds(sg)[:, None] + outer.dlog_ds(sg[:, None], t[None, :])).max() + abs(logx1)
    gap = min([_pole_gap(k1, c1, 0.0, 0)] + [_pole_gap(outer, c1, tv, 0) for tv in np.real(t)])
    u, w = _line_nodes(h, _panel_width(cfg, d, gap))
    s = c1 + 1j * u
    big = (k1.log(s) + 1j * u * logx1)[:, None] + outer.log(s[:, None], t[None, :])
    shift = np.max(big.real)
    return (w[:, None] * np.exp(big - shift)).sum(axis=0) * np.exp(shift + c1 * logx1) / (2.0 * np.pi)
