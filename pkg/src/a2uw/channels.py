"""Fading blocks of the air-to-underwater link and the SNR scale gamma_0.

The received electrical signal is ``y = h_at h_f h_ws H_w h_ut h_p s + n``
with independent blocks

* ``h_at``  Malaga atmospheric turbulence,
* ``h_f``   random fog attenuation, ``exp(-G)`` with ``G ~ Gamma(k, 1/z)``,
* ``h_ws``  Birnbaum-Saunders air-water interface,
* ``h_ut``  exponential / generalised-Gamma (EGG) oceanic turbulence,
* ``h_p``   zero-boresight pointing error,

and the deterministic Beer-Lambert water path gain ``H_w`` folded into
``gamma_0 = 2 Ps^2 R^2 H_w^2 / sigma_n^2``.  Every block exposes its pdf, cdf
and an exact sampler; samplers take a ``numpy.random.Generator``.
"""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator

from .errors import ConfigurationError, DomainError, NumericalFailure
from .specfun import MeijerGSpec, MellinBarnesConfig, log_bessel_k, meijer_g

DB_PER_NEPER = 4.343
BLOCKS = ("malaga", "fog", "bs", "egg", "pointing")


def _positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise ConfigurationError(f"{name} must be a positive real, got {value!r}")


def _as_array(x):
    x = np.asarray(x, dtype=float)
    return x


def _ret(out):
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Malaga atmospheric turbulence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MalagaParams:
    """Malaga turbulence with integer ``beta_M`` (finite-sum pdf).

    ``g`` is the average power of the scattered component not coupled to the
    line of sight (``2 b0 (1 - rho)``) and ``omega_prime`` the coherent
    average power; the mean irradiance is ``g + omega_prime``.
    """

    alpha_M: float
    beta_M: int
    g: float
    omega_prime: float

    def __post_init__(self):
        _positive("alpha_M", self.alpha_M)
        _positive("g", self.g)
        _positive("omega_prime", self.omega_prime)
        if float(self.beta_M) != round(float(self.beta_M)) or self.beta_M < 1:
            raise ConfigurationError("beta_M must be a positive integer")
        object.__setattr__(self, "beta_M", int(round(float(self.beta_M))))
        object.__setattr__(self, "alpha_M", float(self.alpha_M))
        object.__setattr__(self, "g", float(self.g))
        object.__setattr__(self, "omega_prime", float(self.omega_prime))

    @classmethod
    def from_scattering(cls, alpha_M, beta_M, b0, rho, omega, phase):
        """Build from the physical scattering description (b0, rho, Omega, phi_A - phi_B)."""
        g = 2.0 * b0 * (1.0 - rho)
        omega_prime = omega + 2.0 * rho * b0 + 2.0 * np.sqrt(2.0 * b0 * rho * omega) * np.cos(phase)
        return cls(alpha_M, beta_M, g, omega_prime)

    @property
    def rate(self):
        """B = alpha_M beta_M / (g beta_M + Omega')."""
        return self.alpha_M * self.beta_M / (self.g * self.beta_M + self.omega_prime)

    def log_A(self):
        a, b, g, w = self.alpha_M, self.beta_M, self.g, self.omega_prime
        return (np.log(2.0) + 0.5 * a * np.log(a) - (1.0 + 0.5 * a) * np.log(g)
                - special.gammaln(a) + (b + 0.5 * a) * np.log(g * b / (g * b + w)))

    def log_a(self):
        """log a_m, m = 1..beta_M."""
        a, b, g, w = self.alpha_M, self.beta_M, self.g, self.omega_prime
        m = np.arange(1, b + 1, dtype=float)
        return (special.gammaln(b) - special.gammaln(m) - special.gammaln(b - m + 1)
                + (1.0 - 0.5 * m) * np.log(g * b + w) - special.gammaln(m)
                + (m - 1.0) * np.log(w / g) + 0.5 * m * np.log(a / b))

    def log_b(self):
        """log b_m = log a_m - (alpha_M + m)/2 log B: the Meijer-G form coefficients."""
        m = np.arange(1, self.beta_M + 1, dtype=float)
        return self.log_a() - 0.5 * (self.alpha_M + m) * np.log(self.rate)


def malaga_pdf(p, x):
    """A sum_m a_m x^((alpha+m)/2 - 1) K_{alpha-m}(2 sqrt(B x))."""
    x = _as_array(x)
    if np.any(~(x > 0)):
        raise DomainError("malaga_pdf requires x > 0")
    m = np.arange(1, p.beta_M + 1, dtype=float)
    xx = x[..., None]
    logs = (p.log_A() + p.log_a() + (0.5 * (p.alpha_M + m) - 1.0) * np.log(xx)
            + log_bessel_k(p.alpha_M - m, 2.0 * np.sqrt(p.rate * xx)))
    return _ret(np.exp(special.logsumexp(logs, axis=-1)))


def malaga_moment(p, n):
    """E[h_at^n] from the Mellin transform of the pdf."""
    m = np.arange(1, p.beta_M + 1, dtype=float)
    logs = (p.log_A() + p.log_b() - np.log(2.0) + special.gammaln(p.alpha_M + n)
            + special.gammaln(m + n) - n * np.log(p.rate))
    return float(np.exp(special.logsumexp(logs)))


def malaga_cdf(p, x, cfg=None):
    """Closed-form cdf: sum_m (A b_m / 2) G^{2,1}_{1,3}(B x | 1; alpha, m, 0)."""
    cfg = cfg or MellinBarnesConfig(tol=1e-12)
    x = np.atleast_1d(_as_array(x))
    if np.any(~(x > 0)):
        raise DomainError("malaga_cdf requires x > 0")
    lb = p.log_A() + p.log_b() - np.log(2.0)
    total = np.zeros_like(x)
    for m, lbm in zip(range(1, p.beta_M + 1), lb):
        spec = MeijerGSpec(2, 1, (1.0,), (p.alpha_M, float(m), 0.0))
        total += np.exp(lbm) * np.atleast_1d(meijer_g(spec, p.rate * x, cfg))
    return _ret(total) if total.size > 1 else float(total[0])


@dataclass(frozen=True)
class _InverseTable:
    logit_u: np.ndarray
    log_x: np.ndarray
    interp: PchipInterpolator


@lru_cache(maxsize=32)
def _malaga_table(p, n_grid=1200, q_lo=1e-9):
    # cumulative Gauss-Legendre of x f(x) over log x; the upper tail is
    # accumulated from the right so 1 - F keeps its relative accuracy
    lm = np.log(p.g + p.omega_prime)
    edges = np.linspace(lm - 45.0, lm + 7.0, 4 * n_grid + 1)
    t, w = np.polynomial.legendre.leggauss(8)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    lx = mid[:, None] + half[:, None] * t
    x = np.exp(lx)
    mass = (half[:, None] * w * x * malaga_pdf(p, x)).sum(axis=1)
    head = x[0, 0] * malaga_pdf(p, x[0, 0])   # f ~ x^(min-1), so F(x0) ~ x0 f(x0)
    cdf = np.concatenate([[head], head + np.cumsum(mass)])
    ccdf = np.concatenate([np.cumsum(mass[::-1])[::-1], [0.0]])
    total = cdf[-1]
    if abs(total - 1.0) > 1e-8:
        raise NumericalFailure(f"Malaga pdf integrates to {total!r}")
    keep = (cdf >= q_lo * 1e-2) & (ccdf >= q_lo * 1e-2)
    lu = np.log(cdf[keep]) - np.log(ccdf[keep])
    lxk = edges[keep]
    if np.any(np.diff(lu) <= 0):
        raise NumericalFailure("tabulated Malaga cdf is not monotone")
    sel = np.unique(np.linspace(0, len(lu) - 1, n_grid).astype(int))
    return _InverseTable(lu[sel], lxk[sel], PchipInterpolator(lu[sel], lxk[sel], extrapolate=True))


def malaga_sample(p, rng, size=None):
    """Inverse-cdf sampling from a monotone (PCHIP) interpolant of the tabulated cdf.

    The cdf is tabulated on a log grid spanning quantiles 1e-9 .. 1 - 1e-9 and
    interpolated as log x against logit u, which is smooth in both tails.
    """
    tab = _malaga_table(p)
    u = rng.random(size)
    u = np.clip(u, 1e-300, 1.0 - 1e-16)
    lu = np.log(u) - np.log1p(-u)
    return np.exp(tab.interp(lu))


def malaga_table_cdf(p, x):
    """cdf implied by the sampling table (used for goodness-of-fit of the sampler)."""
    tab = _malaga_table(p)
    inv = PchipInterpolator(tab.log_x, tab.logit_u, extrapolate=True)
    return _ret(special.expit(inv(np.log(_as_array(x)))))


# ---------------------------------------------------------------------------
# fog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FogParams:
    """Gamma-distributed fog extinction over ``d_air_km``: z = 4.343 / (beta_f d_air)."""

    k: float
    beta_f: float
    d_air_km: float

    def __post_init__(self):
        _positive("k", self.k)
        _positive("beta_f", self.beta_f)
        _positive("d_air_km", self.d_air_km)

    @property
    def z(self):
        return DB_PER_NEPER / (self.beta_f * self.d_air_km)

    @property
    def k_int(self):
        """Shape rounded to the nearest positive integer (finite Meijer-G lists)."""
        return max(1, int(round(self.k)))

    def with_integer_k(self):
        return replace(self, k=float(self.k_int))


def fog_pdf(p, x):
    x = _as_array(x)
    if np.any(~((x > 0) & (x <= 1))):
        raise DomainError("fog_pdf is supported on (0, 1]")
    z, k = p.z, p.k
    with np.errstate(divide="ignore"):
        logl = np.log(-np.log(x)) if k != 1 else 0.0
        out = np.exp(k * np.log(z) - special.gammaln(k) + (k - 1.0) * logl + (z - 1.0) * np.log(x))
    return _ret(np.where(x == 1, (z if k == 1 else (0.0 if k > 1 else np.inf)), out))


def fog_cdf(p, x):
    x = _as_array(x)
    if np.any(~((x > 0) & (x <= 1))):
        raise DomainError("fog_cdf is supported on (0, 1]")
    return _ret(special.gammaincc(p.k, -p.z * np.log(x)))


def fog_sample(p, rng, size=None):
    return np.exp(-rng.gamma(p.k, 1.0 / p.z, size))


def fog_mean(p):
    return (p.z / (1.0 + p.z)) ** p.k


# ---------------------------------------------------------------------------
# Birnbaum-Saunders interface
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BsParams:
    alpha: float
    beta: float

    def __post_init__(self):
        _positive("alpha", self.alpha)
        _positive("beta", self.beta)


def bs_pdf(p, x):
    x = _as_array(x)
    if np.any(~(x > 0)):
        raise DomainError("bs_pdf requires x > 0")
    a, b = p.alpha, p.beta
    r = b / x
    pref = 1.0 / (2.0 * np.sqrt(2.0 * np.pi) * a * b)
    return _ret(pref * (np.sqrt(r) + r ** 1.5) * np.exp(-(x / b + r - 2.0) / (2.0 * a * a)))


def bs_cdf(p, x):
    x = _as_array(x)
    if np.any(~(x > 0)):
        raise DomainError("bs_cdf requires x > 0")
    return _ret(special.ndtr((np.sqrt(x / p.beta) - np.sqrt(p.beta / x)) / p.alpha))


def bs_sample(p, rng, size=None):
    w = p.alpha * rng.standard_normal(size)
    return p.beta * (1.0 + 0.5 * w * w + w * np.sqrt(0.25 * w * w + 1.0))


def bs_mean(p):
    return p.beta * (1.0 + 0.5 * p.alpha ** 2)


# ---------------------------------------------------------------------------
# EGG oceanic turbulence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EggParams:
    """Mixture of Exp(mean lam) with weight omega and GG(a, b, c) with weight 1 - omega."""

    omega: float
    lam: float
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not 0 < self.omega < 1:
            raise ConfigurationError("omega must lie in (0, 1)")
        for name in ("lam", "a", "b", "c"):
            _positive(name, getattr(self, name))


def egg_pdf(p, x):
    x = _as_array(x)
    if np.any(~(x > 0)):
        raise DomainError("egg_pdf requires x > 0")
    w, lam, a, b, c = p.omega, p.lam, p.a, p.b, p.c
    gg = np.exp(np.log(c) + (a * c - 1.0) * np.log(x) - a * c * np.log(b)
                - (x / b) ** c - special.gammaln(a))
    return _ret(w / lam * np.exp(-x / lam) + (1.0 - w) * gg)


def egg_cdf(p, x):
    x = _as_array(x)
    if np.any(~(x > 0)):
        raise DomainError("egg_cdf requires x > 0")
    return _ret(p.omega * -np.expm1(-x / p.lam) + (1.0 - p.omega) * special.gammainc(p.a, (x / p.b) ** p.c))


def egg_sample(p, rng, size=None):
    expo = rng.random(size) < p.omega
    e = rng.exponential(p.lam, size)
    g = p.b * rng.gamma(p.a, 1.0, size) ** (1.0 / p.c)
    return np.where(expo, e, g)


def egg_mean(p):
    return p.omega * p.lam + (1.0 - p.omega) * p.b * np.exp(special.gammaln(p.a + 1.0 / p.c) - special.gammaln(p.a))


# ---------------------------------------------------------------------------
# pointing error
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointingParams:
    rho: float
    A0: float

    def __post_init__(self):
        _positive("rho", self.rho)
        _positive("A0", self.A0)


def pointing_pdf(p, x):
    x = _as_array(x)
    if np.any(~((x > 0) & (x <= p.A0))):
        raise DomainError("pointing_pdf is supported on (0, A0]")
    r2 = p.rho ** 2
    return _ret(r2 / p.A0 ** r2 * x ** (r2 - 1.0))


def pointing_cdf(p, x):
    x = _as_array(x)
    if np.any(~((x > 0) & (x <= p.A0))):
        raise DomainError("pointing_cdf is supported on (0, A0]")
    return _ret((x / p.A0) ** (p.rho ** 2))


def pointing_sample(p, rng, size=None):
    # 1 - U keeps the draw in (0, A0]
    return p.A0 * (1.0 - rng.random(size)) ** (1.0 / p.rho ** 2)


def pointing_mean(p):
    r2 = p.rho ** 2
    return p.A0 * r2 / (r2 + 1.0)


# ---------------------------------------------------------------------------
# link budget and composite channel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkBudget:
    """Transmit power (dBm), responsivity (A/W), noise variance and path geometry.

    ``sigma_n2`` keeps the tabulated A^2/GHz convention; ``phi_air`` is the
    haze coefficient of the deterministic-fog alternative ``exp(-phi_air d_air)``.
    """

    Ps_dBm: float = 0.0
    R: float = 1.0
    sigma_n2: float = 1e-14
    phi_water_dB_per_km: float = 21.79
    d_water_m: float = 50.0
    d_air_km: float = 0.02
    phi_air: float = 0.98

    def __post_init__(self):
        _positive("R", self.R)
        _positive("sigma_n2", self.sigma_n2)
        _positive("phi_water_dB_per_km", self.phi_water_dB_per_km)
        _positive("d_air_km", self.d_air_km)
        _positive("phi_air", self.phi_air)
        if not (np.isfinite(self.d_water_m) and self.d_water_m >= 0):
            raise ConfigurationError("d_water_m must be nonnegative")
        if not np.isfinite(self.Ps_dBm):
            raise ConfigurationError("Ps_dBm must be finite")

    @property
    def Ps_W(self):
        return 10.0 ** ((self.Ps_dBm - 30.0) / 10.0)

    @property
    def H_w(self):
        phi = self.phi_water_dB_per_km / (DB_PER_NEPER * 1000.0)
        return float(np.exp(-phi * self.d_water_m))

    @property
    def haze_gain(self):
        return float(np.exp(-self.phi_air * self.d_air_km))

    def with_power(self, Ps_dBm):
        return replace(self, Ps_dBm=float(Ps_dBm))


def gamma0(lb, include_water=True):
    """2 Ps^2 R^2 H_w^2 / sigma_n^2 (``include_water=False`` drops H_w)."""
    hw = lb.H_w if include_water else 1.0
    return 2.0 * lb.Ps_W ** 2 * lb.R ** 2 * hw ** 2 / lb.sigma_n2


def gamma0_db(lb):
    return 10.0 * np.log10(gamma0(lb))


@dataclass(frozen=True)
class ChannelParams:
    malaga: MalagaParams
    fog: FogParams
    bs: BsParams
    egg: EggParams
    pointing: PointingParams

    def with_integer_k(self):
        return replace(self, fog=self.fog.with_integer_k())


def block_streams(seed, worker=0):
    """Independent generators per block; adding a block leaves the others unchanged."""
    return {name: np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(worker), i)))
            for i, name in enumerate(BLOCKS)}


def _streams(rng):
    if isinstance(rng, dict):
        return rng
    if isinstance(rng, np.random.Generator):
        return dict(zip(BLOCKS, rng.spawn(len(BLOCKS))))
    return block_streams(rng)


def composite_sample(channel, lb, size, rng):
    """Draw ``h = h_at h_f h_ws h_ut h_p`` and ``gamma = gamma_0 h^2``.

    ``rng`` is an integer seed, a mapping of per-block generators (see
    :func:`block_streams`) or a Generator that is split into substreams.
    """
    st = _streams(rng)
    h = malaga_sample(channel.malaga, st["malaga"], size)
    h *= fog_sample(channel.fog, st["fog"], size)
    h *= bs_sample(channel.bs, st["bs"], size)
    h *= egg_sample(channel.egg, st["egg"], size)
    h *= pointing_sample(channel.pointing, st["pointing"], size)
    return h, gamma0(lb) * h * h


def composite_log_moment(channel, n):
    """log E[h^n] for real n >= 0 from the closed-form block moments."""
    n = np.asarray(n, dtype=float)
    mg, fog, bs, egg, pt = channel.malaga, channel.fog, channel.bs, channel.egg, channel.pointing
    mm = np.arange(1, mg.beta_M + 1, dtype=float)
    nn = n[..., None]
    l_mg = special.logsumexp(mg.log_A() + mg.log_b() - np.log(2.0) + special.gammaln(mg.alpha_M + nn)
                             + special.gammaln(mm + nn) - nn * np.log(mg.rate), axis=-1)
    l_fog = fog.k * (np.log(fog.z) - np.log(fog.z + n))
    w = 1.0 / bs.alpha ** 2
    # E[T^r] = beta^r (K_{r+1/2}(w) + K_{r-1/2}(w)) / (2 K_{1/2}(w)), scaled Bessel keeps it finite
    l_bs = (n * np.log(bs.beta) + np.log(special.kve(n + 0.5, w) + special.kve(n - 0.5, w))
            - np.log(2.0 * special.kve(0.5, w)))
    l_egg = np.logaddexp(np.log(egg.omega) + n * np.log(egg.lam) + special.gammaln(1.0 + n),
                         np.log1p(-egg.omega) + n * np.log(egg.b) + special.gammaln(egg.a + n / egg.c)
                         - special.gammaln(egg.a))
    r2 = pt.rho ** 2
    l_pt = n * np.log(pt.A0) + np.log(r2) - np.log(r2 + n)
    return l_mg + l_fog + l_bs + l_egg + l_pt


def composite_mean(channel):
    return (malaga_moment(channel.malaga, 1) * fog_mean(channel.fog) * bs_mean(channel.bs)
            * egg_mean(channel.egg) * pointing_mean(channel.pointing))
