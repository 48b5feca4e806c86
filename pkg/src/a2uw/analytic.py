"""Closed-form statistics of the cascaded channel.

Stage by stage: ``h1 = h_at h_p`` and ``h2 = h1 h_f`` are univariate Meijer-G
sums; ``h3 = h2 h_ws`` and ``h = h3 h_ut`` are sums of bivariate Meijer-G /
Fox-H functions whose first argument ``4 alpha^4`` carries the BS exponential
and whose second argument is inversely proportional to the amplitude.

All kernels share one layout (``t`` is the second Mellin variable)::

    outer  Gamma(1 - p + s + t),   p in {1/2, 3/2}
    inner1 Gamma(s)
    inner2 Gamma(rho^2+t) Gamma(alpha_M+t) Gamma(m+t) Gamma(z+t)^k [branch]
           / (Gamma(rho^2+1+t) Gamma(z+1+t)^k)

with ``[branch]`` = ``Gamma(1+t)`` (exponential part of the EGG law) or
``Gamma(a+t/c)`` (generalised-Gamma part).  The outage kernel appends
``Gamma(-t)/Gamma(1-t)``; its complement ``Gamma(t)/Gamma(1+t)``.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from .channels import (
    BsParams, ChannelParams, LinkBudget, composite_log_moment, fog_pdf, gamma0, malaga_pdf, pointing_pdf,
)
from .errors import AccuracyWarning, ConfigurationError, DomainError, NumericalFailure
from .specfun import (
    DEFAULT_CONFIG, FoxHBivariateSpec, InnerParams, MeijerGSpec, MellinBarnesConfig,
    OuterParams, fox_h_bivariate, fox_h_bivariate_residues, left_pole_clusters, meijer_g,
)

_P_VALUES = (0.5, 1.5)
_BRANCHES = ("exp", "gg")


def _fog_k(fog):
    k = float(fog.k)
    if k != round(k) or k < 1:
        raise ConfigurationError(
            f"fog shape k = {k} must be a positive integer for the analytic path; "
            "use FogParams.with_integer_k()")
    return int(round(k))


def _positive_array(x, what):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError(f"{what} requires positive arguments")
    return x


def _ret(v):
    v = np.asarray(v)
    return v[()] if v.ndim == 0 else v


# ---------------------------------------------------------------------------
# BS in Meijer-G product form
# ---------------------------------------------------------------------------

_EXP_SPEC = MeijerGSpec(1, 0, (), (0.0,))


def bs_pdf_meijer_form(p: BsParams, x, cfg=DEFAULT_CONFIG):
    """BS density written with two exponential Meijer-G factors.

    ``e^{1/alpha^2} / (2 sqrt(2 pi) alpha beta) ((beta/x)^{1/2} + (beta/x)^{3/2})
    G^{1,0}_{0,1}(x / (2 alpha^2 beta)) G^{1,0}_{0,1}(beta / (2 alpha^2 x))``.
    """
    x = np.atleast_1d(_positive_array(x, "bs_pdf_meijer_form"))
    a, b = p.alpha, p.beta
    g1 = np.atleast_1d(meijer_g(_EXP_SPEC, x / (2 * a * a * b), cfg))
    g2 = np.atleast_1d(meijer_g(_EXP_SPEC, b / (2 * a * a * x), cfg))
    r = b / x
    pref = np.exp(1.0 / a ** 2) / (2.0 * np.sqrt(2.0 * np.pi) * a * b)
    out = pref * (np.sqrt(r) + r ** 1.5) * g1 * g2
    return out if out.size > 1 else float(out[0])


# ---------------------------------------------------------------------------
# univariate stages h1, h2
# ---------------------------------------------------------------------------

def _meijer_stage(malaga, pointing, fog, x, cumulative, cfg):
    x = np.atleast_1d(_positive_array(x, "stage density"))
    r2 = pointing.rho ** 2
    k = 0 if fog is None else _fog_k(fog)
    z = 0.0 if fog is None else fog.z
    a_par = (r2 + 1.0,) + (z + 1.0,) * k
    lb = malaga.log_A() + malaga.log_b() + np.log(r2 / 2.0) + k * (np.log(z) if k else 0.0)
    y = malaga.rate * x / pointing.A0
    total = np.zeros_like(x)
    for m, lbm in zip(range(1, malaga.beta_M + 1), lb):
        b_par = (r2, malaga.alpha_M, float(m)) + (z,) * k
        if cumulative:
            spec = MeijerGSpec(3 + k, 1, (1.0,) + a_par, b_par + (0.0,))
            total += np.exp(lbm) * np.atleast_1d(meijer_g(spec, y, cfg))
        else:
            spec = MeijerGSpec(3 + k, 0, a_par, b_par)
            total += np.exp(lbm) * np.atleast_1d(meijer_g(spec, y, cfg)) / x
    return total if total.size > 1 else float(total[0])


def h1_pdf(malaga, pointing, x, cfg=DEFAULT_CONFIG):
    """Density of h_at h_p: (rho^2 A / 2x) sum_m b_m G^{3,0}_{1,3}(B x / A0 | rho^2+1; rho^2, alpha_M, m)."""
    return _meijer_stage(malaga, pointing, None, x, False, cfg)


def h1_cdf(malaga, pointing, x, cfg=DEFAULT_CONFIG):
    return _meijer_stage(malaga, pointing, None, x, True, cfg)


def h2_pdf(malaga, pointing, fog, x, cfg=DEFAULT_CONFIG):
    """Density of h_at h_p h_f: G^{3+k,0}_{1+k,3+k} with the blocks {z+1}^k over {z}^k."""
    return _meijer_stage(malaga, pointing, fog, x, False, cfg)


def h2_cdf(malaga, pointing, fog, x, cfg=DEFAULT_CONFIG):
    return _meijer_stage(malaga, pointing, fog, x, True, cfg)


# ---------------------------------------------------------------------------
# bivariate stages h3, h
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Term:
    """One bivariate term: value = exp(log_pref) * H(x1, scale * u) with u the caller's variable."""

    log_pref: float
    spec: FoxHBivariateSpec
    x1: float
    scale: float
    label: str


def _inner2(malaga, pointing, fog, m, branch, mode):
    r2 = pointing.rho ** 2
    k = _fog_k(fog)
    z = fog.z
    num = [(r2, 1.0), (malaga.alpha_M, 1.0), (float(m), 1.0)] + [(z, 1.0)] * k
    if branch == "exp":
        num.append((1.0, 1.0))
    elif branch != "none":
        egg = branch
        num.append((egg.a, 1.0 / egg.c))
    den = [r2 + 1.0] + [z + 1.0] * k
    c_num = [(1.0 - v, e) for v, e in num]
    d_den = [(1.0 - w, 1.0) for w in den]
    if mode == "pdf":
        return InnerParams(m=0, n=len(c_num), c=c_num, d=d_den)
    if mode == "cdf":
        return InnerParams(m=1, n=len(c_num), c=c_num + [(1.0, 1.0)], d=[(0.0, 1.0)] + d_den)
    if mode == "ccdf":
        return InnerParams(m=0, n=len(c_num) + 1, c=[(1.0, 1.0)] + c_num, d=d_den + [(0.0, 1.0)])
    raise ValueError(mode)


_INNER1 = InnerParams(m=0, n=1, c=((1.0, 1.0),))


def _terms(channel, mode, with_egg):
    """Bivariate terms of h3 (``with_egg=False``) or h (``with_egg=True``)."""
    mg, pt, fog, bs = channel.malaga, channel.pointing, channel.fog, channel.bs
    k = _fog_k(fog)
    a = bs.alpha
    C = 2.0 * a * a * bs.beta * pt.A0 / mg.rate
    x1 = 4.0 * a ** 4
    base = (mg.log_A() + mg.log_b() + k * np.log(fog.z) + 2.0 * np.log(pt.rho)
            + 1.0 / a ** 2 - 0.5 * np.log(np.pi))
    p_log = {0.5: -np.log(4.0), 1.5: -np.log(8.0) - 2.0 * np.log(a)}
    if with_egg:
        egg = channel.egg
        branches = [("exp", np.log(egg.omega), egg.lam, "exp"),
                    ("gg", np.log1p(-egg.omega) - special.gammaln(egg.a), egg.b, egg)]
    else:
        branches = [("h3", 0.0, 1.0, "none")]
    out = []
    for name, w, scale, br in branches:
        for p in _P_VALUES:
            outer = OuterParams(n=1, a=((p, 1.0, 1.0),))
            for m, lbm in zip(range(1, mg.beta_M + 1), base):
                spec = FoxHBivariateSpec(outer, _INNER1, _inner2(mg, pt, fog, m, br, mode))
                out.append(_Term(float(lbm + p_log[p] + w), spec, x1, C * scale,
                                 f"{name}/p={p}/m={m}"))
    return out


def _eval_terms(terms, u, cfg):
    total = np.zeros_like(u)
    parts = []
    for term in terms:
        v = np.exp(term.log_pref) * np.atleast_1d(fox_h_bivariate(term.spec, term.x1, term.scale * u, cfg))
        parts.append(v)
        total += v
    return total, parts


def h3_pdf(channel, x, cfg=DEFAULT_CONFIG):
    """Density of h_at h_p h_f h_ws: two bivariate Meijer-G families at (4 alpha^4, C/x)."""
    x = np.atleast_1d(_positive_array(x, "h3_pdf"))
    total, _ = _eval_terms(_terms(channel, "pdf", False), 1.0 / x, cfg)
    total /= x
    return total if total.size > 1 else float(total[0])


def h3_cdf(channel, x, cfg=DEFAULT_CONFIG):
    x = np.atleast_1d(_positive_array(x, "h3_cdf"))
    total, _ = _eval_terms(_terms(channel, "cdf", False), 1.0 / x, cfg)
    return total if total.size > 1 else float(total[0])


def h_pdf(channel, x, cfg=DEFAULT_CONFIG):
    """Density of the full product h."""
    x = np.atleast_1d(_positive_array(x, "h_pdf"))
    total, _ = _eval_terms(_terms(channel, "pdf", True), 1.0 / x, cfg)
    total /= x
    return total if total.size > 1 else float(total[0])


# ---------------------------------------------------------------------------
# SNR statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SnrScenario:
    """Channel, link budget and threshold.

    A non-integer fog shape is rounded to the nearest positive integer when
    ``round_k`` is set (the analytic parameter lists need integer length);
    the original value is kept in ``k_real``.
    """

    channel: ChannelParams
    link: LinkBudget
    gamma_th: float
    mb: MellinBarnesConfig = DEFAULT_CONFIG
    round_k: bool = True
    k_real: float = field(default=None)

    def __post_init__(self):
        if not (np.isfinite(self.gamma_th) and self.gamma_th > 0):
            raise ConfigurationError("gamma_th must be positive")
        if not gamma0(self.link) > 0:
            raise ConfigurationError("gamma_0 must be positive")
        if self.k_real is None:
            object.__setattr__(self, "k_real", float(self.channel.fog.k))
        if self.round_k and float(self.channel.fog.k) != round(float(self.channel.fog.k)):
            object.__setattr__(self, "channel", self.channel.with_integer_k())

    @property
    def gamma0(self):
        return gamma0(self.link)

    def with_gamma0(self, g0):
        """Same scenario with the transmit power set so that gamma_0 = g0."""
        lb = self.link
        ref = gamma0(lb.with_power(0.0))
        return replace(self, link=lb.with_power(10.0 * np.log10(g0 / ref) / 2.0))


@dataclass
class OutageResult:
    p_exact: float
    p_asymptotic: float
    diversity: float
    diagnostics: dict = field(default_factory=dict)


def snr_pdf(scn, gamma):
    """SNR density f_gamma = f_h(sqrt(gamma/gamma_0)) / (2 sqrt(gamma gamma_0)).

    Four term families (two Meijer-G with weight omega, two Fox-H with weight
    (1 - omega)/Gamma(a)), each summed over m; the second argument is
    proportional to sqrt(gamma_0/gamma).
    """
    g = np.atleast_1d(_positive_array(gamma, "snr_pdf"))
    u = np.sqrt(scn.gamma0 / g)
    total, _ = _eval_terms(_terms(scn.channel, "pdf", True), u, scn.mb)
    total /= 2.0 * g
    if np.any(total < -1e-8):
        raise NumericalFailure(f"negative SNR density {total.min():.3e}")
    total = np.maximum(total, 0.0)
    return total if total.size > 1 else float(total[0])


_MOMENT_ORDERS = np.linspace(0.5, 80.0, 160)


def _ccdf_bound(channel, u):
    """log of min_n E[h^n] u^n, a Markov bound on P(h >= 1/u)."""
    lm = composite_log_moment(channel, _MOMENT_ORDERS)
    return np.min(lm[None, :] + np.log(u)[:, None] * _MOMENT_ORDERS[None, :], axis=1)


def _outage_raw(channel, u, cfg):
    """Raw P(h < 1/u) for an array of second-argument multipliers u.

    Where the moment bound already puts P(h >= 1/u) below double precision
    the result is 1 without contour evaluation; the tail integrals there
    would cost more than they can change.
    """
    sure = _ccdf_bound(channel, u) < np.log(1e-17)
    if sure.all():
        return np.ones_like(u), []
    if sure.any():
        raw, parts = _outage_raw(channel, u[~sure], cfg)
        out = np.ones_like(u)
        out[~sure] = raw
        return out, parts
    direct, parts = _eval_terms(_terms(channel, "cdf", True), u, cfg)
    high = direct > 0.5
    if np.any(high):
        comp, _ = _eval_terms(_terms(channel, "ccdf", True), u[high], cfg)
        direct = direct.copy()
        direct[high] = 1.0 - comp
    return direct, parts


def _check_window(p):
    bad = (p < -1e-6) | (p > 1.0 + 1e-6) | ~np.isfinite(p)
    if np.any(bad):
        raise NumericalFailure(f"outage value {p[bad][0]!r} outside the sanity window")
    return np.clip(p, 0.0, 1.0)


def outage_exact(scn, gamma_th=None, gamma0_values=None):
    """P[gamma < gamma_th] in bivariate Meijer-G / Fox-H form.

    ``gamma_th`` (scalar or array) overrides the scenario threshold;
    ``gamma0_values`` (array) evaluates a sweep over gamma_0 at fixed
    threshold.  At most one of the two may be an array.
    """
    gth = np.atleast_1d(np.asarray(scn.gamma_th if gamma_th is None else gamma_th, dtype=float))
    g0 = np.atleast_1d(np.asarray(scn.gamma0 if gamma0_values is None else gamma0_values, dtype=float))
    if np.any(~(gth > 0)) or np.any(~(g0 > 0)):
        raise DomainError("thresholds and gamma_0 must be positive")
    u = np.sqrt(g0 / gth)
    raw, _ = _outage_raw(scn.channel, np.atleast_1d(u), scn.mb)
    return _ret(_check_window(raw)) if raw.size > 1 else float(_check_window(raw)[0])


def _family_poles(channel, term):
    """Leading pole of each Gamma family of the inner2 kernel (the 4 + k poles)."""
    fog, pt, mg = channel.fog, channel.pointing, channel.malaga
    m = float(term.label.split("m=")[1])
    branch = term.label.split("/")[0]
    lead = [-pt.rho ** 2, -mg.alpha_M, -m] + [-fog.z] * _fog_k(fog)
    lead.append(-1.0 if branch == "exp" else -channel.egg.a * channel.egg.c)
    return lead


def _asymptotic_terms(scn, u, n_circle=64):
    """Residue contributions per term at the clusters holding the family-leading poles."""
    rows = []
    for term in _terms(scn.channel, "cdf", True):
        lead = _family_poles(scn.channel, term)
        parts = fox_h_bivariate_residues(term.spec, term.x1, term.scale * u, scn.mb,
                                         n_circle=n_circle, select=lead, per_cluster=True)
        clusters = [cl for cl in left_pole_clusters(term.spec, depth=2.0 - min(lead))
                    if any(abs(p - q) < 1e-9 for p, _ in cl for q in lead)]
        rows.append((term, [(cl[0][0], np.exp(term.log_pref) * np.atleast_1d(v))
                            for cl, v in zip(clusters, parts)]))
    return rows


def outage_asymptotic(scn, gamma0_values=None, full_output=False):
    """High-SNR outage: residues of every term at the leading pole of each Gamma family.

    Poles that coincide (e.g. Gamma(1+t) Gamma(m+t) at t = -1) are treated
    exactly by contour residues, which produces the logarithmic corrections
    of higher-order poles.  ``full_output`` adds the dominance ratio of the
    leading exponent to the total.
    """
    g0 = np.atleast_1d(np.asarray(scn.gamma0 if gamma0_values is None else gamma0_values, dtype=float))
    u = np.sqrt(g0 / scn.gamma_th)
    rows = _asymptotic_terms(scn, u)
    total = np.zeros_like(u)
    by_pole = {}
    for _, contribs in rows:
        for pole, v in contribs:
            total += v
            key = round(pole, 9)
            by_pole[key] = by_pole.get(key, 0.0) + v
    lead = max(by_pole)
    ratio = by_pole[lead] / total
    res = _ret(total) if total.size > 1 else float(total[0])
    if full_output:
        return res, {"leading_pole": lead, "dominance_ratio": ratio,
                     "per_pole": {k: _ret(v) for k, v in sorted(by_pole.items(), reverse=True)}}
    return res


def diversity_order(channel):
    """min{1/2, alpha_M/2, beta_M/2, z/2, a c/2, rho^2/2}: minus the high-SNR log-log outage slope."""
    mg, fog, egg, pt = channel.malaga, channel.fog, channel.egg, channel.pointing
    return float(min(0.5, mg.alpha_M / 2.0, mg.beta_M / 2.0, fog.z / 2.0,
                     egg.a * egg.c / 2.0, pt.rho ** 2 / 2.0))


def outage(scn, full_output=False):
    """Exact and asymptotic outage with the diversity order."""
    p, info = outage_asymptotic(scn, full_output=True)
    res = OutageResult(outage_exact(scn), float(p), diversity_order(scn.channel), info)
    if not full_output:
        res.diagnostics = {"dominance_ratio": info["dominance_ratio"]}
    return res


# ---------------------------------------------------------------------------
# checks by quadrature in log gamma
# ---------------------------------------------------------------------------

def snr_pdf_integral(scn, upper, lower_decades=14.0, panels=48, order=16):
    """Integral of snr_pdf from 0 to ``upper`` by Gauss-Legendre in u = log gamma.

    The density has a power-law left tail, so the range starts
    ``lower_decades`` below the smaller of gamma_0 and ``upper``; the mass
    below that point is added from the local power law.  ``upper`` may be
    an array: every limit becomes a panel edge and one density evaluation
    serves all of them.
    """
    ups = np.atleast_1d(np.asarray(upper, dtype=float))
    logs = np.log(ups)
    hi = logs.max()
    lo = min(logs.min(), np.log(scn.gamma0)) - lower_decades * np.log(10.0)
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.unique(np.concatenate([np.linspace(lo, hi, panels + 1), logs]))
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    uu = (mids[:, None] + half[:, None] * t).ravel()
    ww = (half[:, None] * w).ravel()
    g = np.exp(uu)
    f = np.atleast_1d(snr_pdf(scn, g))
    gf = f[:order] * g[:order]
    slope = np.polyfit(uu[:order], np.log(gf), 1)[0]
    tail = float(gf[0] / slope) if slope > 0 else 0.0
    cum = np.concatenate([[tail], tail + np.cumsum((ww * f * g).reshape(-1, order).sum(axis=1))])
    out = cum[np.searchsorted(edges, logs)]
    return out if np.ndim(upper) else float(out[0])
