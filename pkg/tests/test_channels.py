import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from a2uw import channels as ch, presets
from a2uw.analytic import bs_pdf_meijer_form
from a2uw.channels import _malaga_table
from a2uw.errors import ConfigurationError, DomainError

from conftest import ks_critical_1pct

N = 10 ** 6

MAL = presets.malaga("weak")
FOG = presets.fog("light", 0.02)
BS = presets.bs("bs-default")
EGG1 = presets.egg("egg1")
EGG2 = presets.egg("egg2")
PTR = presets.pointing("low")


def _quad_log(f, lo, hi):
    # integral of f(x) dx over [lo, hi] done in log x, where these densities are smooth
    val, _ = integrate.quad(lambda u: f(np.exp(u)) * np.exp(u), np.log(lo), np.log(hi),
                            limit=400, epsabs=1e-13, epsrel=1e-12)
    return val


# -- normalisation -------------------------------------------------------------

@pytest.mark.parametrize("name", ["weak", "moderate", "strong"])
def test_malaga_normalised(name):
    p = presets.malaga(name)
    assert _quad_log(lambda x: ch.malaga_pdf(p, x), 1e-14, 200.0) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("fog", [presets.fog("light", 0.02), presets.fog("moderate", 1.0),
                                 ch.FogParams(1.0, 13.12, 0.5)])
def test_fog_normalised(fog):
    val = _quad_log(lambda x: ch.fog_pdf(fog, x), 1e-300, 1.0)
    assert val == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("bs", [presets.bs(n) for n in presets.BS])
def test_bs_normalised(bs):
    assert _quad_log(lambda x: ch.bs_pdf(bs, x), 1e-6, 1e3) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("egg", [EGG1, EGG2])
def test_egg_normalised(egg):
    # the GG component is sharply peaked near b; split the range there
    f = lambda x: ch.egg_pdf(egg, x)
    val = _quad_log(f, 1e-12, egg.b * 0.9) + _quad_log(f, egg.b * 0.9, egg.b * 1.2) + _quad_log(f, egg.b * 1.2, 60.0)
    assert val == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("ptr", [PTR, presets.pointing("high")])
def test_pointing_normalised(ptr):
    val, _ = integrate.quad(lambda x: ch.pointing_pdf(ptr, x), 0, ptr.A0, epsrel=1e-12)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_pdfs_nonnegative():
    x = np.logspace(-8, 1.5, 400)
    for f, p in ((ch.malaga_pdf, MAL), (ch.bs_pdf, BS), (ch.egg_pdf, EGG1), (ch.egg_pdf, EGG2)):
        assert np.all(f(p, x) >= 0)
    xf = np.logspace(-12, 0, 200)
    assert np.all(ch.fog_pdf(FOG, xf) >= 0)
    assert np.all(ch.pointing_pdf(PTR, PTR.A0 * xf) >= 0)


# -- Malaga ----------------------------------------------------------------------

def test_malaga_pointwise_oracle():
    # independent evaluation of the finite-sum pdf at x = 1 with arbitrary precision
    mpmath.mp.dps = 30
    a, b, g, w = (mpmath.mpf(v) for v in (MAL.alpha_M, MAL.beta_M, MAL.g, MAL.omega_prime))
    A = 2 * a ** (a / 2) / (g ** (1 + a / 2) * mpmath.gamma(a)) * (g * b / (g * b + w)) ** (b + a / 2)
    total = 0
    for m in range(1, int(b) + 1):
        am = (mpmath.binomial(b - 1, m - 1) * (g * b + w) ** (1 - mpmath.mpf(m) / 2) / mpmath.factorial(m - 1)
              * (w / g) ** (m - 1) * (a / b) ** (mpmath.mpf(m) / 2))
        total += am * mpmath.besselk(a - m, 2 * mpmath.sqrt(a * b / (g * b + w)))
    assert ch.malaga_pdf(MAL, 1.0) == pytest.approx(float(A * total), rel=1e-12)


def test_malaga_mean_is_total_power():
    assert ch.malaga_moment(MAL, 1) == pytest.approx(MAL.g + MAL.omega_prime, rel=1e-12)
    m2 = _quad_log(lambda x: x * x * ch.malaga_pdf(MAL, x), 1e-14, 200.0)
    assert ch.malaga_moment(MAL, 2) == pytest.approx(m2, rel=1e-9)


def test_malaga_closed_cdf_against_quadrature():
    for x in (0.1, 1.0, 3.0):
        ref = _quad_log(lambda v: ch.malaga_pdf(MAL, v), 1e-14, x)
        assert ch.malaga_cdf(MAL, x) == pytest.approx(ref, rel=1e-8)


def test_malaga_table_matches_closed_cdf():
    x = np.logspace(-2.5, 0.8, 25)
    assert np.max(np.abs(ch.malaga_table_cdf(MAL, x) - ch.malaga_cdf(MAL, x))) < 1e-6


def test_malaga_table_monotone():
    tab = _malaga_table(MAL)
    assert np.all(np.diff(tab.logit_u) > 0) and np.all(np.diff(tab.log_x) > 0)


def test_malaga_rejects_fractional_beta():
    with pytest.raises(ConfigurationError):
        ch.MalagaParams(4.0, 2.5, 0.1, 1.0)


# -- fog -------------------------------------------------------------------------

def test_fog_z_light():
    assert FOG.z == pytest.approx(4.343 / (13.12 * 0.02), rel=1e-15)
    assert FOG.z == pytest.approx(16.551, abs=5e-4)


def test_fog_k1_is_power_law():
    p = ch.FogParams(1.0, 13.12, 0.02)
    x = np.linspace(0.01, 1.0, 50)
    assert np.allclose(ch.fog_pdf(p, x), p.z * x ** (p.z - 1.0), rtol=1e-13)


def test_integer_k_rounding():
    assert presets.fog("light", 0.02).k_int == 2
    assert presets.fog("moderate", 1.0).k_int == 5


# -- link budget -------------------------------------------------------------------

def test_water_gain():
    lb = presets.link_budget(d_water_m=50.0)
    assert lb.H_w == pytest.approx(np.exp(-0.2508), rel=2e-4)
    assert lb.H_w == pytest.approx(0.7782, abs=1e-4)


def test_zero_water_path():
    lb = presets.link_budget(d_water_m=0.0, Ps_dBm=10.0)
    assert lb.H_w == 1.0
    assert ch.gamma0(lb) == pytest.approx(2 * lb.Ps_W ** 2 * lb.R ** 2 / lb.sigma_n2, rel=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.floats(-30.0, 40.0), st.floats(0.0, 200.0))
def test_gamma0_square_law(ps, d):
    lb = presets.link_budget(d_water_m=d, Ps_dBm=ps)
    doubled = lb.with_power(ps + 10 * np.log10(2.0))
    assert ch.gamma0(doubled) == pytest.approx(4.0 * ch.gamma0(lb), rel=1e-12)


def test_negative_water_distance_rejected():
    with pytest.raises(ConfigurationError):
        presets.link_budget(d_water_m=-1.0)


# -- BS Meijer form --------------------------------------------------------------

@pytest.mark.parametrize("name", ["bs-0.3-1", "bs-0.7-1.5"])
def test_bs_meijer_form(name):
    p = presets.bs(name)
    x = np.logspace(-2, 1, 40)
    direct = ch.bs_pdf(p, x)
    mg = bs_pdf_meijer_form(p, x)
    keep = direct > 1e-300
    assert np.max(np.abs(mg[keep] - direct[keep]) / direct[keep]) <= 1e-8


# -- samplers ----------------------------------------------------------------------

def _ks(sample, cdf):
    return stats.kstest(sample, cdf).statistic


SAMPLERS = {
    "malaga": (lambda r: ch.malaga_sample(MAL, r, N), lambda x: ch.malaga_table_cdf(MAL, x)),
    "fog": (lambda r: ch.fog_sample(FOG, r, N), lambda x: ch.fog_cdf(FOG, x)),
    "bs": (lambda r: ch.bs_sample(BS, r, N), lambda x: ch.bs_cdf(BS, x)),
    "egg1": (lambda r: ch.egg_sample(EGG1, r, N), lambda x: ch.egg_cdf(EGG1, x)),
    "egg2": (lambda r: ch.egg_sample(EGG2, r, N), lambda x: ch.egg_cdf(EGG2, x)),
    "pointing": (lambda r: ch.pointing_sample(PTR, r, N), lambda x: ch.pointing_cdf(PTR, x)),
}


@pytest.mark.parametrize("name", list(SAMPLERS))
def test_sampler_ks(name):
    draw, cdf = SAMPLERS[name]
    x = draw(np.random.default_rng(11))
    assert _ks(x, cdf) < ks_critical_1pct(N)


MEANS = {
    "malaga": (lambda r: ch.malaga_sample(MAL, r, N), MAL.g + MAL.omega_prime),
    "fog": (lambda r: ch.fog_sample(FOG, r, N), (FOG.z / (1 + FOG.z)) ** FOG.k),
    "bs": (lambda r: ch.bs_sample(BS, r, N), 1.045),
    "egg1": (lambda r: ch.egg_sample(EGG1, r, N),
             0.21 * 0.329 + 0.79 * 1.181 * special.gamma(1.429 + 1 / 17.198) / special.gamma(1.429)),
    "pointing": (lambda r: ch.pointing_sample(PTR, r, N), 0.0032 * 25 / 26),
}


@pytest.mark.parametrize("name", list(MEANS))
def test_sample_mean_within_3se(name):
    draw, mean = MEANS[name]
    x = draw(np.random.default_rng(12))
    se = x.std(ddof=1) / np.sqrt(N)
    assert abs(x.mean() - mean) < 3 * se


def test_pointing_mean_value():
    assert ch.pointing_mean(PTR) == pytest.approx(0.0030769, abs=1e-7)


def test_egg_exponential_limit():
    p = ch.EggParams(omega=1 - 1e-12, lam=0.5, a=1.0, b=1.0, c=1.0)
    assert ch.egg_mean(p) == pytest.approx(0.5, rel=1e-9)


def test_malaga_moments_within_one_percent():
    x = ch.malaga_sample(MAL, np.random.default_rng(13), N)
    assert x.mean() == pytest.approx(ch.malaga_moment(MAL, 1), rel=0.01)
    assert (x * x).mean() == pytest.approx(ch.malaga_moment(MAL, 2), rel=0.01)


def test_pointing_variance_grows_with_smaller_rho():
    r = np.random.default_rng(14)
    lo = ch.pointing_sample(presets.pointing("high"), r, N).var()
    hi = ch.pointing_sample(PTR, r, N).var()
    assert lo > hi


def test_supports():
    r = np.random.default_rng(15)
    f = ch.fog_sample(FOG, r, N)
    assert np.all((f > 0) & (f <= 1))
    p = ch.pointing_sample(PTR, r, N)
    assert np.all((p > 0) & (p <= PTR.A0))
    assert ch.pointing_cdf(PTR, PTR.A0) == 1.0


def test_support_domain_errors():
    with pytest.raises(DomainError):
        ch.fog_pdf(FOG, 1.5)
    with pytest.raises(DomainError):
        ch.pointing_pdf(PTR, 2 * PTR.A0)


# -- composite -------------------------------------------------------------------

def test_seeded_streams_identical(fig2b, link50):
    a = ch.composite_sample(fig2b, link50, 1000, 7)
    b = ch.composite_sample(fig2b, link50, 1000, 7)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert not np.array_equal(a[0], ch.composite_sample(fig2b, link50, 1000, 8)[0])


def test_block_streams_are_independent_of_other_blocks(fig2b, link50):
    # changing one block's parameters leaves every other block's draws unchanged
    other = presets.fig2b_channel(bs_name="bs-0.7-1.5")
    h1, _ = ch.composite_sample(fig2b, link50, 5000, 3)
    h2, _ = ch.composite_sample(other, link50, 5000, 3)
    bs1 = ch.bs_sample(fig2b.bs, ch.block_streams(3)["bs"], 5000)
    bs2 = ch.bs_sample(other.bs, ch.block_streams(3)["bs"], 5000)
    assert np.allclose(h1 / bs1, h2 / bs2, rtol=1e-13)


def test_composite_support_bound(fig2b, link50):
    h, g = ch.composite_sample(fig2b, link50, 200000, 4)
    s = ch.composite_sample(fig2b, link50, 200000, 4)
    assert np.all(h > 0) and np.all(g == s[1])
    # h_f <= 1 and h_p <= A0; the remaining factors are bounded by their own draws
    st_ = ch.block_streams(4)
    rest = (ch.malaga_sample(fig2b.malaga, st_["malaga"], 200000) * ch.bs_sample(fig2b.bs, st_["bs"], 200000)
            * ch.egg_sample(fig2b.egg, st_["egg"], 200000))
    assert np.all(h <= rest * fig2b.pointing.A0 * (1 + 1e-12))


def test_composite_mean(fig2b, link50):
    h, g = ch.composite_sample(fig2b, link50, N, 5)
    se = h.std(ddof=1) / np.sqrt(N)
    assert abs(h.mean() - ch.composite_mean(fig2b)) < 3 * se
    assert np.allclose(g, ch.gamma0(link50) * h * h, rtol=1e-14)


def test_composite_log_moment_first_order(fig2b):
    assert np.exp(ch.composite_log_moment(fig2b, 1.0)) == pytest.approx(ch.composite_mean(fig2b), rel=1e-10)
    assert ch.composite_log_moment(fig2b, 0.0) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n", [0.5, 2.0, 3.7])
def test_composite_log_moment_blocks(n):
    # only one block differs from a point mass at 1, so the composite moment is that block's moment
    one = ch.ChannelParams(presets.malaga("weak"), presets.fog("light", 1e-12), BS,
                           ch.EggParams(omega=1e-300, lam=1.0, a=1.0, b=1.0, c=1e6),
                           ch.PointingParams(rho=1e6, A0=1.0))
    direct = _quad_log(lambda x: x ** n * ch.bs_pdf(BS, x), 1e-6, 1e3)
    mal = ch.malaga_moment(one.malaga, n)
    assert np.exp(ch.composite_log_moment(one, n)) == pytest.approx(direct * mal, rel=1e-5)
