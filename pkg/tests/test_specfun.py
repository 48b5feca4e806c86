import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from a2uw.errors import AccuracyWarning, ConfigurationError, DomainError
from a2uw.specfun import (
    FoxHBivariateSpec, InnerParams, MeijerGSpec, MellinBarnesConfig, OuterParams, bessel_k,
    fox_h_bivariate, fox_h_bivariate_residues, log_gamma_complex, loggamma, meijer_g,
    meijer_g_bivariate,
)
from a2uw.specfun.corpus import identity_corpus


# -- log gamma ---------------------------------------------------------------

def test_loggamma_trivial_values():
    assert abs(log_gamma_complex(1.0)) < 1e-14
    assert log_gamma_complex(0.5).real == pytest.approx(0.5723649429247001, abs=1e-13)


@pytest.mark.parametrize("z", [1 + 2j, -2.5 + 0.3j, 0.1 - 7j, 30 + 40j, -11.7 + 1e-3j])
def test_loggamma_matches_mpmath(z):
    ref = complex(mpmath.loggamma(mpmath.mpc(z.real, z.imag)))
    got = complex(log_gamma_complex(z))
    assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))


def test_engine_loggamma_agrees_with_lanczos():
    z = np.array([0.3 + 4j, -6.2 - 2j, 12 + 0.5j, 2.2 - 30j])
    assert np.max(np.abs(loggamma(z) - special.loggamma(z))) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0.5, 10.0), st.floats(-50.0, 50.0))
def test_loggamma_recurrence(re, im):
    z = complex(re, im)
    lhs = complex(log_gamma_complex(z + 1))
    rhs = complex(log_gamma_complex(z)) + np.log(z)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@pytest.mark.parametrize("z", [0.0, -1.0, -7.0])
def test_loggamma_poles_raise(z):
    with pytest.raises(DomainError):
        log_gamma_complex(z)


# -- Bessel K ----------------------------------------------------------------

def test_bessel_half_integer_closed_form():
    assert bessel_k(0.5, 1.0) == pytest.approx(np.sqrt(np.pi / 2) * np.exp(-1.0), rel=1e-14)
    assert bessel_k(0.5, 1.0) == pytest.approx(0.4610685, abs=1e-7)


@pytest.mark.parametrize("nu", [0.3, 1.7, 4.0])
def test_bessel_order_symmetry(nu):
    x = np.array([0.05, 1.0, 9.0])
    assert np.array_equal(bessel_k(-nu, x), bessel_k(nu, x))


def test_bessel_integral_representation():
    ref, _ = integrate.quad(lambda t: np.exp(-np.cosh(t)), 0, 40.0, epsabs=1e-14, epsrel=1e-13)
    assert bessel_k(0.0, 1.0) == pytest.approx(ref, rel=1e-11)


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_k(1.0, 0.0)


# -- Meijer-G ----------------------------------------------------------------

def test_identity_corpus():
    cases = identity_corpus()
    assert len(cases) >= 40
    worst = max(cases, key=lambda c: c.rel_err)
    assert worst.rel_err <= 1e-8, worst.name


def test_meijer_exponential_and_bessel():
    assert meijer_g(MeijerGSpec(1, 0, (), (0.0,)), 2.0) == pytest.approx(0.1353352832366127, rel=1e-10)
    g = meijer_g(MeijerGSpec(2, 0, (), (0.35, -0.35)), 1.0)
    assert g == pytest.approx(2.0 * special.kv(0.7, 2.0), rel=1e-10)


@pytest.mark.parametrize("x", [1e-3, 0.08, 2.5])
def test_meijer_pointing_kernel_matches_mpmath(x):
    # G^{3,0}_{1,3}(x | rho^2+1; rho^2, alpha, m): the first-stage product kernel
    rho2, alpha, m = 25.0, 8.0, 3.0
    spec = MeijerGSpec(3, 0, (rho2 + 1,), (rho2, alpha, m))
    ref = float(mpmath.meijerg([[], [rho2 + 1]], [[rho2, alpha, m], []], x))
    assert meijer_g(spec, x) == pytest.approx(ref, rel=1e-9)


def test_meijer_vectorised_matches_scalar():
    spec = MeijerGSpec(1, 1, (1.0,), (2.32, 0.0))
    x = np.array([0.2, 1.0, 4.0])
    vec = meijer_g(spec, x)
    assert np.allclose(vec, [meijer_g(spec, v) for v in x], rtol=1e-12, atol=0)


def test_meijer_order_validation():
    with pytest.raises(ConfigurationError):
        MeijerGSpec(2, 0, (), (1.0,))


def test_meijer_domain():
    with pytest.raises(DomainError):
        meijer_g(MeijerGSpec(1, 0, (), (0.0,)), -1.0)


# -- bivariate ---------------------------------------------------------------

# outer Gamma(1/2 + s + t), inner1 Gamma(-s), inner2 Gamma(0.3 - t) Gamma(1.2 - t)
COUPLED = FoxHBivariateSpec(
    OuterParams(n=1, a=((0.5, 1.0, 1.0),)),
    InnerParams(m=1, n=0, d=((0.0, 1.0),)),
    InnerParams(m=2, n=0, d=((0.3, 1.0), (1.2, 1.0))),
)


def _brute_force(x1, x2, c1=-0.2, c2=0.1, half=36.0, step=0.04):
    # independent dense trapezoid over both straight contours
    u = np.arange(-half, half + step / 2, step)
    s = c1 + 1j * u[:, None]
    t = c2 + 1j * u[None, :]
    logk = (special.loggamma(0.5 + s + t) + special.loggamma(-s)
            + special.loggamma(0.3 - t) + special.loggamma(1.2 - t))
    f = np.exp(logk + s * np.log(x1) + t * np.log(x2))
    return float(np.real(f.sum()) * step * step / (2 * np.pi) ** 2)


@pytest.mark.parametrize("x1,x2", [(0.5, 0.7), (2.0, 0.2), (0.1, 3.0)])
def test_bivariate_meijer_matches_brute_force(x1, x2):
    ref = _brute_force(x1, x2)
    assert meijer_g_bivariate(COUPLED, x1, x2) == pytest.approx(ref, rel=1e-8)


def test_separable_reduces_to_product():
    k1 = InnerParams(m=1, n=1, c=((1.0, 1.0),), d=((2.32, 1.0), (0.0, 1.0)))
    k2 = InnerParams(m=2, n=0, d=((0.35, 1.0), (-0.35, 1.0)))
    spec = FoxHBivariateSpec(OuterParams(n=0), k1, k2)
    prod = meijer_g(MeijerGSpec(1, 1, (1.0,), (2.32, 0.0)), 1.7) * meijer_g(MeijerGSpec(2, 0, (), (0.35, -0.35)), 0.4)
    assert fox_h_bivariate(spec, 1.7, 0.4) == pytest.approx(prod, rel=1e-8)


def test_fox_non_unit_exponent_reduction():
    spec = FoxHBivariateSpec(OuterParams(n=0), InnerParams(m=1, n=0, d=((0.0, 1.0),)),
                             InnerParams(m=1, n=0, d=((0.0, 0.5),)))
    assert fox_h_bivariate(spec, 0.7, 1.3) == pytest.approx(np.exp(-0.7) * 2 * np.exp(-1.69), rel=1e-8)


def test_meijer_bivariate_rejects_fox_exponent():
    spec = FoxHBivariateSpec(OuterParams(n=0), InnerParams(m=1, n=0, d=((0.0, 1.0),)),
                             InnerParams(m=1, n=0, d=((0.0, 0.5),)))
    with pytest.raises(ValueError):
        meijer_g_bivariate(spec, 1.0, 1.0)


def test_inseparable_pole_families():
    # Gamma(-t) and Gamma(t) leave no gap for a t-line between the families
    spec = FoxHBivariateSpec(OuterParams(n=0), InnerParams(m=1, n=0, d=((0.0, 1.0),)),
                             InnerParams(m=1, n=1, c=((1.0, 1.0),), d=((0.0, 1.0),)))
    with pytest.raises(ConfigurationError):
        fox_h_bivariate(spec, 1.0, 1.0)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        MellinBarnesConfig(nodes_per_unit=4)
    with pytest.raises(ConfigurationError):
        MellinBarnesConfig(epsilon_shift=0.1)
    with pytest.raises(ConfigurationError):
        MellinBarnesConfig(half_length=0.0)


@settings(max_examples=8, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_node_doubling_invariance(l1, l2):
    x1, x2 = 10.0 ** l1, 10.0 ** l2
    a = fox_h_bivariate(COUPLED, x1, x2)
    b = fox_h_bivariate(COUPLED, x1, x2, MellinBarnesConfig(nodes_per_unit=32))
    assert abs(a - b) <= 1e-8 * abs(b)


@pytest.mark.parametrize("x2", [1e-3, 0.3, 40.0])
def test_imaginary_residual_small(x2):
    with warnings.catch_warnings():
        warnings.simplefilter("error", AccuracyWarning)
        _, infos = fox_h_bivariate(COUPLED, 0.8, x2, full_output=True)
    assert all(i.imag_residual <= 1e-6 for i in infos)


def test_residues_match_line_integral_at_large_argument():
    # inner1 Gamma(s), inner2 Gamma(t) Gamma(0.6 + t): only left families, so the residue
    # series converges and a handful of clusters reproduces the line integral
    spec = FoxHBivariateSpec(
        OuterParams(n=1, a=((0.5, 1.0, 1.0),)),
        InnerParams(m=0, n=1, c=((1.0, 1.0),)),
        InnerParams(m=0, n=2, c=((1.0, 1.0), (0.4, 1.0))),
    )
    x2 = 400.0
    exact = fox_h_bivariate(spec, 0.5, x2)
    approx = fox_h_bivariate_residues(spec, 0.5, x2, n_clusters=8)
    assert approx == pytest.approx(exact, rel=1e-8)


def test_residues_reject_right_family_in_first_variable():
    with pytest.raises(ConfigurationError):
        fox_h_bivariate_residues(COUPLED, 1.0, 100.0)
