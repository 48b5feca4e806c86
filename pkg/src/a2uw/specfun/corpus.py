"""Identity corpus: reductions of Meijer-G and bivariate Fox-H with closed forms."""

from dataclasses import dataclass

import numpy as np
from scipy import special

from .mellin import FoxHBivariateSpec, InnerParams, MeijerGSpec, OuterParams, fox_h_bivariate, meijer_g


@dataclass(frozen=True)
class IdentityCase:
    name: str
    value: float
    reference: float

    @property
    def rel_err(self):
        return abs(self.value - self.reference) / abs(self.reference)


def _exp_cases():
    for x in (0.1, 1.0, 2.0, 10.0, 50.0):
        yield IdentityCase(f"G10_01({x}|0) = exp(-x)", meijer_g(MeijerGSpec(1, 0, (), (0.0,)), x),
                           np.exp(-x))


def _bessel_cases():
    for nu in (0.0, 0.7, 2.5, 6.3):
        for x in (0.05, 1.0, 4.0, 25.0):
            spec = MeijerGSpec(2, 0, (), (nu / 2, -nu / 2))
            yield IdentityCase(f"G20_02({x}|{nu}/2,-{nu}/2) = 2K_nu(2 sqrt x)", meijer_g(spec, x),
                               2.0 * special.kv(nu, 2.0 * np.sqrt(x)))


def _gamma_cdf_cases():
    for a in (0.5, 1.0, 2.32, 7.0):
        for x in (0.1, 1.0, 3.0, 12.0):
            spec = MeijerGSpec(1, 1, (1.0,), (a, 0.0))
            yield IdentityCase(f"G11_12({x}|1;{a},0)/Gamma(a) = P(a,x)",
                               meijer_g(spec, x) / special.gamma(a), special.gammainc(a, x))


def _separable_cases():
    exp1 = InnerParams(m=1, n=0, d=((0.0, 1.0),))
    for nu, x1, x2 in ((0.7, 0.5, 2.0), (1.5, 3.0, 0.3), (0.0, 1.0, 10.0)):
        bes = InnerParams(m=2, n=0, d=((nu / 2, 1.0), (-nu / 2, 1.0)))
        spec = FoxHBivariateSpec(OuterParams(n=0), exp1, bes)
        yield IdentityCase(f"H[{x1},{x2}] = exp(-x1) 2K_{nu}(2 sqrt x2)", fox_h_bivariate(spec, x1, x2),
                           np.exp(-x1) * 2.0 * special.kv(nu, 2.0 * np.sqrt(x2)))
    # non-unit exponent: Gamma(-s/2) x^s integrates to 2 exp(-x^2)
    fox = InnerParams(m=1, n=0, d=((0.0, 0.5),))
    for x1, x2 in ((0.7, 1.3), (2.0, 0.4)):
        spec = FoxHBivariateSpec(OuterParams(n=0), exp1, fox)
        yield IdentityCase(f"H[{x1},{x2}] = exp(-x1) 2 exp(-x2^2)", fox_h_bivariate(spec, x1, x2),
                           np.exp(-x1) * 2.0 * np.exp(-x2 ** 2))


def identity_corpus():
    """Every identity case, evaluated with the default quadrature settings."""
    cases = []
    for gen in (_exp_cases, _bessel_cases, _gamma_cdf_cases, _separable_cases):
        cases.extend(gen())
    return cases
