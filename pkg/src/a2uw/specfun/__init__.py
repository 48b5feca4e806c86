"""Special functions: complex log-gamma, Bessel K, Meijer-G and bivariate Fox-H."""

from .bessel import bessel_k, log_bessel_k
from .gamma import log_gamma_complex, loggamma
from .mellin import (
    DEFAULT_CONFIG,
    FoxHBivariateSpec,
    InnerParams,
    MeijerGSpec,
    MellinBarnesConfig,
    OuterParams,
    QuadratureInfo,
    fox_h_bivariate,
    fox_h_bivariate_residues,
    left_pole_clusters,
    meijer_g,
    meijer_g_bivariate,
)

__all__ = [
    "DEFAULT_CONFIG", "FoxHBivariateSpec", "InnerParams", "MeijerGSpec", "MellinBarnesConfig",
    "OuterParams", "QuadratureInfo", "bessel_k", "fox_h_bivariate", "fox_h_bivariate_residues",
    "left_pole_clusters", "log_bessel_k", "log_gamma_complex", "loggamma", "meijer_g",
    "meijer_g_bivariate",
]
