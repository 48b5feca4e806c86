import numpy as np
import pytest

from a2uw import presets
from a2uw.analytic import SnrScenario


@pytest.fixture(scope="session")
def fig2b():
    return presets.fig2b_channel()


@pytest.fixture(scope="session")
def link50():
    return presets.link_budget(d_water_m=50.0)


@pytest.fixture(scope="session")
def scn(fig2b, link50):
    return SnrScenario(fig2b, link50, gamma_th=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def ks_critical_1pct(n):
    # asymptotic Kolmogorov critical value at the 1% level
    return 1.6276 / np.sqrt(n)


def chi2_gof(samples, pdf, lo, hi, n_bins=40, order=4):
    """Pearson chi-square p-value of ``samples`` against a density on log bins.

    Bin probabilities integrate ``pdf`` by Gauss-Legendre in log x; the mass
    outside [lo, hi] forms one lumped bin.
    """
    from scipy import stats

    edges = np.geomspace(lo, hi, n_bins + 1)
    t, w = np.polynomial.legendre.leggauss(order)
    le = np.log(edges)
    half = 0.5 * np.diff(le)
    mid = 0.5 * (le[1:] + le[:-1])
    x = np.exp(mid[:, None] + half[:, None] * t)
    f = np.asarray(pdf(x.ravel())).reshape(x.shape)
    p = (half[:, None] * w * f * x).sum(axis=1)
    n = samples.size
    obs = np.histogram(samples, edges)[0].astype(float)
    obs = np.append(obs, n - obs.sum())
    exp_ = n * np.append(p, max(1.0 - p.sum(), 0.0))
    keep = exp_ > 0
    stat = np.sum((obs[keep] - exp_[keep]) ** 2 / exp_[keep])
    return float(stats.chi2.sf(stat, keep.sum() - 1)), float(stat), exp_
