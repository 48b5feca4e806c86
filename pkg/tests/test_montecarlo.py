import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from a2uw import channels as ch, presets
from a2uw.analytic import outage_exact
from a2uw.errors import ConfigurationError, InsufficientSamplesWarning
from a2uw.montecarlo import (
    BinSpec, RelayConfig, SimConfig, default_workers, df_relay_outage, empirical_outage, empirical_pdf,
    product_sampler, relay_gamma0, sample_moments, wilson_interval,
)

SIM = SimConfig(n_samples=200_000, seed=5)


def test_zero_threshold_gives_zero(scn):
    e = empirical_outage(scn, SIM, gamma_th=0.0)
    assert e.p_hat == 0.0 and e.ci_low == 0.0


def test_zero_gamma0_gives_one(scn):
    for n in (10_000, 123_457):
        e = empirical_outage(scn, SimConfig(n_samples=n, seed=1), gamma0_values=[0.0])[0]
        assert e.p_hat == 1.0 and e.ci_high == 1.0


def test_bit_identical_rerun(scn):
    g0 = scn.gamma0 * np.logspace(-2, 1, 4)
    a = empirical_outage(scn, SIM, gamma0_values=g0)
    b = empirical_outage(scn, SIM, gamma0_values=g0)
    assert a == b
    other = empirical_outage(scn, SimConfig(n_samples=200_000, seed=6), gamma0_values=g0)
    assert a != other


def test_worker_partition_changes_only_the_sample(scn):
    one = empirical_outage(scn, SimConfig(n_samples=300_000, seed=9, n_workers=1))
    two = empirical_outage(scn, SimConfig(n_samples=300_000, seed=9, n_workers=2))
    assert one.p_hat != two.p_hat
    diff = abs(one.p_hat - two.p_hat)
    half = max(one.ci_high - one.ci_low, two.ci_high - two.ci_low)
    assert diff < half


def test_worker_run_is_deterministic(scn):
    sim = SimConfig(n_samples=100_000, seed=3, n_workers=2)
    assert empirical_outage(scn, sim) == empirical_outage(scn, sim)


def test_ci_coverage(scn):
    # analytic value with the same integer fog shape as the analytic model
    p = outage_exact(scn)
    hits = 0
    for seed in range(200):
        e = empirical_outage(scn, SimConfig(n_samples=10_000, seed=seed, confidence=0.95), use_real_k=False)
        hits += e.ci_low <= p <= e.ci_high
    assert hits >= 180


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10 ** 7), st.floats(0.0, 1.0), st.sampled_from([0.95, 0.99]))
def test_wilson_contains_estimate(n, frac, conf):
    k = int(round(frac * n))
    lo, hi = wilson_interval(np.array([k]), n, conf)
    assert 0.0 <= lo[0] <= k / n <= hi[0] <= 1.0
    lo95, hi95 = wilson_interval(np.array([k]), n, 0.95)
    lo99, hi99 = wilson_interval(np.array([k]), n, 0.99)
    assert lo99[0] <= lo95[0] + 1e-15 and hi95[0] <= hi99[0] + 1e-15


def test_sim_config_validation():
    with pytest.raises(ConfigurationError):
        SimConfig(confidence=0.9)
    with pytest.raises(ConfigurationError):
        SimConfig(n_workers=0)
    with pytest.raises(ConfigurationError):
        SimConfig(n_samples=-1)


def test_minimum_sample_size(scn):
    with pytest.raises(ConfigurationError):
        empirical_outage(scn, SimConfig(n_samples=9_999))


def test_insufficient_samples_warning(scn):
    with pytest.warns(InsufficientSamplesWarning):
        empirical_outage(scn, SimConfig(n_samples=10_000), gamma0_values=[scn.gamma0 * 1e30])
    with warnings.catch_warnings():
        warnings.simplefilter("error", InsufficientSamplesWarning)
        empirical_outage(scn, SimConfig(n_samples=10_000), gamma0_values=[scn.gamma0 * 1e30], p_expected=[1e-3])


# -- histograms ----------------------------------------------------------------------

def test_histogram_integrates_to_one(fig2b):
    h = empirical_pdf(product_sampler(fig2b, ("egg", "bs")), SIM, BinSpec(1e-3, 10.0, 60))
    assert np.sum(h.density * np.diff(h.edges)) == pytest.approx(1.0, abs=1e-9)
    lin = empirical_pdf(product_sampler(fig2b, ("egg",)), SIM, BinSpec(0.0, 4.0, 40, log=False))
    assert np.sum(lin.density * np.diff(lin.edges)) == pytest.approx(1.0, abs=1e-9)


def test_fig2a_peak_ordering(fig2b):
    spec = BinSpec(0.0, 4.0, 200, log=False)
    egg = empirical_pdf(product_sampler(fig2b, ("egg",)), SimConfig(n_samples=10 ** 6, seed=2), spec)
    prod = empirical_pdf(product_sampler(fig2b, ("bs", "egg")), SimConfig(n_samples=10 ** 6, seed=2), spec)
    assert prod.density.max() < egg.density.max()


def test_histogram_matches_block_pdf(fig2b):
    spec = BinSpec(0.5, 2.5, 30, log=False)
    h = empirical_pdf(product_sampler(fig2b, ("bs",)), SimConfig(n_samples=10 ** 6, seed=4), spec)
    expected = h.n_total * np.diff(ch.bs_cdf(fig2b.bs, h.edges))
    assert np.all(np.abs(h.counts - expected) < 4.5 * np.sqrt(expected))


def test_bad_edges():
    with pytest.raises(ConfigurationError):
        BinSpec(1.0, 0.5, 10)
    with pytest.raises(ConfigurationError):
        empirical_pdf(lambda s, n: np.ones(n), SIM, np.array([1.0, 1.0, 2.0]))


def test_product_mean(fig2b):
    mean, se = sample_moments(product_sampler(fig2b), SimConfig(n_samples=10 ** 6, seed=8))
    assert abs(mean - ch.composite_mean(fig2b)) < 3 * se


def test_unknown_block(fig2b):
    with pytest.raises(ConfigurationError):
        product_sampler(fig2b, ("malaga", "rain"))


# -- relay ----------------------------------------------------------------------------

def test_relay_perfect_hops(scn):
    with pytest.warns(InsufficientSamplesWarning):
        e = df_relay_outage(scn, SIM, gamma0_values=[scn.gamma0 * 1e40])[0]
    assert e.p_hat == 0.0


def test_relay_dead_water_hop(fig2b):
    from a2uw.analytic import SnrScenario
    s = SnrScenario(fig2b, presets.link_budget(d_water_m=2e4, Ps_dBm=60.0), gamma_th=1.0)
    ga, gw = relay_gamma0(s.link)
    assert ga > 1e12 and gw < 1e-50
    assert df_relay_outage(s, SIM).p_hat == 1.0


def test_relay_is_series_of_hops(scn):
    # 1 - (1 - P1)(1 - P2) with each hop estimated from the same draws
    sim = SimConfig(n_samples=400_000, seed=12)
    relay = RelayConfig()
    ga, gw = relay_gamma0(scn.link, relay)
    s = ch.block_streams(sim.seed, 0)
    c = ch.ChannelParams(scn.channel.malaga, ch.FogParams(scn.k_real, scn.channel.fog.beta_f, scn.channel.fog.d_air_km),
                         scn.channel.bs, scn.channel.egg, scn.channel.pointing)
    n = sim.n_samples
    h1 = ch.malaga_sample(c.malaga, s["malaga"], n) * ch.fog_sample(c.fog, s["fog"], n) * ch.pointing_sample(c.pointing, s["pointing"], n)
    h2 = ch.egg_sample(c.egg, s["egg"], n)
    p1 = np.mean(ga * h1 ** 2 < scn.gamma_th)
    p2 = np.mean(gw * h2 ** 2 < scn.gamma_th)
    both = np.mean((ga * h1 ** 2 < scn.gamma_th) | (gw * h2 ** 2 < scn.gamma_th))
    assert df_relay_outage(scn, sim, relay).p_hat == pytest.approx(both, abs=1e-15)
    assert both == pytest.approx(1 - (1 - p1) * (1 - p2), abs=4e-3)


def test_relay_split_validation():
    with pytest.raises(ConfigurationError):
        RelayConfig(split=1.0)


def test_env_var_workers(monkeypatch):
    monkeypatch.delenv("A2UW_WORKERS", raising=False)
    assert default_workers() == 1
    monkeypatch.setenv("A2UW_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("A2UW_WORKERS", "zero")
    with pytest.raises(ConfigurationError):
        default_workers()
