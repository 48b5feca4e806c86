"""Seeded Monte Carlo oracle: empirical outage, histograms and the DF relay baseline.

Worker ``w`` owns the per-block substreams ``SeedSequence(seed, spawn_key=(w, block))``
and simulates a fixed share of the samples in fixed-size batches, so the
result depends only on ``(seed, n_workers, n_samples)``.  Counts are reduced
in worker order.
"""

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from . import channels as ch
from .errors import ConfigurationError, InsufficientSamplesWarning

BATCH = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    n_samples: int = 1_000_000
    seed: int = 0
    n_workers: int = 1
    confidence: float = 0.99

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ConfigurationError("n_samples must be a positive integer")
        if not 0 <= int(self.seed) < 2 ** 64 or int(self.seed) != self.seed:
            raise ConfigurationError("seed must be a 64-bit nonnegative integer")
        if int(self.n_workers) != self.n_workers or self.n_workers < 1:
            raise ConfigurationError("n_workers must be a positive integer")
        if self.confidence not in (0.95, 0.99):
            raise ConfigurationError("confidence must be 0.95 or 0.99")
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "n_workers", int(self.n_workers))


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    n_samples: int
    seed: int


def wilson_interval(k, n, confidence):
    """Wilson score interval for k successes out of n."""
    z = stats.norm.ppf(0.5 + 0.5 * confidence)
    p = k / n
    den = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    lo = np.where(k == 0, 0.0, np.maximum(0.0, centre - half))
    hi = np.where(k == n, 1.0, np.minimum(1.0, centre + half))
    return np.minimum(lo, p), np.maximum(hi, p)


def _shares(n, w):
    base, extra = divmod(n, w)
    return [base + (i < extra) for i in range(w)]


def _worker_counts(task):
    draw, thresholds, seed, worker, share = task
    streams = ch.block_streams(seed, worker)
    counts = np.zeros(len(thresholds), dtype=np.int64)
    left = share
    while left > 0:
        size = min(BATCH, left)
        v = np.sort(draw(streams, size))
        counts += np.searchsorted(v, thresholds, side="left")
        left -= size
    return counts


def _count_below(draw, thresholds, sim):
    """Number of draws strictly below each threshold, pooled over workers."""
    thresholds = np.asarray(thresholds, dtype=float)
    tasks = [(draw, thresholds, sim.seed, w, s)
             for w, s in enumerate(_shares(sim.n_samples, sim.n_workers))]
    if sim.n_workers == 1:
        results = [_worker_counts(tasks[0])]
    else:
        with ProcessPoolExecutor(max_workers=sim.n_workers) as pool:
            results = list(pool.map(_worker_counts, tasks))
    return np.sum(results, axis=0)


def _estimates(counts, sim, p_expected=None, trivial=None):
    n = sim.n_samples
    lo, hi = wilson_interval(counts, n, sim.confidence)
    out = []
    for i, k in enumerate(counts):
        if k == 0 and not (trivial is not None and trivial[i]):
            pe = None if p_expected is None else np.atleast_1d(p_expected)[i]
            if pe is None or 10 * n < 1.0 / pe:
                warnings.warn(f"no outage events in {n} samples; p_hat = 0 is not informative",
                              InsufficientSamplesWarning, stacklevel=3)
        out.append(OutageEstimate(float(k / n), float(lo[i]), float(hi[i]), n, sim.seed))
    return out


# ---------------------------------------------------------------------------
# samplers of normalised SNR gamma / gamma_0 = h^2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _SquaredProduct:
    """Picklable sampler of the squared product of selected blocks."""

    channel: ch.ChannelParams
    blocks: tuple

    def __call__(self, streams, size):
        fns = {"malaga": (ch.malaga_sample, self.channel.malaga),
               "fog": (ch.fog_sample, self.channel.fog),
               "bs": (ch.bs_sample, self.channel.bs),
               "egg": (ch.egg_sample, self.channel.egg),
               "pointing": (ch.pointing_sample, self.channel.pointing)}
        h = np.ones(size)
        for b in self.blocks:
            f, p = fns[b]
            h *= f(p, streams[b], size)
        return h * h


@dataclass(frozen=True)
class _Product:
    channel: ch.ChannelParams
    blocks: tuple

    def __call__(self, streams, size):
        return np.sqrt(_SquaredProduct(self.channel, self.blocks)(streams, size))


def product_sampler(channel, blocks=ch.BLOCKS):
    """Sampler ``(streams, size) -> product of the named blocks``; picklable for workers."""
    unknown = set(blocks) - set(ch.BLOCKS)
    if unknown:
        raise ConfigurationError(f"unknown blocks {sorted(unknown)}")
    return _Product(channel, tuple(blocks))


def _mc_channel(scn, use_real_k):
    if use_real_k and scn.k_real != scn.channel.fog.k:
        return replace(scn.channel, fog=replace(scn.channel.fog, k=scn.k_real))
    return scn.channel


def empirical_outage(scn, sim, gamma_th=None, gamma0_values=None, use_real_k=True, p_expected=None):
    """Fraction of SNR draws below threshold with a Wilson interval.

    ``gamma0_values`` returns one estimate per value from a single set of
    draws (the events ``h^2 < gamma_th / gamma_0`` are nested).  The fog
    shape is the scenario's unrounded ``k`` unless ``use_real_k`` is off.
    """
    if sim.n_samples < 10_000:
        raise ConfigurationError("outage estimates need n_samples >= 10^4")
    gth = float(scn.gamma_th if gamma_th is None else gamma_th)
    scalar = gamma0_values is None
    g0 = np.atleast_1d(np.asarray(scn.gamma0 if scalar else gamma0_values, dtype=float))
    if gth < 0 or np.any(g0 < 0):
        raise ConfigurationError("thresholds and gamma_0 must be nonnegative")
    with np.errstate(divide="ignore"):
        thr = np.where(g0 > 0, gth / np.where(g0 > 0, g0, 1.0), np.inf)
    thr = np.where(gth == 0, 0.0, thr)
    draw = _SquaredProduct(_mc_channel(scn, use_real_k), ch.BLOCKS)
    counts = _count_below(draw, thr, sim)
    res = _estimates(counts, sim, p_expected, trivial=(thr == 0) | np.isinf(thr))
    return res[0] if scalar else res


@dataclass(frozen=True)
class BinSpec:
    lo: float
    hi: float
    n_bins: int
    log: bool = True

    def __post_init__(self):
        if not (self.hi > self.lo and self.n_bins >= 1) or (self.log and not self.lo > 0):
            raise ConfigurationError("invalid bin specification")

    def edges(self):
        if self.log:
            return np.geomspace(self.lo, self.hi, self.n_bins + 1)
        return np.linspace(self.lo, self.hi, self.n_bins + 1)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    density: np.ndarray
    counts: np.ndarray
    n_total: int

    @property
    def centres(self):
        return np.sqrt(self.edges[1:] * self.edges[:-1]) if self.edges[0] > 0 else 0.5 * (self.edges[1:] + self.edges[:-1])


def _hist_worker(task):
    sampler, edges, seed, worker, share = task
    streams = ch.block_streams(seed, worker)
    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    left = share
    while left > 0:
        size = min(BATCH, left)
        counts += np.histogram(sampler(streams, size), bins=edges)[0]
        left -= size
    return counts


def empirical_pdf(sampler, sim, bin_spec):
    """Histogram density of ``sampler`` draws, normalised over the binned range.

    ``bin_spec`` is a :class:`BinSpec` or an increasing array of edges.
    Empty bins have zero density.
    """
    edges = bin_spec.edges() if isinstance(bin_spec, BinSpec) else np.asarray(bin_spec, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ConfigurationError("bin edges must be strictly increasing")
    tasks = [(sampler, edges, sim.seed, w, s)
             for w, s in enumerate(_shares(sim.n_samples, sim.n_workers))]
    if sim.n_workers == 1:
        results = [_hist_worker(tasks[0])]
    else:
        with ProcessPoolExecutor(max_workers=sim.n_workers) as pool:
            results = list(pool.map(_hist_worker, tasks))
    counts = np.sum(results, axis=0)
    inside = counts.sum()
    dens = counts / (inside * np.diff(edges)) if inside else np.zeros(len(counts))
    return Histogram(edges, dens, counts, sim.n_samples)


def sample_moments(sampler, sim):
    """Mean and standard error of ``sampler`` over the configured draws."""
    s1 = s2 = 0.0
    for w, share in enumerate(_shares(sim.n_samples, sim.n_workers)):
        streams = ch.block_streams(sim.seed, w)
        left = share
        while left > 0:
            size = min(BATCH, left)
            v = sampler(streams, size)
            s1 += v.sum()
            s2 += (v * v).sum()
            left -= size
    n = sim.n_samples
    mean = s1 / n
    return mean, np.sqrt(max(s2 / n - mean * mean, 0.0) / n)


# ---------------------------------------------------------------------------
# decode-and-forward relay
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelayConfig:
    """Dual-hop DF: hop 1 air (Malaga, fog), hop 2 water (EGG, Beer-Lambert).

    Each hop is its own optical link and, with ``pointing_both`` set, carries
    its own independent pointing error; otherwise only hop 1 does.  The
    transmit budget is split between source and relay: the source gets
    ``split`` of it and the relay the rest.
    """

    split: float = 0.5
    pointing_both: bool = False

    def __post_init__(self):
        if not 0 < self.split < 1:
            raise ConfigurationError("relay split must lie in (0, 1)")


@dataclass(frozen=True)
class _RelayDraw:
    channel: ch.ChannelParams
    g_air: float
    g_water: float
    pointing_both: bool

    def __call__(self, streams, size):
        pt = self.channel.pointing
        h1 = (ch.malaga_sample(self.channel.malaga, streams["malaga"], size)
              * ch.fog_sample(self.channel.fog, streams["fog"], size)
              * ch.pointing_sample(pt, streams["pointing"], size))
        h2 = ch.egg_sample(self.channel.egg, streams["egg"], size)
        if self.pointing_both:
            # the water hop's pointing draws come from the interface block's stream
            h2 = h2 * ch.pointing_sample(pt, streams["bs"], size)
        # min over hops of gamma_i / gamma_th as a single draw
        return np.minimum(self.g_air * h1 * h1, self.g_water * h2 * h2)


def relay_gamma0(lb, relay=RelayConfig()):
    """(gamma_0 of the air hop, gamma_0 of the water hop) for the budget split."""
    base = 2.0 * lb.Ps_W ** 2 * lb.R ** 2 / lb.sigma_n2
    return base * relay.split ** 2, base * (1.0 - relay.split) ** 2 * lb.H_w ** 2


def df_relay_outage(scn, sim, relay=RelayConfig(), gamma0_values=None, use_real_k=True):
    """End-to-end DF outage, i.e. P[min(gamma_1, gamma_2) < gamma_th].

    For independent hops this equals 1 - (1 - P1)(1 - P2).  ``gamma0_values``
    rescales both hops together (a transmit-power sweep).
    """
    if sim.n_samples < 10_000:
        raise ConfigurationError("outage estimates need n_samples >= 10^4")
    ga, gw = relay_gamma0(scn.link, relay)
    scalar = gamma0_values is None
    scale = np.atleast_1d(np.ones(1) if scalar else np.asarray(gamma0_values, dtype=float) / scn.gamma0)
    if np.any(scale < 0):
        raise ConfigurationError("gamma_0 must be nonnegative")
    draw = _RelayDraw(_mc_channel(scn, use_real_k), ga, gw, relay.pointing_both)
    with np.errstate(divide="ignore"):
        thr = np.where(scale > 0, scn.gamma_th / np.where(scale > 0, scale, 1.0), np.inf)
    counts = _count_below(draw, thr, sim)
    res = _estimates(counts, sim, trivial=np.isinf(thr))
    return res[0] if scalar else res


def default_workers():
    """Worker count from ``A2UW_WORKERS`` (default 1)."""
    raw = os.environ.get("A2UW_WORKERS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"A2UW_WORKERS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigurationError("A2UW_WORKERS must be a positive integer")
    return n
