"""Scenario files: YAML with a fixed schema.

Grammar (all keys lower-case; ``#`` starts a comment)::

    name: fig2b-50m                 # required
    seed: 1                         # required, integer in [0, 2^64)
    channel:
      turbulence: weak              # preset, or {alpha_M, beta_M, g, omega_prime},
                                    # or {alpha_M, beta_M, b0, rho, omega, phase}
      fog: light                    # preset, or {k, beta_f}; d_air_km comes from link
      bs: bs-default                # preset, or {alpha, beta}
      egg: egg2                     # preset, or {omega, lam, a, b, c}
      pointing: low                 # preset, or {rho, A0}
    link:                           # every key optional (defaults shown)
      Ps_dBm: 0.0                   # transmit power in dBm
      R: 1.0                        # responsivity, A/W
      sigma_n2: 1.0e-14             # noise variance, A^2/GHz as tabulated
      phi_water_dB_per_km: 21.79
      d_water_m: 50.0
      d_air_km: 0.02
      phi_air: 0.98
    gamma_th_dB: 0.0                # or gamma_th (linear); default 0 dB
    sweep:
      axis: Ps_dBm                  # or gamma0_dB
      start: 0.0
      stop: 30.0
      step: 5.0
    simulation:
      n_samples: 1000000
      n_workers: 1                  # A2UW_WORKERS overrides
      confidence: 0.99              # 0.95 or 0.99
      real_k: true                  # MC uses the unrounded fog shape
    relay: {split: 0.5, pointing_both: false}
    evaluate: [exact, asymptotic, mc, relay]
    mellin_barnes: {nodes_per_unit: 16, tol: 1.0e-10, half_length: 8.0}
    pdf:                            # used by the ``pdf`` verb
      lo: 0.01
      hi: 4.0
      n_bins: 200
      log: false
      curves: [[egg], [bs, egg]]

Presets are resolved on load; :func:`scenario_to_dict` writes explicit
values, so a written scenario reloads to an identical one.
"""

from dataclasses import asdict, dataclass, field, fields

import numpy as np
import yaml

from . import presets
from .channels import (
    BLOCKS, BsParams, ChannelParams, EggParams, FogParams, LinkBudget, MalagaParams, PointingParams,
)
from .errors import ConfigurationError
from .montecarlo import RelayConfig, SimConfig
from .specfun import MellinBarnesConfig

EVALUATORS = ("exact", "asymptotic", "mc", "relay")
AXES = ("Ps_dBm", "gamma0_dB")


@dataclass(frozen=True)
class Sweep:
    axis: str = "Ps_dBm"
    start: float = 0.0
    stop: float = 30.0
    step: float = 5.0

    def points(self):
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(max(n, 1))


@dataclass(frozen=True)
class PdfSpec:
    lo: float = 0.01
    hi: float = 4.0
    n_bins: int = 200
    log: bool = False
    curves: tuple = (("egg",), ("bs", "egg"))


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    channel: ChannelParams
    link: LinkBudget
    gamma_th: float
    sweep: Sweep
    sim: SimConfig
    mb: MellinBarnesConfig
    relay: RelayConfig = RelayConfig()
    real_k: bool = True
    evaluate: tuple = EVALUATORS
    pdf: PdfSpec = field(default_factory=PdfSpec)


class _Collector:
    def __init__(self):
        self.errors = []

    def add(self, path, msg):
        self.errors.append(f"{path}: {msg}")

    def build(self, path, cls, **kw):
        try:
            return cls(**kw)
        except (ConfigurationError, TypeError, ValueError) as exc:
            self.add(path, str(exc))
            return None


def _num(col, d, key, path, default=None, positive=False, nonneg=False, integer=False, required=False):
    if key not in d:
        if required:
            col.add(f"{path}.{key}" if path else key, "is required")
        return default
    v = d[key]
    p = f"{path}.{key}" if path else key
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        col.add(p, f"must be a number, got {v!r}")
        return default
    if integer and int(v) != v:
        col.add(p, "must be an integer")
        return default
    if not np.isfinite(v):
        col.add(p, "must be finite")
        return default
    if positive and not v > 0:
        col.add(p, f"must be positive, got {v!r}")
        return default
    if nonneg and v < 0:
        col.add(p, f"must be nonnegative, got {v!r}")
        return default
    return int(v) if integer else float(v)


def _mapping(col, d, key, path):
    v = d.get(key, {})
    if v is None:
        return {}
    if not isinstance(v, dict):
        col.add(f"{path}.{key}" if path else key, "must be a mapping")
        return {}
    return v


def _unknown(col, d, allowed, path):
    for k in d:
        if k not in allowed:
            col.add(f"{path}.{k}" if path else str(k), "unknown key")


def _block(col, spec, path, preset_fn, cls, keys, extra=None):
    extra = extra or {}
    if isinstance(spec, str):
        try:
            return preset_fn(spec)
        except ConfigurationError as exc:
            col.add(path, str(exc))
            return None
    if not isinstance(spec, dict):
        col.add(path, "must be a preset name or a mapping")
        return None
    _unknown(col, spec, keys, path)
    vals = {k: _num(col, spec, k, path, required=True) for k in keys}
    if any(v is None for v in vals.values()):
        return None
    return col.build(path, cls, **vals, **extra)


def _turbulence(col, spec, path):
    if isinstance(spec, dict) and "b0" in spec:
        keys = ("alpha_M", "beta_M", "b0", "rho", "omega", "phase")
        _unknown(col, spec, keys, path)
        vals = {k: _num(col, spec, k, path, required=True) for k in keys}
        if any(v is None for v in vals.values()):
            return None
        try:
            return MalagaParams.from_scattering(**vals)
        except ConfigurationError as exc:
            col.add(path, str(exc))
            return None
    return _block(col, spec, path, presets.malaga, MalagaParams, ("alpha_M", "beta_M", "g", "omega_prime"))


_TOP = ("name", "seed", "channel", "link", "gamma_th", "gamma_th_dB", "sweep", "simulation",
        "relay", "evaluate", "mellin_barnes", "pdf")


def parse_scenario(doc, workers_override=None):
    """Build a :class:`Scenario` from a parsed document; returns (scenario or None, errors)."""
    col = _Collector()
    if not isinstance(doc, dict):
        return None, ["<root>: must be a mapping"]
    _unknown(col, doc, _TOP, "")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        col.add("name", "is required and must be a nonempty string")
    seed = _num(col, doc, "seed", "", integer=True, nonneg=True, required=True)
    if seed is not None and seed >= 2 ** 64:
        col.add("seed", "must be below 2^64")

    link_d = _mapping(col, doc, "link", "")
    lkeys = [f.name for f in fields(LinkBudget)]
    _unknown(col, link_d, lkeys, "link")
    lvals = {}
    for k in lkeys:
        v = _num(col, link_d, k, "link", nonneg=(k == "d_water_m"),
                 positive=k not in ("d_water_m", "Ps_dBm"))
        if v is not None:
            lvals[k] = v
    link = col.build("link", LinkBudget, **lvals)
    d_air = lvals.get("d_air_km", LinkBudget().d_air_km)

    ch_d = _mapping(col, doc, "channel", "")
    _unknown(col, ch_d, ("turbulence", "fog", "bs", "egg", "pointing"), "channel")
    for k in ("turbulence", "fog", "bs", "egg", "pointing"):
        if k not in ch_d:
            col.add(f"channel.{k}", "is required")
    mg = _turbulence(col, ch_d["turbulence"], "channel.turbulence") if "turbulence" in ch_d else None
    fg = (_block(col, ch_d["fog"], "channel.fog", lambda n: presets.fog(n, d_air), FogParams,
                 ("k", "beta_f"), {"d_air_km": d_air}) if "fog" in ch_d else None)
    bs = _block(col, ch_d["bs"], "channel.bs", presets.bs, BsParams, ("alpha", "beta")) if "bs" in ch_d else None
    eg = (_block(col, ch_d["egg"], "channel.egg", presets.egg, EggParams, ("omega", "lam", "a", "b", "c"))
          if "egg" in ch_d else None)
    pt = (_block(col, ch_d["pointing"], "channel.pointing", presets.pointing, PointingParams, ("rho", "A0"))
          if "pointing" in ch_d else None)

    if "gamma_th" in doc and "gamma_th_dB" in doc:
        col.add("gamma_th", "give either gamma_th or gamma_th_dB, not both")
    gth = 1.0
    if "gamma_th" in doc:
        gth = _num(col, doc, "gamma_th", "", positive=True) or 1.0
    elif "gamma_th_dB" in doc:
        v = _num(col, doc, "gamma_th_dB", "")
        gth = 10.0 ** (v / 10.0) if v is not None else 1.0

    sw_d = _mapping(col, doc, "sweep", "")
    _unknown(col, sw_d, ("axis", "start", "stop", "step"), "sweep")
    axis = sw_d.get("axis", "Ps_dBm")
    if axis not in AXES:
        col.add("sweep.axis", f"must be one of {list(AXES)}")
    start = _num(col, sw_d, "start", "sweep", default=0.0)
    stop = _num(col, sw_d, "stop", "sweep", default=start)
    step = _num(col, sw_d, "step", "sweep", default=1.0)
    if step is not None and not step > 0:
        col.add("sweep.step", "must be positive")
    if start is not None and stop is not None and stop < start:
        col.add("sweep.stop", "must not be below sweep.start")
    sweep = Sweep(axis, start, stop, step)

    sim_d = _mapping(col, doc, "simulation", "")
    _unknown(col, sim_d, ("n_samples", "n_workers", "confidence", "real_k"), "simulation")
    n = _num(col, sim_d, "n_samples", "simulation", default=1_000_000, integer=True, positive=True)
    if n is not None and n < 10_000:
        col.add("simulation.n_samples", "must be at least 10000")
    nw = _num(col, sim_d, "n_workers", "simulation", default=1, integer=True, positive=True)
    if workers_override is not None:
        nw = workers_override
    conf = _num(col, sim_d, "confidence", "simulation", default=0.99)
    real_k = sim_d.get("real_k", True)
    if not isinstance(real_k, bool):
        col.add("simulation.real_k", "must be true or false")
    sim = None
    if seed is not None and n is not None and nw is not None and conf is not None:
        sim = col.build("simulation", SimConfig, n_samples=n, seed=seed, n_workers=nw, confidence=conf)

    rel_d = _mapping(col, doc, "relay", "")
    _unknown(col, rel_d, ("split", "pointing_both"), "relay")
    split = _num(col, rel_d, "split", "relay", default=0.5)
    pboth = rel_d.get("pointing_both", False)
    if not isinstance(pboth, bool):
        col.add("relay.pointing_both", "must be true or false")
        pboth = False
    relay = col.build("relay", RelayConfig, split=split, pointing_both=pboth) if split is not None else None

    ev = doc.get("evaluate", list(EVALUATORS))
    if not isinstance(ev, list) or any(e not in EVALUATORS for e in ev):
        col.add("evaluate", f"must be a list drawn from {list(EVALUATORS)}")
        ev = list(EVALUATORS)

    mb_d = _mapping(col, doc, "mellin_barnes", "")
    mkeys = [f.name for f in fields(MellinBarnesConfig)]
    _unknown(col, mb_d, mkeys, "mellin_barnes")
    mvals = {}
    for k in mkeys:
        if k in mb_d and mb_d[k] is not None:
            v = _num(col, mb_d, k, "mellin_barnes", integer=(k == "nodes_per_unit"))
            if v is not None:
                mvals[k] = v
    mb = col.build("mellin_barnes", MellinBarnesConfig, **mvals)

    pdf_d = _mapping(col, doc, "pdf", "")
    _unknown(col, pdf_d, ("lo", "hi", "n_bins", "log", "curves"), "pdf")
    curves = pdf_d.get("curves", [list(c) for c in PdfSpec.curves])
    if (not isinstance(curves, list) or not curves
            or any(not isinstance(c, list) or not c or any(b not in BLOCKS for b in c) for c in curves)):
        col.add("pdf.curves", f"must be a list of nonempty block lists drawn from {list(BLOCKS)}")
        curves = [list(c) for c in PdfSpec.curves]
    plog = pdf_d.get("log", False)
    if not isinstance(plog, bool):
        col.add("pdf.log", "must be true or false")
        plog = False
    pdf = PdfSpec(_num(col, pdf_d, "lo", "pdf", default=0.01, positive=True),
                  _num(col, pdf_d, "hi", "pdf", default=4.0, positive=True),
                  _num(col, pdf_d, "n_bins", "pdf", default=200, integer=True, positive=True),
                  plog, tuple(tuple(c) for c in curves))
    if pdf.lo is not None and pdf.hi is not None and pdf.hi <= pdf.lo:
        col.add("pdf.hi", "must exceed pdf.lo")

    if col.errors:
        return None, col.errors
    channel = ChannelParams(mg, fg, bs, eg, pt)
    return Scenario(name, seed, channel, link, gth, sweep, sim, mb, relay, real_k, tuple(ev), pdf), []


def load_scenario(path, workers_override=None):
    """Read and validate a scenario file; raises ConfigurationError listing every problem."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigurationError(f"{path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: not valid YAML ({exc})") from None
    scn, errors = parse_scenario(doc, workers_override)
    if errors:
        raise ConfigurationError("; ".join(errors))
    return scn


def validate_config(path):
    """Every invariant violation in the file, each prefixed with its field path."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        return [f"<file>: {exc.strerror}"]
    except yaml.YAMLError as exc:
        return [f"<file>: not valid YAML ({exc})"]
    return parse_scenario(doc)[1]


def scenario_to_dict(scn):
    """Explicit (preset-free) document that reloads to the same scenario."""
    c = scn.channel
    mb = {k: v for k, v in asdict(scn.mb).items() if v is not None}
    return {
        "name": scn.name,
        "seed": scn.seed,
        "channel": {
            "turbulence": asdict(c.malaga),
            "fog": {"k": c.fog.k, "beta_f": c.fog.beta_f},
            "bs": asdict(c.bs),
            "egg": asdict(c.egg),
            "pointing": asdict(c.pointing),
        },
        "link": asdict(scn.link),
        "gamma_th": scn.gamma_th,
        "sweep": asdict(scn.sweep),
        "simulation": {"n_samples": scn.sim.n_samples, "n_workers": scn.sim.n_workers,
                       "confidence": scn.sim.confidence, "real_k": scn.real_k},
        "relay": asdict(scn.relay),
        "evaluate": list(scn.evaluate),
        "mellin_barnes": mb,
        "pdf": {"lo": scn.pdf.lo, "hi": scn.pdf.hi, "n_bins": scn.pdf.n_bins, "log": scn.pdf.log,
                "curves": [list(x) for x in scn.pdf.curves]},
    }


def dump_scenario(scn, path):
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario_to_dict(scn), fh, sort_keys=False)
