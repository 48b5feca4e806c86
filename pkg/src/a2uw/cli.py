"""Command line: ``a2uw {sweep,pdf,presets,validate,check}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 identity-check failure.  ``A2UW_WORKERS`` overrides the Monte Carlo
worker count of a scenario.
"""

import argparse
import datetime as _dt
import io
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, channels as chn, presets
from .analytic import SnrScenario, outage_asymptotic, outage_exact
from .config import load_scenario, validate_config
from .errors import ConfigurationError, NumericalFailure
from .montecarlo import BinSpec, default_workers, df_relay_outage, empirical_outage, empirical_pdf, product_sampler
from .specfun.corpus import identity_corpus

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CHECK = 0, 1, 2, 3

COLUMNS = ("x_dB", "gamma0_dB", "p_exact", "p_asymptotic", "p_mc", "ci_low", "ci_high", "p_relay", "flag")


@dataclass
class OutageCurve:
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        i = COLUMNS.index(name)
        return np.array([r[i] for r in self.rows], dtype=float if name != "flag" else object)


def _fmt(v):
    if isinstance(v, str):
        return v
    if v is None or not np.isfinite(v):
        return "nan"
    return repr(float(v))


def _gamma0_axis(scenario, x):
    if scenario.sweep.axis == "Ps_dBm":
        return np.array([chn.gamma0(scenario.link.with_power(v)) for v in x])
    return 10.0 ** (x / 10.0)


def run_sweep(scenario):
    """Exact, asymptotic, Monte Carlo and relay outage at every sweep point.

    A numerical failure of the analytic path at a point flags that row and
    leaves its analytic columns empty; the sweep continues.
    """
    x = scenario.sweep.points()
    g0 = _gamma0_axis(scenario, x)
    scn = SnrScenario(scenario.channel, scenario.link, scenario.gamma_th, scenario.mb)
    n = len(x)
    nan = np.full(n, np.nan)
    exact, asym = nan.copy(), nan.copy()
    flags = [""] * n
    ev = scenario.evaluate
    if "exact" in ev:
        try:
            exact = np.atleast_1d(outage_exact(scn, gamma0_values=g0))
        except NumericalFailure:
            for i, g in enumerate(g0):
                try:
                    exact[i] = outage_exact(scn, gamma0_values=np.array([g]))
                except NumericalFailure:
                    flags[i] = "numerical-failure"
    if "asymptotic" in ev:
        a = np.atleast_1d(outage_asymptotic(scn, gamma0_values=g0))
        asym = np.where((a >= 0) & (a <= 1), a, np.nan)
    mc = lo = hi = relay = nan
    if "mc" in ev:
        est = empirical_outage(scn, scenario.sim, gamma0_values=g0, use_real_k=scenario.real_k)
        mc = np.array([e.p_hat for e in est])
        lo = np.array([e.ci_low for e in est])
        hi = np.array([e.ci_high for e in est])
    if "relay" in ev:
        est = df_relay_outage(scn, scenario.sim, scenario.relay, gamma0_values=g0,
                              use_real_k=scenario.real_k)
        relay = np.array([e.p_hat for e in est])
    rows = [(x[i], 10.0 * np.log10(g0[i]), exact[i], asym[i], mc[i], lo[i], hi[i], relay[i], flags[i])
            for i in range(n)]
    meta = {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "version": __version__,
        "axis": scenario.sweep.axis,
        "gamma_th": repr(scenario.gamma_th),
        "fog_k_analytic": f"{scn.channel.fog.k!r} (input {scn.k_real!r})",
        "fog_k_mc": repr(scn.k_real if scenario.real_k else scn.channel.fog.k),
        "n_samples": scenario.sim.n_samples,
        "n_workers": scenario.sim.n_workers,
    }
    return OutageCurve(rows, meta)


def _write_csv(out, metadata, columns, rows, timestamp=True):
    for k, v in metadata.items():
        out.write(f"# {k}: {v}\n")
    if timestamp:
        out.write(f"# generated: {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n")
    out.write(",".join(columns) + "\n")
    for r in rows:
        out.write(",".join(_fmt(v) for v in r) + "\n")


def curve_to_csv(curve, timestamp=True):
    buf = io.StringIO()
    _write_csv(buf, curve.metadata, COLUMNS, curve.rows, timestamp)
    return buf.getvalue()


_PDFS = {
    "malaga": (chn.malaga_pdf, "malaga", None),
    "fog": (chn.fog_pdf, "fog", lambda p: 1.0),
    "bs": (chn.bs_pdf, "bs", None),
    "egg": (chn.egg_pdf, "egg", None),
    "pointing": (chn.pointing_pdf, "pointing", lambda p: p.A0),
}


def _block_pdf(name, channel, x):
    f, attr, top = _PDFS[name]
    p = getattr(channel, attr)
    hi = np.inf if top is None else top(p)
    inside = (x > 0) & (x <= hi)
    out = np.zeros_like(x)
    out[inside] = f(p, x[inside])
    return out


def density_curves(scenario):
    """Histogram densities of each configured block product, with closed forms for single blocks."""
    spec = BinSpec(scenario.pdf.lo, scenario.pdf.hi, scenario.pdf.n_bins, scenario.pdf.log)
    channel = scenario.channel
    cols, data = ["x"], []
    x = None
    for blocks in scenario.pdf.curves:
        hist = empirical_pdf(product_sampler(channel, blocks), scenario.sim, spec)
        x = hist.centres
        label = "*".join(blocks)
        if len(blocks) == 1:
            cols.append(f"{label}_analytic")
            data.append(_block_pdf(blocks[0], channel, x))
        cols.append(f"{label}_mc")
        data.append(hist.density)
    rows = list(zip(x, *data))
    meta = {"scenario": scenario.name, "seed": scenario.seed, "version": __version__,
            "n_samples": scenario.sim.n_samples}
    return cols, rows, meta


def _cmd_sweep(args):
    scenario = load_scenario(args.config, _workers())
    curve = run_sweep(scenario)
    text = curve_to_csv(curve, timestamp=not args.no_timestamp)
    _emit(text, args.output)
    return EXIT_NUMERICAL if any(r[-1] for r in curve.rows) else EXIT_OK


def _cmd_pdf(args):
    scenario = load_scenario(args.config, _workers())
    cols, rows, meta = density_curves(scenario)
    buf = io.StringIO()
    _write_csv(buf, meta, cols, rows, timestamp=not args.no_timestamp)
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def _cmd_presets(args):
    for group, name, params in presets.table():
        vals = " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in params.items())
        print(f"{group:<11} {name:<12} {vals}")
    return EXIT_OK


def _cmd_validate(args):
    errors = validate_config(args.config)
    if errors:
        for e in errors:
            print(e)
        return EXIT_CONFIG
    print(f"{args.config}: ok")
    return EXIT_OK


def _cmd_check(args):
    failed = 0
    for case in identity_corpus():
        ok = case.rel_err <= args.tol
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {case.rel_err:.2e}  {case.name}")
    print(f"{failed} failure(s)")
    return EXIT_CHECK if failed else EXIT_OK


def _workers():
    return default_workers() if "A2UW_WORKERS" in os.environ else None


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def build_parser():
    p = argparse.ArgumentParser(prog="a2uw", description="Air-to-underwater optical channel: outage and densities.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="outage curve over the configured sweep (CSV)")
    s.add_argument("config")
    s.add_argument("-o", "--output", help="CSV path (default stdout)")
    s.add_argument("--no-timestamp", action="store_true", help="omit the generated-at comment line")
    s.set_defaults(func=_cmd_sweep)

    s = sub.add_parser("pdf", help="density curves of block products (CSV)")
    s.add_argument("config")
    s.add_argument("-o", "--output")
    s.add_argument("--no-timestamp", action="store_true")
    s.set_defaults(func=_cmd_pdf)

    s = sub.add_parser("presets", help="list parameter presets")
    s.set_defaults(func=_cmd_presets)

    s = sub.add_parser("validate", help="report every problem in a scenario file")
    s.add_argument("config")
    s.set_defaults(func=_cmd_validate)

    s = sub.add_parser("check", help="run the special-function identity corpus")
    s.add_argument("--tol", type=float, default=1e-8)
    s.set_defaults(func=_cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
