"""Named parameter sets.

Fog, haze, water extinction, EGG, BS and noise values follow the simulation
reference simulation table.  The Malaga turbulence sets use the scattering
description (b0 = 0.1079, rho = 0.596, Omega = 1.3265, phase pi/2) with
(alpha_M, beta_M) chosen per regime; the pointing sets use A0 = 0.0032.
"""

import numpy as np

from .channels import (
    BsParams, ChannelParams, EggParams, FogParams, LinkBudget, MalagaParams, PointingParams,
)
from .errors import ConfigurationError

SCATTERING = dict(b0=0.1079, rho=0.596, omega=1.3265, phase=np.pi / 2)

MALAGA = {
    "weak": (8.0, 4),
    "moderate": (4.2, 3),
    "strong": (2.296, 2),
}

FOG = {
    "light": dict(k=2.32, beta_f=13.12),
    "moderate": dict(k=5.49, beta_f=12.06),
}

EGG = {
    "egg1": dict(omega=0.21, lam=0.329, a=1.429, b=1.181, c=17.198),
    "egg2": dict(omega=0.458, lam=0.344, a=1.042, b=1.576, c=35.942),
}

BS = {
    "bs-default": dict(alpha=0.3, beta=1.0),
    "bs-0.3-1": dict(alpha=0.3, beta=1.0),
    "bs-0.3-1.5": dict(alpha=0.3, beta=1.5),
    "bs-0.7-1": dict(alpha=0.7, beta=1.0),
    "bs-0.7-1.5": dict(alpha=0.7, beta=1.5),
}

POINTING = {
    "low": dict(rho=5.0, A0=0.0032),
    "high": dict(rho=1.0, A0=0.0032),
}

PHI_AIR_HAZE = 0.98
PHI_WATER_DB_PER_KM = 21.79
SIGMA_N2 = 1e-14


def malaga(name):
    try:
        a, b = MALAGA[name]
    except KeyError:
        raise ConfigurationError(f"unknown turbulence preset {name!r}") from None
    return MalagaParams.from_scattering(a, b, **SCATTERING)


def fog(name, d_air_km):
    try:
        return FogParams(d_air_km=d_air_km, **FOG[name])
    except KeyError:
        raise ConfigurationError(f"unknown fog preset {name!r}") from None


def egg(name):
    try:
        return EggParams(**EGG[name])
    except KeyError:
        raise ConfigurationError(f"unknown EGG preset {name!r}") from None


def bs(name):
    try:
        return BsParams(**BS[name])
    except KeyError:
        raise ConfigurationError(f"unknown BS preset {name!r}") from None


def pointing(name):
    try:
        return PointingParams(**POINTING[name])
    except KeyError:
        raise ConfigurationError(f"unknown pointing preset {name!r}") from None


def link_budget(d_water_m=50.0, d_air_km=0.02, Ps_dBm=0.0):
    return LinkBudget(Ps_dBm=Ps_dBm, R=1.0, sigma_n2=SIGMA_N2,
                      phi_water_dB_per_km=PHI_WATER_DB_PER_KM, d_water_m=d_water_m,
                      d_air_km=d_air_km, phi_air=PHI_AIR_HAZE)


def fig2b_channel(d_air_km=0.02, turbulence="weak", fog_name="light", egg_name="egg2",
                  bs_name="bs-default", pointing_name="low"):
    """Light fog, EGG-2, weak turbulence, BS(0.3, 1), rho = 5, A0 = 0.0032."""
    return ChannelParams(malaga(turbulence), fog(fog_name, d_air_km), bs(bs_name),
                         egg(egg_name), pointing(pointing_name))


def table():
    """Rows (group, name, parameters) of every preset."""
    rows = []
    for n, (a, b) in MALAGA.items():
        rows.append(("turbulence", n, dict(alpha_M=a, beta_M=b, **SCATTERING)))
    for group, src in (("fog", FOG), ("egg", EGG), ("bs", BS), ("pointing", POINTING)):
        for n, v in src.items():
            rows.append((group, n, dict(v)))
    rows.append(("link", "haze", dict(phi_air=PHI_AIR_HAZE)))
    rows.append(("link", "water", dict(phi_water_dB_per_km=PHI_WATER_DB_PER_KM)))
    rows.append(("link", "noise", dict(sigma_n2=SIGMA_N2)))
    return rows
