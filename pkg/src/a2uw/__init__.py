"""Cascaded air-to-underwater optical channel: statistics, outage and simulation."""

__version__ = "0.1.0"
