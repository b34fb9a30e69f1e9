"""Robust distributed beamforming for two-hop AF relay networks."""

__version__ = "0.1.0"
