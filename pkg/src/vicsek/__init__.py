"""Spectral decimation on the Vicsek set and the hot-spots verification suite."""

__version__ = "0.1.0"
