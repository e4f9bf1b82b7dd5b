"""Pseudo-spectral mild solutions of incompressible MHD with additive jump noise on the torus."""

__version__ = "0.1.0"
