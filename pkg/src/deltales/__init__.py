"""Random point interactions on lattice boxes: spectra from K(z, omega) and Monte Carlo checks."""

__version__ = "0.1.0"
