"""Killed Brownian motion in an interval: closed forms, a Fokker-Planck
solver and Monte Carlo simulation, cross-validated against each other."""

from . import analytic, crosscheck, fpe, model, montecarlo, numerics

__all__ = ["analytic", "crosscheck", "fpe", "model", "montecarlo", "numerics"]
__version__ = "0.1.0"
