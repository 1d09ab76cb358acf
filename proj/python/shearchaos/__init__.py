"""Shear-induced chaos toolkit: forced shear flows, coupled oscillators,
Lyapunov-exponent protocols and sweep harness (C++ core)."""

from shearchaos._core import *  # noqa: F401,F403

__version__ = "0.1.0"
