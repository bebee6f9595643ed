"""Decay-rate laboratory for damped waves on the flat torus."""

__version__ = "0.1.0"
