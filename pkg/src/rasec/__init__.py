"""Secrecy-rate maximization for arrays of rotatable directional antennas."""

__version__ = "0.1.0"
