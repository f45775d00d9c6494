"""Distributed generative channel modeling for UAV mmWave networks."""

__version__ = "0.1.0"
