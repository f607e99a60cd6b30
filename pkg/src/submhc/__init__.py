"""Subsystem many-hypercube codes from concatenated [[4,2,2]] codes: construction,
bit-flip simulation and decoding."""

__version__ = "0.1.0"
