"""Fermion-boson qubit encodings and noisy Trotter dynamics for a two-level emitter in a 1D cavity."""
__version__ = "0.1.0"
