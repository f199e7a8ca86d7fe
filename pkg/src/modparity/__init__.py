"""Parity of modular degrees via mod-2 Hecke algebras."""

__version__ = "0.1.0"
