"""Entanglement witnesses and criticality diagnostics for Ising, LMG and Kitaev chains."""

__version__ = "0.1.0"
