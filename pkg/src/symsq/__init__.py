"""Symmetric concept classes under classical and quantum statistical query access."""

__version__ = "0.1.0"
