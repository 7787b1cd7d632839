"""Symmetric alpha-stable Levy white noise and linear SPDEs driven by it."""

__version__ = "0.1.0"
