"""Nepali to Tamang parallel corpus construction and MT metrics."""

__version__ = "0.1.0"
