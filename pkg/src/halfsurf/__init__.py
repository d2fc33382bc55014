"""Exact flat geometry of half-translation surfaces and counting experiments."""

__version__ = "0.1.0"
