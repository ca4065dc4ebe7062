"""Retrieval-augmented multi-agent mood-disorder diagnosis toolkit."""

__version__ = "0.1.0"
