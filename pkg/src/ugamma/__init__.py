"""Exact verification harness for stable gamma factors of unitary groups at desk scale."""

__version__ = "0.1.0"
