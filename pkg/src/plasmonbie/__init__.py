"""Boundary-integral toolkit for quasi-static plasmonic resonances of small particles."""

__version__ = "0.1.0"
