"""Numerical laboratory for the variance of sums of three cubes in progressions."""
from __future__ import annotations

__version__ = "0.1.0"
