"""Shared low-momentum indicator conventions.

Every module that splits momenta at an infrared threshold goes through
these predicates, so boundary momenta cannot be classified differently in
different places.  The threshold comparison is on the physical magnitude
|p| = 2*pi*|n|; exact equality belongs to the "low" (<=) branch.
"""

from __future__ import annotations

import numpy as np


def infrared_threshold(N: int, alpha: float) -> float:
    """Default infrared splitting scale N**alpha."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    return float(N) ** alpha


def is_low(pabs, threshold: float):
    """Indicator of |p| <= threshold (ties inclusive)."""
    return np.asarray(pabs) <= threshold


def is_high(pabs, threshold: float):
    """Indicator of |p| > threshold, the complement of :func:`is_low`."""
    return np.asarray(pabs) > threshold
