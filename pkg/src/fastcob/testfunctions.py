"""Named test functions used by the examples, the CLI and the regression tests.

All functions are vectorised: 1D functions take an array ``t``; 2D functions
take broadcastable arrays ``t1, t2``.
"""
from __future__ import annotations

import numpy as np


def hat(t):
    """Continuous hat centred at 1/2 (the smooth target of the Walsh artefact demo)."""
    return np.maximum(0.0, 1.0 - np.abs(4.0 * np.asarray(t) - 2.0))


def haar_box(t):
    """Coarse Haar scaling function on [1/4, 1/2): representable exactly by Haar wavelets."""
    t = np.asarray(t)
    return np.where((t >= 0.25) & (t < 0.5), 2.0, 0.0)


def cosine(t):
    return np.cos(2 * np.pi * np.asarray(t))


def cosine_ramp(t):
    t = np.asarray(t)
    return np.cos(2 * np.pi * t) + t


def piecewise(t):
    """``cos(2 pi t)`` on [0, 1/2], ``(t/2) sin(6 pi t)`` on (1/2, 1]."""
    t = np.asarray(t)
    return np.where(t <= 0.5, np.cos(2 * np.pi * t), 0.5 * t * np.sin(6 * np.pi * t))


def bump(t):
    t = np.asarray(t)
    return np.exp(-40.0 * (t - 0.4) ** 2)


def poly3(t):
    t = np.asarray(t)
    return 1.0 - 3.0 * t + 2.5 * t**3


def constant(t):
    return np.ones_like(np.asarray(t, dtype=float))


def smooth2d(t1, t2):
    return np.cos(1.5 * np.pi * np.asarray(t1)) * np.sin(3 * np.pi * np.asarray(t2))


_BOXES = (
    # (t1 lo, t1 hi, t2 lo, t2 hi, height)
    (0.15, 0.30, 0.60, 0.80, 0.8),
    (0.55, 0.70, 0.20, 0.35, -0.7),
    (0.72, 0.90, 0.70, 0.85, 0.6),
)


def smooth_boxes2d(t1, t2):
    """The smooth 2D function plus a few boxes (sparse fine-scale wavelet content)."""
    t1, t2 = np.broadcast_arrays(np.asarray(t1, float), np.asarray(t2, float))
    out = smooth2d(t1, t2)
    for a, b, c, d, v in _BOXES:
        out = out + v * ((t1 >= a) & (t1 < b) & (t2 >= c) & (t2 < d))
    return out


def constant2d(t1, t2):
    t1, t2 = np.broadcast_arrays(np.asarray(t1, float), np.asarray(t2, float))
    return np.ones_like(t1)


FUNCTIONS_1D = {
    "hat": hat,
    "haar_box": haar_box,
    "cosine": cosine,
    "cosine_ramp": cosine_ramp,
    "piecewise": piecewise,
    "bump": bump,
    "poly3": poly3,
    "constant": constant,
}

FUNCTIONS_2D = {
    "smooth2d": smooth2d,
    "smooth_boxes2d": smooth_boxes2d,
    "constant2d": constant2d,
}


def get_function(name: str):
    """``(callable, dim)`` for a registered test function."""
    if name in FUNCTIONS_1D:
        return FUNCTIONS_1D[name], 1
    if name in FUNCTIONS_2D:
        return FUNCTIONS_2D[name], 2
    raise KeyError(f"unknown test function {name!r}; known: {sorted(FUNCTIONS_1D) + sorted(FUNCTIONS_2D)}")
