"""Parametric model of the lateral dispersion: electrode gap to frequency.

The resonance is dominated by the thickness mode and stiffened by the
lateral wavenumber the electrode gap sets, so a two-parameter hyperbolic
form f(g) = sqrt(f_t^2 + (c_lat/g)^2) is used.  Two (gap, fs) design
points determine it exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class DispersionModel:
    f_t: float  # thickness-mode asymptote, Hz
    c_lat: float  # lateral stiffening coefficient, Hz*um

    def __post_init__(self):
        if not self.f_t > 0.0 or not self.c_lat > 0.0:
            raise ValueError("f_t and c_lat must be positive")


def calibrate(anchors) -> DispersionModel:
    """Solve the model exactly through two (gap_um, fs_hz) anchor points."""
    (g1, f1), (g2, f2) = anchors
    if not g1 > 0.0 or not g2 > 0.0:
        raise ValueError("anchor gaps must be positive")
    if g1 == g2:
        raise ValueError("anchor gaps must be distinct")
    if (f1 - f2) * (g1 - g2) >= 0.0:
        raise ValueError("anchors must have fs strictly decreasing with gap")
    ft2 = (f1**2 * g1**2 - f2**2 * g2**2) / (g1**2 - g2**2)
    if not ft2 > 0.0:
        raise ValueError("anchors imply a non-positive thickness asymptote")
    c2 = (f1**2 - ft2) * g1**2
    if not c2 > 0.0:
        raise ValueError("anchors imply a non-positive lateral coefficient")
    return DispersionModel(f_t=math.sqrt(ft2), c_lat=math.sqrt(c2))


def fs_from_gap(model: DispersionModel, g: float) -> float:
    """Series resonance for electrode gap g (um); strictly decreasing in g."""
    if not g > 0.0:
        raise ValueError("electrode gap must be positive")
    return math.sqrt(model.f_t**2 + (model.c_lat / g) ** 2)


def gap_for_target(model: DispersionModel, fs_target: float) -> float:
    """Electrode gap (um) that places the series resonance at fs_target."""
    if not fs_target > model.f_t:
        raise ValueError(
            f"target {fs_target:.6g} Hz is at or below the thickness asymptote "
            f"{model.f_t:.6g} Hz and cannot be reached by widening the gap"
        )
    return model.c_lat / math.sqrt(fs_target**2 - model.f_t**2)
