"""Figures of merit extracted from a swept S-matrix.

Definitions used by analyze():

* insertion loss: il_db = -max in-band |S21| in dB (a positive number).
* 3 dB passband: widest contiguous interval where |S21|dB stays within
  3 dB of the peak; edges refined by linear interpolation between grid
  points.  f0 is its midpoint and fbw_3db its width over f0.
* 4 dB bandwidth: same procedure against the absolute -4 dB level (the
  loss-below-4-dB band), normalized by that band's own midpoint.  Zero if
  the response never reaches -4 dB.
* ripple: spread of |S21|dB across the stationary points interior to the
  3 dB passband.  The band edges sit at peak - 3 dB by construction, so
  including them would always read 3 dB; interior stationary points are
  what captures flat-top variation and in-band notches.
* out-of-band rejection: highest |S21|dB over the windows
  [max(0.8 f0, sweep start), f0 (1 - 1.5 fbw)] and [f0 (1 + 1.5 fbw),
  sweep end].
* group-delay variation: max - min group delay inside the 3 dB passband.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .netcore import SMatrix, group_delay

PASSBAND_DROP_DB = 3.0
ABSOLUTE_BAND_DB = 4.0
EDGE_MARGIN_DB = 10.0
OOB_GUARD_FACTOR = 1.5
OOB_LOW_EDGE_FACTOR = 0.80

CSV_HEADER = (
    "f0_hz,il_db,fbw_3db,fbw_4db,oob_rejection_db,ripple_db,"
    "gd_variation_s,passband_lo_hz,passband_hi_hz,multimodal"
)


class AnalysisError(ValueError):
    """The sweep does not contain an analyzable passband."""


@dataclass(frozen=True)
class FilterMetrics:
    f0_hz: float
    il_db: float
    fbw_3db: float
    fbw_4db: float
    oob_rejection_db: float
    ripple_db: float
    gd_variation_s: float
    passband_hz: tuple[float, float]
    multimodal: bool = False

    def __post_init__(self):
        lo, hi = self.passband_hz
        if not lo < self.f0_hz < hi:
            raise ValueError("f0 must lie inside the passband")
        if self.ripple_db < 0.0:
            raise ValueError("ripple cannot be negative")

    def report_lines(self) -> list[str]:
        return [
            f"f0_hz={self.f0_hz:.17g}",
            f"il_db={self.il_db:.17g}",
            f"fbw_3db={self.fbw_3db:.17g}",
            f"fbw_4db={self.fbw_4db:.17g}",
            f"oob_rejection_db={self.oob_rejection_db:.17g}",
            f"ripple_db={self.ripple_db:.17g}",
            f"gd_variation_s={self.gd_variation_s:.17g}",
            f"passband_lo_hz={self.passband_hz[0]:.17g}",
            f"passband_hi_hz={self.passband_hz[1]:.17g}",
            f"multimodal={int(self.multimodal)}",
        ]

    def csv_row(self) -> str:
        vals = [
            self.f0_hz,
            self.il_db,
            self.fbw_3db,
            self.fbw_4db,
            self.oob_rejection_db,
            self.ripple_db,
            self.gd_variation_s,
            self.passband_hz[0],
            self.passband_hz[1],
        ]
        return ",".join(f"{v:.17g}" for v in vals) + f",{int(self.multimodal)}"


def _contiguous_bands(f: np.ndarray, db: np.ndarray, threshold: float):
    """Intervals where db >= threshold, edges linearly interpolated.

    Returns a list of (f_lo, f_hi, i_first, i_last) sorted by position.
    """
    above = db >= threshold
    if not above.any():
        return []
    idx = np.flatnonzero(above)
    splits = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], splits + 1))
    stops = np.concatenate((splits, [idx.size - 1]))
    bands = []
    for s, e in zip(starts, stops):
        i0, i1 = int(idx[s]), int(idx[e])
        if i0 > 0:
            frac = (threshold - db[i0 - 1]) / (db[i0] - db[i0 - 1])
            f_lo = f[i0 - 1] + frac * (f[i0] - f[i0 - 1])
        else:
            f_lo = f[0]
        if i1 < len(f) - 1:
            frac = (threshold - db[i1 + 1]) / (db[i1] - db[i1 + 1])
            f_hi = f[i1 + 1] - frac * (f[i1 + 1] - f[i1])
        else:
            f_hi = f[-1]
        bands.append((float(f_lo), float(f_hi), i0, i1))
    return bands


def _interior_ripple(db_band: np.ndarray) -> float:
    """Spread across strict stationary points away from the band edges."""
    if db_band.size < 3:
        return 0.0
    left = np.diff(db_band[:-1])
    right = np.diff(db_band[1:])
    stationary = db_band[1:-1][left * right < 0.0]
    if stationary.size < 2:
        return 0.0
    return float(stationary.max() - stationary.min())


def analyze(s: SMatrix) -> FilterMetrics:
    """Extract FilterMetrics from a sweep that brackets the passband.

    The sweep must reach at least EDGE_MARGIN_DB below the in-band peak at
    both grid ends; otherwise the passband edges are not measurable and an
    AnalysisError is raised.
    """
    f = s.grid.points
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(np.abs(s.s21))
    peak = float(db.max())
    if not np.isfinite(peak):
        raise AnalysisError("S21 carries no transmission anywhere on the sweep")
    if db[0] > peak - EDGE_MARGIN_DB or db[-1] > peak - EDGE_MARGIN_DB:
        raise AnalysisError(
            "sweep does not bracket the passband: grid ends are less than "
            f"{EDGE_MARGIN_DB:g} dB below the in-band peak"
        )

    bands3 = _contiguous_bands(f, db, peak - PASSBAND_DROP_DB)
    if not bands3:
        raise AnalysisError("no passband found above the 3 dB threshold")
    multimodal = len(bands3) > 1
    if multimodal:
        warnings.warn(
            f"{len(bands3)} disjoint 3 dB passbands found; reporting the widest",
            RuntimeWarning,
            stacklevel=2,
        )
    f_lo, f_hi, i0, i1 = max(bands3, key=lambda band: band[1] - band[0])
    f0 = 0.5 * (f_lo + f_hi)
    fbw3 = (f_hi - f_lo) / f0

    bands4 = _contiguous_bands(f, db, -ABSOLUTE_BAND_DB)
    if bands4:
        lo4, hi4, _, _ = max(bands4, key=lambda band: band[1] - band[0])
        fbw4 = (hi4 - lo4) / (0.5 * (lo4 + hi4))
    else:
        fbw4 = 0.0

    ripple = _interior_ripple(db[i0 : i1 + 1])

    low_mask = (f >= max(OOB_LOW_EDGE_FACTOR * f0, f[0])) & (
        f <= f0 * (1.0 - OOB_GUARD_FACTOR * fbw3)
    )
    high_mask = f >= f0 * (1.0 + OOB_GUARD_FACTOR * fbw3)
    oob_mask = low_mask | high_mask
    oob = float(db[oob_mask].max()) if oob_mask.any() else float("nan")

    tau = group_delay(s)
    in_band = (f >= f_lo) & (f <= f_hi)
    gd_var = float(tau[in_band].max() - tau[in_band].min())

    return FilterMetrics(
        f0_hz=float(f0),
        il_db=-peak,
        fbw_3db=float(fbw3),
        fbw_4db=float(fbw4),
        oob_rejection_db=oob,
        ripple_db=ripple,
        gd_variation_s=gd_var,
        passband_hz=(f_lo, f_hi),
        multimodal=multimodal,
    )
