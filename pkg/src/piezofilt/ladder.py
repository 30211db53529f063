"""Ladder filter assembly from MBVD resonator stages.

A ladder is an ordered list of series and shunt stages between two ports.
Each stage holds one resonator model, a multiplicity (identical physical
copies wired in parallel) and a branch inductance in series with every
physical copy.  A feedthrough capacitance cp bridges the input port to the
output port in parallel with the whole chain.

Two presets reproduce the fabricated 4.5 GHz designs.  Their electrical
parameters are fixed; only the stage patterns were free, and those were
frozen with calibrate_stage_patterns(), which scans alternating ladders of
increasing order and keeps the smallest one meeting each design's metric
windows (insertion loss, 3/4 dB fractional bandwidths, rejection, ripple)
on the reference 3.5-5.5 GHz / 2001-point sweep.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .metrics import FilterMetrics, analyze
from .netcore import (
    FrequencyGrid,
    SMatrix,
    abcd_to_s,
    cascade,
    parallel_combine,
    series_element,
    shunt_element,
)
from .resonator import MbvdModel, ResonatorLayout, ResonatorSpec, admittance, derive_mbvd

SERIES = "series"
SHUNT = "shunt"

# electrical parameters of the fabricated designs
SERIES_FS_HZ = 4.725e9
SHUNT_FS_HZ = 4.275e9  # 450 MHz offset, split symmetrically about 4.5 GHz
COUPLING_KT2 = 0.28
RESONATOR_Q = 200.0  # average of the filter-embedded resonators
SERIES_C0_F = 380e-15
SHUNT_C0_F = 320e-15
SURFACE_RS_OHM = 4.0  # per resonator, electrodes plus leading lines
LS_SERIES_H = 0.2e-9
LS_SHUNT_H = 0.3e-9
FEEDTHROUGH_CP_F = 15e-15
PORT_Z0_OHM = 50.0
SHUNT_MULTIPLICITY = 2  # each shunt stage is two identical resonators in parallel

# recorded geometry of the two resonator variants (c0 carried as data)
SERIES_LAYOUT = ResonatorLayout(
    thickness_nm=500.0,
    electrode_width_um=0.5,
    gap_um=1.5,
    aperture_um=80.0,
    electrode_thickness_nm=50.0,
    n_electrodes=50,
    c0=SERIES_C0_F,
)
SHUNT_LAYOUT = ResonatorLayout(
    thickness_nm=500.0,
    electrode_width_um=1.5,
    gap_um=3.0,
    aperture_um=80.0,
    electrode_thickness_nm=50.0,
    n_electrodes=80,
    c0=SHUNT_C0_F,
)


@dataclass(frozen=True)
class Stage:
    """One ladder arm: a resonator placed in series or in shunt."""

    kind: str
    resonator: MbvdModel
    multiplicity: int = 1
    ls: float = 0.0  # branch inductance per physical copy

    def __post_init__(self):
        if self.kind not in (SERIES, SHUNT):
            raise ValueError(f"stage kind must be {SERIES!r} or {SHUNT!r}; got {self.kind!r}")
        if not (isinstance(self.multiplicity, int) and self.multiplicity >= 1):
            raise ValueError("multiplicity must be a positive integer")
        if self.ls < 0.0:
            raise ValueError("branch inductance must be non-negative")


@dataclass(frozen=True)
class LadderSpec:
    """Ordered stages plus port impedance and feedthrough capacitance."""

    stages: tuple[Stage, ...]
    z0: float = PORT_Z0_OHM
    cp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if len(self.stages) < 1:
            raise ValueError("a ladder needs at least one stage")
        if not self.z0 > 0.0:
            raise ValueError("port impedance z0 must be positive")
        if self.cp < 0.0:
            raise ValueError("feedthrough capacitance cp must be non-negative")


def _stage_two_port(stage: Stage, grid: FrequencyGrid):
    y_res = admittance(stage.resonator, grid)
    z_path = 1.0 / y_res + 1j * grid.omega * stage.ls
    if stage.kind == SERIES:
        return series_element(grid, z_path / stage.multiplicity)
    return shunt_element(grid, stage.multiplicity / z_path)


def build_network(spec: LadderSpec, grid: FrequencyGrid) -> SMatrix:
    """Assemble the ladder, bridge it with cp, and convert to S-parameters."""
    chain = cascade([_stage_two_port(stage, grid) for stage in spec.stages])
    if spec.cp > 0.0:
        feed = series_element(grid, 1.0 / (1j * grid.omega * spec.cp))
        chain = parallel_combine(chain, feed)
    return abcd_to_s(chain, spec.z0)


@dataclass(frozen=True)
class LadderDesign:
    """Behavioral description of a full design; build() derives the circuit.

    This is the level at which fitting operates: quantities like q or kt2
    only exist before the MBVD elements are derived.
    """

    pattern: tuple[str, ...]
    fs_series: float = SERIES_FS_HZ
    fs_shunt: float = SHUNT_FS_HZ
    kt2: float = COUPLING_KT2
    q: float = RESONATOR_Q
    c0_series: float = SERIES_C0_F
    c0_shunt: float = SHUNT_C0_F
    rs: float = SURFACE_RS_OHM
    ls_series: float = LS_SERIES_H
    ls_shunt: float = LS_SHUNT_H
    cp: float = FEEDTHROUGH_CP_F
    z0: float = PORT_Z0_OHM
    shunt_multiplicity: int = SHUNT_MULTIPLICITY

    def __post_init__(self):
        object.__setattr__(self, "pattern", tuple(self.pattern))

    def resonators(self) -> tuple[MbvdModel, MbvdModel]:
        """(series, shunt) resonator models with the surface resistance applied."""
        se = derive_mbvd(ResonatorSpec(self.fs_series, self.kt2, self.q, self.c0_series))
        sh = derive_mbvd(ResonatorSpec(self.fs_shunt, self.kt2, self.q, self.c0_shunt))
        return replace(se, rs=self.rs), replace(sh, rs=self.rs)

    def build(self) -> LadderSpec:
        se, sh = self.resonators()
        stages = []
        for kind in self.pattern:
            if kind == SERIES:
                stages.append(Stage(SERIES, se, 1, self.ls_series))
            else:
                stages.append(Stage(SHUNT, sh, self.shunt_multiplicity, self.ls_shunt))
        return LadderSpec(stages=tuple(stages), z0=self.z0, cp=self.cp)


def _alternating(n: int, first: str) -> tuple[str, ...]:
    other = SHUNT if first == SERIES else SERIES
    return tuple(first if i % 2 == 0 else other for i in range(n))


# metric windows each preset must satisfy on the reference sweep
DESIGN_A_WINDOW = {
    "il_db": (1.3, 2.1),
    "fbw_3db": (0.085, 0.115),
    "fbw_4db": (0.072, 0.102),
    "oob_max_db": -12.0,
    "ripple_max_db": 1.0,
}
DESIGN_B_WINDOW = {
    "il_db": (2.1, 3.3),
    "fbw_3db": (0.070, 0.100),
    "fbw_4db": (0.045, 0.075),
    "oob_max_db": -21.0,
    "ripple_max_db": 1.0,
}

REFERENCE_SWEEP = (3.5e9, 5.5e9, 2001)

# Frozen output of calibrate_stage_patterns(): smallest alternating ladders
# whose simulated metrics fall inside the windows above.
DESIGN_A_PATTERN = (SERIES, SHUNT, SERIES)
DESIGN_B_PATTERN = (SERIES, SHUNT, SERIES, SHUNT, SERIES, SHUNT, SERIES)


def _window_ok(m: FilterMetrics, window: dict) -> bool:
    lo, hi = window["il_db"]
    if not lo <= m.il_db <= hi:
        return False
    lo, hi = window["fbw_3db"]
    if not lo <= m.fbw_3db <= hi:
        return False
    lo, hi = window["fbw_4db"]
    if not lo <= m.fbw_4db <= hi:
        return False
    if not m.oob_rejection_db <= window["oob_max_db"]:
        return False
    if not m.ripple_db <= window["ripple_max_db"]:
        return False
    return True


def calibrate_stage_patterns(grid: FrequencyGrid | None = None, max_stages: int = 11) -> dict:
    """Re-derive the preset stage patterns from the metric windows.

    Scans alternating ladders (series-first, then shunt-first) of increasing
    order with all electrical parameters held at the fabricated values, and
    returns the first pattern satisfying each design's window.  Design B is
    additionally required to lose strictly more than design A.
    """
    if grid is None:
        grid = FrequencyGrid.linspace(*REFERENCE_SWEEP)
    chosen: dict[str, tuple[str, ...]] = {}
    il_a = None
    for n in range(2, max_stages + 1):
        for first in (SERIES, SHUNT):
            pattern = _alternating(n, first)
            m = analyze(build_network(LadderDesign(pattern).build(), grid))
            if "A" not in chosen and _window_ok(m, DESIGN_A_WINDOW):
                chosen["A"] = pattern
                il_a = m.il_db
            if (
                "B" not in chosen
                and "A" in chosen
                and _window_ok(m, DESIGN_B_WINDOW)
                and m.il_db > il_a
            ):
                chosen["B"] = pattern
        if "A" in chosen and "B" in chosen:
            break
    if "A" not in chosen or "B" not in chosen:
        raise RuntimeError("no stage pattern satisfies the design windows")
    return chosen


def design_a() -> LadderDesign:
    return LadderDesign(DESIGN_A_PATTERN)


def design_b() -> LadderDesign:
    return LadderDesign(DESIGN_B_PATTERN)


def preset_design_a() -> LadderSpec:
    """The lower-order fabricated design (lower loss, softer rejection)."""
    return design_a().build()


def preset_design_b() -> LadderSpec:
    """The higher-order fabricated design (more loss, deeper rejection)."""
    return design_b().build()
