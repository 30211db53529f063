"""Modified Butterworth-Van Dyke (MBVD) resonator models.

A resonator is described either behaviorally (series resonance fs, coupling
kt2, quality factor q, static capacitance c0) or as a lumped circuit: the
static branch c0 in parallel with a main motional Rm-Lm-Cm branch plus
optional spurious motional branches, all behind optional series electrode
parasitics rs/ls.

Coupling convention used throughout the package:

    kt2 = (pi^2 / 8) * (fp^2 - fs^2) / fp^2

so fp = fs / sqrt(1 - (8/pi^2) * kt2), and the model is only defined for
kt2 < 8/pi^2 (~0.8106).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .netcore import TWO_PI, FrequencyGrid

KT2_LIMIT = 8.0 / np.pi**2

# motional branches closer than this (relative) are indistinguishable
MIN_BRANCH_SEPARATION = 1e-3


@dataclass(frozen=True)
class ResonatorSpec:
    """Behavioral description from which MBVD elements are derived."""

    fs: float
    kt2: float
    q: float
    c0: float

    def __post_init__(self):
        if not self.fs > 0.0:
            raise ValueError("series resonance fs must be positive")
        if not 0.0 < self.kt2 < KT2_LIMIT:
            raise ValueError(
                f"kt2 must lie in (0, 8/pi^2 = {KT2_LIMIT:.6f}); got {self.kt2}"
            )
        if not self.q > 0.0:
            raise ValueError("quality factor q must be positive")
        if not self.c0 > 0.0:
            raise ValueError("static capacitance c0 must be positive")


@dataclass(frozen=True)
class MotionalBranch:
    """One series R-L-C branch of the lumped model."""

    r: float
    l: float
    c: float

    def __post_init__(self):
        if self.r < 0.0 or not self.l > 0.0 or not self.c > 0.0:
            raise ValueError("motional branch needs r >= 0, l > 0, c > 0")

    @property
    def f_res(self) -> float:
        return 1.0 / (TWO_PI * np.sqrt(self.l * self.c))


@dataclass(frozen=True)
class MbvdModel:
    """Lumped resonator: c0 in parallel with motional branches, behind rs/ls.

    rm = 0 is allowed so lossless variants can be built for conservation
    checks; derive_mbvd itself always produces rm > 0.
    """

    c0: float
    rm: float
    lm: float
    cm: float
    spurs: tuple[MotionalBranch, ...] = ()
    rs: float = 0.0
    ls: float = 0.0

    def __post_init__(self):
        if not self.c0 > 0.0 or not self.lm > 0.0 or not self.cm > 0.0:
            raise ValueError("c0, lm and cm must be positive")
        if self.rm < 0.0 or self.rs < 0.0 or self.ls < 0.0:
            raise ValueError("rm, rs and ls must be non-negative")
        object.__setattr__(self, "spurs", tuple(self.spurs))
        freqs = [self.fs] + [br.f_res for br in self.spurs]
        for i in range(len(freqs)):
            for j in range(i + 1, len(freqs)):
                if abs(freqs[i] - freqs[j]) < MIN_BRANCH_SEPARATION * max(freqs[i], freqs[j]):
                    raise ValueError(
                        "motional branch resonances must be separated by at least "
                        f"{MIN_BRANCH_SEPARATION:.1%}: {freqs[i]:.6g} vs {freqs[j]:.6g} Hz"
                    )

    @property
    def fs(self) -> float:
        """Series resonance of the main branch."""
        return 1.0 / (TWO_PI * np.sqrt(self.lm * self.cm))

    @property
    def fp(self) -> float:
        """Anti-resonance of the main branch loaded by c0 (lossless value)."""
        return self.fs * np.sqrt(1.0 + self.cm / self.c0)


@dataclass(frozen=True)
class ResonatorLayout:
    """Recorded geometry of a fabricated resonator.

    c0 is carried as data, not computed: mapping geometry to capacitance
    needs a field solver, which is out of scope here.
    """

    thickness_nm: float
    electrode_width_um: float
    gap_um: float
    aperture_um: float
    electrode_thickness_nm: float
    n_electrodes: int
    c0: float

    def __post_init__(self):
        for name in (
            "thickness_nm",
            "electrode_width_um",
            "gap_um",
            "aperture_um",
            "electrode_thickness_nm",
            "c0",
        ):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if not (isinstance(self.n_electrodes, int) and self.n_electrodes >= 1):
            raise ValueError("n_electrodes must be a positive integer")


def derive_mbvd(spec: ResonatorSpec) -> MbvdModel:
    """Synthesize the main-branch MBVD elements from behavioral parameters.

        fp = fs / sqrt(1 - (8/pi^2) kt2)
        cm = c0 (fp^2/fs^2 - 1)
        lm = 1 / (ws^2 cm),   rm = ws lm / q

    The returned model has no spurious branches and rs = ls = 0.
    """
    beta = (8.0 / np.pi**2) * spec.kt2
    fp = spec.fs / np.sqrt(1.0 - beta)
    cm = spec.c0 * (fp**2 / spec.fs**2 - 1.0)
    ws = TWO_PI * spec.fs
    lm = 1.0 / (ws**2 * cm)
    rm = ws * lm / spec.q
    return MbvdModel(c0=spec.c0, rm=rm, lm=lm, cm=cm)


def _branch_admittance(w: np.ndarray, r: float, l: float, c: float) -> np.ndarray:
    x = w * l - 1.0 / (w * c)
    den = r + 1j * x
    zero = den == 0.0
    if zero.any():
        # lossless branch sampled exactly on resonance
        y = np.empty(w.shape, dtype=complex)
        y[~zero] = 1.0 / den[~zero]
        y[zero] = complex(np.inf, 0.0)
        return y
    return 1.0 / den


def admittance(model: MbvdModel, grid: FrequencyGrid) -> np.ndarray:
    """Complex admittance of the full model at every grid point.

    Y = 1 / (rs + j w ls + 1 / Yinner) with
    Yinner = j w c0 + sum over branches of 1 / (r + j(w l - 1/(w c))).
    """
    w = grid.omega
    y = 1j * w * model.c0 + _branch_admittance(w, model.rm, model.lm, model.cm)
    for br in model.spurs:
        y = y + _branch_admittance(w, br.r, br.l, br.c)
    if model.rs == 0.0 and model.ls == 0.0:
        return y
    z_ser = model.rs + 1j * w * model.ls
    # y / (1 + z y) avoids dividing by y, so lossless poles stay finite
    pole = ~np.isfinite(y)
    with np.errstate(invalid="ignore", over="ignore"):
        out = y / (1.0 + z_ser * y)
    if pole.any():
        out[pole] = 1.0 / z_ser[pole]
    return out


def with_spurious(model: MbvdModel, spurs) -> MbvdModel:
    """Append phenomenological spurious branches sharing the main c0.

    Each entry is (f_k, kt2_k, q_k); the branch elements follow the same
    synthesis as the main branch:

        c_k = c0 (8/pi^2) kt2_k / (1 - (8/pi^2) kt2_k)
        l_k = 1 / ((2 pi f_k)^2 c_k),   r_k = 2 pi f_k l_k / q_k

    Branches within 0.1% of each other or of the main fs are rejected as
    indistinguishable.
    """
    new_branches = list(model.spurs)
    for f_k, kt2_k, q_k in spurs:
        if not f_k > 0.0 or not q_k > 0.0:
            raise ValueError("spur frequency and q must be positive")
        if not 0.0 < kt2_k < KT2_LIMIT:
            raise ValueError(f"spur kt2 must lie in (0, {KT2_LIMIT:.6f}); got {kt2_k}")
        beta = (8.0 / np.pi**2) * kt2_k
        c_k = model.c0 * beta / (1.0 - beta)
        wk = TWO_PI * f_k
        l_k = 1.0 / (wk**2 * c_k)
        r_k = wk * l_k / q_k
        new_branches.append(MotionalBranch(r=r_k, l=l_k, c=c_k))
    # MbvdModel validation enforces the 0.1% separation, including against fs
    return replace(model, spurs=tuple(new_branches))
