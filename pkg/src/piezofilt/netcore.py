"""Complex two-port network algebra over a shared frequency grid.

Networks are held in ABCD (transmission) form, one 2x2 complex matrix per
frequency point, because chains combine by a per-point matrix product.
Conversion to S-parameters happens once, after assembly.  Everything here
is a pure function over immutable value types; per-point work is plain
vectorized numpy.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

# |B| below this value (ohm) marks an operand whose two ports are directly
# wired together (a pure shunt chain); its Y-parameters diverge.
PORT_TIE_THRESHOLD_OHM = 1e-18


class GridMismatchError(ValueError):
    """Operands do not share one frequency grid."""


class SingularNetworkError(ValueError):
    """A parameter conversion hit a singular point; message names the frequency."""


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Strictly increasing, positive frequency points in Hz (length >= 2)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("frequency grid needs at least 2 points")
        if not np.all(pts > 0.0):
            raise ValueError("frequency grid points must be positive")
        if not np.all(np.diff(pts) > 0.0):
            raise ValueError("frequency grid must be strictly increasing")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @classmethod
    def linspace(cls, start_hz: float, stop_hz: float, n: int) -> "FrequencyGrid":
        """Convenience constructor for a uniform grid."""
        return cls(np.linspace(float(start_hz), float(stop_hz), int(n)))

    def __len__(self) -> int:
        return int(self.points.size)

    @property
    def omega(self) -> np.ndarray:
        """Angular frequency (rad/s) per point."""
        return TWO_PI * self.points

    def matches(self, other: "FrequencyGrid") -> bool:
        return self is other or np.array_equal(self.points, other.points)


@dataclass(frozen=True, eq=False)
class TwoPortABCD:
    """Per-point ABCD entries: A, D dimensionless, B in ohm, C in siemens."""

    grid: FrequencyGrid
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        n = len(self.grid)
        for name in ("a", "b", "c", "d"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != (n,):
                raise ValueError(f"ABCD entry {name!r} must have shape ({n},)")
            object.__setattr__(self, name, arr)

    def determinant(self) -> np.ndarray:
        return self.a * self.d - self.b * self.c


@dataclass(frozen=True, eq=False)
class SMatrix:
    """Two-port scattering parameters per frequency point, referenced to z0."""

    grid: FrequencyGrid
    s11: np.ndarray
    s21: np.ndarray
    s12: np.ndarray
    s22: np.ndarray
    z0: float = 50.0

    def __post_init__(self):
        if not self.z0 > 0.0:
            raise ValueError("reference impedance z0 must be positive")
        n = len(self.grid)
        for name in ("s11", "s21", "s12", "s22"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != (n,):
                raise ValueError(f"S entry {name!r} must have shape ({n},)")
            object.__setattr__(self, name, arr)


def _require_same_grid(*nets: TwoPortABCD) -> FrequencyGrid:
    grid = nets[0].grid
    for net in nets[1:]:
        if not grid.matches(net.grid):
            raise GridMismatchError("networks do not share the same frequency grid")
    return grid


def _per_point(grid: FrequencyGrid, value) -> np.ndarray:
    out = np.broadcast_to(np.asarray(value, dtype=complex), (len(grid),))
    return np.array(out)


def identity(grid: FrequencyGrid) -> TwoPortABCD:
    """Through-connection: the multiplicative identity for cascade()."""
    one = np.ones(len(grid), dtype=complex)
    zero = np.zeros(len(grid), dtype=complex)
    return TwoPortABCD(grid, one, zero, zero, one)


def series_element(grid: FrequencyGrid, z) -> TwoPortABCD:
    """Series impedance z (scalar or per-point array, ohm)."""
    z = _per_point(grid, z)
    if not np.all(np.isfinite(z)):
        raise ValueError("series impedance must be finite at every point")
    one = np.ones(len(grid), dtype=complex)
    zero = np.zeros(len(grid), dtype=complex)
    return TwoPortABCD(grid, one, z, zero, one)


def shunt_element(grid: FrequencyGrid, y) -> TwoPortABCD:
    """Shunt admittance y to ground (scalar or per-point array, siemens)."""
    y = _per_point(grid, y)
    if not np.all(np.isfinite(y)):
        raise ValueError("shunt admittance must be finite at every point")
    one = np.ones(len(grid), dtype=complex)
    zero = np.zeros(len(grid), dtype=complex)
    return TwoPortABCD(grid, one, zero, y, one)


def cascade(networks, grid: FrequencyGrid | None = None) -> TwoPortABCD:
    """Per-point matrix product of the networks in list order.

    An empty list returns the identity network, which requires an explicit
    grid argument.
    """
    networks = list(networks)
    if not networks:
        if grid is None:
            raise ValueError("cascading an empty list requires an explicit grid")
        return identity(grid)
    out_grid = _require_same_grid(*networks)
    if grid is not None and not out_grid.matches(grid):
        raise GridMismatchError("explicit grid does not match the networks")
    acc = networks[0]
    for net in networks[1:]:
        a = acc.a * net.a + acc.b * net.c
        b = acc.a * net.b + acc.b * net.d
        c = acc.c * net.a + acc.d * net.c
        d = acc.c * net.b + acc.d * net.d
        acc = TwoPortABCD(out_grid, a, b, c, d)
    return acc


def _abcd_to_y(net: TwoPortABCD, b_eff: np.ndarray):
    det = net.determinant()
    y11 = net.d / b_eff
    y12 = -det / b_eff
    y21 = -1.0 / b_eff
    y22 = net.a / b_eff
    return y11, y12, y21, y22


def parallel_combine(a: TwoPortABCD, b: TwoPortABCD) -> TwoPortABCD:
    """Electrical parallel of two two-ports (port 1 tied to port 1, 2 to 2).

    Combines via Y-parameter addition.  An operand with |B| below
    PORT_TIE_THRESHOLD_OHM short-circuits its two ports together, so the
    combination degenerates to a single shunt node; those points are
    combined in that exact limit and flagged with a RuntimeWarning instead
    of failing.
    """
    grid = _require_same_grid(a, b)
    tie_a = np.abs(a.b) < PORT_TIE_THRESHOLD_OHM
    tie_b = np.abs(b.b) < PORT_TIE_THRESHOLD_OHM
    tie = tie_a | tie_b
    if tie.any():
        warnings.warn(
            f"parallel_combine: {int(tie.sum())} point(s) have a port-tying operand "
            f"(|B| < {PORT_TIE_THRESHOLD_OHM:g} ohm); combined in the shunt limit",
            RuntimeWarning,
            stacklevel=2,
        )

    ya = _abcd_to_y(a, np.where(tie_a, 1.0, a.b))
    yb = _abcd_to_y(b, np.where(tie_b, 1.0, b.b))
    ys11 = ya[0] + yb[0]
    ys12 = ya[1] + yb[1]
    ys21 = ya[2] + yb[2]
    ys22 = ya[3] + yb[3]

    # Back-conversion needs a through-admittance; a vanishing sum means the
    # combination has no coupling path at that point (e.g. two reactances in
    # antiresonance).  Nudge to an enormous series impedance and flag.
    dead = (np.abs(ys21) < 1e-30) & ~tie
    if dead.any():
        warnings.warn(
            f"parallel_combine: {int(dead.sum())} point(s) have no through-admittance; "
            "represented as a 1e30 ohm series path",
            RuntimeWarning,
            stacklevel=2,
        )
        ys21 = np.where(dead, -1e-30, ys21)

    out_a = -ys22 / ys21
    out_b = -1.0 / ys21
    out_c = -(ys11 * ys22 - ys12 * ys21) / ys21
    out_d = -ys11 / ys21

    if tie.any():
        # A tied operand contributes its own shunt admittance (C entry); a
        # regular operand seen across tied ports contributes the sum of its
        # Y entries.
        sum_a = ya[0] + ya[1] + ya[2] + ya[3]
        sum_b = yb[0] + yb[1] + yb[2] + yb[3]
        y_node = np.where(tie_a, a.c, sum_a) + np.where(tie_b, b.c, sum_b)
        out_a = np.where(tie, 1.0, out_a)
        out_b = np.where(tie, 0.0, out_b)
        out_c = np.where(tie, y_node, out_c)
        out_d = np.where(tie, 1.0, out_d)

    return TwoPortABCD(grid, out_a, out_b, out_c, out_d)


def abcd_to_s(net: TwoPortABCD, z0: float) -> SMatrix:
    """Standard ABCD to S conversion at reference impedance z0."""
    if not z0 > 0.0:
        raise ValueError("reference impedance z0 must be positive")
    delta = net.a + net.b / z0 + net.c * z0 + net.d
    bad = np.flatnonzero(delta == 0.0)
    if bad.size:
        f_bad = net.grid.points[bad[0]]
        raise SingularNetworkError(
            f"ABCD to S conversion singular at {f_bad:.9g} Hz ({bad.size} point(s))"
        )
    det = net.determinant()
    s11 = (net.a + net.b / z0 - net.c * z0 - net.d) / delta
    s21 = 2.0 / delta
    s12 = 2.0 * det / delta
    s22 = (-net.a + net.b / z0 - net.c * z0 + net.d) / delta
    return SMatrix(net.grid, s11, s21, s12, s22, float(z0))


def group_delay(s: SMatrix) -> np.ndarray:
    """Group delay of S21 in seconds: -(1/2pi) d(phase)/df.

    The phase is unwrapped (2pi jumps removed) before differentiating with
    central differences in the interior and one-sided stencils at the ends.
    Points where |S21| = 0 have no defined delay; they are returned as NaN
    and reported with a RuntimeWarning rather than interpolated over.
    """
    if len(s.grid) < 3:
        raise ValueError("group delay needs a grid with at least 3 points")
    f = s.grid.points
    mag = np.abs(s.s21)
    tau = np.full(f.shape, np.nan)
    alive = mag > 0.0
    if not alive.all():
        warnings.warn(
            f"group delay undefined at {int((~alive).sum())} point(s) with |S21| = 0",
            RuntimeWarning,
            stacklevel=2,
        )
    # differentiate each contiguous run of nonzero points independently
    edges = np.flatnonzero(np.diff(alive.astype(int)))
    starts = [0] if alive[0] else []
    starts += [int(e) + 1 for e in edges if alive[int(e) + 1]]
    for start in starts:
        stop = start
        while stop < len(f) and alive[stop]:
            stop += 1
        if stop - start < 2:
            continue
        phase = np.unwrap(np.angle(s.s21[start:stop]))
        tau[start:stop] = -np.gradient(phase, f[start:stop]) / TWO_PI
    return tau
