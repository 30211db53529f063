"""Parameter extraction from swept data and circuit-model fitting.

Extraction locates the series resonance (admittance maximum) and the
anti-resonance (admittance minimum) and turns them into coupling and
quality factor.  The static branch j*w*c0 loads both features: it shifts
the |Y| extrema and flattens the phase slope by 1 + (w*c0*rm)^2.  The
estimators here therefore refine the raw |Y| extrema against quantities
the static branch cannot touch: the conductance peak Re(Y) (exactly at fs
for the ideal model) and the phase of the deloaded admittance
Y - j*w*c0_hat.  On high-Q data, where the loading term is negligible,
they reduce to plain parabolic refinement of log|Y|.

fit_model is a damped least-squares (Levenberg-Marquardt) iteration with a
numerically estimated Jacobian, box bounds, optional seeded restarts, and
an accepted-step residual history for auditing.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .ladder import LadderDesign, build_network
from .netcore import TWO_PI, FrequencyGrid, SMatrix
from .resonator import KT2_LIMIT, MbvdModel, admittance

# above this value of Im(Y)/Re(Y) at the conductance peak, the |Y| minimum
# is too washed out by loss for parabolic refinement; derive fp from the
# deloaded branch parameters instead
STATIC_LOAD_SWITCH = 0.04

MIN_POINTS_IN_RESONANCE = 5


class ExtractionError(ValueError):
    """Resonance features cannot be located in the supplied sweep."""


class FitError(RuntimeError):
    """The optimizer could not evaluate or reduce the objective."""


class PrecisionWarning(UserWarning):
    """The grid is too coarse near a resonance for the stated accuracy."""


def _parabolic_vertex(x: np.ndarray, v: np.ndarray, i: int) -> float:
    """Vertex of the parabola through points i-1, i, i+1 (nonuniform x)."""
    x1, x2, x3 = x[i - 1], x[i], x[i + 1]
    y1, y2, y3 = v[i - 1], v[i], v[i + 1]
    d1 = (y1 - y2) / (x1 - x2)
    d2 = (y2 - y3) / (x2 - x3)
    a = (d1 - d2) / (x1 - x3)
    if a == 0.0:
        return float(x2)
    b = d1 - a * (x1 + x2)
    return float(-b / (2.0 * a))


def _argmax_near(v: np.ndarray, f: np.ndarray, i_center: int, rel_window: float) -> int:
    lo = int(np.searchsorted(f, f[i_center] * (1.0 - rel_window)))
    hi = int(np.searchsorted(f, f[i_center] * (1.0 + rel_window), side="right"))
    lo = max(lo, 0)
    hi = min(hi, len(f))
    return lo + int(np.argmax(v[lo:hi]))


def _deloaded_phase_q(y: np.ndarray, f: np.ndarray, fs: float, c0_hat: float) -> float:
    """Q from the phase slope of Y - j*w*c0_hat at fs.

    A central difference through the arctangent-shaped phase underestimates
    the slope at coarse steps; inverting through the tangent removes that
    bias exactly for the ideal single-branch shape.
    """
    i = int(np.searchsorted(f, fs))
    i = min(max(i, 1), len(f) - 2)
    y_mot = y - 1j * TWO_PI * f * c0_hat
    phase = np.unwrap(np.angle(y_mot[i - 1 : i + 2]))
    slope = abs((phase[2] - phase[0]) / (f[i + 1] - f[i - 1]))
    h = 0.5 * (f[i + 1] - f[i - 1])
    arg = min(slope * h, 0.499 * np.pi)
    return float(0.5 * fs * np.tan(arg) / h)


def extract_fs_fp(y, grid: FrequencyGrid) -> tuple[float, float]:
    """Locate series resonance and anti-resonance of an admittance sweep.

    fs comes from the |Y| maximum, refined on the conductance peak; fp from
    the |Y| minimum after fs, refined parabolically on log|Y|, or derived
    from the deloaded branch parameters when loss washes the minimum out.
    Spur extrema are ignored: only the global extrema are used.
    """
    y = np.asarray(y, dtype=complex)
    f = grid.points
    n = len(f)
    if y.shape != (n,):
        raise ValueError("admittance and grid lengths differ")
    mag = np.abs(y)
    i_s = int(np.argmax(mag))
    if i_s in (0, n - 1):
        raise ExtractionError("admittance maximum sits on the sweep boundary; widen the sweep")
    i_p = i_s + int(np.argmin(mag[i_s:]))
    if i_p in (i_s, n - 1):
        raise ExtractionError("admittance minimum sits on the sweep boundary; widen the sweep")

    log_mag = np.log(mag)
    fp_parab = _parabolic_vertex(f, log_mag, i_p)

    g = y.real
    i_g = _argmax_near(g, f, i_s, rel_window=0.02)
    if i_g in (0, n - 1):
        raise ExtractionError("conductance maximum sits on the sweep boundary; widen the sweep")
    fs = _parabolic_vertex(f, g, i_g)
    g_peak = float(g[i_g])
    b_s = float(np.interp(fs, f, y.imag))

    fp = fp_parab
    if g_peak > 0.0 and b_s > 0.0 and b_s / g_peak > STATIC_LOAD_SWITCH:
        c0_hat = b_s / (TWO_PI * fs)
        rm_hat = 1.0 / g_peak
        q_hat = _deloaded_phase_q(y, f, fs, c0_hat)
        if q_hat > 0.0:
            lm_hat = q_hat * rm_hat / (TWO_PI * fs)
            cm_hat = 1.0 / ((TWO_PI * fs) ** 2 * lm_hat)
            fp = fs * float(np.sqrt(1.0 + cm_hat / c0_hat))
    if not fp > fs:
        raise ExtractionError("anti-resonance does not lie above the series resonance")
    return float(fs), float(fp)


def extract_kt2(fs: float, fp: float) -> float:
    """Coupling from the resonance pair: kt2 = (pi^2/8) (fp^2 - fs^2) / fp^2."""
    if not fp > fs:
        raise ValueError("fp must exceed fs")
    return float((np.pi**2 / 8.0) * (fp**2 - fs**2) / fp**2)


def extract_q(y, grid: FrequencyGrid, fs: float) -> float:
    """Quality factor from the phase slope of the deloaded admittance at fs.

    Q = (fs/2) |d(phase)/df| evaluated with a central difference after
    subtracting the static branch j*w*c0_hat, c0_hat = Im(Y(fs)) / w(fs).
    Warns (PrecisionWarning) when fewer than MIN_POINTS_IN_RESONANCE grid
    points fall inside the fs/Q window.
    """
    y = np.asarray(y, dtype=complex)
    f = grid.points
    if not f[0] < fs < f[-1]:
        raise ValueError("fs must be interior to the grid")
    b_s = float(np.interp(fs, f, y.imag))
    c0_hat = max(b_s, 0.0) / (TWO_PI * fs)
    q = _deloaded_phase_q(y, f, fs, c0_hat)
    if q > 0.0:
        half = 0.5 * fs / q
        count = int(np.searchsorted(f, fs + half) - np.searchsorted(f, fs - half))
        if count < MIN_POINTS_IN_RESONANCE:
            warnings.warn(
                f"only {count} grid point(s) inside the fs/Q window; "
                "Q estimate is grid-limited",
                PrecisionWarning,
                stacklevel=2,
            )
    return q


def extract_q_width(y, grid: FrequencyGrid, fs: float) -> float:
    """Alternative Q estimate: fs over the half-maximum width of Re(Y).

    Assumes the conductance peak rides on a negligible baseline (true for
    ideal MBVD data; series parasitics add a baseline this does not remove).
    """
    y = np.asarray(y, dtype=complex)
    f = grid.points
    if not f[0] < fs < f[-1]:
        raise ValueError("fs must be interior to the grid")
    g = y.real
    i = _argmax_near(g, f, int(np.searchsorted(f, fs)), rel_window=0.02)
    half = 0.5 * g[i]
    j = i
    while j > 0 and g[j] > half:
        j -= 1
    k = i
    while k < len(f) - 1 and g[k] > half:
        k += 1
    if g[j] > half or g[k] > half:
        raise ExtractionError("conductance peak does not decay to half maximum in the sweep")
    f_lo = f[j] + (half - g[j]) * (f[j + 1] - f[j]) / (g[j + 1] - g[j])
    f_hi = f[k - 1] + (half - g[k - 1]) * (f[k] - f[k - 1]) / (g[k] - g[k - 1])
    return float(fs / (f_hi - f_lo))


@dataclass(frozen=True)
class FitResult:
    params: dict
    residual: float  # weighted RMS of the complex error
    iterations: int
    converged: bool
    at_bounds: tuple[str, ...] = ()
    history: tuple[float, ...] = ()

    def __post_init__(self):
        if self.residual < 0.0:
            raise ValueError("residual cannot be negative")

    def report_lines(self) -> list[str]:
        lines = [f"{name}={value:.17g}" for name, value in self.params.items()]
        lines += [
            f"residual={self.residual:.17g}",
            f"iterations={self.iterations}",
            f"converged={int(self.converged)}",
            f"at_bounds={','.join(self.at_bounds) if self.at_bounds else '-'}",
        ]
        return lines


_MBVD_FIELDS = ("c0", "rm", "lm", "cm", "rs", "ls")
_DESIGN_FIELDS = (
    "fs_series",
    "fs_shunt",
    "kt2",
    "q",
    "c0_series",
    "c0_shunt",
    "rs",
    "ls_series",
    "ls_shunt",
    "cp",
    "z0",
)


def _make_predictor(observed, template, grid):
    if isinstance(observed, SMatrix):
        data = observed.s21
        grid = observed.grid
    else:
        data = np.asarray(observed, dtype=complex)
        if grid is None:
            raise ValueError("an explicit grid is required for array observations")
        if data.shape != (len(grid),):
            raise ValueError("observation and grid lengths differ")

    if isinstance(template, LadderDesign):
        allowed = _DESIGN_FIELDS

        def predict(params: dict) -> np.ndarray:
            return build_network(replace(template, **params).build(), grid).s21

    elif isinstance(template, MbvdModel):
        allowed = _MBVD_FIELDS

        def predict(params: dict) -> np.ndarray:
            return admittance(replace(template, **params), grid)

    else:
        raise TypeError("template must be a LadderDesign or an MbvdModel")
    return data, grid, predict, allowed


def fit_model(
    observed,
    template,
    free,
    bounds: dict | None = None,
    weights=None,
    *,
    grid: FrequencyGrid | None = None,
    initial: dict | None = None,
    max_iter: int = 100,
    tol: float = 1e-10,
    seed: int = 0,
    restarts: int = 0,
) -> FitResult:
    """Least-squares fit of free template parameters to a complex response.

    Minimizes sum_f w(f) |model(f) - observed(f)|^2, where the response is
    S21 for (SMatrix, LadderDesign) pairs and admittance for array data
    against an MbvdModel.  Levenberg-Marquardt with a forward-difference
    Jacobian; trial steps are projected into the bounds box and only
    accepted if they reduce the cost, so the history is non-increasing.
    `tol` is the relative residual change that counts as converged;
    restarts > 0 reruns from seeded jitters of the initial guess and keeps
    the best outcome.
    """
    free = list(free)
    if not free:
        raise ValueError("at least one free parameter is required")
    data, grid, predict, allowed = _make_predictor(observed, template, grid)
    for name in free:
        if name not in allowed:
            raise ValueError(f"unknown free parameter {name!r}; allowed: {allowed}")

    n = len(grid)
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,):
            raise ValueError("weights and grid lengths differ")
        if np.any(w < 0.0) or not np.any(w > 0.0):
            raise ValueError("weights must be non-negative with a positive sum")
    sqrt_w = np.sqrt(w)
    w_sum = float(w.sum())

    bounds = dict(bounds or {})
    lo = np.array([bounds.get(name, (-np.inf, np.inf))[0] for name in free], dtype=float)
    hi = np.array([bounds.get(name, (-np.inf, np.inf))[1] for name in free], dtype=float)
    if np.any(lo >= hi):
        raise ValueError("each bound must satisfy lo < hi")

    if initial is None:
        initial = {}
    p0 = np.array(
        [float(initial.get(name, getattr(template, name))) for name in free], dtype=float
    )
    if np.any(p0 < lo) or np.any(p0 > hi):
        raise ValueError("initial guess violates the bounds")

    span = np.where(np.isfinite(hi - lo), hi - lo, np.nan)
    scale = np.maximum(np.abs(p0), np.where(np.isnan(span), 1.0, 1e-3 * span))
    scale = np.where(scale > 0.0, scale, 1.0)

    def residual_vec(p: np.ndarray) -> np.ndarray | None:
        try:
            model = predict(dict(zip(free, p)))
        except (ValueError, FloatingPointError):
            return None
        err = sqrt_w * (model - data)
        if not np.all(np.isfinite(err)):
            return None
        return np.concatenate((err.real, err.imag))

    def rms_of(cost: float) -> float:
        return float(np.sqrt(cost / w_sum))

    def run_single(p_start: np.ndarray):
        x = p_start / scale
        r = residual_vec(x * scale)
        if r is None:
            raise FitError("objective is not finite at the initial guess")
        cost = float(r @ r)
        history = [rms_of(cost)]
        lam = 1e-3
        iterations = 0
        converged = cost == 0.0
        while not converged and iterations < max_iter:
            iterations += 1
            # forward-difference Jacobian in scaled coordinates
            k = len(x)
            jac = np.empty((r.size, k))
            for idx in range(k):
                h = 1e-6 * max(1.0, abs(x[idx]))
                x_h = x.copy()
                x_h[idx] += h
                if x_h[idx] * scale[idx] > hi[idx]:
                    x_h[idx] = x[idx] - h
                    h = -h
                r_h = residual_vec(np.clip(x_h * scale, lo, hi))
                jac[:, idx] = 0.0 if r_h is None else (r_h - r) / h
            grad = jac.T @ r
            hess = jac.T @ jac
            diag = np.maximum(np.diag(hess), 1e-12)
            accepted = False
            while lam < 1e14:
                try:
                    step = np.linalg.solve(hess + lam * np.diag(diag), -grad)
                except np.linalg.LinAlgError:
                    lam *= 10.0
                    continue
                if np.linalg.norm(step) <= 1e-10 * (1.0 + np.linalg.norm(x)):
                    converged = True
                    break
                x_try = np.clip((x + step) * scale, lo, hi) / scale
                r_try = residual_vec(x_try * scale)
                if r_try is not None:
                    cost_try = float(r_try @ r_try)
                    if cost_try < cost:
                        rel_change = (cost - cost_try) / max(cost, 1e-300)
                        x, r, cost = x_try, r_try, cost_try
                        history.append(rms_of(cost))
                        lam = max(lam / 3.0, 1e-12)
                        accepted = True
                        if rel_change < tol or cost == 0.0:
                            converged = True
                        break
                lam *= 10.0
            if not accepted and not converged:
                break  # stuck: no downhill step found
        return x * scale, cost, iterations, converged, history

    rng = np.random.default_rng(seed)
    starts = [p0]
    for _ in range(restarts):
        jitter = p0 * (1.0 + 0.25 * rng.uniform(-1.0, 1.0, size=len(free)))
        starts.append(np.clip(jitter, lo, hi))

    best = None
    for p_start in starts:
        outcome = run_single(p_start)
        if best is None or outcome[1] < best[1]:
            best = outcome
    p_fit, cost, iterations, converged, history = best

    eps = 1e-9
    at_bounds = tuple(
        name
        for name, value, lo_i, hi_i in zip(free, p_fit, lo, hi)
        if (np.isfinite(lo_i) and abs(value - lo_i) <= eps * max(abs(lo_i), 1.0))
        or (np.isfinite(hi_i) and abs(value - hi_i) <= eps * max(abs(hi_i), 1.0))
    )
    return FitResult(
        params=dict(zip(free, (float(v) for v in p_fit))),
        residual=rms_of(cost),
        iterations=iterations,
        converged=bool(converged),
        at_bounds=at_bounds,
        history=tuple(history),
    )
