"""Closed-form predictors and trajectory diagnostics for the junction."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .bjj import BjjParams, BjjTrajectory, simulate_bjj
from .ode import BJJ_OPTIONS, IntegratorOptions, detect_zero_crossings

log = logging.getLogger(__name__)

__all__ = [
    "CriticalValues",
    "LinearFrequencies",
    "PotentialCurve",
    "RegimeReport",
    "StationaryPoint",
    "ContourGrid",
    "CriticalDelta",
    "TransitionTime",
    "mst_condition",
    "critical_g",
    "critical_z",
    "critical_values",
    "linear_frequencies",
    "potential",
    "potential_curve",
    "hessian",
    "classify_stationary_points",
    "classify_regime",
    "estimate_frequency",
    "critical_delta",
    "damping_transition_time",
    "energy_contours",
    "regime_onset",
]

MEAN_Z_THRESHOLD = 0.05
# |phi(end) - phi(start)| above this many multiples of pi marks a running phase
WINDING_THRESHOLD = 2.0
DEFAULT_WINDOW = (20.0, 200.0)
MIN_CROSSINGS = 5
SAMPLES_PER_UNIT = 100


class FrequencyError(ValueError):
    pass


@dataclass(frozen=True)
class CriticalValues:
    g_c: float
    z_c: float
    delta_crit: float
    H0: float


@dataclass(frozen=True)
class LinearFrequencies:
    """Small-oscillation frequencies; ``*_phys`` are multiplied by 2 J N_T.

    ``omega_L`` is NaN when ``g >= 1``.
    """

    omega0: float
    omega_L: float
    omega_ac: float
    omega0_phys: float
    omega_L_phys: float
    omega_ac_phys: float

    @property
    def omega_L_defined(self) -> bool:
        return not math.isnan(self.omega_L)


@dataclass(frozen=True)
class PotentialCurve:
    H0: float
    g: float
    delta: float
    z: np.ndarray
    W_minus_H0: np.ndarray


@dataclass(frozen=True)
class StationaryPoint:
    z: float
    phi: float
    m: int
    kind: str


@dataclass(frozen=True)
class RegimeReport:
    phase_mode: str
    self_trapped: bool
    mean_z: float
    sign_changes: int
    winding: float
    dominant_freq: float
    window: tuple[float, float]
    inconclusive: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ContourGrid:
    """Energy on a grid; ``H[i, j]`` belongs to ``(z[j], phi[i])``."""

    z: np.ndarray
    phi: np.ndarray
    H: np.ndarray


class CriticalDelta(NamedTuple):
    delta_crit: float
    trapped_at_zero: bool
    bracket: tuple[float, float]


class TransitionTime(NamedTuple):
    tau: float
    trapped_from_start: bool


def _H(z, phi, g, delta):
    return delta * z + 0.5 * g * z * z + 0.5 * (1 - z * z) * np.cos(2 * phi)


def mst_condition(z0: float, phi0: float, g: float, delta: float = 0.0) -> tuple[float, bool]:
    """Initial energy and the self-trapping verdict ``H0 > 1/2``.

    Only defined for the symmetric junction.
    """
    if delta != 0:
        raise ValueError("closed-form trapping criterion needs delta = 0; use critical_delta")
    if abs(z0) > 1:
        raise ValueError(f"|z0| must not exceed 1, got {z0}")
    H0 = float(_H(z0, phi0, g, 0.0))
    return H0, H0 > 0.5


def critical_g(z0: float, phi0: float) -> float:
    if z0 == 0:
        raise ZeroDivisionError("critical self-interaction is undefined for z0 = 0")
    return (1 - (1 - z0 * z0) * math.cos(2 * phi0)) / (z0 * z0)


def critical_z(phi0: float, g: float) -> float:
    """Initial imbalance above which a junction with ``g > 1`` self-traps."""
    c = math.cos(2 * phi0)
    if g <= c:
        raise ValueError(f"no real critical imbalance: g={g} does not exceed cos(2 phi0)={c}")
    if g <= 1:
        raise ValueError(f"critical imbalance needs g > 1, got {g}")
    num = 1 - c
    if num <= 1e-15:
        log.warning("phi0 is a multiple of pi: critical imbalance degenerates to 0")
        return 0.0
    return math.sqrt(num / (g - c))


def critical_values(z0: float, phi0: float, g: float, delta_crit: float = math.nan) -> CriticalValues:
    """Bundle g_c, z_c and H0 for one initial state.

    ``z_c`` is NaN where it is undefined (``g <= 1``).
    """
    try:
        zc = critical_z(phi0, g)
    except ValueError:
        zc = math.nan
    gc = critical_g(z0, phi0) if z0 != 0 else math.inf
    return CriticalValues(gc, zc, delta_crit, float(_H(z0, phi0, g, 0.0)))


def linear_frequencies(g: float, delta: float = 0.0, J: float = 1.0, N_T: float = 1.0) -> LinearFrequencies:
    scale = 2 * abs(J) * N_T
    w0 = math.sqrt(2.0)
    wL = math.sqrt(2 * (1 - g)) if g < 1 else math.nan
    wac = 2 * abs(delta)
    return LinearFrequencies(w0, wL, wac, w0 * scale, wL * scale, wac * scale)


def potential(z, H0: float, g: float, delta: float = 0.0):
    """Effective potential W(z) of a particle with energy ``H0``."""
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > 1):
        raise ValueError("potential is defined for |z| <= 1")
    return (
        H0 + 4 * H0**2 - 1
        - 8 * H0 * delta * z
        + 2 * (1 + 2 * delta**2 - 2 * H0 * g) * z**2
        + 4 * delta * g * z**3
        + (g**2 - 1) * z**4
    )


def potential_curve(z0: float, phi0: float, g: float, delta: float = 0.0, n: int = 401) -> PotentialCurve:
    H0 = float(_H(z0, phi0, g, delta))
    z = np.linspace(-1.0, 1.0, n)
    return PotentialCurve(H0, g, delta, z, potential(z, H0, g, delta) - H0)


def hessian(z: float, phi: float, g: float, delta: float = 0.0) -> np.ndarray:
    """Second derivatives of H_J in (z, phi); ``delta`` only shifts the gradient."""
    c, s = math.cos(2 * phi), math.sin(2 * phi)
    return np.array([
        [g - c, 2 * z * s],
        [2 * z * s, -2 * (1 - z * z) * c],
    ])


def _kind(hess: np.ndarray, tol: float = 1e-12) -> str:
    ev = np.linalg.eigvalsh(hess)
    if np.any(np.abs(ev) <= tol):
        return "degenerate"
    if np.all(ev > 0):
        return "minimum"
    if np.all(ev < 0):
        return "maximum"
    return "saddle"


def classify_stationary_points(g: float, delta: float = 0.0) -> list[StationaryPoint]:
    """Points ``[0, m pi]`` and ``[0, (m + 1/2) pi]`` for ``m`` in {0, 1}."""
    if delta != 0:
        raise ValueError("stationary points are only tabulated for delta = 0")
    out = []
    for m in (0, 1):
        for phi in (m * math.pi, (m + 0.5) * math.pi):
            out.append(StationaryPoint(0.0, phi, m, _kind(hessian(0.0, phi, g))))
    return out


def estimate_frequency(t, x, window: tuple[float, float] | None = None) -> float:
    """Angular frequency from the mean gap between mean-crossings of ``x``.

    Crossings are located by linear interpolation between samples. The
    count is trimmed to an odd number so the gaps span whole periods even
    when rising and falling half-periods differ.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if window is not None:
        keep = (t >= window[0]) & (t <= window[1])
        t, x = t[keep], x[keep]
    if len(t) < 2:
        raise FrequencyError("need at least two samples")
    y = x - np.mean(x)
    s = np.signbit(y)
    idx = np.nonzero(s[:-1] != s[1:])[0]
    if len(idx) < 4:
        raise FrequencyError(f"only {len(idx)} crossings in window; need at least 4")
    t0, t1, y0, y1 = t[idx], t[idx + 1], y[idx], y[idx + 1]
    crossings = t0 - y0 * (t1 - t0) / (y1 - y0)
    if len(crossings) % 2 == 0:
        crossings = crossings[:-1]
    gaps = len(crossings) - 1
    return math.pi * gaps / (crossings[-1] - crossings[0])


def _effective_series(traj: BjjTrajectory, grid: np.ndarray):
    y = traj.raw(grid)
    z, phi = y[:, 0], y[:, 1]
    if traj.kind == "damped":
        z = z * np.exp(0.5 * traj.params.gamma * grid)
    return z, phi


def classify_regime(
    traj: BjjTrajectory,
    window: tuple[float, float] | None = DEFAULT_WINDOW,
) -> RegimeReport:
    """Regime of a trajectory over ``window`` (in the integration variable).

    Damped and rescaled runs are judged on the effective imbalance ``z'``.
    Self-trapped means no sign change of the imbalance and a mean
    imbalance above ``MEAN_Z_THRESHOLD``. The phase is running when it
    advances by more than ``WINDING_THRESHOLD`` multiples of pi; otherwise
    the centre of its excursion decides between zero and pi/2 phase.
    """
    raw = traj.raw
    lo, hi = window if window is not None else (raw.t0, raw.t1)
    lo, hi = max(lo, raw.t0), min(hi, raw.t1)
    if not hi > lo:
        raise ValueError(f"window {window!r} does not overlap trajectory span [{raw.t0}, {raw.t1}]")
    n = max(2001, int((hi - lo) * SAMPLES_PER_UNIT) + 1)
    grid = np.linspace(lo, hi, n)
    z, phi = _effective_series(traj, grid)

    sign_changes = len(detect_zero_crossings(raw, 0, "any", window=(lo, hi)))
    mean_z = float(np.trapezoid(z, grid) / (hi - lo))
    winding = float((phi[-1] - phi[0]) / math.pi)
    running = abs(winding) > WINDING_THRESHOLD
    trapped = sign_changes == 0 and abs(mean_z) > MEAN_Z_THRESHOLD

    if running:
        mode = "running-phase"
    else:
        # midpoint of the excursion; near a separatrix the phase lingers
        # at the turning points, which biases a time average
        centre = 0.5 * (float(phi.min()) + float(phi.max()))
        offset = abs(centre - math.pi * round(centre / math.pi))
        mode = "zero-phase" if offset < math.pi / 4 else "half-pi-phase"

    try:
        freq = estimate_frequency(grid, z)
    except FrequencyError:
        freq = math.nan
    y = z - np.mean(z)
    mean_crossings = int(np.count_nonzero(np.signbit(y[:-1]) != np.signbit(y[1:])))
    stationary = float(np.ptp(z)) < 1e-9 and float(np.ptp(phi)) < 1e-9
    inconclusive = not running and not stationary and mean_crossings < MIN_CROSSINGS
    if inconclusive:
        log.debug(
            "window [%g, %g] holds only %d mean crossings; regime inconclusive",
            lo, hi, mean_crossings,
        )
    return RegimeReport(
        phase_mode=mode,
        self_trapped=trapped,
        mean_z=mean_z,
        sign_changes=sign_changes,
        winding=winding,
        dominant_freq=freq,
        window=(float(lo), float(hi)),
        inconclusive=inconclusive,
    )


def regime_onset(traj: BjjTrajectory, width: float, step: float | None = None) -> float:
    """Start of the first sliding window after which every window is trapped.

    Returns NaN when the final window is not trapped.
    """
    raw = traj.raw
    step = step or width / 4
    starts = np.arange(raw.t0, raw.t1 - width + 1e-12, step)
    trapped = [classify_regime(traj, (s, s + width)).self_trapped for s in starts]
    if not trapped or not trapped[-1]:
        return math.nan
    k = len(trapped) - 1
    while k > 0 and trapped[k - 1]:
        k -= 1
    return float(starts[k])


def critical_delta(
    z0: float,
    phi0: float,
    g: float,
    gamma: float = 0.0,
    delta_hi: float = 5.0,
    width: float = 1e-3,
    span: tuple[float, float] = (0.0, 200.0),
    window: tuple[float, float] = DEFAULT_WINDOW,
    opts: IntegratorOptions | None = None,
) -> CriticalDelta:
    """Smallest asymmetry that self-traps the junction, found by bisection.

    Each probe simulates the undamped junction and asks
    :func:`classify_regime` for a verdict.
    """
    if gamma != 0:
        raise ValueError(
            "critical asymmetry search runs on the undamped junction; "
            "use damping_transition_time for gamma > 0"
        )
    opts = opts or BJJ_OPTIONS

    def trapped(delta: float) -> bool:
        traj = simulate_bjj(BjjParams(g=g, delta0=delta), (z0, phi0), span, opts)
        return classify_regime(traj, window).self_trapped

    if trapped(0.0):
        return CriticalDelta(0.0, True, (0.0, 0.0))
    if not trapped(delta_hi):
        raise ValueError(f"no transition in range: untrapped up to delta = {delta_hi}")
    lo, hi = 0.0, delta_hi
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if trapped(mid):
            hi = mid
        else:
            lo = mid
    return CriticalDelta(0.5 * (lo + hi), False, (lo, hi))


def damping_transition_time(delta0: float, delta_u: float, delta_crit: float, gamma: float) -> TransitionTime:
    """Stretched time at which 2 delta0/(2 - gamma tau) + delta_u reaches ``delta_crit``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if delta_crit <= delta_u:
        return TransitionTime(0.0, True)
    tau = (2 - 2 * delta0 / (delta_crit - delta_u)) / gamma
    return TransitionTime(tau, tau <= 0)


def energy_contours(
    g: float,
    delta: float = 0.0,
    z_range: tuple[float, float] = (-1.0, 1.0),
    phi_range: tuple[float, float] = (0.0, math.pi),
    n_z: int = 201,
    n_phi: int = 201,
) -> ContourGrid:
    if z_range[0] < -1 or z_range[1] > 1:
        raise ValueError("contour grid must lie within |z| <= 1")
    z = np.linspace(z_range[0], z_range[1], n_z)
    phi = np.linspace(phi_range[0], phi_range[1], n_phi)
    H = _H(z[None, :], phi[:, None], g, delta)
    return ContourGrid(z, phi, H)
