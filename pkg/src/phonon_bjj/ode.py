"""Adaptive Dormand-Prince 5(4) integrator with dense output.

The engine is real-valued only. Complex systems are integrated by viewing
their state as interleaved (re, im) pairs, see :func:`complex_rhs`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "IntegratorOptions",
    "RawTrajectory",
    "IntegrationError",
    "integrate",
    "detect_zero_crossings",
    "resample",
    "complex_rhs",
]

RHS = Callable[[float, np.ndarray], np.ndarray]

# Dormand-Prince tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)
# Hairer's continuous extension (order 4)
D1, D3, D4, D5, D6, D7 = (
    -12715105075 / 11282082432,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)

_C = np.array([0.0, C2, C3, C4, C5, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [A21]
_A[2, :2] = [A31, A32]
_A[3, :3] = [A41, A42, A43]
_A[4, :4] = [A51, A52, A53, A54]
_A[5, :5] = [A61, A62, A63, A64, A65]
_B = np.array([A71, 0.0, A73, A74, A75, A76])
_E = np.array([E1, 0.0, E3, E4, E5, E6, E7])
_D = np.array([D1, 0.0, D3, D4, D5, D6, D7])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


class IntegrationError(RuntimeError):
    """Raised when the integrator cannot continue.

    ``t`` is the last time reached; ``state`` the state at failure when
    available.
    """

    def __init__(self, message: str, t: float, state: np.ndarray | None = None):
        super().__init__(message)
        self.t = t
        self.state = state


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf
    dense_output: bool = True
    max_steps: int = 10_000_000
    first_step: float | None = None

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.max_step > 0:
            raise ValueError(f"max_step must be positive, got {self.max_step}")

    def scaled(self, factor: float) -> "IntegratorOptions":
        """Return a copy with both tolerances multiplied by ``factor``."""
        return IntegratorOptions(
            self.rel_tol * factor, self.abs_tol * factor, self.max_step,
            self.dense_output, self.max_steps, self.first_step,
        )


# Defaults for the dimensionless Josephson equations and for models in
# physical angular-frequency units.
BJJ_OPTIONS = IntegratorOptions(rel_tol=1e-9, abs_tol=1e-12)
PHYSICAL_OPTIONS = IntegratorOptions(rel_tol=1e-8, abs_tol=1e-10)


@dataclass
class RawTrajectory:
    """Accepted mesh of an integration plus its piecewise quartic interpolant.

    ``coeffs`` has shape ``(n_steps, 5, dim)`` and holds the Hairer dense
    output vectors of each step; it is ``None`` when dense output was off.
    """

    times: np.ndarray
    states: np.ndarray
    coeffs: np.ndarray | None = None
    n_rhs: int = 0
    options: IntegratorOptions = field(default_factory=IntegratorOptions)

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    @property
    def has_dense(self) -> bool:
        return self.coeffs is not None

    def __call__(self, t):
        """Evaluate the interpolant at scalar or array ``t``.

        Returns shape ``(dim,)`` for scalar input and ``(len(t), dim)``
        otherwise. Stored mesh times return the stored states exactly.
        """
        if self.coeffs is None:
            raise ValueError("trajectory was integrated without dense output")
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        times = self.times
        span = times[-1] - times[0]
        slack = 1e-12 * max(abs(span), 1.0)
        if tt.size and (tt.min() < times[0] - slack or tt.max() > times[-1] + slack):
            bad = tt[(tt < times[0] - slack) | (tt > times[-1] + slack)][0]
            raise ValueError(
                f"time {bad!r} outside trajectory span [{times[0]!r}, {times[-1]!r}]"
            )
        idx = np.searchsorted(times, tt, side="right") - 1
        idx = np.clip(idx, 0, len(times) - 2)
        h = times[idx + 1] - times[idx]
        theta = ((tt - times[idx]) / h)[:, None]
        theta1 = 1.0 - theta
        c = self.coeffs[idx]
        out = c[:, 0] + theta * (c[:, 1] + theta1 * (c[:, 2] + theta * (c[:, 3] + theta1 * c[:, 4])))
        # exact reproduction at mesh points
        hit = np.searchsorted(times, tt)
        hit = np.clip(hit, 0, len(times) - 1)
        exact = times[hit] == tt
        if exact.any():
            out[exact] = self.states[hit[exact]]
        return out[0] if scalar else out


def _initial_step(rhs, t0, y0, f0, direction, order, rtol, atol, max_step):
    scale = atol + np.abs(y0) * rtol
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y0 + h0 * direction * f0
    f1 = rhs(t0 + h0 * direction, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / (order + 1))
    return min(100 * h0, h1, max_step)


def integrate(
    rhs: RHS,
    y0: Sequence[float] | np.ndarray,
    span: tuple[float, float],
    opts: IntegratorOptions | None = None,
) -> RawTrajectory:
    """Integrate ``dy/dt = rhs(t, y)`` over ``span = (t0, t1)`` with t0 < t1.

    Local error per step is kept below ``abs_tol + rel_tol * |y|`` in the
    RMS norm. Raises :class:`IntegrationError` on step-size underflow, on
    a non-finite derivative, or when ``max_steps`` is exhausted.
    """
    opts = opts or IntegratorOptions()
    t0, t_end = float(span[0]), float(span[1])
    if not t0 < t_end:
        raise ValueError(f"span start must precede span end, got {span!r}")
    y = np.array(y0, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("y0 must be a non-empty 1-D state vector")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"y0 must be finite, got {y!r}")

    rtol, atol = opts.rel_tol, opts.abs_tol
    max_step = min(opts.max_step, t_end - t0)
    dim = y.size

    K = np.empty((7, dim))
    K[0] = rhs(t0, y)
    if not np.all(np.isfinite(K[0])):
        raise IntegrationError(f"non-finite derivative at t={t0!r} for state {y!r}", t0, y.copy())
    n_rhs = 1
    h = opts.first_step or _initial_step(rhs, t0, y, K[0], 1.0, 4, rtol, atol, max_step)
    n_rhs += 1

    times = [t0]
    states = [y]
    stages = []
    t = t0
    n_steps = 0
    rejected_last = False

    # non-finite stages are caught through the error norm below
    with np.errstate(invalid="ignore", over="ignore"):
        while t < t_end:
            if n_steps >= opts.max_steps:
                raise IntegrationError(
                    f"step budget of {opts.max_steps} exhausted at t={t!r}", t, y.copy()
                )
            h_min = 16 * np.spacing(abs(t) if t != 0 else 1.0)
            if h < h_min:
                raise IntegrationError(
                    f"step size underflow (h={h:.3e}) at t={t!r}; problem too stiff "
                    "for the tolerance budget",
                    t,
                    y.copy(),
                )
            h = min(h, max_step)
            if t + h > t_end or t + 1.01 * h >= t_end:
                h = t_end - t

            for i in range(1, 6):
                K[i] = rhs(t + _C[i] * h, y + h * (_A[i, :i] @ K[:i]))
            y_new = y + h * (_B @ K[:6])
            t_new = t + h if t + h < t_end else t_end
            K[6] = rhs(t_new, y_new)
            n_rhs += 6

            err = (h * (_E @ K)) / (atol + rtol * np.maximum(np.abs(y), np.abs(y_new)))
            err_norm = math.sqrt(float(err @ err) / dim)
            if not math.isfinite(err_norm):
                _raise_nonfinite(K, y, y_new, t, h)

            if err_norm <= 1.0:
                if opts.dense_output:
                    stages.append(K.copy())
                t, y = t_new, y_new
                K[0] = K[6]
                times.append(t)
                states.append(y)
                n_steps += 1
                if err_norm == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err_norm ** -0.2))
                if rejected_last:
                    factor = min(factor, 1.0)
                rejected_last = False
                h *= factor
            else:
                h *= max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
                rejected_last = True

    times = np.array(times)
    states = np.array(states)
    coeffs = _dense_coefficients(times, states, np.array(stages)) if opts.dense_output else None
    return RawTrajectory(times=times, states=states, coeffs=coeffs, n_rhs=n_rhs, options=opts)


def _raise_nonfinite(K, y, y_new, t, h):
    for i in range(7):
        if not np.all(np.isfinite(K[i])):
            if i == 0:
                state = y
            elif i == 6:
                state = y_new
            else:
                state = y + h * (_A[i, :i] @ K[:i])
            ti = t + _C[i] * h
            raise IntegrationError(
                f"non-finite derivative at t={ti!r} for state {state!r}", ti, np.array(state)
            )
    raise IntegrationError(f"non-finite error estimate at t={t!r}", t, y.copy())


def _dense_coefficients(times, states, K):
    h = np.diff(times)[:, None]
    y0 = states[:-1]
    ydiff = states[1:] - y0
    bspl = h * K[:, 0] - ydiff
    return np.stack(
        (y0, ydiff, bspl, ydiff - h * K[:, 6] - bspl, h * np.einsum("j,njd->nd", _D, K)),
        axis=1,
    )


def resample(traj: RawTrajectory, grid) -> np.ndarray:
    """Evaluate the interpolant on ``grid``; returns shape ``(len(grid), dim)``."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        return np.empty((0, traj.dimension))
    return traj(grid)


def _component(traj: RawTrajectory, component: int, level: float):
    if not -traj.dimension <= component < traj.dimension:
        raise IndexError(
            f"component {component} out of range for dimension {traj.dimension}"
        )
    return lambda t: float(traj(t)[component]) - level


def detect_zero_crossings(
    traj: RawTrajectory,
    component: int,
    direction: str = "any",
    level: float = 0.0,
    window: tuple[float, float] | None = None,
    subdivisions: int = 4,
) -> np.ndarray:
    """Times where ``traj[component] - level`` changes sign.

    Each accepted step is scanned on ``subdivisions`` sub-intervals and
    every bracketed root refined with Brent's method on the interpolant.
    ``direction`` is one of ``"rising"``, ``"falling"`` or ``"any"``.
    A sample that is exactly zero counts as a crossing, with its direction
    taken from the neighbouring samples.
    """
    if direction not in ("rising", "falling", "any"):
        raise ValueError(f"direction must be rising, falling or any, got {direction!r}")
    if not traj.has_dense:
        raise ValueError("zero-crossing detection needs dense output")
    fn = _component(traj, component, level)

    mesh = traj.times
    if window is not None:
        lo, hi = window
        inner = mesh[(mesh > lo) & (mesh < hi)]
        mesh = np.concatenate(([max(lo, traj.t0)], inner, [min(hi, traj.t1)]))
    frac = np.arange(subdivisions) / subdivisions
    h = np.diff(mesh)
    grid = np.concatenate(((mesh[:-1, None] + h[:, None] * frac).ravel(), mesh[-1:]))
    vals = traj(grid)[:, component] - level

    xtol = max(traj.options.rel_tol * 1e-3, 1e-14) * max(1.0, abs(grid[-1]))
    roots = []
    n = len(grid)
    for i in range(n):
        v = vals[i]
        if v == 0.0:
            before = vals[i - 1] if i > 0 else 0.0
            after = vals[i + 1] if i < n - 1 else 0.0
            if before == 0.0 and after == 0.0:
                continue
            slope = after - before
            roots.append((grid[i], slope))
        elif i < n - 1:
            w = vals[i + 1]
            if w != 0.0 and (v < 0.0) != (w < 0.0):
                r = brentq(fn, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
                roots.append((r, w - v))
    if direction == "rising":
        out = [r for r, s in roots if s > 0]
    elif direction == "falling":
        out = [r for r, s in roots if s < 0]
    else:
        out = [r for r, _ in roots]
    return np.array(out, dtype=float)


def complex_rhs(fn: Callable[[float, np.ndarray], np.ndarray]) -> RHS:
    """Wrap a complex vector field as a real one over interleaved pairs."""

    def wrapped(t, y):
        return np.ascontiguousarray(fn(t, y.view(np.complex128)), dtype=np.complex128).view(float)

    return wrapped
