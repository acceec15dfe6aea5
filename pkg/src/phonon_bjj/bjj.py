"""Classical phase-space dynamics of the two-phonon Josephson junction.

State is ``(z, phi)``: population imbalance and phase difference. Time is
the rescaled clock ``2 J N_T t`` throughout; physical units only enter
through the carriers ``J`` and ``N_T`` when the tunneling current is formed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ode import BJJ_OPTIONS, IntegratorOptions, RawTrajectory, integrate

log = logging.getLogger(__name__)

__all__ = [
    "BjjParams",
    "BjjState",
    "BjjTrajectory",
    "bjj_rhs",
    "hamiltonian",
    "tunneling_current",
    "simulate_bjj",
    "simulate_damped",
    "simulate_rescaled",
    "rescaled_time",
    "inverse_rescaled_time",
    "symmetry_transform",
]

# fraction of 2/gamma left unreached by simulate_rescaled
SINGULAR_MARGIN = 1e-6


@dataclass(frozen=True)
class BjjParams:
    """Dimensionless junction parameters.

    ``delta0`` comes from the frequency mismatch, ``delta_u`` from the Kerr
    mismatch; the undamped equations only see their sum ``delta``.
    """

    g: float = 0.0
    delta0: float = 0.0
    delta_u: float = 0.0
    gamma: float = 0.0
    J: float = 1.0
    N_T: float = 1.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.N_T < 1:
            raise ValueError(f"N_T must be at least 1, got {self.N_T}")

    @property
    def delta(self) -> float:
        return self.delta0 + self.delta_u

    @classmethod
    def symmetric(cls, g: float, delta: float = 0.0, **kw) -> "BjjParams":
        """Undamped junction with the whole asymmetry put in ``delta0``."""
        return cls(g=g, delta0=delta, **kw)


@dataclass(frozen=True)
class BjjState:
    z: float
    phi: float

    def __post_init__(self):
        _check_z(self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.z, self.phi], dtype=float)


def _check_z(z):
    if np.any(np.abs(z) > 1.0):
        raise ValueError(f"population imbalance must satisfy |z| <= 1, got {z!r}")


@dataclass
class BjjTrajectory:
    """Sampled solution with derived observables.

    ``t`` is rescaled time. For damped and rescaled runs ``z_prime`` and
    ``tau`` hold the effective imbalance ``z exp(gamma t / 2)`` and the
    stretched clock; they are ``None`` otherwise. ``raw`` keeps the
    integrator output for dense evaluation in the integration variable
    (``t`` for plain and damped runs, ``tau`` for rescaled runs).
    """

    params: BjjParams
    t: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    raw: RawTrajectory
    kind: str = "undamped"
    z_prime: np.ndarray | None = None
    tau: np.ndarray | None = None
    stop_reason: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def clock(self) -> np.ndarray:
        """Samples of the integration variable."""
        return self.tau if self.kind == "rescaled" else self.t

    @property
    def H(self) -> np.ndarray:
        """Junction energy at each sample.

        For damped runs this is the energy of the equivalent rescaled
        system, evaluated with the instantaneous asymmetry.
        """
        p = self.params
        if self.kind == "undamped":
            return hamiltonian(self.z, self.phi, p)
        zp = self.z_prime
        d_eff = effective_asymmetry(self.tau, p)
        return d_eff * zp + 0.5 * p.g * zp**2 + 0.5 * (1 - zp**2) * np.cos(2 * self.phi)

    @property
    def I(self) -> np.ndarray:
        """Tunneling current in phonons per unit physical time."""
        p = self.params
        if self.kind == "undamped":
            return tunneling_current(self.z, self.phi, p)
        occupancy = np.exp(-p.gamma * self.t)
        return p.J * p.N_T**2 * (occupancy - self.z**2) * np.sin(2 * self.phi)

    def columns(self) -> dict[str, np.ndarray]:
        cols = {"t": self.t, "z": self.z, "phi": self.phi, "H": self.H, "I": self.I}
        if self.kind != "undamped":
            cols["z_prime"] = self.z_prime
            cols["tau"] = self.tau
        return cols

    def at(self, times) -> "BjjTrajectory":
        """Resample on ``times`` given in the integration variable."""
        times = np.asarray(times, dtype=float)
        y = self.raw(times) if times.size else np.empty((0, 2))
        return _assemble(self.params, times, y, self.raw, self.kind, self.stop_reason)


def bjj_rhs(state, params: BjjParams) -> tuple[float, float]:
    """Undamped equations of motion, ``(dz/dt, dphi/dt)``."""
    z, phi = (state.z, state.phi) if isinstance(state, BjjState) else state
    _check_z(z)
    s2, c2 = math.sin(2 * phi), math.cos(2 * phi)
    return (1 - z * z) * s2, params.delta + params.g * z - z * c2


def hamiltonian(z, phi, params: BjjParams):
    """H_J = delta z + g z^2 / 2 + (1 - z^2) cos(2 phi) / 2."""
    _check_z(z)
    return params.delta * z + 0.5 * params.g * z**2 + 0.5 * (1 - z**2) * np.cos(2 * phi)


def tunneling_current(z, phi, params: BjjParams):
    """I = J N_T^2 (1 - z^2) sin(2 phi)."""
    _check_z(z)
    return params.J * params.N_T**2 * (1 - z**2) * np.sin(2 * phi)


def rescaled_time(t, gamma: float):
    """tau = (2/gamma)(1 - exp(-gamma t/2)); identity for gamma = 0."""
    if gamma == 0:
        return t
    return -(2.0 / gamma) * np.expm1(-0.5 * gamma * np.asarray(t, dtype=float))


def inverse_rescaled_time(tau, gamma: float):
    if gamma == 0:
        return tau
    tau = np.asarray(tau, dtype=float)
    if np.any(tau >= 2.0 / gamma):
        raise ValueError(f"tau must stay below 2/gamma = {2.0 / gamma!r}")
    return -(2.0 / gamma) * np.log1p(-0.5 * gamma * tau)


def effective_asymmetry(tau, params: BjjParams):
    """Asymmetry of the rescaled system, 2 delta0 / (2 - gamma tau) + delta_u."""
    tau = np.asarray(tau, dtype=float)
    return 2 * params.delta0 / (2 - params.gamma * tau) + params.delta_u


def _as_state(init) -> BjjState:
    if isinstance(init, BjjState):
        return init
    z, phi = init
    return BjjState(float(z), float(phi))


def _assemble(params, clock, y, raw, kind, stop_reason=None):
    z, phi = y[:, 0], y[:, 1]
    if kind == "undamped":
        return BjjTrajectory(params, clock, z, phi, raw, kind, stop_reason=stop_reason)
    if kind == "damped":
        t = clock
        tau = rescaled_time(t, params.gamma)
        zp = z * np.exp(0.5 * params.gamma * t)
        return BjjTrajectory(params, t, z, phi, raw, kind, zp, tau, stop_reason)
    tau = clock
    t = inverse_rescaled_time(tau, params.gamma)
    # z' = z exp(gamma t/2) and exp(-gamma t/2) = 1 - gamma tau/2
    zp = z
    z_phys = zp * (1 - 0.5 * params.gamma * tau)
    return BjjTrajectory(params, t, z_phys, phi, raw, kind, zp, tau, stop_reason)


def _finish(params, raw, kind, output_times, stop_reason=None):
    if output_times is None:
        return _assemble(params, raw.times, raw.states, raw, kind, stop_reason)
    grid = np.asarray(output_times, dtype=float)
    return _assemble(params, grid, raw(grid), raw, kind, stop_reason)


def simulate_bjj(
    params: BjjParams,
    init,
    span: tuple[float, float] = (0.0, 50.0),
    opts: IntegratorOptions | None = None,
    output_times=None,
) -> BjjTrajectory:
    """Integrate the undamped junction; ``params.gamma`` is ignored."""
    state = _as_state(init)
    d, g = params.delta, params.g

    def rhs(t, y):
        z, phi = y
        return np.array([(1 - z * z) * math.sin(2 * phi), d + g * z - z * math.cos(2 * phi)])

    raw = integrate(rhs, state.as_array(), span, opts or BJJ_OPTIONS)
    return _finish(params, raw, "undamped", output_times)


def simulate_damped(
    params: BjjParams,
    init,
    span: tuple[float, float] = (0.0, 50.0),
    opts: IntegratorOptions | None = None,
    output_times=None,
) -> BjjTrajectory:
    """Integrate the damped junction in rescaled time ``t``.

    ``z`` is normalised by the initial total population, so the
    occupancy factor ``exp(-gamma t)`` multiplies the tunneling term.
    """
    state = _as_state(init)
    gm, d0, du, g = params.gamma, params.delta0, params.delta_u, params.g

    def rhs(t, y):
        z, phi = y
        decay = math.exp(-0.5 * gm * t)
        return np.array([
            (decay * decay - z * z) * math.sin(2 * phi) - 0.5 * gm * z,
            d0 + du * decay + g * z - z * math.cos(2 * phi),
        ])

    raw = integrate(rhs, state.as_array(), span, opts or BJJ_OPTIONS)
    return _finish(params, raw, "damped", output_times)


def simulate_rescaled(
    params: BjjParams,
    init,
    tau_span: tuple[float, float],
    opts: IntegratorOptions | None = None,
    output_times=None,
) -> BjjTrajectory:
    """Integrate the effective imbalance ``z'`` against the stretched clock.

    ``init`` is ``(z'(0), phi(0))``. For gamma > 0 the span is cut at
    ``(2/gamma)(1 - SINGULAR_MARGIN)`` where the asymmetry coefficient
    diverges; the cut is recorded in ``stop_reason``.
    """
    state = _as_state(init)
    gm, d0, du, g = params.gamma, params.delta0, params.delta_u, params.g
    t0, t1 = float(tau_span[0]), float(tau_span[1])
    stop_reason = None
    if gm > 0:
        tau_max = (2.0 / gm) * (1 - SINGULAR_MARGIN)
        if t0 >= tau_max:
            raise ValueError(f"tau span starts beyond the singular point 2/gamma = {2 / gm!r}")
        if t1 > tau_max:
            stop_reason = (
                f"stopped at tau={tau_max!r}: asymmetry coefficient diverges at 2/gamma"
            )
            log.warning(stop_reason)
            t1 = tau_max

    def rhs(tau, y):
        z, phi = y
        return np.array([
            (1 - z * z) * math.sin(2 * phi),
            2 * d0 / (2 - gm * tau) + du + g * z - z * math.cos(2 * phi),
        ])

    raw = integrate(rhs, state.as_array(), (t0, t1), opts or BJJ_OPTIONS)
    if output_times is not None:
        output_times = np.asarray(output_times, dtype=float)
        output_times = output_times[output_times <= t1]
    return _finish(params, raw, "rescaled", output_times, stop_reason)


def symmetry_transform(params: BjjParams, state) -> tuple[BjjParams, BjjState]:
    """Map ``delta -> -delta, g -> -g, phi -> pi/2 - phi``; ``z`` is unchanged.

    Both pieces of the asymmetry flip sign, so the map also holds for the
    damped equations.
    """
    st = _as_state(state)
    p = replace(params, g=-params.g, delta0=-params.delta0, delta_u=-params.delta_u)
    return p, BjjState(st.z, 0.5 * math.pi - st.phi)
