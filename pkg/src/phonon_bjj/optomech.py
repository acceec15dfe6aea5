"""Mean-field quadratic optomechanics and its adiabatic two-mode reduction.

One driven cavity mode ``a`` couples quadratically to two Kerr-nonlinear
mechanical modes ``b1, b2``. All rates are angular frequencies in the
caller's unit. The cavity equation is written in the frame of the drive and
the mechanical modes in the lab frame, so no explicitly growing factors
appear.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .bjj import BjjParams
from .ode import PHYSICAL_OPTIONS, IntegratorOptions, RawTrajectory, complex_rhs, integrate

log = logging.getLogger(__name__)

__all__ = [
    "FullSystemParams",
    "SteadyState",
    "ReducedParams",
    "ValidityCondition",
    "ValidityReport",
    "ComplexTrajectory",
    "PhononObservables",
    "steady_state",
    "effective_params",
    "derive_bjj_params",
    "simulate_full",
    "simulate_reduced",
    "phonon_observables",
    "validity_check",
    "VALIDITY_THRESHOLD",
]

VALIDITY_THRESHOLD = 10.0


def _pair(x) -> tuple[float, float]:
    if np.ndim(x) == 0:
        return (float(x), float(x))
    a, b = x
    return (float(a), float(b))


@dataclass(frozen=True)
class FullSystemParams:
    cavity_freq: float
    drive_freq: float
    drive_amp: float
    cavity_damping: float
    mech_freq: tuple[float, float]
    kerr: tuple[float, float] = (0.0, 0.0)
    quad_coupling: tuple[float, float] = (0.0, 0.0)
    mech_damping: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for name in ("mech_freq", "kerr", "quad_coupling", "mech_damping"):
            object.__setattr__(self, name, _pair(getattr(self, name)))
        if not self.cavity_damping > 0:
            raise ValueError(f"cavity_damping must be positive, got {self.cavity_damping}")
        if min(self.mech_damping) < 0:
            raise ValueError(f"mech_damping must be non-negative, got {self.mech_damping}")
        if min(self.quad_coupling) < 0:
            raise ValueError(
                "quad_coupling must be non-negative; the mechanical steady state "
                f"is not zero otherwise, got {self.quad_coupling}"
            )

    @property
    def cavity_detuning(self) -> float:
        return self.cavity_freq - self.drive_freq

    @classmethod
    def from_dict(cls, d: dict) -> "FullSystemParams":
        d = dict(d)
        if "cavity_detuning" in d:
            det = d.pop("cavity_detuning")
            d.setdefault("drive_freq", 0.0)
            d["cavity_freq"] = d["drive_freq"] + det
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "cavity_freq": self.cavity_freq,
            "drive_freq": self.drive_freq,
            "drive_amp": self.drive_amp,
            "cavity_damping": self.cavity_damping,
            "mech_freq": list(self.mech_freq),
            "kerr": list(self.kerr),
            "quad_coupling": list(self.quad_coupling),
            "mech_damping": list(self.mech_damping),
        }


@dataclass(frozen=True)
class SteadyState:
    alpha: complex
    beta: tuple[complex, complex] = (0j, 0j)


@dataclass(frozen=True)
class ReducedParams:
    """Effective two-mode parameters after eliminating the cavity.

    ``kerr`` and ``exchange`` are complex (the imaginary parts describe
    cavity-mediated two-phonon loss); ``kerr_approx`` and
    ``exchange_approx`` are their real approximants for a cavity damping
    small against the detunings.
    """

    shifted_freq: tuple[float, float]
    eff_coupling: tuple[complex, complex]
    detuning: tuple[float, float]
    kerr: tuple[complex, complex]
    exchange: tuple[complex, complex]
    kerr_approx: tuple[float, float]
    exchange_approx: float
    mech_damping: tuple[float, float] = (0.0, 0.0)
    alpha: complex = 0j

    @property
    def J(self) -> float:
        return self.exchange_approx


def steady_state(params: FullSystemParams) -> SteadyState:
    """alpha = -2i Omega / (kappa + 2i Delta_cav); both mechanical amplitudes vanish."""
    kappa = params.cavity_damping
    if not kappa > 0:
        raise ValueError("steady state needs positive cavity damping")
    alpha = -2j * params.drive_amp / (kappa + 2j * params.cavity_detuning)
    return SteadyState(alpha=alpha)


def _approx(num: float, den: float, what: str) -> float:
    if num == 0:
        return 0.0
    if den == 0:
        log.warning("%s undefined: detuning is zero", what)
        return math.nan
    return num / den


def effective_params(params: FullSystemParams) -> ReducedParams:
    alpha = steady_state(params).alpha
    n_cav = abs(alpha) ** 2
    kappa = params.cavity_damping
    det_cav = params.cavity_detuning
    g1, g2 = params.quad_coupling
    w = tuple(w0 + 2 * gi * n_cav for w0, gi in zip(params.mech_freq, params.quad_coupling))
    G = (g1 * alpha, g2 * alpha)
    D = (det_cav - 2 * w[0], det_cav - 2 * w[1])
    den = tuple(d - 0.5j * kappa for d in D)
    if any(d == 0 for d in den):
        raise ZeroDivisionError("detuning and cavity damping both vanish")
    U = tuple(u0 - abs(Gi) ** 2 / di for u0, Gi, di in zip(params.kerr, G, den))
    pair = g1 * g2 * n_cav
    J = (-pair / den[1], -pair / den[0])
    U_approx = tuple(
        u0 - _approx(gi**2 * n_cav, d, f"kerr_approx[{i}]")
        for i, (u0, gi, d) in enumerate(zip(params.kerr, params.quad_coupling, D))
    )
    J_approx = -_approx(pair, D[0], "exchange_approx")
    return ReducedParams(
        shifted_freq=w,
        eff_coupling=G,
        detuning=D,
        kerr=U,
        exchange=J,
        kerr_approx=U_approx,
        exchange_approx=J_approx,
        mech_damping=params.mech_damping,
        alpha=alpha,
    )


def derive_bjj_params(reduced: ReducedParams, N_T: float) -> BjjParams:
    """Dimensionless junction parameters from the Hermitian approximants.

    The carrier ``J`` keeps its sign. For ``J < 0`` the rescaled clock runs
    backwards; :func:`bjj_state_from_phonons` absorbs the orientation.
    Unequal mechanical damping is rejected because the damped junction
    equations assume a common rate.
    """
    J = reduced.exchange_approx
    if not np.isfinite(J) or J == 0:
        raise ValueError("no two-phonon exchange: effective exchange coupling is zero or undefined")
    if N_T < 1:
        raise ValueError(f"N_T must be at least 1, got {N_T}")
    U1, U2 = reduced.kerr_approx
    w1, w2 = reduced.shifted_freq
    gm1, gm2 = reduced.mech_damping
    if not math.isclose(gm1, gm2, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"damped junction needs equal mechanical damping, got {gm1}, {gm2}")
    return BjjParams(
        g=(U1 + U2) / (2 * J),
        delta0=(w1 - w2) / (2 * J * N_T),
        delta_u=(U1 - U2) / (2 * J),
        gamma=gm1 / (abs(J) * N_T),
        J=J,
        N_T=N_T,
    )


def bjj_state_from_phonons(z: float, phi: float, params: BjjParams) -> tuple[float, float]:
    """Junction state for physical ``(z, phi)``.

    For negative exchange the clock ``2|J| N_T t`` is used and the phase
    is mirrored, which leaves the equations in their canonical form.
    """
    return (z, phi) if params.J > 0 else (z, -phi)


@dataclass
class ComplexTrajectory:
    """Complex amplitudes over time.

    The raw integration may be carried out in a frame rotating at
    ``frame_freqs`` (one angular frequency per component); evaluation
    always returns lab-frame amplitudes.
    """

    raw: RawTrajectory
    labels: tuple[str, ...]
    frame_freqs: tuple[float, ...]

    @property
    def times(self) -> np.ndarray:
        return self.raw.times

    def amplitudes(self, times=None) -> np.ndarray:
        """Lab-frame amplitudes, shape ``(len(times), n_modes)``."""
        if times is None:
            t = self.raw.times
            y = self.raw.states
        else:
            t = np.asarray(times, dtype=float)
            y = self.raw(t) if t.size else np.empty((0, 2 * len(self.labels)))
        c = np.ascontiguousarray(y).view(np.complex128)
        rot = np.exp(-1j * np.outer(t, self.frame_freqs))
        return c * rot

    def mode(self, label: str, times=None) -> np.ndarray:
        return self.amplitudes(times)[:, self.labels.index(label)]

    def mechanical(self, times=None) -> np.ndarray:
        """Columns ``(b1, b2)``."""
        amps = self.amplitudes(times)
        return amps[:, [self.labels.index("b1"), self.labels.index("b2")]]


def _full_field(params: FullSystemParams):
    kappa = params.cavity_damping
    det = params.cavity_detuning
    omega = params.drive_amp
    w1, w2 = params.mech_freq
    U1, U2 = params.kerr
    g1, g2 = params.quad_coupling
    gm1, gm2 = params.mech_damping
    lin1 = -(0.5 * gm1 + 1j * w1)
    lin2 = -(0.5 * gm2 + 1j * w2)

    def field(t, y):
        a, b1, b2 = y
        x1 = 2 * b1.real
        x2 = 2 * b2.real
        na = a.real * a.real + a.imag * a.imag
        n1 = b1.real * b1.real + b1.imag * b1.imag
        n2 = b2.real * b2.real + b2.imag * b2.imag
        da = -(0.5 * kappa + 1j * (det + g1 * x1 * x1 + g2 * x2 * x2)) * a - 1j * omega
        db1 = lin1 * b1 - 2j * U1 * n1 * b1 - 2j * g1 * na * x1
        db2 = lin2 * b2 - 2j * U2 * n2 * b2 - 2j * g2 * na * x2
        return np.array([da, db1, db2])

    return field


def simulate_full(
    params: FullSystemParams,
    init: tuple[complex, complex, complex],
    span: tuple[float, float],
    opts: IntegratorOptions | None = None,
) -> ComplexTrajectory:
    """Integrate the cavity plus both mechanical modes without any elimination.

    ``init`` is ``(a, b1, b2)``; ``a`` is the full cavity amplitude in the
    drive frame (steady value plus fluctuation).
    """
    y0 = np.array(init, dtype=np.complex128).view(float)
    raw = integrate(complex_rhs(_full_field(params)), y0, span, opts or PHYSICAL_OPTIONS)
    return ComplexTrajectory(raw, ("a", "b1", "b2"), (0.0, 0.0, 0.0))


def simulate_reduced(
    reduced: ReducedParams,
    init: tuple[complex, complex],
    span: tuple[float, float],
    mode: str = "complex-coefficients",
    opts: IntegratorOptions | None = None,
) -> ComplexTrajectory:
    """Integrate the two-mode model with Kerr and two-phonon exchange terms.

    ``mode`` selects the complex coefficients or their Hermitian
    approximants. The exchange enters as ``-2i J b_j^2 b_i^*``, the sign
    generated by the Hamiltonian ``J (b1^+2 b2^2 + h.c.)``.

    Integration runs in the frame rotating at the shifted frequencies;
    that change of variables is exact, the returned trajectory evaluates
    to lab-frame amplitudes.
    """
    if mode == "complex-coefficients":
        U1, U2 = reduced.kerr
        J1, J2 = reduced.exchange
    elif mode == "hermitian-approx":
        U1, U2 = reduced.kerr_approx
        J1 = J2 = reduced.exchange_approx
    else:
        raise ValueError(f"mode must be complex-coefficients or hermitian-approx, got {mode!r}")
    vals = (U1, U2, J1, J2)
    if not all(cmath.isfinite(complex(v)) for v in vals):
        raise ValueError(f"reduced parameters must be finite, got {vals}")
    w1, w2 = reduced.shifted_freq
    gm1, gm2 = reduced.mech_damping
    beat = 2 * (w1 - w2)
    c1 = -0.5 * gm1
    c2 = -0.5 * gm2

    def field(t, y):
        b1, b2 = y
        n1 = b1.real * b1.real + b1.imag * b1.imag
        n2 = b2.real * b2.real + b2.imag * b2.imag
        ph = cmath.exp(1j * beat * t) if beat else 1.0
        db1 = c1 * b1 - 2j * U1 * n1 * b1 - 2j * J1 * b2 * b2 * b1.conjugate() * ph
        db2 = c2 * b2 - 2j * U2 * n2 * b2 - 2j * J2 * b1 * b1 * b2.conjugate() / ph
        return np.array([db1, db2])

    b0 = np.array(init, dtype=np.complex128)
    t0 = float(span[0])
    b0 = b0 * np.exp(1j * np.array([w1, w2]) * t0)
    raw = integrate(complex_rhs(field), b0.view(float), span, opts or PHYSICAL_OPTIONS)
    return ComplexTrajectory(raw, ("b1", "b2"), (w1, w2))


@dataclass
class PhononObservables:
    """Per-sample populations, phases and Josephson coordinates.

    ``phase_defined`` is False where either mode is (numerically) empty;
    ``phi`` is NaN there and unwrapped continuously elsewhere.
    """

    t: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    N_T: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    phase_defined: np.ndarray = field(repr=False)


def phonon_observables(
    traj: ComplexTrajectory | np.ndarray,
    N_T0: float,
    times=None,
    remove_rotation: tuple[float, float] | None = None,
    phase_floor: float = 1e-12,
) -> PhononObservables:
    """Populations, ``z = (n1 - n2)/N_T0`` and unwrapped ``phi = theta2 - theta1``.

    ``traj`` is a trajectory or a ``(n, 2)`` array of ``(b1, b2)`` samples
    (then ``times`` gives their times). ``remove_rotation`` strips the free
    rotation ``exp(-i w_i t)`` from the phases before differencing.
    """
    if not N_T0 > 0:
        raise ValueError(f"N_T0 must be positive, got {N_T0}")
    if isinstance(traj, ComplexTrajectory):
        b = traj.mechanical(times)
        t = traj.times if times is None else np.asarray(times, dtype=float)
    else:
        b = np.atleast_2d(np.asarray(traj, dtype=np.complex128))
        t = np.zeros(len(b)) if times is None else np.asarray(times, dtype=float)
    if remove_rotation is not None:
        b = b * np.exp(1j * np.outer(t, remove_rotation))
    n = np.abs(b) ** 2
    theta = np.angle(b)
    defined = (n[:, 0] > phase_floor * N_T0) & (n[:, 1] > phase_floor * N_T0)
    phi = np.full(len(t), np.nan)
    raw_phi = theta[:, 1] - theta[:, 0]
    if defined.any():
        phi[defined] = np.unwrap(raw_phi[defined])
    return PhononObservables(
        t=t,
        n1=n[:, 0],
        n2=n[:, 1],
        theta1=theta[:, 0],
        theta2=theta[:, 1],
        N_T=n[:, 0] + n[:, 1],
        z=(n[:, 0] - n[:, 1]) / N_T0,
        phi=phi,
        phase_defined=defined,
    )


@dataclass(frozen=True)
class ValidityCondition:
    """One approximation requirement, ``lhs >> rhs``.

    ``passed`` means ``ratio = lhs / rhs`` reached the threshold.
    """

    name: str
    lhs: float
    rhs: float
    ratio: float
    passed: bool


@dataclass(frozen=True)
class ValidityReport:
    conditions: tuple[ValidityCondition, ...]
    threshold: float

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> ValidityCondition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "all_passed": self.all_passed,
            "conditions": [
                {"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "ratio": c.ratio, "passed": c.passed}
                for c in self.conditions
            ],
        }


def _condition(name, lhs, rhs, threshold):
    ratio = math.inf if rhs == 0 else lhs / rhs
    return ValidityCondition(name, float(lhs), float(rhs), float(ratio), ratio >= threshold)


def validity_check(params: FullSystemParams, threshold: float = VALIDITY_THRESHOLD) -> ValidityReport:
    """Evaluate the four approximations behind the reduced model.

    Conditions: strong drive ``|alpha| >> 1``; cavity damping above every
    effective coupling and mechanical damping; detunings small against the
    mechanical frequencies and the cavity detuning; detuning mismatch and
    cavity damping small against each detuning.
    """
    red = effective_params(params)
    alpha = abs(red.alpha)
    kappa = params.cavity_damping
    slow = max(max(abs(G) for G in red.eff_coupling), max(params.mech_damping))
    fast = min(min(red.shifted_freq), abs(params.cavity_detuning))
    det = min(abs(d) for d in red.detuning)
    spread = max(abs(red.detuning[0] - red.detuning[1]), kappa)
    return ValidityReport(
        (
            _condition("strong_drive", alpha, 1.0, threshold),
            _condition("cavity_hierarchy", kappa, slow, threshold),
            _condition("rotating_wave", fast, max(abs(d) for d in red.detuning), threshold),
            _condition("near_degenerate", det, spread, threshold),
        ),
        threshold,
    )
