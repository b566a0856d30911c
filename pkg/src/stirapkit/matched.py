"""Generalized matched pulses: design, exact solutions, transfer formulas.

A constant angle theta_{n-1} makes the order-n trapping state an exact
constant of motion: the remaining dynamics is a two-level rotation

    B1(t) = B1(0) cos(phi) - i B2(0) sin(phi),
    B2(t) = B2(0) cos(phi) - i B1(0) sin(phi),
    B3(t) = B3(0),           phi(t) = (1/2) int Omega_{n-1},

which this module uses both as a designer target and as an analytic
oracle for the numerical propagator.  Designs run the angle recursion
backwards,

    theta_{k-1}(t) = (1/2) int_-inf^t Omega_k cos(theta_k) dt' + theta_{k-1}^0,
    Omega_{k-1}(t) = Omega_k(t) sin(theta_k(t)),

starting from the constant angle and an arbitrary nonnegative base
envelope, and finally emit P = Omega_0 sin(theta_0), S = Omega_0
cos(theta_0) as tabulated pulses (signed values allowed: a sign flip is
a pi phase flip of the field).
"""

from __future__ import annotations

import logging
import warnings

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .adiabatic import AngleSeries
from .dynamics import StateVector
from .errors import DomainViolation, NonpositiveArea, UnreachableTarget, ZeroArea
from .pulses import Family, PulseEnvelope, PulseSet, sech_squared, tabulated, zero

__all__ = [
    "MatchedSpec",
    "AnalyticState",
    "design",
    "analytic_evolution",
    "second_order_coherence_pulses",
    "second_order_transfer_populations",
    "complete_transfer_areas",
    "vitanov_model",
    "third_order_design",
    "third_order_constants",
    "third_order_projection",
    "pulse_pair_from_angles",
]

log = logging.getLogger(__name__)

_AREA_EPS = 1e-14
_F_CLIP_TOL = 1e-9


@dataclass(frozen=True)
class MatchedSpec:
    """Specification of an order-n generalized matched pulse pair.

    ``order`` n >= 1 asks for the order-n trapping state to be exact,
    i.e. theta_{n-1} = ``theta_const``.  ``base_envelope`` is the free
    generalized Rabi frequency Omega_{n-1}(t) (real, nonnegative) and
    ``free_constants`` holds the integration constants
    (theta_0^0, ..., theta_{n-2}^0) of the n-1 integrations; missing
    entries default to 0.
    """

    order: int
    theta_const: float
    base_envelope: PulseEnvelope
    free_constants: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not 0.0 < self.theta_const < np.pi:
            raise ValueError("constant angle must lie in (0, pi)")
        if not self.base_envelope.is_real():
            raise ValueError("base envelope must be real-valued")
        if len(self.free_constants) > max(self.order - 1, 0):
            raise ValueError(f"order {self.order} admits {self.order - 1} free constants")
        object.__setattr__(self, "free_constants", tuple(float(c) for c in self.free_constants))

    def constant(self, level: int) -> float:
        """theta_level^0, defaulting to 0 when unset."""
        if 0 <= level < len(self.free_constants):
            return self.free_constants[level]
        return 0.0


@dataclass(frozen=True)
class AnalyticState:
    """Dressed amplitudes of the exactly solvable two-level block."""

    b1: complex
    b2: complex
    b3: complex
    phi: float = 0.0

    def __post_init__(self):
        norm = np.sqrt(abs(self.b1) ** 2 + abs(self.b2) ** 2 + abs(self.b3) ** 2)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"analytic state norm {norm!r} deviates from 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.b1, self.b2, self.b3], dtype=complex)


# -- exact two-level solution ---------------------------------------------


def _half_area_between(env: PulseEnvelope, t0: float, t):
    """phi(t) = (1/2) * integral of the envelope from t0 to t."""
    if env.family is Family.ZERO:
        return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
    return 0.5 * np.real(env.cumulative_area(t) - env.cumulative_area(t0))


def analytic_evolution(
    omega_prev: PulseEnvelope, b0: AnalyticState, t0: float, t
) -> AnalyticState:
    """Exact trapped-frame evolution from ``t0`` to ``t``.

    ``omega_prev`` is the real nonnegative coupling Omega_{n-1} of the
    two-level block; the third (trapped) component never moves.
    """
    if not omega_prev.is_real():
        raise ValueError("coupling envelope must be real")
    phi = float(_half_area_between(omega_prev, t0, float(t)))
    c, s = np.cos(phi), np.sin(phi)
    return AnalyticState(
        b1=b0.b1 * c - 1j * b0.b2 * s,
        b2=b0.b2 * c - 1j * b0.b1 * s,
        b3=b0.b3,
        phi=b0.phi + phi,
    )


# -- generic designer ------------------------------------------------------


def pulse_pair_from_angles(times, omega0, theta0):
    """Tabulated P = Omega_0 sin(theta_0), S = Omega_0 cos(theta_0)."""
    times = np.asarray(times, dtype=float)
    omega0 = np.asarray(omega0, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    pump = tabulated(times, omega0 * np.sin(theta0))
    stokes = tabulated(times, omega0 * np.cos(theta0))
    return pump, stokes


def _cumulative_on_grid(times: np.ndarray, integrand: np.ndarray) -> np.ndarray:
    """Cumulative integral from the first grid point (spline antiderivative)."""
    anti = CubicSpline(times, integrand).antiderivative()
    return anti(times) - anti(times[0])


def design(spec: MatchedSpec, grid) -> PulseSet:
    """Pump/Stokes pair realizing the matched-pulse specification.

    The grid must cover the support of the base envelope.  The returned
    set carries real tabulated pump/Stokes with a zero detuning; when it
    is re-analyzed through the angle recursion, theta_{n-1} comes back
    constant.
    """
    times = np.asarray(grid, dtype=float)
    if times.ndim != 1 or times.size < 4 or not np.all(np.diff(times) > 0):
        raise ValueError("grid must be a strictly increasing 1-d array of length >= 4")
    omega = np.real(spec.base_envelope(times))
    scale = max(float(np.max(np.abs(omega))), 1.0)
    if np.any(omega < -1e-12 * scale):
        raise ValueError("base envelope must be nonnegative on the grid")
    omega = np.clip(omega, 0.0, None)

    theta = np.full_like(times, spec.theta_const)
    for k in range(spec.order - 1, 0, -1):
        # running state holds (theta_k, Omega_k); produce level k-1
        cum = 0.5 * _cumulative_on_grid(times, omega * np.cos(theta))
        if k == spec.order - 1:
            # left tail of the base envelope, constant cos factor
            try:
                tail = float(np.real(spec.base_envelope.cumulative_area(times[0])))
            except ValueError:
                tail = 0.0
            cum = cum + 0.5 * tail * np.cos(spec.theta_const)
        theta_new = cum + spec.constant(k - 1)
        if not np.all(np.isfinite(theta_new)):
            raise UnreachableTarget("angle iteration produced non-finite values")
        omega = omega * np.sin(theta)
        theta = theta_new

    pump, stokes = pulse_pair_from_angles(times, omega, theta)
    return PulseSet(pump=pump, stokes=stokes, detuning=zero())


# -- second order ----------------------------------------------------------


def _default_grid(env: PulseEnvelope, samples: int, pad: float = 1.3) -> np.ndarray:
    support = env.support(cutoff=1e-9)
    if support is None:
        raise ValueError("base envelope has unbounded support; pass a grid")
    lo, hi = support
    half = max(abs(lo), abs(hi), 1e-6) * pad
    return np.linspace(-half, half, samples)


def second_order_coherence_pulses(
    omega0: PulseEnvelope, theta1: float, grid=None, samples: int = 8001
) -> PulseSet:
    """Second-order matched pair mapping a 1-2 coherence onto 3-2.

    The superposition sin(theta_1) psi_1 - i cos(theta_1) psi_2 rides the
    order-2 trapping state and arrives as -sin(theta_1) psi_3 - i
    cos(theta_1) psi_2.  The total area must equal pi*tan(theta_1); the
    given envelope is rescaled to that area (the shape is free) and the
    factor logged.

    Returns pulses P = Omega_0 sin(pi A(t)/2 A_0), S = Omega_0
    cos(pi A(t)/2 A_0) with A(t) the running area of Omega_0.
    """
    if not 0.0 < theta1:
        raise ValueError("theta_1 must be positive")
    if theta1 >= np.pi / 2:
        raise UnreachableTarget(
            "theta_1 >= pi/2 needs infinite pulse area; no finite-area envelope works"
        )
    if not omega0.is_real():
        raise ValueError("base envelope must be real")
    area_actual = float(np.real(omega0.total_area()))
    if abs(area_actual) < _AREA_EPS:
        raise ZeroArea("base envelope has zero area")
    target_area = np.pi * np.tan(theta1)
    factor = target_area / area_actual
    if abs(factor - 1.0) > 1e-12:
        log.info(
            "rescaling base envelope amplitude by %.12g to reach area %.12g",
            factor, target_area,
        )
    env = omega0.scaled(factor)
    if grid is None:
        grid = _default_grid(env, samples)
    times = np.asarray(grid, dtype=float)
    running = np.real(env.cumulative_area(times))
    phase = np.pi * running / (2.0 * target_area)
    omega_vals = np.real(env(times))
    pump, stokes = pulse_pair_from_angles(times, omega_vals, phase)
    return PulseSet(pump=pump, stokes=stokes, detuning=zero())


def second_order_transfer_populations(A: float):
    """Asymptotic bare populations for transfer from state 1, area ``A``.

    Closed forms:

        p1 = pi^2/(pi^2+A^2) sin^2(sqrt(pi^2+A^2)/2)
        p2 = 4 pi^2 A^2/(pi^2+A^2)^2 sin^4(sqrt(pi^2+A^2)/4)
        p3 = [A^2 + pi^2 cos(sqrt(pi^2+A^2)/2)]^2 / (pi^2+A^2)^2

    The triple sums to 1 identically.
    """
    if not A > 0:
        raise NonpositiveArea(f"pulse area must be > 0, got {A}")
    n = np.pi**2 + A**2
    root = np.sqrt(n)
    p1 = (np.pi**2 / n) * np.sin(root / 2.0) ** 2
    p2 = (4.0 * np.pi**2 * A**2 / n**2) * np.sin(root / 4.0) ** 4
    p3 = (A**2 + np.pi**2 * np.cos(root / 2.0)) ** 2 / n**2
    total = p1 + p2 + p3
    assert abs(total - 1.0) < 1e-12, f"population identity violated: {total}"
    return (float(p1), float(p2), float(p3))


def complete_transfer_areas(n_max: int):
    """Areas A = pi*sqrt(16 n^2 - 1), n = 1..n_max, giving complete transfer."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return [float(np.pi * np.sqrt(16.0 * n**2 - 1.0)) for n in range(1, n_max + 1)]


def vitanov_model(alpha: float, T: float, grid=None, samples: int = 4001):
    """Squared-secant model with exactly linear-in-tanh mixing angle.

    Omega_0 = (alpha/2T) sech^2(t/T) and theta_0 = (pi/4)(tanh(t/T)+1),
    so tan(theta_1) = Omega_0 / (2 theta_dot_0) = alpha/pi is constant:
    the pair P = Omega_0 sin(theta_0), S = Omega_0 cos(theta_0) is a
    second-order matched pair with total area alpha.

    Returns the envelope and the exact order-0 angle series.
    """
    if not alpha > 0 or not T > 0:
        raise ValueError("alpha and T must be positive")
    env = sech_squared(alpha / (2.0 * T), T)
    if grid is None:
        grid = np.linspace(-12.0 * T, 12.0 * T, samples)
    times = np.asarray(grid, dtype=float)
    x = times / T
    theta = (np.pi / 4.0) * (np.tanh(x) + 1.0)
    omega = np.real(env(times))
    rate = (np.pi / (4.0 * T)) / np.cosh(x) ** 2
    series = AngleSeries(order=0, times=times, theta=theta, omega=omega, theta_dot=rate)
    return env, series


# -- third order -----------------------------------------------------------


def third_order_constants(A: float, target: str):
    """Constraint constants (alpha, theta_2) for a third-order design.

    ``target`` selects the asymptotic closure: "state3" fixes
    alpha = -4 pi/(pi^2 + A^2) (complete 1 -> 3 transfer for large area)
    and "state2" fixes alpha = 2/A (accumulation in the excited state).
    theta_2 follows from alpha = 1/tan(theta_2) on the branch with
    sin(theta_2) > 0.
    """
    if not A > 0:
        raise NonpositiveArea(f"pulse area must be > 0, got {A}")
    key = target.lower()
    if key == "state3":
        alpha = -4.0 * np.pi / (np.pi**2 + A**2)
    elif key == "state2":
        alpha = 2.0 / A
    else:
        raise ValueError(f"unknown target {target!r}; use 'state3' or 'state2'")
    theta2 = float(np.arctan2(1.0, alpha))
    return float(alpha), theta2


def third_order_design(
    omega0: PulseEnvelope, target: str, grid=None, samples: int = 16001
) -> PulseSet:
    """Third-order matched pair transferring state 1 to state 3 or 2.

    With f(t) = (alpha/2) * running area of Omega_0, the constant-
    theta_2 solution is

        cos(theta_1(t)) = -f(t),
        theta_0(t) = theta_2 + pi/2 + (1/alpha) [1 - sqrt(1 - f(t)^2)],

    which starts at theta_1 = pi/2, theta_0 = theta_2 + pi/2 (the
    trapped state is the bare state 1).  The alpha constraints are
    asymptotic in the area, so the achieved final angles are logged
    rather than silently adjusted.

    Raises ``DomainViolation`` if f(t)^2 exceeds 1, ``ZeroArea`` for a
    vanishing base area.
    """
    if not omega0.is_real():
        raise ValueError("base envelope must be real")
    A = float(np.real(omega0.total_area()))
    if abs(A) < _AREA_EPS:
        raise ZeroArea("base envelope has zero area")
    if A < 0:
        raise ValueError("base envelope must be nonnegative")
    alpha, theta2 = third_order_constants(A, target)
    if target.lower() == "state3" and A < 5.0 * np.pi:
        warnings.warn(
            f"area {A:.3g} below 5*pi: the state-3 constraint is asymptotic and "
            "residual losses grow at small areas",
            stacklevel=2,
        )
    if grid is None:
        grid = _default_grid(omega0, samples)
    times = np.asarray(grid, dtype=float)
    f = 0.5 * alpha * np.real(omega0.cumulative_area(times))
    fmax = float(np.max(np.abs(f)))
    if fmax > 1.0 + _F_CLIP_TOL:
        raise DomainViolation(
            f"|f| reaches {fmax:.6g} > 1: alpha={alpha:.6g} is inconsistent with area {A:.6g}"
        )
    f = np.clip(f, -1.0, 1.0)
    theta1 = np.arccos(-f)
    theta0 = theta2 + np.pi / 2.0 + (1.0 / alpha) * (1.0 - np.sqrt(1.0 - f**2))
    omega_vals = np.real(omega0(times))
    log.info(
        "third-order %s design: A=%.6g alpha=%.6g theta2=%.6g; achieved "
        "theta1(+inf)=%.6g (target %s), theta0(+inf)-theta2=%.6g",
        target, A, alpha, theta2, theta1[-1],
        "pi/2" if target.lower() == "state3" else "pi",
        theta0[-1] - theta2,
    )
    pump, stokes = pulse_pair_from_angles(times, omega_vals, theta0)
    return PulseSet(pump=pump, stokes=stokes, detuning=zero())


def third_order_projection(
    theta0: AngleSeries, theta1: AngleSeries, theta2: float, t: float
) -> StateVector:
    """Bare amplitudes of the exactly trapped third-order state at time t.

        C1 = i (cos(theta_0) sin(theta_1) sin(theta_2) - sin(theta_0) cos(theta_2))
        C2 = -i cos(theta_1) sin(theta_2)
        C3 = -i (cos(theta_0) cos(theta_2) + sin(theta_0) sin(theta_1) sin(theta_2))
    """
    from .errors import GridMismatch

    if theta0.times.shape != theta1.times.shape or not np.array_equal(
        theta0.times, theta1.times
    ):
        raise GridMismatch("theta_0 and theta_1 series are on different grids")
    if t < theta0.times[0] - 1e-12 or t > theta0.times[-1] + 1e-12:
        raise GridMismatch(f"t={t} outside the angle series range")
    th0 = float(np.interp(t, theta0.times, theta0.theta))
    th1 = float(np.interp(t, theta1.times, theta1.theta))
    s0, c0 = np.sin(th0), np.cos(th0)
    s1, c1 = np.sin(th1), np.cos(th1)
    s2, c2 = np.sin(theta2), np.cos(theta2)
    return StateVector(
        c1=1j * (c0 * s1 * s2 - s0 * c2),
        c2=-1j * c1 * s2,
        c3=-1j * (c0 * c2 + s0 * s1 * s2),
    )
