"""Generalized adiabatic basis: dynamical angles, transforms, projections.

The mixing angle of the dark/bright superposition is tan(theta_0) = P/S
with generalized Rabi frequency Omega_0 = sqrt(P^2 + S^2).  Each further
basis order repeats the construction on the previous level,

    Omega_n = sqrt(Omega_{n-1}^2 + 4 theta_dot_{n-1}^2),
    sin(theta_n) = Omega_{n-1} / Omega_n,
    cos(theta_n) = 2 theta_dot_{n-1} / Omega_n,

with the per-level unitary

    U_n = [[0, 1, 0],
           [sin(theta_n), 0, cos(theta_n)],
           [i cos(theta_n), 0, -i sin(theta_n)]]

and cumulative transform V_n = U_{n-1} ... U_0 mapping bare amplitudes C
to dressed amplitudes B^(n) = V_n C.

Angles are unwrapped with period pi so that branch cuts of the
two-argument arctangent never produce spurious rate spikes; at samples
where the generalized Rabi frequency vanishes the angle is filled by
linear continuation from its neighbors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AllZeroPulses, DegenerateAngleWarning, GridMismatch
from .dynamics import Trajectory, build_w
from .pulses import Family, PulseEnvelope, PulseSet, tabulated, zero

__all__ = [
    "AngleSeries",
    "BasisTransform",
    "angle0",
    "theta0_rate",
    "iterate_angle",
    "transform",
    "project",
    "dressed_w_loop",
    "design_locking_detuning",
    "u_matrix",
]

_DEGENERACY_EPS = 0.0  # exact zeros only; ratios of tiny values are fine


@dataclass(frozen=True)
class AngleSeries:
    """Sampled dynamical angle, generalized Rabi frequency and its rate.

    ``order`` n means the series holds theta_n / Omega_n.
    """

    order: int
    times: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    theta_dot: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        for name in ("theta", "omega", "theta_dot"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != t.shape:
                raise ValueError(f"{name} must match the time grid shape")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "times", t)
        if not np.all(np.diff(t) > 0):
            raise ValueError("angle series times must be strictly increasing")
        if np.any(self.omega < 0):
            raise ValueError("generalized Rabi frequency must be nonnegative")
        if t.size > 1 and np.max(np.abs(np.diff(self.theta))) > np.pi / 2 + 1e-12:
            raise ValueError("theta is not continuous on the grid (jump > pi/2)")


@dataclass(frozen=True)
class BasisTransform:
    """Per-time unitaries U_k and their composition V_n = U_{n-1}...U_0."""

    order: int
    times: np.ndarray
    v: np.ndarray  # (N, 3, 3)
    u_levels: tuple  # order-many (N, 3, 3) stacks, level 0 first


def u_matrix(theta) -> np.ndarray:
    """Level unitary for angle(s) theta; shape (..., 3, 3)."""
    theta = np.asarray(theta, dtype=float)
    s, c = np.sin(theta), np.cos(theta)
    zeros = np.zeros_like(s)
    ones = np.ones_like(s)
    rows = [
        [zeros, ones, zeros],
        [s, zeros, c],
        [1j * c, zeros, -1j * s],
    ]
    return np.stack(
        [np.stack([np.asarray(e, dtype=complex) for e in row], axis=-1) for row in rows],
        axis=-2,
    )


def _du_dtheta(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    s, c = np.sin(theta), np.cos(theta)
    zeros = np.zeros_like(s)
    rows = [
        [zeros, zeros, zeros],
        [c, zeros, -s],
        [-1j * s, zeros, -1j * c],
    ]
    return np.stack(
        [np.stack([np.asarray(e, dtype=complex) for e in row], axis=-1) for row in rows],
        axis=-2,
    )


def _fill_degenerate(times, values, valid):
    """Linear continuation across samples where the angle is undefined."""
    if np.all(valid):
        return values
    out = values.copy()
    out[~valid] = np.interp(times[~valid], times[valid], values[valid])
    return out


def theta0_rate(pulses: PulseSet, t):
    """Closed-form d(theta_0)/dt = (P' S - S' P) / (P^2 + S^2).

    Uses the per-family analytic envelope derivatives, so the result is
    exact for parametric pulses and the interpolant derivative for
    tabulated ones.  Samples with P = S = 0 return 0.
    """
    P = np.real(pulses.pump(t))
    S = np.real(pulses.stokes(t))
    Pd = np.real(pulses.pump.derivative(t))
    Sd = np.real(pulses.stokes.derivative(t))
    denom = P * P + S * S
    with np.errstate(invalid="ignore", divide="ignore"):
        rate = np.where(denom > 0, (Pd * S - Sd * P) / np.where(denom > 0, denom, 1.0), 0.0)
    return rate if np.ndim(t) else float(rate)


def angle0(pulses: PulseSet, grid) -> AngleSeries:
    """Order-0 angle series of a pulse set on a time grid.

    theta_0 comes from the two-argument arctangent of (P, S), unwrapped
    with period pi for continuity; the rate uses the closed form of
    :func:`theta0_rate`.
    """
    times = np.asarray(grid, dtype=float)
    P = np.real(pulses.pump(times))
    S = np.real(pulses.stokes(times))
    omega = np.hypot(P, S)
    valid = omega > _DEGENERACY_EPS
    if not np.any(valid):
        raise AllZeroPulses("pump and Stokes vanish on the whole grid")
    theta = np.zeros_like(omega)
    theta[valid] = np.unwrap(np.arctan2(P[valid], S[valid]), period=np.pi)
    theta = _fill_degenerate(times, theta, valid)
    rate = np.asarray(theta0_rate(pulses, times), dtype=float)
    rate = _fill_degenerate(times, rate, valid)
    return AngleSeries(order=0, times=times, theta=theta, omega=omega, theta_dot=rate)


def _finite_diff(times: np.ndarray, y: np.ndarray) -> np.ndarray:
    """4th-order differences on uniform grids, np.gradient otherwise."""
    dt = np.diff(times)
    uniform = y.size >= 5 and np.allclose(dt, dt[0], rtol=1e-8, atol=0.0)
    if not uniform:
        return np.gradient(y, times)
    h = dt[0]
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return d


def _imag_detuning(detuning: PulseEnvelope, times: np.ndarray) -> np.ndarray:
    vals = detuning(times)
    scale = float(np.max(np.abs(vals))) or 1.0
    if np.max(np.abs(vals.real)) > 1e-12 * scale:
        raise ValueError("angle iteration requires a purely imaginary detuning")
    return np.asarray(vals.imag, dtype=float)


def iterate_angle(prev: AngleSeries, detuning: PulseEnvelope | None = None) -> AngleSeries:
    """Next-order angle series from the recursion.

    With ``detuning`` (purely imaginary, D = i*Dt) the level-0 -> 1 step
    of the loop system replaces the nonadiabatic rate by the effective
    coupling 2*theta_dot_0 - Dt, so tan(theta_1) = Omega_0 / (2
    theta_dot_0 - Dt).
    """
    eff = 2.0 * prev.theta_dot
    if detuning is not None and detuning.family is not Family.ZERO:
        eff = eff - _imag_detuning(detuning, prev.times)
    omega = np.hypot(prev.omega, eff)
    valid = omega > _DEGENERACY_EPS
    if not np.any(valid):
        raise AllZeroPulses("all couplings vanish; no next-order angle exists")
    if not np.all(valid):
        warnings.warn(
            f"Omega_{prev.order + 1} vanishes at {int(np.sum(~valid))} sample(s); "
            "angle filled by continuation",
            DegenerateAngleWarning,
        )
    theta = np.zeros_like(omega)
    theta[valid] = np.unwrap(np.arctan2(prev.omega[valid], eff[valid]), period=np.pi)
    theta = _fill_degenerate(prev.times, theta, valid)
    rate = _finite_diff(prev.times, theta)
    return AngleSeries(
        order=prev.order + 1, times=prev.times, theta=theta, omega=omega, theta_dot=rate
    )


def transform(order: int, angles) -> BasisTransform:
    """Cumulative transform V_n from the angle series of levels 0..n-1.

    All series must share one grid; ``order`` 0 yields the identity.
    """
    angles = list(angles)
    if order < 0:
        raise ValueError("order must be nonnegative")
    if len(angles) < order:
        raise GridMismatch(f"need {order} angle series, got {len(angles)}")
    if order == 0:
        if not angles:
            raise ValueError("order 0 still needs one series to define the grid")
        times = angles[0].times
        n = times.size
        v = np.broadcast_to(np.eye(3, dtype=complex), (n, 3, 3)).copy()
        return BasisTransform(order=0, times=times, v=v, u_levels=())
    times = angles[0].times
    for k, series in enumerate(angles[:order]):
        if series.times.shape != times.shape or not np.array_equal(series.times, times):
            raise GridMismatch(f"angle series {k} is on a different grid")
    u_levels = tuple(u_matrix(angles[k].theta) for k in range(order))
    v = u_levels[0]
    for u in u_levels[1:]:
        v = np.einsum("nij,njk->nik", u, v)
    return BasisTransform(order=order, times=times, v=v, u_levels=u_levels)


def project(traj: Trajectory, xf: BasisTransform) -> Trajectory:
    """Dressed-frame trajectory B^(n)(t) = V_n(t) C(t)."""
    if traj.times.shape != xf.times.shape or not np.allclose(
        traj.times, xf.times, rtol=0.0, atol=1e-12
    ):
        raise GridMismatch("trajectory and transform grids differ")
    if xf.order == 0:
        return traj
    dressed = np.einsum("nij,nj->ni", xf.v, traj.states)
    norms = np.linalg.norm(dressed, axis=1)
    drift = float(np.max(np.abs(norms - 1.0))) if len(norms) else 0.0
    return Trajectory(
        times=traj.times, states=dressed, norm_drift=drift, basis_order=xf.order
    )


def _interp_angle(angles0: AngleSeries, t: float):
    times = angles0.times
    if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
        raise GridMismatch(f"t={t} outside the angle series range")
    theta = float(np.interp(t, times, angles0.theta))
    rate = float(np.interp(t, times, angles0.theta_dot))
    return theta, rate


def dressed_w_loop(pulses: PulseSet, angles0: AngleSeries, t: float) -> np.ndarray:
    """Transformed evolution matrix U W U^-1 + i U_dot U^-1 at time t.

    Valid for an arbitrary complex detuning: a real part shifts the
    dressed states by +-Re[D] sin(2 theta_0)/2 and adds an imaginary
    part to the nonadiabatic coupling, while a purely imaginary D = i*Dt
    reduces the matrix to the real symmetric form with off-diagonal
    couplings Omega_0/2 and (2 theta_dot_0 - Dt)/2.
    """
    theta, rate = _interp_angle(angles0, t)
    u = u_matrix(theta)
    udot = _du_dtheta(theta) * rate
    w = build_w(pulses, t)
    u_inv = u.conj().T
    return u @ w @ u_inv + 1j * (udot @ u_inv)


def design_locking_detuning(angles0: AngleSeries) -> PulseEnvelope:
    """Purely imaginary detuning i*2*theta_dot_0 that decouples the dark state.

    Matching the detuning to the nonadiabatic rate cancels the
    dark-bright coupling identically; over a full 0 -> pi/2 rotation of
    theta_0 the designed pulse necessarily carries area pi (a pi-pulse).
    Returns a tabulated envelope on the series grid, or the zero
    envelope when theta_0 is constant.
    """
    if np.all(angles0.theta_dot == 0.0):
        return zero()
    return tabulated(angles0.times, 2j * angles0.theta_dot)
