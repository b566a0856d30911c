"""Loop Hamiltonian and time-dependent Schrödinger propagation.

The three bare states are coupled pairwise by pump (1-2), Stokes (2-3)
and detuning (1-3) Rabi frequencies on resonance, so the evolution
matrix has zero diagonal and the dynamics reduces to

    dC/dt = -i W(t) C(t),   W = (1/2) [[0, P, D], [P, 0, S], [D*, S, 0]].

Propagation uses an adaptive 8th-order Runge-Kutta method with dense
output; no renormalization is ever applied, so the reported norm drift
is a direct integrator-accuracy diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import EmptyTrajectory, NonFiniteState, NormDriftExceeded
from .pulses import PulseSet

__all__ = [
    "StateVector",
    "Trajectory",
    "build_w",
    "propagate",
    "final_populations",
    "trajectory_to_csv",
]

DEFAULT_TOL = 1e-10
DEFAULT_GRID_POINTS = 2000

_NORM_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    """Three complex probability amplitudes with unit norm."""

    c1: complex
    c2: complex
    c3: complex

    def __post_init__(self):
        norm = np.sqrt(abs(self.c1) ** 2 + abs(self.c2) ** 2 + abs(self.c3) ** 2)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 by more than {_NORM_TOL}")

    @classmethod
    def from_array(cls, arr) -> "StateVector":
        arr = np.asarray(arr, dtype=complex).ravel()
        if arr.size != 3:
            raise ValueError("state vector needs exactly 3 amplitudes")
        return cls(complex(arr[0]), complex(arr[1]), complex(arr[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3], dtype=complex)

    def populations(self):
        return (abs(self.c1) ** 2, abs(self.c2) ** 2, abs(self.c3) ** 2)


@dataclass(frozen=True)
class Trajectory:
    """Amplitudes sampled on an increasing time grid.

    ``basis_order`` is ``None`` for bare-state amplitudes and the basis
    order n for dressed amplitudes B^(n).
    """

    times: np.ndarray
    states: np.ndarray
    norm_drift: float
    basis_order: int | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states, dtype=complex)
        if t.ndim != 1 or s.shape != (t.size, 3):
            raise ValueError("times must be 1-d and states of shape (len(times), 3)")
        if t.size and not np.all(np.diff(t) > 0):
            raise ValueError("trajectory times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    def populations(self) -> np.ndarray:
        """|C_i(t)|^2 as an (N, 3) array."""
        return np.abs(self.states) ** 2

    def __len__(self):
        return self.times.size


def build_w(pulses: PulseSet, t: float) -> np.ndarray:
    """Evolution matrix W(t) of the loop system (Hermitian, zero diagonal)."""
    P = pulses.pump(t)
    S = pulses.stokes(t)
    D = pulses.detuning(t)
    return 0.5 * np.array(
        [
            [0.0, P, D],
            [np.conj(P), 0.0, S],
            [np.conj(D), np.conj(S), 0.0],
        ],
        dtype=complex,
    )


def _as_state_array(c0) -> np.ndarray:
    if isinstance(c0, StateVector):
        return c0.as_array()
    arr = np.asarray(c0, dtype=complex).ravel()
    if arr.size != 3:
        raise ValueError("initial state needs exactly 3 amplitudes")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"initial state norm {norm} deviates from 1 by more than 1e-8")
    return arr


def propagate(
    pulses: PulseSet,
    c0,
    window,
    tol: float = DEFAULT_TOL,
    grid_points: int = DEFAULT_GRID_POINTS,
    max_step: float | None = None,
) -> Trajectory:
    """Integrate dC/dt = -i W(t) C over ``window`` = (t_min, t_max).

    Parameters
    ----------
    pulses : PulseSet
        Pump/Stokes/detuning envelopes.
    c0 : StateVector or array-like
        Normalized initial amplitudes at t_min.
    window : (float, float)
        Integration window, t_min < t_max.
    tol : float
        Local error tolerance of the adaptive integrator.
    grid_points : int
        Size of the uniform dense-output grid.
    max_step : float, optional
        Cap on the adaptive step; defaults to 1/100 of the window so a
        narrow feature cannot be stepped over.  Pass ``numpy.inf`` to
        disable.

    Raises
    ------
    NormDriftExceeded
        If max | ||C|| - 1 | over the grid exceeds 100 * tol.
    NonFiniteState
        On overflow/NaN or integrator failure.
    """
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    t0, t1 = float(window[0]), float(window[1])
    if not t0 < t1:
        raise ValueError(f"window must have t_min < t_max, got {window}")
    y0 = _as_state_array(c0)
    if max_step is None:
        max_step = (t1 - t0) / 100.0

    pump, stokes, detuning = pulses.pump, pulses.stokes, pulses.detuning

    def rhs(t, y):
        P = pump(t).real
        S = stokes(t).real
        D = detuning(t)
        return np.array(
            [
                -0.5j * (P * y[1] + D * y[2]),
                -0.5j * (P * y[0] + S * y[2]),
                -0.5j * (np.conj(D) * y[0] + S * y[1]),
            ]
        )

    sol = solve_ivp(
        rhs,
        (t0, t1),
        y0,
        method="DOP853",
        rtol=tol,
        atol=tol * 1e-2,
        dense_output=True,
        max_step=max_step,
    )
    if not sol.success:
        raise NonFiniteState(f"integration failed: {sol.message}")

    t_grid = np.linspace(t0, t1, grid_points)
    states = sol.sol(t_grid).T
    if not np.all(np.isfinite(states.view(float))):
        raise NonFiniteState("propagation produced non-finite amplitudes")
    norms = np.linalg.norm(states, axis=1)
    drift = float(np.max(np.abs(norms - 1.0)))
    if drift > 100.0 * tol:
        raise NormDriftExceeded(
            f"norm drift {drift:.3e} exceeds {100.0 * tol:.3e}; step control failed"
        )
    return Trajectory(times=t_grid, states=states, norm_drift=drift)


def final_populations(traj: Trajectory):
    """Squared magnitudes (p1, p2, p3) at the last grid point."""
    if len(traj) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    p = np.abs(traj.states[-1]) ** 2
    return (float(p[0]), float(p[1]), float(p[2]))


def trajectory_to_csv(traj: Trajectory, path):
    """Write a trajectory as CSV.

    Columns: ``t,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3,p1,p2,p3``.  For a
    dressed trajectory a ``# basis_order=n`` comment line precedes the
    header.
    """
    with open(path, "w", encoding="utf-8") as fh:
        if traj.basis_order is not None:
            fh.write(f"# basis_order={traj.basis_order}\n")
        fh.write("t,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3,p1,p2,p3\n")
        for t, c in zip(traj.times, traj.states):
            p = np.abs(c) ** 2
            fh.write(
                f"{t:.17g},"
                f"{c[0].real:.17g},{c[0].imag:.17g},"
                f"{c[1].real:.17g},{c[1].imag:.17g},"
                f"{c[2].real:.17g},{c[2].imag:.17g},"
                f"{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}\n"
            )
