"""Pulse envelopes for the three-level loop system.

All couplings are complex Rabi frequencies in inverse time units.  The
parametric families cover a ramped sine/cosine pair, hyperbolic secant,
Gaussian and squared-secant shapes; designed pulses are carried as
tabulated envelopes with monotone cubic (PCHIP) interpolation so that
sign-consistent data stays sign-consistent between samples.

Envelope values are immutable after construction; every operation here
is a pure function and safe to call concurrently.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.special import erf

from .errors import ComplexPulse, NonpositiveWindow

__all__ = [
    "Family",
    "PulseEnvelope",
    "PulseSet",
    "zero",
    "ramped_sin",
    "ramped_cos",
    "sech",
    "gaussian",
    "sech_squared",
    "tabulated",
    "area",
    "effective_rabi",
    "as_tabulated",
    "tabulated_to_csv",
    "tabulated_from_csv",
]

#: default absolute tolerance for adaptive quadrature
DEFAULT_QUAD_TOL = 1e-10

#: envelope magnitude relative to peak below which a pulse counts as "off"
SUPPORT_CUTOFF = 1e-6

_REAL_TOL = 1e-12


class Family(enum.Enum):
    """Envelope families understood by the evaluator."""

    RAMPED_SIN = "ramped_sin"
    RAMPED_COS = "ramped_cos"
    SECH = "sech"
    GAUSSIAN = "gaussian"
    SECH_SQUARED = "sech_squared"
    TABULATED = "tabulated"
    ZERO = "zero"


_PARAMETRIC = {
    Family.RAMPED_SIN,
    Family.RAMPED_COS,
    Family.SECH,
    Family.GAUSSIAN,
    Family.SECH_SQUARED,
}


@dataclass(frozen=True)
class PulseEnvelope:
    """A complex-valued Rabi-frequency envelope of time.

    Parameters
    ----------
    family : Family
        Functional form of the envelope.
    amplitude : complex
        Peak Rabi frequency (inverse time units).  The carried phase
        factor exp(i*phase) multiplies it.
    width : float
        Time constant of the shape; must be positive for parametric
        families.
    phase : float
        Constant phase in radians.
    times, values : ndarray, optional
        Sample table for the tabulated family.  Times must be strictly
        increasing; evaluation outside the tabulated range returns 0.
    """

    family: Family
    amplitude: complex = 0j
    width: float = 1.0
    phase: float = 0.0
    times: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.family in _PARAMETRIC and not self.width > 0:
            raise ValueError(f"width must be > 0, got {self.width}")
        if self.family is Family.TABULATED:
            if self.times is None or self.values is None:
                raise ValueError("tabulated envelope needs times and values")
            t = np.asarray(self.times, dtype=float)
            v = np.asarray(self.values, dtype=complex)
            if t.ndim != 1 or t.size < 2 or v.shape != t.shape:
                raise ValueError("tabulated samples must be two equal 1-d arrays")
            if not np.all(np.diff(t) > 0):
                raise ValueError("tabulated times must be strictly increasing")
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "values", v)
            interp_re = PchipInterpolator(t, v.real, extrapolate=False)
            interp_im = None
            if np.any(v.imag != 0.0):
                interp_im = PchipInterpolator(t, v.imag, extrapolate=False)
            object.__setattr__(self, "_interp_re", interp_re)
            object.__setattr__(self, "_interp_im", interp_im)

    # -- evaluation ----------------------------------------------------

    def __call__(self, t):
        """Evaluate the envelope; scalar in, scalar out."""
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = self._eval(t)
        return out[0] if scalar else out

    def _eval(self, t: np.ndarray) -> np.ndarray:
        amp = self.amplitude * np.exp(1j * self.phase)
        fam = self.family
        if fam is Family.ZERO:
            return np.zeros_like(t, dtype=complex)
        if fam is Family.TABULATED:
            re = self._interp_re(t)
            out = np.where(np.isnan(re), 0.0, re).astype(complex)
            if self._interp_im is not None:
                im = self._interp_im(t)
                out += 1j * np.where(np.isnan(im), 0.0, im)
            return out
        x = t / self.width
        if fam is Family.RAMPED_SIN:
            shape = np.sin(0.5 * np.arctan(x) + np.pi / 4)
        elif fam is Family.RAMPED_COS:
            shape = np.cos(0.5 * np.arctan(x) + np.pi / 4)
        elif fam is Family.SECH:
            shape = 1.0 / np.cosh(x)
        elif fam is Family.GAUSSIAN:
            shape = np.exp(-(x**2))
        elif fam is Family.SECH_SQUARED:
            shape = 1.0 / np.cosh(x) ** 2
        else:  # pragma: no cover
            raise ValueError(f"unhandled family {fam}")
        return amp * shape

    def derivative(self, t):
        """Time derivative of the envelope (closed form per family)."""
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        amp = self.amplitude * np.exp(1j * self.phase)
        fam = self.family
        T = self.width
        if fam is Family.ZERO:
            out = np.zeros_like(t, dtype=complex)
        elif fam is Family.TABULATED:
            re = self._interp_re.derivative()(t)
            out = np.where(np.isnan(re), 0.0, re).astype(complex)
            if self._interp_im is not None:
                im = self._interp_im.derivative()(t)
                out += 1j * np.where(np.isnan(im), 0.0, im)
        else:
            x = t / T
            if fam is Family.RAMPED_SIN:
                g = 0.5 * np.arctan(x) + np.pi / 4
                out = amp * np.cos(g) * 0.5 / (T * (1 + x**2))
            elif fam is Family.RAMPED_COS:
                g = 0.5 * np.arctan(x) + np.pi / 4
                out = amp * (-np.sin(g)) * 0.5 / (T * (1 + x**2))
            elif fam is Family.SECH:
                out = amp * (-np.tanh(x) / np.cosh(x)) / T
            elif fam is Family.GAUSSIAN:
                out = amp * (-2 * x / T) * np.exp(-(x**2))
            else:  # SECH_SQUARED
                out = amp * (-2 * np.tanh(x) / np.cosh(x) ** 2) / T
        return out[0] if scalar else out

    def cumulative_area(self, t):
        """Closed-form integral of the envelope from -infinity to ``t``.

        Only defined for decaying families (sech, Gaussian, squared
        secant), tabulated data (integral of the interpolant from the
        first sample) and the zero envelope.
        """
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        amp = self.amplitude * np.exp(1j * self.phase)
        fam = self.family
        T = self.width
        if fam is Family.ZERO:
            out = np.zeros_like(t, dtype=complex)
        elif fam is Family.SECH:
            out = amp * T * (np.arctan(np.sinh(t / T)) + np.pi / 2)
        elif fam is Family.GAUSSIAN:
            out = amp * T * (np.sqrt(np.pi) / 2) * (1.0 + erf(t / T))
        elif fam is Family.SECH_SQUARED:
            out = amp * T * (np.tanh(t / T) + 1.0)
        elif fam is Family.TABULATED:
            anti_re = self._interp_re.antiderivative()
            lo, hi = self.times[0], self.times[-1]
            tc = np.clip(t, lo, hi)
            out = (anti_re(tc) - anti_re(lo)).astype(complex)
            if self._interp_im is not None:
                anti_im = self._interp_im.antiderivative()
                out += 1j * (anti_im(tc) - anti_im(lo))
        else:
            raise ValueError(f"{fam.value} envelope has no finite left tail")
        return out[0] if scalar else out

    def total_area(self) -> complex:
        """Integral of the envelope over the whole real line."""
        if self.family is Family.TABULATED:
            return self.cumulative_area(self.times[-1])
        if self.family is Family.ZERO:
            return 0j
        if self.family is Family.SECH:
            return self.amplitude * np.exp(1j * self.phase) * self.width * np.pi
        if self.family is Family.GAUSSIAN:
            return self.amplitude * np.exp(1j * self.phase) * self.width * np.sqrt(np.pi)
        if self.family is Family.SECH_SQUARED:
            return self.amplitude * np.exp(1j * self.phase) * self.width * 2.0
        raise ValueError(f"{self.family.value} envelope has unbounded area")

    # -- structure -----------------------------------------------------

    def support(self, cutoff: float = SUPPORT_CUTOFF):
        """Window outside which |envelope| < cutoff * peak.

        Returns ``None`` for the ramped families (they approach a
        constant instead of decaying) and ``(0.0, 0.0)`` for the zero
        envelope.
        """
        fam = self.family
        T = self.width
        if fam is Family.ZERO:
            return (0.0, 0.0)
        if fam is Family.TABULATED:
            return (float(self.times[0]), float(self.times[-1]))
        if fam is Family.SECH:
            x = np.arccosh(1.0 / cutoff)
            return (-T * x, T * x)
        if fam is Family.GAUSSIAN:
            x = np.sqrt(np.log(1.0 / cutoff))
            return (-T * x, T * x)
        if fam is Family.SECH_SQUARED:
            x = np.arccosh(1.0 / np.sqrt(cutoff))
            return (-T * x, T * x)
        return None

    def is_real(self, tol: float = _REAL_TOL) -> bool:
        """True if the envelope takes real values everywhere."""
        if self.family is Family.ZERO:
            return True
        if self.family is Family.TABULATED:
            scale = float(np.max(np.abs(self.values))) or 1.0
            return bool(np.max(np.abs(self.values.imag)) <= tol * scale)
        amp = self.amplitude * np.exp(1j * self.phase)
        return abs(amp.imag) <= tol * (abs(amp) or 1.0)

    def scaled(self, factor: complex) -> "PulseEnvelope":
        """A copy with the amplitude (or sample values) multiplied."""
        if self.family is Family.TABULATED:
            return PulseEnvelope(
                Family.TABULATED, times=self.times, values=self.values * factor
            )
        return PulseEnvelope(
            self.family, self.amplitude * factor, self.width, self.phase
        )


# -- factory helpers ----------------------------------------------------


def zero() -> PulseEnvelope:
    return PulseEnvelope(Family.ZERO)


def ramped_sin(amplitude, width, phase=0.0) -> PulseEnvelope:
    """A * sin(arctan(t/T)/2 + pi/4): ramps from 0 up to A."""
    return PulseEnvelope(Family.RAMPED_SIN, amplitude, width, phase)


def ramped_cos(amplitude, width, phase=0.0) -> PulseEnvelope:
    """A * cos(arctan(t/T)/2 + pi/4): ramps from A down to 0."""
    return PulseEnvelope(Family.RAMPED_COS, amplitude, width, phase)


def sech(amplitude, width, phase=0.0) -> PulseEnvelope:
    return PulseEnvelope(Family.SECH, amplitude, width, phase)


def gaussian(amplitude, width, phase=0.0) -> PulseEnvelope:
    return PulseEnvelope(Family.GAUSSIAN, amplitude, width, phase)


def sech_squared(amplitude, width, phase=0.0) -> PulseEnvelope:
    return PulseEnvelope(Family.SECH_SQUARED, amplitude, width, phase)


def tabulated(times, values) -> PulseEnvelope:
    return PulseEnvelope(
        Family.TABULATED,
        times=np.asarray(times, dtype=float),
        values=np.asarray(values, dtype=complex),
    )


def as_tabulated(env: PulseEnvelope, grid) -> PulseEnvelope:
    """Sample any envelope onto a grid as a tabulated pulse."""
    grid = np.asarray(grid, dtype=float)
    return tabulated(grid, env(grid))


# -- pulse sets ----------------------------------------------------------


@dataclass(frozen=True)
class PulseSet:
    """The pump/Stokes/detuning triple defining one experiment.

    Pump and Stokes must be real-valued (their constant phases are
    absorbed into the definition of the bare states); the detuning may
    carry an arbitrary complex phase.
    """

    pump: PulseEnvelope
    stokes: PulseEnvelope
    detuning: PulseEnvelope = field(default_factory=zero)

    def __post_init__(self):
        for name in ("pump", "stokes"):
            env = getattr(self, name)
            if not env.is_real():
                raise ComplexPulse(f"{name} envelope must be real-valued")


# -- integrals -----------------------------------------------------------


def _require_real(env: PulseEnvelope, what: str):
    if not env.is_real():
        raise ComplexPulse(f"{what} must be real-valued on the interval")


def area(pulse: PulseEnvelope, t0: float, t1: float, tol: float = DEFAULT_QUAD_TOL) -> float:
    """Pulse area: integral of a real envelope over [t0, t1].

    Adaptive quadrature with absolute tolerance ``tol``; infinite limits
    are allowed for decaying families.
    """
    if not t0 < t1:
        raise ValueError(f"need t0 < t1, got [{t0}, {t1}]")
    _require_real(pulse, "pulse envelope")
    if pulse.family is Family.ZERO:
        return 0.0
    if pulse.family is Family.TABULATED:
        # quadrature of the interpolant; restrict to the sampled range
        t0 = max(t0, float(pulse.times[0]))
        t1 = min(t1, float(pulse.times[-1]))
        if t0 >= t1:
            return 0.0
        pts = pulse.times[(pulse.times > t0) & (pulse.times < t1)]
        # quad accepts at most ~100 break points; thin out dense tables
        if pts.size > 80:
            pts = pts[:: pts.size // 80 + 1]
        val, _ = quad(
            lambda s: pulse(s).real, t0, t1,
            epsabs=tol, limit=max(200, 2 * pts.size), points=pts,
        )
        return val
    val, _ = quad(lambda s: pulse(s).real, t0, t1, epsabs=tol, limit=200)
    return val


def effective_rabi(
    pump: PulseEnvelope,
    stokes: PulseEnvelope,
    T: float,
    window=None,
    tol: float = DEFAULT_QUAD_TOL,
) -> float:
    """Average Rabi frequency (1/T) * integral of sqrt(P^2 + S^2).

    ``window`` bounds the integral; if omitted it is taken from the
    joint support of the two envelopes, which must then be bounded.
    """
    if not T > 0:
        raise NonpositiveWindow(f"averaging time must be > 0, got {T}")
    _require_real(pump, "pump")
    _require_real(stokes, "stokes")
    if pump.family is Family.ZERO and stokes.family is Family.ZERO:
        return 0.0
    if window is None:
        supports = [
            env.support() for env in (pump, stokes) if env.family is not Family.ZERO
        ]
        if any(s is None for s in supports):
            raise ValueError(
                "envelope support is unbounded; pass an explicit window"
            )
        window = (min(s[0] for s in supports), max(s[1] for s in supports))
    t0, t1 = float(window[0]), float(window[1])
    if not t0 < t1:
        raise NonpositiveWindow(f"window must have t_min < t_max, got {window}")
    val, _ = quad(
        lambda s: np.hypot(pump(s).real, stokes(s).real),
        t0, t1, epsabs=tol, limit=500,
    )
    return val / T


# -- CSV interchange ------------------------------------------------------


def tabulated_to_csv(env: PulseEnvelope, path):
    """Write a tabulated envelope as ``t,re,im`` rows."""
    if env.family is not Family.TABULATED:
        raise ValueError("only tabulated envelopes round-trip through CSV")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,re,im\n")
        for t, v in zip(env.times, env.values):
            fh.write(f"{t:.17g},{v.real:.17g},{v.imag:.17g}\n")


def tabulated_from_csv(path) -> PulseEnvelope:
    """Read a ``t,re,im`` table written by :func:`tabulated_to_csv`."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise ValueError(f"expected 3 columns t,re,im in {path}")
    return tabulated(data[:, 0], data[:, 1] + 1j * data[:, 2])
