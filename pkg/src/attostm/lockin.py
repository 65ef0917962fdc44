"""Delay-modulated lock-in forward model and regularized current reconstruction.

The two-colour delay is modulated as tau0 + delta*sin(Omega t); demodulation
at Omega turns the physical current I(tau) into the complex signal

    I_lockin(tau) = (1/2pi) int_-pi^pi I(tau + delta sin x) e^{-ix} dx,

whose transfer function in delay-frequency space is J1(delta*omega). The
inverse problem divides the spectrum by a regularized J1 (cutoff beta); the
DC component is unrecoverable since J1(0) = 0. Transforms use the e^{-i
omega tau} forward convention, so the J1 argument sign is unambiguous.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import j1 as _scipy_j1

# global maximum of |J1|, attained at x = +-1.8412
J1_MAX = 0.5818652242574184
DEFAULT_BETA = 0.02

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


class LockinSupportError(ValueError):
    """Requested output delays lack +-delta interpolation support."""


@dataclass(frozen=True)
class ModulationSpec:
    """Sinusoidal delay modulation: amplitude in fs; the angular frequency
    cancels in the demodulated integral and is kept as metadata only."""

    amplitude_delta: float = 0.6
    angular_frequency_Omega: float = 2.0 * np.pi * 3.7e3

    def __post_init__(self):
        if self.amplitude_delta <= 0:
            raise ValueError("amplitude_delta must be positive")


@dataclass(frozen=True)
class DelayTrace:
    """Values on a uniform delay grid: real physical current or complex
    lock-in output, tagged by `kind`."""

    delays: np.ndarray
    values: np.ndarray
    kind: str = "physical_current"

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=float)
        if self.kind not in ("physical_current", "lockin_complex"):
            raise ValueError(f"unknown trace kind {self.kind!r}")
        v = np.asarray(self.values,
                       dtype=complex if self.kind == "lockin_complex" else float)
        if d.ndim != 1 or d.size < 8 or v.shape != d.shape:
            raise ValueError("delays/values must be 1-D, length >= 8, equal size")
        steps = np.diff(d)
        mean = (d[-1] - d[0]) / (d.size - 1)
        if mean <= 0 or np.any(steps <= 0):
            raise ValueError("delays must be strictly increasing")
        if np.max(np.abs(steps - mean)) > 1e-12 * max(abs(d[0]), abs(d[-1]), mean):
            raise ValueError("delay spacing is not uniform")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "values", v)

    @property
    def spacing(self) -> float:
        return float((self.delays[-1] - self.delays[0]) / (self.delays.size - 1))


def bessel_j1(x):
    """Bessel function of the first kind of order 1."""
    x = np.asarray(x, dtype=float)
    out = _scipy_j1(x)
    return float(out) if out.ndim == 0 else out


def forward_lockin(trace: DelayTrace, mod: ModulationSpec,
                   out_delays=None) -> DelayTrace:
    """Demodulated lock-in signal of a physical current trace.

    Gauss-Legendre quadrature (order 64) over the modulation phase, with
    cubic interpolation of the trace between samples; output delays default
    to the interior of the input grid with +-delta support.
    """
    if trace.kind != "physical_current":
        raise ValueError("forward_lockin expects a physical_current trace")
    delta = mod.amplitude_delta
    lo, hi = trace.delays[0] + delta, trace.delays[-1] - delta
    if out_delays is None:
        sel = (trace.delays >= lo - 1e-12) & (trace.delays <= hi + 1e-12)
        out_delays = trace.delays[sel]
    else:
        out_delays = np.asarray(out_delays, dtype=float)
    if out_delays.size < 8:
        raise LockinSupportError(
            f"output range needs >= 8 points inside [{lo:.6g}, {hi:.6g}] fs")
    if out_delays[0] < lo - 1e-12 or out_delays[-1] > hi + 1e-12:
        raise LockinSupportError(
            f"trace must exceed the output range by delta = {delta} fs "
            f"on each side (supported: [{lo:.6g}, {hi:.6g}])")
    spline = CubicSpline(trace.delays, trace.values)
    x = np.pi * _GL_X  # [-1, 1] nodes mapped to the modulation phase [-pi, pi]
    w = np.pi * _GL_W
    shifted = out_delays[:, None] + delta * np.sin(x)[None, :]
    vals = spline(shifted) * np.exp(-1j * x)[None, :]
    out = (vals @ w) / (2.0 * np.pi)
    return DelayTrace(out_delays, out, kind="lockin_complex")


def regularized_transfer(omega, delta: float, beta: float) -> np.ndarray:
    """Safe divisors J1^(beta)(delta*omega): J1 where |J1| > beta,
    sign(J1)*beta where 0 < |J1| <= beta, and +inf at exact zeros of J1
    (so the divided contribution vanishes)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    j = bessel_j1(np.asarray(omega, dtype=float) * delta)
    j = np.atleast_1d(j)
    out = np.where(np.abs(j) > beta, j, np.sign(j) * beta)
    out[j == 0.0] = np.inf
    return out


def _extend_even(values: np.ndarray) -> np.ndarray:
    return np.concatenate([values, values[::-1]])


def reconstruct(lockin: DelayTrace, mod: ModulationSpec,
                beta: float = DEFAULT_BETA) -> DelayTrace:
    """Laser-induced current from its lock-in trace via spectral division.

    The trace is extended by even reflection to suppress wrap-around
    leakage; the result is reported on the interior 80% of the grid and has
    exactly zero mean (the absolute current offset is unrecoverable).
    """
    if lockin.kind != "lockin_complex":
        raise ValueError("reconstruct expects a lockin_complex trace")
    if not 0.0 < beta < J1_MAX:
        raise ValueError(f"beta must lie in (0, {J1_MAX:.4f}), got {beta}")
    ext = _extend_even(lockin.values)
    spec = np.fft.fft(ext)
    omega = 2.0 * np.pi * np.fft.fftfreq(ext.size, d=lockin.spacing)
    divisor = regularized_transfer(omega, mod.amplitude_delta, beta)
    rec = np.fft.ifft(spec / divisor).real[:lockin.values.size]
    margin = lockin.values.size // 10
    sl = slice(margin, lockin.values.size - margin)
    rec = rec[sl] - np.mean(rec[sl])
    return DelayTrace(lockin.delays[sl], rec, kind="physical_current")


def select_beta(lockin: DelayTrace, mod: ModulationSpec,
                noise_estimate: float, *, threshold: float = 0.5,
                grid=None) -> float:
    """Smallest regularization cutoff that keeps the amplified noise below
    a threshold fraction of the signal energy.

    The spectral division amplifies white noise of per-sample deviation
    sigma by 1/max(|J1(delta*omega)|, beta) in each bin; beta grows until
    sigma^2 * mean(amplification^2) <= threshold^2 * signal energy. With
    noise_estimate = 0 the scan is skipped and the documented default 0.02
    is returned.
    """
    if noise_estimate < 0:
        raise ValueError("noise_estimate must be non-negative")
    if noise_estimate == 0.0:
        return DEFAULT_BETA
    if grid is None:
        grid = np.geomspace(2e-4, 0.9 * J1_MAX, 30)
    omega = 2.0 * np.pi * np.fft.fftfreq(2 * lockin.values.size,
                                         d=lockin.spacing)
    absj = np.abs(np.atleast_1d(bessel_j1(omega * mod.amplitude_delta)))
    signal_energy = max(float(np.mean(np.abs(lockin.values) ** 2))
                        - noise_estimate**2, 0.0)
    cap = threshold**2 * signal_energy
    for beta in grid:
        gain2 = float(np.mean(1.0 / np.maximum(absj, beta) ** 2))
        if noise_estimate**2 * gain2 <= cap:
            return float(beta)
    return float(grid[-1])
