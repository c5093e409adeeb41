"""Discrete signals on a uniform grid and their Fourier representation.

A :class:`Signal` holds ``N`` samples ``f(x0 + j*dx)``. Its :class:`Spectrum`
approximates the line Fourier transform

    f^(xi) = integral f(x) exp(-2*pi*i*x*xi) dx

on the symmetric bin layout ``xi_k = k*dxi`` for ``k = -N/2 .. N/2-1`` with
``dxi = 1/(N*dx)``. With this scaling Parseval reads
``sum |f^|^2 dxi == sum |f|^2 dx`` exactly.

Bin ``k = -N/2`` (the Nyquist bin, index 0 of the coefficient array) has no
partner of opposite frequency; the Hilbert transform zeroes it and so does
every wavelet evaluation in :mod:`wavesign.cwt`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

REAL_TOL = 1e-12


def _is_pow2(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Signal:
    """Samples of a function on the grid ``x0 + dx*arange(N)``.

    Parameters
    ----------
    samples : array_like
        Sample values. Real dtypes produce a signal flagged ``real``.
    dx : float
        Grid spacing, strictly positive.
    x0 : float
        Left endpoint of the grid.
    real : bool, optional
        Override the realness flag. A signal flagged real must have
        imaginary parts below ``1e-12 * max|samples|``; they are then
        discarded.
    """

    samples: np.ndarray
    dx: float
    x0: float = 0.0
    real: bool | None = None

    def __post_init__(self):
        raw = np.asarray(self.samples)
        if raw.ndim != 1:
            raise DomainError("signal samples must be one-dimensional")
        if not _is_pow2(raw.size):
            raise DomainError(f"signal length {raw.size} is not a power of two >= 2")
        if not (np.isfinite(self.dx) and self.dx > 0):
            raise DomainError(f"dx must be positive and finite, got {self.dx}")
        if not np.isfinite(self.x0):
            raise DomainError("x0 must be finite")
        if not np.all(np.isfinite(raw)):
            raise DomainError("signal samples must be finite")
        real = self.real
        if real is None:
            real = not np.iscomplexobj(raw)
        s = np.asarray(raw, dtype=np.complex128)
        if real:
            scale = np.max(np.abs(s)) if s.size else 0.0
            if np.max(np.abs(s.imag), initial=0.0) > REAL_TOL * scale:
                raise DomainError("signal flagged real has a non-negligible imaginary part")
            s = s.real.astype(np.complex128)
        object.__setattr__(self, "samples", _frozen(s))
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "real", bool(real))

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def values(self) -> np.ndarray:
        """Samples as a float array for real signals, complex otherwise."""
        return self.samples.real.copy() if self.real else self.samples.copy()

    @property
    def geometry(self) -> tuple[int, float, float]:
        return (self.n, self.dx, self.x0)

    def norm(self) -> float:
        """L2 norm ``sqrt(sum |f|^2 dx)``."""
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.dx))

    def inner(self, other: "Signal") -> complex:
        """L2 inner product ``sum f * conj(g) dx``."""
        _check_same_grid(self, other)
        return complex(np.sum(self.samples * np.conj(other.samples)) * self.dx)

    def with_samples(self, samples, real: bool | None = None) -> "Signal":
        return Signal(samples, self.dx, self.x0, real=real)

    def __neg__(self) -> "Signal":
        return Signal(-self.samples, self.dx, self.x0, real=self.real)

    def __add__(self, other: "Signal") -> "Signal":
        _check_same_grid(self, other)
        return Signal(self.samples + other.samples, self.dx, self.x0,
                      real=self.real and other.real)

    def __sub__(self, other: "Signal") -> "Signal":
        return self + (-other)

    def __mul__(self, c) -> "Signal":
        c = complex(c)
        real = self.real and c.imag == 0.0
        return Signal(self.samples * c, self.dx, self.x0, real=real)

    __rmul__ = __mul__


def _check_same_grid(a: Signal, b: Signal):
    if a.n != b.n or a.dx != b.dx or a.x0 != b.x0:
        raise DomainError("signals live on different grids")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients of a :class:`Signal` on the symmetric bin layout.

    ``coefficients[i]`` belongs to frequency ``(i - N/2) * dxi``.
    """

    coefficients: np.ndarray
    dxi: float
    x0: float = 0.0
    real: bool = False
    _freqs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients)
        if c.ndim != 1 or not _is_pow2(c.size):
            raise DomainError("spectrum length must be a power of two >= 2")
        if not (np.isfinite(self.dxi) and self.dxi > 0):
            raise DomainError("dxi must be positive")
        object.__setattr__(self, "coefficients", _frozen(c))
        object.__setattr__(self, "dxi", float(self.dxi))
        object.__setattr__(self, "x0", float(self.x0))
        f = (np.arange(c.size) - c.size // 2) * float(self.dxi)
        f.setflags(write=False)
        object.__setattr__(self, "_freqs", f)

    @property
    def n(self) -> int:
        return self.coefficients.size

    @property
    def freqs(self) -> np.ndarray:
        return self._freqs

    @property
    def dx(self) -> float:
        return 1.0 / (self.n * self.dxi)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2) * self.dxi)


def _phase(n: int, dx: float, x0: float) -> np.ndarray:
    xi = (np.arange(n) - n // 2) / (n * dx)
    return np.exp(-2j * np.pi * x0 * xi)


def dft(signal: Signal) -> Spectrum:
    """Approximate line Fourier transform of ``signal``."""
    n, dx, x0 = signal.geometry
    c = dx * _phase(n, dx, x0) * np.fft.fftshift(np.fft.fft(signal.samples))
    return Spectrum(c, 1.0 / (n * dx), x0, real=signal.real)


def idft(spectrum: Spectrum, real: bool | None = None) -> Signal:
    """Inverse of :func:`dft`.

    ``real`` defaults to the flag carried by the spectrum; pass ``False`` to
    keep the imaginary part of a spectrum that was edited by hand.
    """
    n, dx, x0 = spectrum.n, spectrum.dx, spectrum.x0
    c = spectrum.coefficients / (dx * _phase(n, dx, x0))
    s = np.fft.ifft(np.fft.ifftshift(c))
    if real is None:
        real = spectrum.real
    if real:
        s = s.real
    return Signal(s, dx, x0, real=real)


def _sgn_multiplier(spec: Spectrum) -> np.ndarray:
    k = np.arange(spec.n) - spec.n // 2
    m = -1j * np.sign(k).astype(np.complex128)
    m[0] = 0.0  # unpaired Nyquist bin
    return m


def hilbert(signal: Signal) -> Signal:
    """Hilbert transform ``(Hf)^ = -i sgn(xi) f^`` with DC and Nyquist bins zeroed."""
    spec = dft(signal)
    out = Spectrum(spec.coefficients * _sgn_multiplier(spec), spec.dxi, spec.x0, real=signal.real)
    return idft(out)


def analytic_representation(signal: Signal) -> Signal:
    """Analytic representation ``f_+`` with ``f_+^ = 2 f^ 1_{xi > 0}``.

    Defined for real signals only; the result is complex.
    """
    if not signal.real:
        raise DomainError("analytic representation is defined for real signals")
    spec = dft(signal)
    half = spec.n // 2
    c = np.zeros(spec.n, dtype=np.complex128)
    c[half + 1:] = 2.0 * spec.coefficients[half + 1:]
    return idft(Spectrum(c, spec.dxi, spec.x0, real=False), real=False)


def spectrum_from_function(func, n: int, dx: float, x0: float = 0.0, real: bool = False) -> Spectrum:
    """Spectrum whose coefficients are ``func(xi_k)`` on the bin layout of an ``(n, dx, x0)`` grid."""
    if not _is_pow2(n):
        raise DomainError(f"length {n} is not a power of two >= 2")
    xi = (np.arange(n) - n // 2) / (n * dx)
    return Spectrum(np.asarray(func(xi), dtype=np.complex128), 1.0 / (n * dx), x0, real=real)
