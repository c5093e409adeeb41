"""Synthetic test signals on the default ``(256, 1/16, -8)`` grid.

Every generator takes a :class:`numpy.random.Generator` (or a seed) so runs
are reproducible.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .signal import Signal, Spectrum, dft, idft

DEFAULT_N = 256
DEFAULT_DX = 1.0 / 16
DEFAULT_X0 = -8.0


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def _interior(n: int) -> slice:
    return slice(n // 4, 3 * n // 4)


def interior_real(rng=None, n: int = DEFAULT_N, dx: float = DEFAULT_DX, x0: float = DEFAULT_X0) -> Signal:
    """White Gaussian noise on the central half of the grid, zero elsewhere."""
    rng = _rng(rng)
    s = np.zeros(n)
    s[_interior(n)] = rng.standard_normal(n // 2)
    return Signal(s, dx, x0)


def random_real(rng=None, n: int = DEFAULT_N, dx: float = DEFAULT_DX, x0: float = DEFAULT_X0) -> Signal:
    rng = _rng(rng)
    return Signal(rng.standard_normal(n), dx, x0)


def mean_free_real(rng=None, n: int = DEFAULT_N, dx: float = DEFAULT_DX, x0: float = DEFAULT_X0) -> Signal:
    """Random real signal with the DC and Nyquist bins removed.

    Both bins are their own mirror image, so a signal carrying neither is
    exactly determined by its positive-frequency half.
    """
    f = random_real(rng, n, dx, x0)
    spec = dft(f)
    c = np.array(spec.coefficients)
    c[0] = 0.0
    c[n // 2] = 0.0
    return idft(Spectrum(c, spec.dxi, spec.x0, real=True))


def random_complex(rng=None, n: int = DEFAULT_N, dx: float = DEFAULT_DX, x0: float = DEFAULT_X0,
                   interior: bool = True) -> Signal:
    """Complex Gaussian noise, on the central half only when ``interior``."""
    rng = _rng(rng)
    s = np.zeros(n, dtype=np.complex128)
    sl = _interior(n) if interior else slice(0, n)
    k = sl.stop - sl.start
    s[sl] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return Signal(s, dx, x0, real=False)


def hardy_bump(center: float, width: float, shift: float = 0.0, n: int = DEFAULT_N,
               dx: float = DEFAULT_DX, x0: float = DEFAULT_X0) -> Signal:
    """Hardy-space signal whose spectrum is a Gaussian bump at ``center > 0``.

    The spectrum is ``exp(-(xi - center)^2 / (2 width^2)) exp(-2 pi i shift xi)``
    on ``xi > 0`` and zero elsewhere, i.e. the bump is centred at ``x = shift``.
    """
    if not center > 0 or not width > 0:
        raise DomainError("bump centre and width must be positive")
    dxi = 1.0 / (n * dx)
    xi = (np.arange(n) - n // 2) * dxi
    c = np.where(xi > 0, np.exp(-(xi - center) ** 2 / (2 * width ** 2)), 0.0)
    c = c * np.exp(-2j * np.pi * shift * xi)
    return idft(Spectrum(c, dxi, x0, real=False), real=False)


def random_hardy_bump(rng=None, n: int = DEFAULT_N, dx: float = DEFAULT_DX,
                      x0: float = DEFAULT_X0) -> Signal:
    """Band-concentrated Hardy signal with random centre frequency, width and shift."""
    rng = _rng(rng)
    nyq = 1.0 / (2 * dx)
    center = rng.uniform(0.15, 0.35) * nyq
    width = rng.uniform(0.03, 0.06) * nyq
    shift = rng.uniform(-1.0, 1.0)
    return hardy_bump(center, width, shift, n, dx, x0)


GENERATORS = {
    "interior": interior_real,
    "real": random_real,
    "meanfree": mean_free_real,
    "zero": lambda rng=None, n=DEFAULT_N, dx=DEFAULT_DX, x0=DEFAULT_X0: Signal(np.zeros(n), dx, x0),
}


def generate(name: str, seed=0, n: int = DEFAULT_N, dx: float = DEFAULT_DX, x0: float = DEFAULT_X0) -> Signal:
    """Real signal from a named generator: ``interior``, ``real``, ``meanfree`` or ``zero``."""
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise DomainError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") from None
    return gen(_rng(seed), n, dx, x0)
