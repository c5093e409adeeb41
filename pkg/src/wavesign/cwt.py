"""Wavelet transforms evaluated at time-scale points and on hyperbolic lattices.

The transform of ``f`` with respect to ``w`` at translation ``b`` and scale
``a > 0`` is computed in Plancherel form,

    W_w f(b, a) = sqrt(a) * sum_k f^(xi_k) conj(w^(a xi_k)) exp(2 pi i b xi_k) dxi,

which allows arbitrary, off-grid ``b``. The unpaired Nyquist bin is left out
of every sum so that real wavelets map real signals to real coefficients.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .signal import Spectrum
from .wavelets import CAUCHY, POISSON, HILBERT_POISSON, WaveletSpec, fourier_eval

# Kernels up to this many complex entries are cached; larger ones are streamed.
KERNEL_CACHE_LIMIT = 4_000_000
_CHUNK = 512
EQ_RTOL = 1e-12


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HyperbolicLattice:
    """Truncated hyperbolic lattice ``{(alpha^m beta n, alpha^m)}``.

    Only points with ``m_min <= m <= m_max`` and ``|b| <= b_max`` are kept.
    Points are ordered by ``(m, n)``.
    """

    alpha: float
    beta: float
    m_min: int
    m_max: int
    b_max: float
    m: np.ndarray = field(init=False, repr=False)
    n: np.ndarray = field(init=False, repr=False)
    b: np.ndarray = field(init=False, repr=False)
    a: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 1):
            raise DomainError(f"lattice alpha must exceed 1, got {self.alpha}")
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"lattice beta must be positive, got {self.beta}")
        if int(self.m_min) != self.m_min or int(self.m_max) != self.m_max:
            raise DomainError("scale indices must be integers")
        if self.m_max < self.m_min:
            raise DomainError("empty scale range")
        if not (np.isfinite(self.b_max) and self.b_max > 0):
            raise DomainError("b_max must be positive")
        alpha, beta, b_max = float(self.alpha), float(self.beta), float(self.b_max)
        ms, ns, bs, as_ = [], [], [], []
        for m in range(int(self.m_min), int(self.m_max) + 1):
            a = alpha ** m
            step = a * beta
            nmax = int(math.floor(b_max / step))
            while nmax > 0 and step * nmax > b_max:
                nmax -= 1
            n = np.arange(-nmax, nmax + 1)
            ms.append(np.full(n.size, m))
            ns.append(n)
            bs.append(step * n)
            as_.append(np.full(n.size, a))
        for name, parts, dt in (("m", ms, np.int64), ("n", ns, np.int64),
                                ("b", bs, float), ("a", as_, float)):
            arr = np.concatenate(parts).astype(dt)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "m_min", int(self.m_min))
        object.__setattr__(self, "m_max", int(self.m_max))
        object.__setattr__(self, "b_max", b_max)

    def __len__(self) -> int:
        return self.b.size

    @property
    def points(self) -> list[tuple[float, float, int, int]]:
        return list(zip(self.b.tolist(), self.a.tolist(), self.m.tolist(), self.n.tolist()))

    @property
    def density(self) -> float:
        return self.beta * math.log(self.alpha)

    def subset(self, keep) -> "HyperbolicLattice":
        """Lattice restricted to the points selected by boolean mask ``keep``."""
        keep = np.asarray(keep, dtype=bool)
        if keep.shape != self.b.shape:
            raise DomainError("mask length does not match the lattice")
        new = object.__new__(HyperbolicLattice)
        for name in ("alpha", "beta", "m_min", "m_max", "b_max"):
            object.__setattr__(new, name, getattr(self, name))
        for name in ("m", "n", "b", "a"):
            arr = getattr(self, name)[keep].copy()
            arr.setflags(write=False)
            object.__setattr__(new, name, arr)
        return new

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "m_min": self.m_min,
                "m_max": self.m_max, "b_max": self.b_max}

    @classmethod
    def from_dict(cls, d: dict) -> "HyperbolicLattice":
        return cls(d["alpha"], d["beta"], d["m_min"], d["m_max"], d["b_max"])


def default_lattice(n: int, dx: float, alpha: float = 2.0, beta: float | None = None,
                    support_half_width: float | None = None) -> HyperbolicLattice:
    """Truncation of ``Lambda(beta, alpha)`` adapted to an ``(n, dx)`` grid.

    Scales run from the largest ``alpha^m <= dx/2`` up to the largest
    ``alpha^m <= n*dx/4``; translations cover the signal support half-width
    (default: a quarter of the grid length, i.e. the central half) plus three
    coarsest scales. Lattices are centred at ``b = 0``, so signal grids should
    be centred there too. ``beta`` defaults to ``4 pi / (5 ln alpha)``, which puts
    ``beta ln alpha`` on the order-one uniqueness threshold.
    """
    if beta is None:
        beta = 4 * math.pi / (5 * math.log(alpha))
    m_min = int(math.floor(math.log(dx / 2) / math.log(alpha) + 1e-9))
    m_max = int(math.floor(math.log(n * dx / 4) / math.log(alpha) + 1e-9))
    half = n * dx / 4 if support_half_width is None else support_half_width
    b_max = half + 3 * alpha ** m_max
    return HyperbolicLattice(alpha, beta, m_min, m_max, b_max)


# ---------------------------------------------------------------------------
# Pointwise evaluation
# ---------------------------------------------------------------------------

def _freqs(n: int, dx: float) -> np.ndarray:
    return (np.arange(n) - n // 2) / (n * dx)


def kernel_rows(w: WaveletSpec, b, a, n: int, dx: float) -> np.ndarray:
    """Rows ``sqrt(a) dxi conj(w^(a xi_k)) exp(2 pi i b xi_k)``; Nyquist column zero."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    xi = _freqs(n, dx)
    dxi = 1.0 / (n * dx)
    what = np.conj(fourier_eval(w, a[:, None] * xi[None, :]))
    rows = (np.sqrt(a) * dxi)[:, None] * what * np.exp(2j * np.pi * b[:, None] * xi[None, :])
    rows[:, 0] = 0.0
    return rows


def _check_points(b, a):
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if b.shape != a.shape:
        b, a = np.broadcast_arrays(b, a)
    if not np.all(np.isfinite(b)):
        raise DomainError("translation b must be finite")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise DomainError("scale a must be positive and finite")
    return b, a


def cwt_points(spec: Spectrum, w: WaveletSpec, b, a) -> np.ndarray:
    """Transform at many ``(b, a)`` pairs; returns a complex array."""
    b, a = _check_points(b, a)
    out = np.empty(b.size, dtype=np.complex128)
    for s in range(0, b.size, _CHUNK):
        rows = kernel_rows(w, b[s:s + _CHUNK], a[s:s + _CHUNK], spec.n, spec.dx)
        out[s:s + _CHUNK] = rows @ spec.coefficients
    return out


def cwt_point(spec: Spectrum, w: WaveletSpec, b: float, a: float) -> complex:
    """Transform ``W_w f(b, a)`` of the signal with spectrum ``spec``."""
    return complex(cwt_points(spec, w, [b], [a])[0])


def cwt_scale_grid(spec: Spectrum, w: WaveletSpec, a: float) -> np.ndarray:
    """Transform at one scale for every grid translation ``b = x0 + j dx`` (FFT path)."""
    if not (np.isfinite(a) and a > 0):
        raise DomainError("scale a must be positive and finite")
    n, x0 = spec.n, spec.x0
    xi = spec.freqs
    g = np.sqrt(a) * spec.dxi * spec.coefficients * np.conj(fourier_eval(w, a * xi))
    g = g * np.exp(2j * np.pi * x0 * xi)
    g[0] = 0.0
    # sum_k g_k exp(2 pi i j k / n) over k = -n/2 .. n/2-1
    return n * np.fft.ifft(np.fft.ifftshift(g))


# ---------------------------------------------------------------------------
# Lattice evaluation
# ---------------------------------------------------------------------------

class LatticeKernel:
    """Linear map from spectra on an ``(n, dx)`` grid to lattice coefficients of one wavelet.

    Rows are cached when the kernel is small enough and streamed otherwise.
    Instances are read-only after construction and safe to share across threads.
    """

    def __init__(self, w: WaveletSpec, lattice: HyperbolicLattice, n: int, dx: float):
        self.w, self.lattice, self.n, self.dx = w, lattice, n, dx
        self._rows = self._rows_h = None
        if len(lattice) * n <= KERNEL_CACHE_LIMIT:
            self._rows = kernel_rows(w, lattice.b, lattice.a, n, dx)
            self._rows_h = np.ascontiguousarray(self._rows.conj().T)

    def _blocks(self):
        if self._rows is not None:
            yield slice(0, len(self.lattice)), self._rows
            return
        lat = self.lattice
        for s in range(0, len(lat), _CHUNK):
            sl = slice(s, min(s + _CHUNK, len(lat)))
            yield sl, kernel_rows(self.w, lat.b[sl], lat.a[sl], self.n, self.dx)

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        """Lattice coefficients from spectrum coefficients; ``coeffs`` may be 2-D (bins x batch)."""
        shape = (len(self.lattice),) + coeffs.shape[1:]
        out = np.empty(shape, dtype=np.complex128)
        for sl, rows in self._blocks():
            out[sl] = rows @ coeffs
        return out

    def adjoint(self, c: np.ndarray) -> np.ndarray:
        """Hermitian transpose of :meth:`apply`."""
        if self._rows_h is not None:
            return self._rows_h @ c
        acc = np.zeros((self.n,) + c.shape[1:], dtype=np.complex128)
        for sl, rows in self._blocks():
            acc += rows.conj().T @ c[sl]
        return acc


@dataclass(frozen=True, eq=False)
class CoefficientGrid:
    """Wavelet coefficients of one signal, one row per wavelet, aligned to ``lattice``."""

    lattice: HyperbolicLattice
    wavelets: tuple[WaveletSpec, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, copy=True)
        if v.ndim != 2 or v.shape != (len(self.wavelets), len(self.lattice)):
            raise DomainError("coefficient grid shape does not match wavelets x lattice points")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "wavelets", tuple(self.wavelets))

    def __getitem__(self, i: int) -> np.ndarray:
        return self.values[i]

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)


def cwt_lattice(spec: Spectrum, wavelets, lattice: HyperbolicLattice, workers: int = 1) -> CoefficientGrid:
    """Transform of ``spec`` for each wavelet at every lattice point.

    ``workers > 1`` evaluates point chunks in a thread pool; the output does
    not depend on the worker count.
    """
    wavelets = list(wavelets)
    if not wavelets:
        raise DomainError("cwt_lattice needs at least one wavelet")
    if len(lattice) == 0:
        raise DomainError("empty lattice")
    tasks = [(i, s) for i in range(len(wavelets)) for s in range(0, len(lattice), _CHUNK)]
    values = np.empty((len(wavelets), len(lattice)), dtype=np.complex128)

    def run(task):
        i, s = task
        sl = slice(s, min(s + _CHUNK, len(lattice)))
        rows = kernel_rows(wavelets[i], lattice.b[sl], lattice.a[sl], spec.n, spec.dx)
        return i, sl, rows @ spec.coefficients

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    for i, sl, vals in results:
        values[i, sl] = vals
    return CoefficientGrid(lattice, tuple(wavelets), values)


# ---------------------------------------------------------------------------
# Density predicates
# ---------------------------------------------------------------------------

def _lt(d, thr):
    return bool(d < thr and not math.isclose(d, thr, rel_tol=EQ_RTOL, abs_tol=0.0))


def _le(d, thr):
    return bool(d <= thr or math.isclose(d, thr, rel_tol=EQ_RTOL, abs_tol=0.0))


@dataclass(frozen=True)
class DensityReport:
    beta: float
    alpha: float
    p: float
    d: float
    poisson_pair_frame: bool
    frame_threshold: float
    frame_slack: float
    sign_retrieval_unique: bool
    unique_threshold: float
    unique_slack: float
    bergman: dict

    def bergman_sampling(self, w: float) -> bool:
        key = _wkey(w)
        if key not in self.bergman:
            raise KeyError(f"no Bergman predicate computed for w={w}")
        return self.bergman[key]["sampling"]

    def to_dict(self) -> dict:
        return {
            "beta": self.beta, "alpha": self.alpha, "p": self.p, "d": self.d,
            "d_angular": 2 * math.pi * self.d,
            "poisson_pair_frame": {"value": self.poisson_pair_frame,
                                   "threshold": self.frame_threshold, "slack": self.frame_slack},
            "sign_retrieval_unique": {"value": self.sign_retrieval_unique,
                                      "threshold": self.unique_threshold, "slack": self.unique_slack},
            "bergman_sampling": self.bergman,
        }


def _wkey(w: float) -> str:
    return f"{float(w):g}"


def density_report(beta: float, alpha: float, p: float, w=None) -> DensityReport:
    """Evaluate the lattice density predicates for ``d = beta ln(alpha)``.

    * ``poisson_pair_frame``: ``d < 2 pi / p``
    * ``sign_retrieval_unique``: ``d <= 4 pi / (1 + 4p)``
    * ``bergman_sampling(w)``: ``d < 4 pi / (w - 1)`` for each requested ``w > 1``;
      the weights ``2p + 1`` and ``2 + 4p`` are always included.

    Boundary comparisons treat values within a relative ``1e-12`` as equal, so
    a ``beta`` computed from a threshold lands exactly on it. Slacks are
    ``threshold - d``.
    """
    if not (np.isfinite(alpha) and alpha > 1):
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    if not (np.isfinite(beta) and beta > 0):
        raise DomainError(f"beta must be positive, got {beta}")
    if not (np.isfinite(p) and p > 0):
        raise DomainError(f"p must be positive, got {p}")
    d = beta * math.log(alpha)
    frame_thr = 2 * math.pi / p
    uniq_thr = 4 * math.pi / (1 + 4 * p)
    ws = [2 * p + 1, 2 + 4 * p]
    if w is not None:
        ws = [float(v) for v in np.atleast_1d(w)] + ws
    bergman = {}
    for wv in ws:
        if not wv > 1:
            raise DomainError(f"Bergman weight must exceed 1, got {wv}")
        thr = 4 * math.pi / (wv - 1)
        bergman[_wkey(wv)] = {"sampling": _lt(d, thr), "threshold": thr, "slack": thr - d}
    return DensityReport(beta, alpha, p, d, _lt(d, frame_thr), frame_thr, frame_thr - d,
                         _le(d, uniq_thr), uniq_thr, uniq_thr - d, bergman)


# ---------------------------------------------------------------------------
# Bergman lift and energy sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LiftedValues:
    """Values ``F(b + i a)`` of the lifted Cauchy transform, aligned to ``lattice``."""

    lattice: HyperbolicLattice
    p: float
    values: np.ndarray

    @property
    def z(self) -> np.ndarray:
        return self.lattice.b + 1j * self.lattice.a

    def weighted_norm(self) -> float:
        """Riemann sum of ``|F|^2 a^(2p-1) db da`` with cells ``beta a`` by ``a ln(alpha)``."""
        lat = self.lattice
        a = lat.a
        cell = lat.beta * a * a * math.log(lat.alpha)
        return float(np.sum(np.abs(self.values) ** 2 * a ** (2 * self.p - 1) * cell))


def bergman_lift(grid: CoefficientGrid, p: float, row: int = 0) -> LiftedValues:
    """Scale Cauchy coefficients by ``a^-(1/2+p)``."""
    w = grid.wavelets[row]
    if w.kind != CAUCHY:
        raise DomainError(f"Bergman lift needs a Cauchy wavelet, got {w.kind}")
    if not math.isclose(w.p, p, rel_tol=1e-14):
        raise DomainError(f"grid computed with order {w.p}, lift requested for order {p}")
    a = grid.lattice.a
    return LiftedValues(grid.lattice, p, grid.values[row] * a ** (-(0.5 + p)))


def cauchy_energy(spec: Spectrum, p: float, a_min: float, a_max: float, n_scales: int = 400) -> float:
    """Riemann sum of ``|W_psi f|^2 db da / a^2`` over one grid period and ``a in [a_min, a_max]``.

    Scales are log-uniform (midpoint rule in ``ln a``); the ``b`` sum uses the
    FFT path on the signal grid.
    """
    if not (0 < a_min < a_max):
        raise DomainError("need 0 < a_min < a_max")
    from .wavelets import cauchy

    w = cauchy(p)
    h = (math.log(a_max) - math.log(a_min)) / n_scales
    total = 0.0
    for i in range(n_scales):
        a = math.exp(math.log(a_min) + (i + 0.5) * h)
        vals = cwt_scale_grid(spec, w, a)
        total += np.sum(np.abs(vals) ** 2) * spec.dx * h / a
    return float(total)


def poisson_pair_from_cauchy(cauchy_values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(W_P, W_HP) = (2 Re W_psi, -2 Im W_psi)`` for real signals."""
    return 2 * cauchy_values.real, -2 * cauchy_values.imag


__all__ = [
    "HyperbolicLattice", "CoefficientGrid", "LatticeKernel", "DensityReport", "LiftedValues",
    "default_lattice", "kernel_rows", "cwt_point", "cwt_points",
    "cwt_scale_grid", "cwt_lattice", "density_report", "bergman_lift", "cauchy_energy",
    "poisson_pair_from_cauchy", "POISSON", "HILBERT_POISSON",
]
