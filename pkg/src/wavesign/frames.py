"""Multi-wavelet frames on a truncated hyperbolic lattice.

A :class:`FrameSystem` bundles real wavelets, a lattice and a signal grid.
Analysis maps a real signal to the stacked coefficient vector
``[W_{phi_0} f(lattice), W_{phi_1} f(lattice), ...]``; synthesis is its
adjoint for the ``sum f g dx`` inner product on signals and the plain dot
product on coefficients, so the frame operator ``S = synthesis o analysis``
is symmetric positive semidefinite.

Reconstruction and bound estimation act on signals supported on
``sys.support`` (a half-open sample range, the central half by default):
edge atoms of a truncated lattice wrap around the periodic grid and are not
representative of the line.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cwt import KERNEL_CACHE_LIMIT, HyperbolicLattice, LatticeKernel, density_report
from .errors import CapacityError, ConvergenceError, DomainError
from .signal import Signal, _phase
from .wavelets import WaveletSpec, fourier_eval

GRAM_DEBUG_LIMIT = 200


@dataclass(frozen=True, eq=False)
class FrameSystem:
    """Real wavelets on a lattice, tied to an ``(n, dx, x0)`` signal grid.

    Parameters
    ----------
    wavelets : sequence of WaveletSpec
        Real-valued wavelets (Poisson, Hilbert-Poisson or combos).
    lattice : HyperbolicLattice
    geometry : (int, float, float)
        ``(n, dx, x0)`` of the signals the system acts on.
    support : (int, int), optional
        Sample range ``[lo, hi)`` used for reconstruction and bound
        estimation. Defaults to the central half of the grid.
    """

    wavelets: tuple
    lattice: HyperbolicLattice
    geometry: tuple
    support: tuple | None = None
    _kernels: tuple = field(init=False, repr=False)
    _half: np.ndarray | None = field(init=False, repr=False)

    def __post_init__(self):
        ws = tuple(self.wavelets)
        if not ws:
            raise DomainError("a frame system needs at least one wavelet")
        for w in ws:
            if not isinstance(w, WaveletSpec) or not w.is_real:
                raise DomainError(f"frame wavelets must be real-valued, got {w!r}")
        n, dx, x0 = self.geometry
        n = int(n)
        if n < 2 or n & (n - 1):
            raise DomainError("grid length must be a power of two")
        if len(self.lattice) == 0:
            raise DomainError("empty lattice")
        sup = self.support
        if sup is None:
            sup = (n // 4, 3 * n // 4)
        lo, hi = int(sup[0]), int(sup[1])
        if not 0 <= lo < hi <= n:
            raise DomainError(f"support {sup} outside the grid [0, {n})")
        object.__setattr__(self, "wavelets", ws)
        object.__setattr__(self, "geometry", (n, float(dx), float(x0)))
        object.__setattr__(self, "support", (lo, hi))
        kernels = tuple(LatticeKernel(w, self.lattice, n, float(dx)) for w in ws)
        object.__setattr__(self, "_kernels", kernels)
        object.__setattr__(self, "_half", self._half_kernel())

    def _half_kernel(self):
        # Real signals and real wavelets have Hermitian spectra, so the
        # coefficients only need bins 0 .. n/2-1: W = sum_k c_k Re(r_k g_k)
        # with c_0 = 1, c_k = 2. Stored as one real matrix acting on [Re g, Im g].
        n = self.geometry[0]
        if self.n_coefficients * n > KERNEL_CACHE_LIMIT:
            return None
        rows = np.concatenate([k._rows[:, n // 2:] for k in self._kernels], axis=0)
        wts = np.full(n // 2, 2.0)
        wts[0] = 1.0
        half = np.concatenate([wts * rows.real, -wts * rows.imag], axis=1)
        half.setflags(write=False)
        return half

    @property
    def n_points(self) -> int:
        return len(self.lattice)

    @property
    def n_coefficients(self) -> int:
        return len(self.wavelets) * len(self.lattice)

    @property
    def support_size(self) -> int:
        return self.support[1] - self.support[0]

    @property
    def p(self) -> float:
        return self.wavelets[0].p

    # -- array-level operators ---------------------------------------------

    def _spectrum(self, samples: np.ndarray) -> np.ndarray:
        n, dx, x0 = self.geometry
        ph = _phase(n, dx, x0)
        if samples.ndim == 2:
            ph = ph[:, None]
        return dx * ph * np.fft.fftshift(np.fft.fft(samples, axis=0), axes=0)

    def _half_phase(self) -> np.ndarray:
        n, dx, x0 = self.geometry
        return dx * _phase(n, dx, x0)[n // 2:]

    def analyze_array(self, samples: np.ndarray) -> np.ndarray:
        """Coefficients of real samples on the full grid (1-D or bins x batch)."""
        samples = np.asarray(samples, dtype=float)
        if self._half is not None:
            n = self.geometry[0]
            ph = self._half_phase()
            if samples.ndim == 2:
                ph = ph[:, None]
            g = ph * np.fft.rfft(samples, axis=0)[:n // 2]
            return self._half @ np.concatenate([g.real, g.imag], axis=0)
        fhat = self._spectrum(samples)
        return np.concatenate([k.apply(fhat).real for k in self._kernels], axis=0)

    def synthesize_array(self, c: np.ndarray) -> np.ndarray:
        """Real samples of ``sum_j c_j atom_j`` on the full grid."""
        n, dx, x0 = self.geometry
        c = np.asarray(c, dtype=float)
        if self._half is not None:
            z = self._half.T @ c
            h = n // 2
            ph = np.conj(self._half_phase())
            if z.ndim == 2:
                ph = ph[:, None]
            q = np.zeros((n,) + z.shape[1:], dtype=np.complex128)
            q[:h] = (z[:h] + 1j * z[h:]) * ph
            # transpose of the samples -> half-spectrum map, divided by dx
            return (n / dx) * np.fft.ifft(q, axis=0).real
        P = self.n_points
        acc = None
        for i, k in enumerate(self._kernels):
            part = k.adjoint(c[i * P:(i + 1) * P].astype(np.complex128))
            acc = part if acc is None else acc + part
        spec = acc * (n * dx)  # divide by dxi
        ph = _phase(n, dx, x0)
        if spec.ndim == 2:
            ph = ph[:, None]
        return np.fft.ifft(np.fft.ifftshift(spec / (dx * ph), axes=0), axis=0).real

    def extend(self, x: np.ndarray) -> np.ndarray:
        n = self.geometry[0]
        lo, hi = self.support
        out = np.zeros((n,) + x.shape[1:])
        out[lo:hi] = x
        return out

    def restrict(self, samples: np.ndarray) -> np.ndarray:
        lo, hi = self.support
        return samples[lo:hi]

    def apply_frame_operator(self, x: np.ndarray) -> np.ndarray:
        """``S`` restricted to the support, acting on support samples."""
        return self.restrict(self.synthesize_array(self.analyze_array(self.extend(x))))

    # -- signal-level helpers ----------------------------------------------

    def check_signal(self, f: Signal):
        if f.geometry != self.geometry:
            raise DomainError(f"signal grid {f.geometry} does not match frame grid {self.geometry}")

    def signal(self, samples) -> Signal:
        n, dx, x0 = self.geometry
        return Signal(np.asarray(samples, dtype=float), dx, x0)

    def support_signal(self, x) -> Signal:
        return self.signal(self.extend(np.asarray(x, dtype=float)))

    def warn_if_sparse(self):
        rep = density_report(self.lattice.beta, self.lattice.alpha, self.p)
        if not rep.poisson_pair_frame:
            warnings.warn(f"lattice density {rep.d:.6g} is not below the frame threshold "
                          f"{rep.frame_threshold:.6g}", RuntimeWarning, stacklevel=3)


def analysis(f: Signal, sys: FrameSystem) -> np.ndarray:
    """Frame coefficients ``<f, T_b D_a phi_i>``, ordered by (wavelet, lattice point)."""
    sys.check_signal(f)
    if not f.real:
        raise DomainError("analysis is defined for real signals")
    return sys.analyze_array(f.samples.real)


def synthesis(c, sys: FrameSystem) -> Signal:
    """Adjoint of :func:`analysis`: ``sum c_ij T_{b_j} D_{a_j} phi_i`` on the grid."""
    c = np.asarray(c, dtype=float)
    if c.shape != (sys.n_coefficients,):
        raise DomainError(f"coefficient vector has shape {c.shape}, expected ({sys.n_coefficients},)")
    return sys.signal(sys.synthesize_array(c))


def atom(sys: FrameSystem, i: int, j: int) -> Signal:
    """Sampled atom ``T_b D_a phi_i`` for lattice point ``j``, built from its spectrum."""
    n, dx, x0 = sys.geometry
    w = sys.wavelets[i]
    b, a = sys.lattice.b[j], sys.lattice.a[j]
    xi = (np.arange(n) - n // 2) / (n * dx)
    spec = np.sqrt(a) * fourier_eval(w, a * xi) * np.exp(-2j * np.pi * b * xi)
    spec[0] = 0.0
    s = np.fft.ifft(np.fft.ifftshift(spec / (dx * _phase(n, dx, x0))))
    return Signal(s.real, dx, x0)


def frame_matrix(sys: FrameSystem) -> np.ndarray:
    """Dense frame operator on the support, assembled from atoms. Small lattices only."""
    if sys.n_points > GRAM_DEBUG_LIMIT:
        raise CapacityError(f"frame_matrix is a debug path for <= {GRAM_DEBUG_LIMIT} points")
    lo, hi = sys.support
    dx = sys.geometry[1]
    rows = [atom(sys, i, j).samples.real[lo:hi]
            for i in range(len(sys.wavelets)) for j in range(sys.n_points)]
    phi = np.array(rows)
    return dx * phi.T @ phi


def rayleigh_quotient(f: Signal, sys: FrameSystem) -> float:
    """``||analysis(f)||^2 / ||f||^2``."""
    c = analysis(f, sys)
    return float(c @ c) / f.norm() ** 2


# ---------------------------------------------------------------------------
# Conjugate gradients on the frame operator
# ---------------------------------------------------------------------------

@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    history: list
    converged: bool


def conjugate_gradient(apply, rhs: np.ndarray, tol: float, max_iter: int, x0=None) -> CGResult:
    """Plain CG for a symmetric positive semidefinite operator; tracks ``||r|| / ||rhs||``."""
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return CGResult(np.zeros_like(rhs), 0, [0.0], True)
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=float)
    r = rhs - apply(x) if x0 is not None else rhs.copy()
    d = r.copy()
    rr = float(r @ r)
    history = [math.sqrt(rr) / bnorm]
    best = history[0]
    for it in range(1, max_iter + 1):
        if history[-1] <= tol:
            return CGResult(x, it - 1, history, True)
        q = apply(d)
        dq = float(d @ q)
        if dq <= 0:
            break
        step = rr / dq
        x = x + step * d
        r = r - step * q
        rr_new = float(r @ r)
        history.append(math.sqrt(rr_new) / bnorm)
        best = min(best, history[-1])
        if not np.isfinite(history[-1]) or history[-1] > 1e6 * max(best, tol):
            raise ConvergenceError("conjugate gradients diverged", history)
        d = r + (rr_new / rr) * d
        rr = rr_new
    if history[-1] <= tol:
        return CGResult(x, len(history) - 1, history, True)
    return CGResult(x, len(history) - 1, history, False)


def reconstruct(c, sys: FrameSystem, tol: float = 1e-12, max_iter: int | None = None,
                return_info: bool = False):
    """Dual-frame reconstruction: solve ``S f = synthesis(c)`` on the support by CG.

    For ``c = analysis(g)`` with ``g`` supported on ``sys.support`` the result
    is ``g``; for general ``c`` it minimises ``||analysis(f) - c||`` over
    support-limited ``f``.

    Raises
    ------
    ConvergenceError
        If CG diverges or misses ``tol`` after ``max_iter`` steps; the
        residual history is attached.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (sys.n_coefficients,):
        raise DomainError(f"coefficient vector has shape {c.shape}, expected ({sys.n_coefficients},)")
    if not tol > 0:
        raise DomainError("tol must be positive")
    sys.warn_if_sparse()
    if max_iter is None:
        max_iter = 20 * sys.support_size
    rhs = sys.restrict(sys.synthesize_array(c))
    res = conjugate_gradient(sys.apply_frame_operator, rhs, tol, max_iter)
    if not res.converged:
        raise ConvergenceError(
            f"CG stopped at relative residual {res.history[-1]:.3e} after {res.iterations} steps",
            res.history)
    f = sys.support_signal(res.x)
    return (f, res) if return_info else f


def range_projection(c, sys: FrameSystem, tol: float = 1e-12, max_iter: int | None = None) -> np.ndarray:
    """Orthogonal projection of ``c`` onto the range of support-limited analysis."""
    f = reconstruct(c, sys, tol=tol, max_iter=max_iter)
    return sys.analyze_array(f.samples.real)


# ---------------------------------------------------------------------------
# Frame bounds
# ---------------------------------------------------------------------------

@dataclass
class FrameBounds:
    A_est: float
    B_est: float
    trials: int
    b_residuals: list
    a_residuals: list
    b_converged: bool
    a_converged: bool
    b_trace: list = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return self.A_est / self.B_est

    @property
    def converged(self) -> bool:
        return self.b_converged and self.a_converged

    def to_dict(self) -> dict:
        return {"A_est": self.A_est, "B_est": self.B_est, "ratio": self.ratio,
                "trials": self.trials, "converged": self.converged,
                "b_converged": self.b_converged, "a_converged": self.a_converged,
                "b_residuals": self.b_residuals, "a_residuals": self.a_residuals,
                "b_trace": self.b_trace}


def random_support_vector(sys: FrameSystem, rng) -> np.ndarray:
    x = rng.standard_normal(sys.support_size)
    return x / np.linalg.norm(x)


def frame_bounds_estimate(sys: FrameSystem, trials: int = 3, seed: int = 0, tol: float = 1e-10,
                          max_iter: int = 5000, res_tol: float = 1e-4,
                          power_iter: int = 1000) -> FrameBounds:
    """Estimate frame bounds over signals supported on ``sys.support``.

    ``B_est`` is the largest Rayleigh quotient reached by power iteration on
    ``S``; ``A_est`` is obtained from the top eigenpair of ``sigma I - S`` with
    ``sigma = 1.05 B_est``, computed by Lanczos iteration started from the
    same random family. Both take the extreme value over ``trials`` random
    starts. Power iteration stops once the eigen-residual
    ``||S x - lam x|| / lam`` falls below ``res_tol`` (the Rayleigh quotient is
    then accurate to roughly ``res_tol^2 / gap``) or once the quotient changes by
    less than ``1e-3 tol`` relative between steps. If neither happens within
    ``power_iter`` steps, a Lanczos solve started from the last iterate finishes
    the job. ``b_trace`` keeps the plain power-iteration values. Non-converged
    estimates are flagged, not raised.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

    rng = np.random.default_rng(seed)
    # eigenvalues of S on samples are the Rayleigh quotients ||Af||^2 / (sum f^2 dx)
    op = sys.apply_frame_operator

    m = sys.support_size
    S_op = LinearOperator((m, m), matvec=op, dtype=float)
    B_est, b_res, b_conv, trace = 0.0, [], True, []
    starts = [random_support_vector(sys, rng) for _ in range(trials)]
    for x in starts:
        lam_prev = None
        conv = False
        for _ in range(power_iter):
            y = op(x)
            lam = float(x @ y)
            ny = np.linalg.norm(y)
            res = float(np.linalg.norm(y - lam * x) / max(lam, 1e-300))
            if lam_prev is not None and (res <= res_tol or abs(lam - lam_prev) <= tol * lam * 1e-3):
                conv = True
                break
            lam_prev = lam
            if ny == 0:
                break
            x = y / ny
        trace.append(lam)
        if not conv and ny > 0:
            # a near-degenerate top of the spectrum stalls power iteration;
            # finish with Lanczos from the last iterate
            try:
                vals, vecs = eigsh(S_op, k=1, which="LA", v0=x, tol=tol, maxiter=max_iter,
                                   ncv=min(m, 60))
                v = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
                y = op(v)
                lam = max(lam, float(v @ y))
                res = float(np.linalg.norm(y - float(v @ y) * v) / max(lam, 1e-300))
                conv = res <= res_tol
            except ArpackNoConvergence:
                pass
        b_res.append(res)
        b_conv &= conv
        B_est = max(B_est, lam)

    sigma = 1.05 * B_est
    shifted = LinearOperator((m, m), matvec=lambda v: sigma * v - op(v), dtype=float)
    A_est, a_res, a_conv = math.inf, [], True
    for x in starts:
        try:
            vals, vecs = eigsh(shifted, k=1, which="LA", v0=x, tol=tol, maxiter=max_iter,
                               ncv=min(m, 60))
            conv = True
        except ArpackNoConvergence as exc:
            vals, vecs, conv = exc.eigenvalues, exc.eigenvectors, False
            if len(vals) == 0:
                a_conv = False
                continue
        v = vecs[:, 0]
        a = float(v @ op(v)) / float(v @ v)
        a_res.append(float(np.linalg.norm(op(v) - a * v) / B_est))
        a_conv &= conv
        A_est = min(A_est, a)
    if not np.isfinite(A_est):
        A_est = float("nan")
    return FrameBounds(A_est, B_est, trials, b_res, a_res, b_conv, a_conv, trace)
