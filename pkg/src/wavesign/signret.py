"""Sign retrieval from magnitudes of three real wavelet transforms.

The pipeline has three layers:

* finite-dimensional tools for measurement families in ``R^M``
  (:func:`full_spark`, :func:`complement_property` and a witness for its
  failure);
* pointwise retrieval: at each lattice point, the three magnitudes
  ``|<v, lambda_i>|`` of ``v = (W_P f, W_HP f)`` pin ``v`` down up to sign;
* global synchronization of those signs, followed by dual-frame
  reconstruction of ``f`` up to one global sign.

Also provided is the complex counterexample ``g = Re f - i Im f``, which
shares every real-wavelet scalogram with ``f``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .cwt import HyperbolicLattice, density_report
from .errors import CapacityError, DomainError
from .frames import FrameSystem, range_projection, reconstruct
from .signal import Signal
from .wavelets import HILBERT_POISSON, POISSON, hilbert_poisson, poisson

RESOLVED, DEFERRED, AMBIGUOUS = 0, 1, 2
STATUS_NAMES = ("resolved", "deferred", "ambiguous")
CP_MAX_N = 24
_CP_CHUNK = 1 << 15
# candidates closer than this (relative) differ only by a sign
_SIGN_ONLY_RTOL = 1e-12


# ---------------------------------------------------------------------------
# Finite measurement families
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeasurementVectors:
    """``N`` real measurement vectors in ``R^M``, stored as an ``(N, M)`` array."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float, copy=True)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DomainError("measurement vectors must form a non-empty (N, M) array")
        if not np.all(np.isfinite(v)):
            raise DomainError("measurement vectors must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def N(self) -> int:
        return self.vectors.shape[0]

    @property
    def M(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.N

    @classmethod
    def from_wavelets(cls, wavelets) -> "MeasurementVectors":
        """Coordinates of real wavelets in the (Poisson, Hilbert-Poisson) basis."""
        return cls(np.array([w.lam for w in wavelets], dtype=float))


def _as_vectors(vecs) -> MeasurementVectors:
    return vecs if isinstance(vecs, MeasurementVectors) else MeasurementVectors(vecs)


def _check_dim(vecs: MeasurementVectors, M: int):
    if int(M) != M or M < 1:
        raise DomainError("dimension M must be a positive integer")
    if vecs.M != M:
        raise DomainError(f"measurement vectors have dimension {vecs.M}, expected {M}")


def _rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    return int(np.linalg.matrix_rank(mat))


def full_spark(vecs, M: int) -> bool:
    """True iff every ``M`` of the vectors span ``R^M``.

    Families with fewer than ``M`` vectors cannot span and return False.
    """
    vecs = _as_vectors(vecs)
    _check_dim(vecs, M)
    V = vecs.vectors
    if vecs.N < M:
        return False
    scale = max(float(np.max(np.abs(V))), 1e-300)
    for idx in itertools.combinations(range(vecs.N), M):
        sub = V[list(idx)]
        if M == 2:
            det = sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0]
            if abs(det) <= 8 * np.finfo(float).eps * scale ** 2:
                return False
        elif _rank(sub) < M:
            return False
    return True


def _subset_ranks(V: np.ndarray) -> np.ndarray:
    """Rank of ``V[S]`` for every subset ``S``, indexed by bitmask."""
    N = V.shape[0]
    total = 1 << N
    ranks = np.zeros(total, dtype=np.int8)
    bit = 1 << np.arange(N)
    for start in range(0, total, _CP_CHUNK):
        masks = np.arange(start, min(start + _CP_CHUNK, total))
        sel = (masks[:, None] & bit[None, :]) != 0
        stack = V[None, :, :] * sel[:, :, None]
        r = np.linalg.matrix_rank(stack)
        # matrix_rank uses a per-matrix tolerance; an all-zero matrix has rank 0
        ranks[masks] = r
    return ranks


def complement_property(vecs, M: int) -> bool:
    """True iff for every subset ``S``, either ``S`` or its complement spans ``R^M``.

    Exhaustive scan over all ``2^N`` subsets.

    Raises
    ------
    CapacityError
        If ``N > 24``.
    """
    vecs = _as_vectors(vecs)
    _check_dim(vecs, M)
    if vecs.N > CP_MAX_N:
        raise CapacityError(f"complement_property enumerates 2^N subsets; N={vecs.N} exceeds {CP_MAX_N}")
    ranks = _subset_ranks(vecs.vectors)
    full = (1 << vecs.N) - 1
    masks = np.arange(full + 1)
    ok = (ranks[masks] == M) | (ranks[full ^ masks] == M)
    return bool(np.all(ok))


def cp_failure_witness(vecs, M: int):
    """Two vectors ``x != +-y`` with equal magnitudes, or None if the property holds.

    For a subset ``S`` where neither ``S`` nor its complement spans, take
    ``u`` orthogonal to ``span S`` and ``w`` orthogonal to the complement's
    span; then ``x = u + w`` and ``y = u - w`` agree in every magnitude.
    """
    from scipy.linalg import null_space

    vecs = _as_vectors(vecs)
    _check_dim(vecs, M)
    if vecs.N > CP_MAX_N:
        raise CapacityError(f"N={vecs.N} exceeds {CP_MAX_N}")
    V = vecs.vectors
    ranks = _subset_ranks(V)
    full = (1 << vecs.N) - 1
    for mask in range(full + 1):
        if ranks[mask] < M and ranks[full ^ mask] < M:
            inside = [i for i in range(vecs.N) if mask >> i & 1]
            outside = [i for i in range(vecs.N) if not mask >> i & 1]
            u = null_space(V[inside]) if inside else np.eye(M)
            w = null_space(V[outside]) if outside else np.eye(M)
            u, w = u[:, 0], w[:, 0]
            return u + w, u - w
    return None


def magnitudes(vecs, v) -> np.ndarray:
    """``|<v, phi_n>|`` for every measurement vector; ``v`` may be ``(M,)`` or ``(P, M)``."""
    vecs = _as_vectors(vecs)
    return np.abs(np.asarray(v, dtype=float) @ vecs.vectors.T)


# ---------------------------------------------------------------------------
# Pointwise retrieval
# ---------------------------------------------------------------------------

def _best_pair(V: np.ndarray) -> tuple[int, int, int]:
    """Index pair with the best-conditioned 2x2 system, plus the remaining index."""
    best, score = (0, 1, 2), -1.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        det = abs(V[i, 0] * V[j, 1] - V[i, 1] * V[j, 0])
        s = det / (np.linalg.norm(V[i]) * np.linalg.norm(V[j]))
        if s > score + 1e-12:
            best, score = (i, j, 3 - i - j), s
    return best


@dataclass
class PointRetrieval:
    """Result of pointwise retrieval: arrays over points (or scalars for one point)."""

    v: np.ndarray
    alt: np.ndarray
    status: np.ndarray
    residual: np.ndarray


def retrieve_points(m, vecs, tau: float = 0.0, delta: float = 1e-6) -> PointRetrieval:
    """Vectorised :func:`point_sign_retrieve` over rows of ``m`` (shape ``(P, 3)``)."""
    vecs = _as_vectors(vecs)
    if vecs.N != 3 or vecs.M != 2:
        raise DomainError("pointwise retrieval needs three measurement vectors in R^2")
    if not full_spark(vecs, 2):
        raise DomainError("measurement vectors are not full spark")
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[1] != 3:
        raise DomainError("magnitudes must have shape (P, 3)")
    if not np.all(np.isfinite(m)):
        raise DomainError("magnitudes must be finite")
    if np.any(m < 0):
        raise DomainError("magnitudes must be nonnegative")
    V = vecs.vectors
    i, j, k = _best_pair(V)
    L = V[[i, j]]
    Linv = np.linalg.inv(L)
    plus = np.stack([m[:, i], m[:, j]], axis=1) @ Linv.T
    minus = np.stack([m[:, i], -m[:, j]], axis=1) @ Linv.T
    r_plus = np.abs(np.abs(plus @ V[k]) - m[:, k])
    r_minus = np.abs(np.abs(minus @ V[k]) - m[:, k])
    take_plus = r_plus <= r_minus
    v = np.where(take_plus[:, None], plus, minus)
    alt = np.where(take_plus[:, None], minus, plus)
    res = np.minimum(r_plus, r_minus)

    mnorm = np.linalg.norm(m, axis=1)
    vnorm = np.linalg.norm(v, axis=1)
    both = np.maximum(r_plus, r_minus) <= delta * mnorm
    gap = np.minimum(np.linalg.norm(plus - minus, axis=1), np.linalg.norm(plus + minus, axis=1))
    status = np.full(m.shape[0], RESOLVED, dtype=np.int8)
    status[(res > delta * mnorm) | (both & (gap > _SIGN_ONLY_RTOL * vnorm))] = AMBIGUOUS
    status[vnorm <= tau] = DEFERRED
    return PointRetrieval(v, alt, status, res)


def point_sign_retrieve(m, vecs, tau: float = 0.0, delta: float = 1e-6):
    """Recover ``v in R^2`` up to sign from ``m_i = |<v, lambda_i>|``, ``i = 1, 2, 3``.

    Both relative sign choices of the first two magnitudes are solved for
    (using the best-conditioned pair of vectors) and the candidate matching
    the third magnitude is kept.

    Parameters
    ----------
    m : sequence of 3 nonnegative floats
    vecs : MeasurementVectors or (3, 2) array
        Full-spark family.
    tau : float
        Deferral threshold: ``||v|| <= tau`` gives status ``"deferred"``.
    delta : float
        Relative match tolerance against ``||m||``.

    Returns
    -------
    v : ndarray, shape (2,)
    status : {"resolved", "deferred", "ambiguous"}
    """
    res = retrieve_points(np.asarray(m, dtype=float)[None, :], vecs, tau, delta)
    return res.v[0], STATUS_NAMES[int(res.status[0])]


# ---------------------------------------------------------------------------
# Fields over a lattice
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MagnitudeField:
    """Nonnegative magnitudes ``|W_{phi_i} f|`` at each lattice point, shape ``(P, k)``."""

    lattice: HyperbolicLattice
    triples: np.ndarray

    def __post_init__(self):
        t = np.array(self.triples, dtype=float, copy=True)
        if t.ndim == 1:
            t = t[:, None]
        if t.ndim != 2 or t.shape[0] != len(self.lattice):
            raise DomainError("magnitude field must have one row per lattice point")
        if not np.all(np.isfinite(t)):
            raise DomainError("magnitudes must be finite")
        if np.any(t < 0):
            raise DomainError("magnitudes must be nonnegative")
        t.setflags(write=False)
        object.__setattr__(self, "triples", t)

    @property
    def width(self) -> int:
        return self.triples.shape[1]

    @classmethod
    def from_coefficients(cls, lattice: HyperbolicLattice, coeffs: np.ndarray) -> "MagnitudeField":
        """From stacked frame coefficients ``[c_phi1, c_phi2, ...]`` (see :func:`analysis`)."""
        c = np.asarray(coeffs)
        P = len(lattice)
        if c.ndim != 1 or c.size % P:
            raise DomainError("coefficient vector length is not a multiple of the lattice size")
        return cls(lattice, np.abs(c.reshape(-1, P).T))


@dataclass(frozen=True, eq=False)
class SignField:
    """Pointwise vectors ``v_j`` up to sign, their status and (after sync) signs ``eps_j``.

    ``eps`` is ``+-1`` on resolved points and ``0`` elsewhere, or None before
    synchronization. ``alt`` holds the rejected candidate at each point.
    """

    lattice: HyperbolicLattice
    v: np.ndarray
    status: np.ndarray
    eps: np.ndarray | None = None
    alt: np.ndarray | None = None
    tau: float = 0.0
    delta: float = 1e-6

    def __post_init__(self):
        P = len(self.lattice)
        v = np.array(self.v, dtype=float, copy=True)
        st = np.array(self.status, dtype=np.int8, copy=True)
        if v.shape != (P, 2) or st.shape != (P,):
            raise DomainError("sign field arrays do not match the lattice")
        if np.any((st < 0) | (st > 2)):
            raise DomainError("unknown point status")
        if np.any(np.linalg.norm(v[st == RESOLVED], axis=1) <= self.tau):
            raise DomainError("resolved points must have ||v|| > tau")
        alt = v.copy() if self.alt is None else np.array(self.alt, dtype=float, copy=True)
        arrays = {"v": v, "status": st, "alt": alt}
        if self.eps is not None:
            eps = np.array(self.eps, dtype=np.int8, copy=True)
            if eps.shape != (P,):
                raise DomainError("sign vector does not match the lattice")
            res = st == RESOLVED
            if np.any(np.abs(eps[res]) != 1) or np.any(eps[~res] != 0):
                raise DomainError("signs must be +-1 exactly on resolved points")
            arrays["eps"] = eps
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def resolved(self) -> np.ndarray:
        return self.status == RESOLVED

    def counts(self) -> dict:
        return {name: int(np.sum(self.status == code)) for code, name in enumerate(STATUS_NAMES)}

    def with_eps(self, eps) -> "SignField":
        return replace(self, eps=eps)

    def flipped(self) -> "SignField":
        """All pointwise vectors negated; statuses and signs untouched."""
        return replace(self, v=-self.v, alt=-self.alt)

    def signed(self) -> np.ndarray:
        """``eps_j v_j`` on resolved points, zero elsewhere."""
        if self.eps is None:
            raise DomainError("sign field has not been synchronized")
        return self.eps[:, None] * self.v


def retrieve_field(mf: MagnitudeField, vecs, tau_rel: float = 1e-8, delta: float = 1e-6) -> SignField:
    """Pointwise retrieval at every lattice point, with ``tau = tau_rel * max_j ||v_j||``."""
    if mf.width != 3:
        raise DomainError(f"pointwise retrieval needs three magnitudes per point, got {mf.width}")
    pre = retrieve_points(mf.triples, vecs, 0.0, delta)
    vmax = float(np.max(np.linalg.norm(pre.v, axis=1), initial=0.0))
    tau = tau_rel * vmax
    res = retrieve_points(mf.triples, vecs, tau, delta)
    return SignField(mf.lattice, res.v, res.status, None, res.alt, tau, delta)


# ---------------------------------------------------------------------------
# Synchronization
# ---------------------------------------------------------------------------

@dataclass
class SyncOptions:
    """Knobs for :func:`global_sign_sync`.

    ``tol`` and ``max_iter`` govern the alternating refinement loop;
    ``lsqr_tol``/``lsqr_iter`` the direction-constrained least-squares solve
    that seeds it; ``cg_tol`` every frame-operator inversion.
    """

    k: int = 6
    tol: float = 1e-8
    max_iter: int = 200
    lsqr_tol: float = 1e-14
    lsqr_iter: int | None = None
    cg_tol: float = 1e-12

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SyncResult:
    field: SignField
    coefficients: np.ndarray       # final (P, 2) signed coefficients
    residual: float                # ||c - Pc|| / ||c|| at exit
    initial_residual: float        # same quantity for the stage-1 signs
    converged: bool
    iterations: int
    lsqr_iterations: int
    stage1_eps: np.ndarray
    history: list = field(default_factory=list)
    signal: Signal | None = None   # support-limited reconstruction of ``coefficients``

    def report(self) -> dict:
        res = self.field.resolved
        agree = float(np.mean(self.stage1_eps[res] == self.field.eps[res])) if res.any() else 1.0
        return {"residual": self.residual, "initial_residual": self.initial_residual,
                "converged": self.converged, "iterations": self.iterations,
                "lsqr_iterations": self.lsqr_iterations,
                "stage1_agreement": max(agree, 1.0 - agree), **self.field.counts()}


def hyperbolic_distance(b1, a1, b2, a2):
    """Distance between ``b1 + i a1`` and ``b2 + i a2`` in the upper half-plane."""
    arg = 1.0 + ((b1 - b2) ** 2 + (a1 - a2) ** 2) / (2.0 * a1 * a2)
    return np.arccosh(np.maximum(arg, 1.0))


def _knn(b, a, k):
    n = b.size
    nbr = np.empty((n, k), dtype=np.int64)
    for s in range(0, n, 1024):
        sl = slice(s, min(s + 1024, n))
        d = hyperbolic_distance(b[sl, None], a[sl, None], b[None, :], a[None, :])
        d[np.arange(d.shape[0]), np.arange(sl.start, sl.stop)] = np.inf
        part = np.argpartition(d, k - 1, axis=1)[:, :k] if k < n else np.argsort(d, axis=1)[:, :k]
        nbr[sl] = part
    return nbr


def spectral_signs(field: SignField, p: float, k: int = 6) -> np.ndarray:
    """Stage-1 signs on resolved points from the leading eigenvector of a consistency graph.

    Each resolved point is joined to its ``k`` nearest resolved neighbours in
    the hyperbolic metric. The edge weight is the normalized correlation
    ``Re(F_j conj F_k) / |F_j||F_k|`` of the lifted Cauchy values
    ``F = a^-(1/2 + p) (v_1 - i v_2) / 2``, i.e. the sign that makes the
    neighbours' lifted values closest. Output is ``+-1`` on resolved points
    (zero elsewhere) with the largest-norm point fixed to ``+1``.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.linalg import eigsh

    res = np.flatnonzero(field.resolved)
    eps = np.zeros(len(field.lattice), dtype=np.int8)
    if res.size == 0:
        raise DomainError("no resolved points to synchronize")
    v = field.v[res]
    j0 = int(np.argmax(np.linalg.norm(v, axis=1)))
    if res.size == 1:
        eps[res] = 1
        return eps
    b, a = field.lattice.b[res], field.lattice.a[res]
    F = a ** -(0.5 + p) * (v[:, 0] - 1j * v[:, 1]) / 2
    F = F / np.abs(F)
    kk = min(k, res.size - 1)
    nbr = _knn(b, a, kk)
    rows = np.repeat(np.arange(res.size), kk)
    cols = nbr.ravel()
    w = np.real(F[rows] * np.conj(F[cols]))
    W = coo_matrix((w, (rows, cols)), shape=(res.size, res.size)).tocsr()
    W = (W + W.T) * 0.5
    if res.size <= 2000:
        vals, vecs = np.linalg.eigh(W.toarray())
        lead = vecs[:, -1]
    else:
        vals, vecs = eigsh(W, k=1, which="LA", v0=np.ones(res.size), tol=1e-10)
        lead = vecs[:, 0]
    s = np.where(lead >= 0, 1, -1).astype(np.int8)
    if s[j0] < 0:
        s = -s
    eps[res] = s
    return eps


def pair_system(sys: FrameSystem) -> FrameSystem:
    """The (Poisson, Hilbert-Poisson) system on the same lattice, grid and support."""
    p = sys.p
    pair = (poisson(p), hilbert_poisson(p))
    if tuple(sys.wavelets) == pair:
        return sys
    return FrameSystem(pair, sys.lattice, sys.geometry, sys.support)


def _check_pair(sys: FrameSystem):
    kinds = [w.kind for w in sys.wavelets]
    if kinds != [POISSON, HILBERT_POISSON] or sys.wavelets[0].p != sys.wavelets[1].p:
        raise DomainError("synchronization runs on the (Poisson, Hilbert-Poisson) pair system")


def _stack(c: np.ndarray, P: int) -> np.ndarray:
    return np.stack([c[:P], c[P:]], axis=1)


def _flat(V: np.ndarray) -> np.ndarray:
    return np.concatenate([V[:, 0], V[:, 1]])


def _impose(V: np.ndarray, field: SignField) -> tuple[np.ndarray, np.ndarray]:
    """Project pair coefficients ``V`` onto the measured set; returns (coefficients, eps)."""
    out = np.zeros_like(V)
    eps = np.zeros(V.shape[0], dtype=np.int8)
    res = field.resolved
    s = np.where(np.sum(V[res] * field.v[res], axis=1) >= 0, 1, -1)
    eps[res] = s
    out[res] = s[:, None] * field.v[res]
    amb = np.flatnonzero(field.status == AMBIGUOUS)
    if amb.size:
        cands = np.stack([field.v[amb], -field.v[amb], field.alt[amb], -field.alt[amb]], axis=1)
        err = np.linalg.norm(cands - V[amb, None, :], axis=2)
        out[amb] = cands[np.arange(amb.size), np.argmin(err, axis=1)]
    return out, eps


def _lsqr_directions(field: SignField, sys: FrameSystem, eps0: np.ndarray, opts: SyncOptions):
    """Least-squares signal whose pair coefficients lie on the recovered lines.

    Rows ``u_perp_j . c_j = 0`` for resolved points, ``c_j = 0`` for deferred
    points, and one gauge row ``u_j0 . c_j0 = eps0_j0 ||v_j0||`` at the
    largest resolved point. Ambiguous points are left free.
    """
    from scipy.sparse.linalg import LinearOperator, lsqr

    P = sys.n_points
    dx = sys.geometry[1]
    res = np.flatnonzero(field.resolved)
    dfr = np.flatnonzero(field.status == DEFERRED)
    vn = np.linalg.norm(field.v[res], axis=1)
    u = field.v[res] / vn[:, None]
    up = np.stack([-u[:, 1], u[:, 0]], axis=1)
    g = int(np.argmax(vn))
    j0 = res[g]
    n_rows = res.size + 2 * dfr.size + 1
    m = sys.support_size

    def matvec(x):
        V = _stack(sys.analyze_array(sys.extend(x)), P)
        out = np.empty(n_rows)
        out[:res.size] = np.sum(up * V[res], axis=1)
        out[res.size:res.size + dfr.size] = V[dfr, 0]
        out[res.size + dfr.size:-1] = V[dfr, 1]
        out[-1] = u[g] @ V[j0]
        return out

    def rmatvec(y):
        y = np.asarray(y).ravel()
        V = np.zeros((P, 2))
        V[res] = up * y[:res.size, None]
        V[dfr, 0] = y[res.size:res.size + dfr.size]
        V[dfr, 1] = y[res.size + dfr.size:-1]
        V[j0] += u[g] * y[-1]
        return dx * sys.restrict(sys.synthesize_array(_flat(V)))

    op = LinearOperator((n_rows, m), matvec=matvec, rmatvec=rmatvec, dtype=float)
    rhs = np.zeros(n_rows)
    rhs[-1] = float(eps0[j0]) * vn[g]
    iter_lim = opts.lsqr_iter if opts.lsqr_iter is not None else 50 * m
    out = lsqr(op, rhs, atol=opts.lsqr_tol, btol=opts.lsqr_tol, conlim=1e14, iter_lim=iter_lim)
    return out[0], int(out[2])


def _projection_residual(c: np.ndarray, sys: FrameSystem, tol: float):
    f = reconstruct(c, sys, tol=tol)
    Pc = sys.analyze_array(f.samples.real)
    nc = float(np.linalg.norm(c))
    return f, Pc, (float(np.linalg.norm(c - Pc)) / nc if nc > 0 else 0.0)


def global_sign_sync(field: SignField, sys: FrameSystem, opts: SyncOptions | None = None) -> SyncResult:
    """Assign a sign to every resolved point so the field becomes one coherent transform.

    Stage 1 picks signs spectrally (:func:`spectral_signs`), or keeps the
    signs already carried by ``field``. Stage 2 solves for the support-limited
    signal whose (P, HP) coefficients lie on the recovered lines, gauged by
    the stage-1 sign at the largest point, then alternates range projection
    with re-imposition of the measured vectors until the relative change
    drops below ``opts.tol`` or ``opts.max_iter`` is reached. The result is
    defined up to one global sign. Non-convergence is flagged in the result.

    Raises
    ------
    DomainError
        If no point is resolved.
    """
    opts = opts or SyncOptions()
    _check_pair(sys)
    if len(field.lattice) != sys.n_points or np.any(field.lattice.b != sys.lattice.b) \
            or np.any(field.lattice.a != sys.lattice.a):
        raise DomainError("sign field and frame system use different lattices")
    if not field.resolved.any():
        raise DomainError("no resolved points to synchronize")
    P = sys.n_points

    eps0 = field.eps if field.eps is not None else spectral_signs(field, sys.p, opts.k)
    c0, _ = _impose(eps0[:, None] * field.v, field)
    # diagnostic only, so a looser solve suffices
    _, _, initial_residual = _projection_residual(_flat(c0), sys, max(opts.cg_tol, 1e-8))

    x, lsqr_its = _lsqr_directions(field, sys, eps0, opts)
    V = _stack(sys.analyze_array(sys.extend(x)), P)
    c, eps = _impose(V, field)
    history = []
    converged, residual, it = False, math.nan, 0
    for it in range(1, opts.max_iter + 1):
        f, Pc, residual = _projection_residual(_flat(c), sys, opts.cg_tol)
        new, eps = _impose(_stack(Pc, P), field)
        nc = float(np.linalg.norm(c))
        change = float(np.linalg.norm(new - c)) / nc if nc > 0 else 0.0
        history.append({"residual": residual, "change": change})
        c = new
        if change < opts.tol:
            converged = True
            break
    if not history or history[-1]["change"] > 0:
        f, _, residual = _projection_residual(_flat(c), sys, opts.cg_tol)
    return SyncResult(field.with_eps(eps), c, residual, initial_residual, converged, it,
                      lsqr_its, eps0, history, f)


# ---------------------------------------------------------------------------
# End-to-end recovery
# ---------------------------------------------------------------------------

@dataclass
class RecoveryResult:
    signal: Signal
    report: dict
    sync: SyncResult | None = None


def _density_flags(sys: FrameSystem) -> dict:
    rep = density_report(sys.lattice.beta, sys.lattice.alpha, sys.p)
    return {"d": rep.d, "sign_retrieval_unique": rep.sign_retrieval_unique,
            "poisson_pair_frame": rep.poisson_pair_frame}


def recover_signal(mf: MagnitudeField, sys: FrameSystem, vecs, opts: SyncOptions | None = None,
                   tau_rel: float = 1e-8, delta: float = 1e-6,
                   flip_pointwise: bool = False) -> RecoveryResult:
    """Recover a real signal, up to global sign, from three wavelet magnitudes per point.

    Parameters
    ----------
    mf : MagnitudeField
        ``|W_{phi_i} f|`` for the three wavelets described by ``vecs``.
    sys : FrameSystem
        Lattice, grid and support; wavelet order ``p`` is taken from it.
    vecs : MeasurementVectors
        Coordinates of the three wavelets in the (P, HP) basis; full spark.
    flip_pointwise : bool
        Negate every pointwise vector before synchronization (a gauge check).

    Returns
    -------
    RecoveryResult
        Signal plus a quality report (point counts, residuals, density flags).
    """
    opts = opts or SyncOptions()
    vecs = _as_vectors(vecs)
    if not full_spark(vecs, 2) or vecs.N != 3:
        raise DomainError("recovery needs three full-spark measurement vectors in R^2")
    pair = pair_system(sys)
    report = {"mode": "three-wavelet", "contract_void": False, **_density_flags(pair)}
    if not report["sign_retrieval_unique"]:
        warnings.warn(f"lattice density {report['d']:.6g} is above the sign-retrieval uniqueness "
                      "threshold; recovery is not guaranteed", RuntimeWarning, stacklevel=2)
    report["density_warning"] = not report["sign_retrieval_unique"]

    field_ = retrieve_field(mf, vecs, tau_rel, delta)
    if flip_pointwise:
        field_ = field_.flipped()
    report.update(field_.counts())
    report["tau"] = field_.tau
    if not field_.resolved.any():
        n, dx, x0 = pair.geometry
        report.update({"residual": 0.0, "converged": True, "iterations": 0})
        return RecoveryResult(Signal(np.zeros(n), dx, x0), report, None)

    sync = global_sign_sync(field_, pair, opts)
    report.update(sync.report())
    return RecoveryResult(sync.signal, report, sync)


def recover_signal_two(mf: MagnitudeField, sys: FrameSystem, max_iter: int = 100,
                       tol: float = 1e-8, cg_tol: float = 1e-10) -> RecoveryResult:
    """Two-wavelet ablation: alternating projections from ``|W_P f|`` and ``|W_HP f|`` only.

    Purely experimental; nothing is claimed about its output and the report
    carries ``contract_void = True``.
    """
    if mf.width != 2:
        raise DomainError(f"two-wavelet mode needs two magnitudes per point, got {mf.width}")
    pair = pair_system(sys)
    P = pair.n_points
    mags = mf.triples
    c = _flat(mags.copy())
    history, converged, it = [], False, 0
    for it in range(1, max_iter + 1):
        Pc = _stack(range_projection(c, pair, tol=cg_tol), P)
        new = _flat(np.where(Pc >= 0, 1.0, -1.0) * mags)
        change = float(np.linalg.norm(new - c)) / max(float(np.linalg.norm(c)), 1e-300)
        history.append(change)
        c = new
        if change < tol:
            converged = True
            break
    f = reconstruct(c, pair, tol=cg_tol)
    report = {"mode": "two-wavelet", "contract_void": True, "iterations": it,
              "converged": converged, "final_change": history[-1] if history else 0.0,
              **_density_flags(pair)}
    return RecoveryResult(f, report, None)


def up_to_sign_error(f_rec: Signal, f: Signal) -> float:
    """``min(||f_rec - f||, ||f_rec + f||) / ||f||``."""
    nf = f.norm()
    if nf == 0:
        return f_rec.norm()
    return min((f_rec - f).norm(), (f_rec + f).norm()) / nf


# ---------------------------------------------------------------------------
# Complex counterexample
# ---------------------------------------------------------------------------

def conjugate_counterexample(f: Signal) -> Signal:
    """``g = Re f - i Im f``: same scalogram as ``f`` for every real wavelet, yet not ``+-f``.

    Raises
    ------
    DomainError
        If ``Re f`` or ``Im f`` has norm at most ``1e-6 ||f||``.
    """
    nf = f.norm()
    re = np.sqrt(np.sum(f.samples.real ** 2) * f.dx)
    im = np.sqrt(np.sum(f.samples.imag ** 2) * f.dx)
    if nf == 0 or re <= 1e-6 * nf or im <= 1e-6 * nf:
        raise DomainError("counterexample needs a signal with non-negligible real and imaginary parts")
    return Signal(np.conj(f.samples), f.dx, f.x0, real=False)


def phase_distance(f: Signal, g: Signal) -> float:
    """``min over |c| = 1 of ||f - c g|| / ||f||``, from ``||f||^2 + ||g||^2 - 2|<f, g>|``."""
    nf = f.norm()
    if nf == 0:
        raise DomainError("phase distance is relative to a nonzero f")
    d2 = nf ** 2 + g.norm() ** 2 - 2 * abs(f.inner(g))
    return math.sqrt(max(d2, 0.0)) / nf
