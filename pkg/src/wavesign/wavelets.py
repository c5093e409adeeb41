"""Cauchy and Poisson wavelets, defined through their Fourier transforms.

All evaluators follow the ``exp(-2*pi*i*x*xi)`` Fourier convention:

* Cauchy of order p:        xi^p exp(-xi) for xi > 0, zero otherwise
* Poisson of order p:       |xi|^p exp(-|xi|)
* Hilbert-Poisson:          -i sgn(xi) |xi|^p exp(-|xi|)
* Combo (l1, l2):           l1 * Poisson + l2 * Hilbert-Poisson

so that ``2 * Cauchy == Poisson + i * HilbertPoisson`` holds pointwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

CAUCHY = "cauchy"
POISSON = "poisson"
HILBERT_POISSON = "hilbert_poisson"
COMBO = "combo"
KINDS = (CAUCHY, POISSON, HILBERT_POISSON, COMBO)

_ALIASES = {
    "cauchy": CAUCHY,
    "poisson": POISSON,
    "p": POISSON,
    "hpoisson": HILBERT_POISSON,
    "hilbert_poisson": HILBERT_POISSON,
    "hilbertpoisson": HILBERT_POISSON,
    "hp": HILBERT_POISSON,
    "combo": COMBO,
}


@dataclass(frozen=True)
class WaveletSpec:
    """A wavelet given by kind, order ``p`` and, for combos, ``(l1, l2)``."""

    kind: str
    p: float = 1.0
    combo: tuple[float, float] | None = None

    def __post_init__(self):
        kind = _ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise DomainError(f"unknown wavelet kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not (np.isfinite(self.p) and self.p > 0):
            raise DomainError(f"wavelet order must be positive, got {self.p}")
        object.__setattr__(self, "p", float(self.p))
        if kind == COMBO:
            if self.combo is None or len(self.combo) != 2:
                raise DomainError("combo wavelet needs two coefficients")
            l1, l2 = (float(v) for v in self.combo)
            if not (np.isfinite(l1) and np.isfinite(l2)):
                raise DomainError("combo coefficients must be finite")
            if l1 == 0.0 and l2 == 0.0:
                raise DomainError("combo coefficients must not both vanish")
            object.__setattr__(self, "combo", (l1, l2))
        elif self.combo is not None:
            raise DomainError(f"{kind} wavelet takes no combo coefficients")

    @property
    def is_real(self) -> bool:
        """Whether the wavelet is real-valued in time (everything but Cauchy)."""
        return self.kind != CAUCHY

    @property
    def lam(self) -> tuple[float, float]:
        """Coordinates in the (Poisson, Hilbert-Poisson) basis."""
        if self.kind == POISSON:
            return (1.0, 0.0)
        if self.kind == HILBERT_POISSON:
            return (0.0, 1.0)
        if self.kind == COMBO:
            return self.combo
        raise DomainError("the Cauchy wavelet is not a real combination of Poisson wavelets")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "p": self.p}
        if self.kind == COMBO:
            d["lambda"] = list(self.combo)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "WaveletSpec":
        lam = d.get("lambda")
        return cls(d["kind"], d.get("p", 1.0), tuple(lam) if lam is not None else None)

    @classmethod
    def from_json(cls, text: str) -> "WaveletSpec":
        return cls.from_dict(json.loads(text))

    def label(self) -> str:
        if self.kind == COMBO:
            return f"combo:{self.combo[0]:g},{self.combo[1]:g}"
        return {CAUCHY: "cauchy", POISSON: "poisson", HILBERT_POISSON: "hpoisson"}[self.kind]


def poisson(p: float = 1.0) -> WaveletSpec:
    return WaveletSpec(POISSON, p)


def hilbert_poisson(p: float = 1.0) -> WaveletSpec:
    return WaveletSpec(HILBERT_POISSON, p)


def cauchy(p: float = 1.0) -> WaveletSpec:
    return WaveletSpec(CAUCHY, p)


def combo(l1: float, l2: float, p: float = 1.0) -> WaveletSpec:
    return WaveletSpec(COMBO, p, (l1, l2))


def from_lambda(lam, p: float = 1.0) -> WaveletSpec:
    """Wavelet ``l1*P_p + l2*HP_p``, collapsing to a named kind when possible."""
    l1, l2 = float(lam[0]), float(lam[1])
    if (l1, l2) == (1.0, 0.0):
        return poisson(p)
    if (l1, l2) == (0.0, 1.0):
        return hilbert_poisson(p)
    return combo(l1, l2, p)


def parse_wavelets(text: str, p: float = 1.0) -> list[WaveletSpec]:
    """Parse a list such as ``"poisson,hpoisson,combo:1,1"``."""
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    out = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.lower().startswith("combo:"):
            if i + 1 >= len(tokens):
                raise DomainError(f"combo wavelet in {text!r} needs two coefficients")
            try:
                l1 = float(tok.split(":", 1)[1])
                l2 = float(tokens[i + 1])
            except ValueError as exc:
                raise DomainError(f"bad combo coefficients in {text!r}") from exc
            out.append(combo(l1, l2, p))
            i += 2
        else:
            out.append(WaveletSpec(tok, p))
            i += 1
    if not out:
        raise DomainError("empty wavelet list")
    return out


def _radial(xi, p):
    r = np.abs(xi)
    return r ** p * np.exp(-r)


def fourier_eval(w: WaveletSpec, xi):
    """Fourier transform of ``w`` at ``xi`` (scalar or array); always complex."""
    xi = np.asarray(xi, dtype=float)
    if w.kind == CAUCHY:
        out = np.where(xi > 0, _radial(xi, w.p), 0.0).astype(np.complex128)
    elif w.kind == POISSON:
        out = _radial(xi, w.p).astype(np.complex128)
    else:
        rad = _radial(xi, w.p)
        hp = -1j * np.sign(xi) * rad
        if w.kind == HILBERT_POISSON:
            out = hp
        else:
            l1, l2 = w.combo
            out = l1 * rad + l2 * hp
    out = np.asarray(out, dtype=np.complex128)
    return out[()] if out.ndim == 0 else out


def poisson_time(x):
    """Order-one Poisson wavelet in time, ``rho(x) + x*rho'(x)`` with ``rho = 2/(1+4 pi^2 x^2)``."""
    x = np.asarray(x, dtype=float)
    q = 1.0 + 4.0 * np.pi ** 2 * x ** 2
    rho = 2.0 / q
    drho = -16.0 * np.pi ** 2 * x / q ** 2
    out = rho + x * drho
    return out[()] if out.ndim == 0 else out


def admissibility_constant(p: float) -> float:
    """``C_p = integral_0^inf xi^(2p-1) exp(-2 xi) d xi = Gamma(2p) / 2^(2p)``."""
    if not (np.isfinite(p) and p > 0):
        raise DomainError(f"admissibility constant needs p > 0, got {p}")
    return math.gamma(2.0 * p) / 2.0 ** (2.0 * p)


def admissibility_quadrature(p: float) -> float:
    """Adaptive-quadrature value of the admissibility integral, kept as a cross-check."""
    if not (np.isfinite(p) and p > 0):
        raise DomainError(f"admissibility constant needs p > 0, got {p}")
    from scipy.integrate import quad

    val, _ = quad(lambda t: t ** (2 * p - 1) * np.exp(-2 * t), 0.0, np.inf,
                  epsabs=1e-14, epsrel=1e-12, limit=200)
    return float(val)
