import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from wavesign.errors import DomainError
from wavesign.signal import idft, spectrum_from_function
from wavesign.wavelets import (WaveletSpec, admissibility_constant, admissibility_quadrature,
                               cauchy, combo, fourier_eval, hilbert_poisson, parse_wavelets,
                               poisson, poisson_time)

orders = st.floats(0.05, 6.0)
freqs = st.floats(-50.0, 50.0)


def test_spec_validation():
    with pytest.raises(DomainError):
        WaveletSpec("morlet")
    with pytest.raises(DomainError):
        poisson(0.0)
    with pytest.raises(DomainError):
        combo(0.0, 0.0)
    with pytest.raises(DomainError):
        WaveletSpec("poisson", 1.0, (1.0, 2.0))
    assert WaveletSpec("hpoisson").kind == "hilbert_poisson"


def test_point_values():
    assert fourier_eval(cauchy(1), 1.0) == pytest.approx(math.exp(-1))
    assert fourier_eval(cauchy(1), 1.0).real == pytest.approx(0.3678794, abs=1e-7)
    assert fourier_eval(poisson(1), -2.0).real == pytest.approx(0.2706706, abs=1e-7)
    assert fourier_eval(hilbert_poisson(1), -2.0) == pytest.approx(1j * 2 * math.exp(-2))


def test_zero_at_origin():
    for w in (poisson(1.5), hilbert_poisson(0.5), combo(2.0, -1.0, 3.0), cauchy(0.7)):
        assert fourier_eval(w, 0.0) == 0


def test_two_cauchy_identity(rng):
    for p in (0.5, 1.0, 2.5):
        xi = rng.uniform(-20, 20, 100)
        lhs = 2 * fourier_eval(cauchy(p), xi)
        rhs = fourier_eval(poisson(p), xi) + 1j * fourier_eval(hilbert_poisson(p), xi)
        assert np.max(np.abs(lhs - rhs)) <= 1e-14


@given(orders, st.lists(st.floats(-100, 0), min_size=1, max_size=20))
def test_cauchy_vanishes_on_nonpositive(p, xs):
    assert np.all(fourier_eval(cauchy(p), np.array(xs)) == 0)


@given(orders, freqs)
def test_parity(p, xi):
    P, H = poisson(p), hilbert_poisson(p)
    assert fourier_eval(P, -xi) == fourier_eval(P, xi)
    h = fourier_eval(H, xi)
    assert abs(h.real) <= 1e-14 * max(abs(h), 1.0)
    assert abs(fourier_eval(H, -xi) + h) <= 1e-14 * max(abs(h), 1e-300)


@given(st.floats(-5, 5), st.floats(-5, 5), orders, freqs)
def test_combo_linearity(l1, l2, p, xi):
    if l1 == 0 and l2 == 0:
        return
    got = fourier_eval(combo(l1, l2, p), xi)
    want = l1 * fourier_eval(poisson(p), xi) + l2 * fourier_eval(hilbert_poisson(p), xi)
    assert abs(got - want) <= 1e-14 * max(abs(want), 1.0)


@pytest.mark.parametrize("p", [0.3, 1.0, 2.0, 4.5])
def test_cauchy_maximum(p):
    xi = np.linspace(1e-6, 10 * p + 10, 200001)
    vals = fourier_eval(cauchy(p), xi).real
    step = xi[1] - xi[0]
    assert abs(xi[np.argmax(vals)] - p) <= step
    assert vals.max() == pytest.approx(p ** p * math.exp(-p), rel=1e-8)


def test_poisson_time_values():
    assert poisson_time(0.0) == 2.0
    assert abs(poisson_time(10.0)) < 1e-2
    x = np.linspace(-3, 3, 7)
    q = 1 + 4 * np.pi ** 2 * x ** 2
    assert np.allclose(poisson_time(x), 2 / q - 16 * np.pi ** 2 * x ** 2 / q ** 2)


def test_poisson_time_matches_inverse_transform():
    n, dx = 16384, 1 / 64
    x0 = -n * dx / 2
    spec = spectrum_from_function(lambda xi: fourier_eval(poisson(1), xi), n, dx, x0, real=True)
    f = idft(spec)
    x = f.x
    mid = np.abs(x) <= 20
    assert np.max(np.abs(f.values[mid] - poisson_time(x[mid]))) < 1e-4


def test_admissibility_constant():
    assert admissibility_constant(1) == pytest.approx(0.25, abs=1e-15)
    assert admissibility_constant(0.5) == pytest.approx(0.5, abs=1e-15)
    for p in (0.25, 0.5, 1, 2, 3):
        oracle, _ = quad(lambda t: t ** (2 * p - 1) * np.exp(-2 * t), 0, np.inf, epsabs=1e-13, limit=200)
        assert abs(admissibility_constant(p) - oracle) <= 1e-8
        assert abs(admissibility_constant(p) - admissibility_quadrature(p)) <= 1e-8
    with pytest.raises(DomainError):
        admissibility_constant(0)
    with pytest.raises(DomainError):
        admissibility_constant(-1)


def test_json_round_trip():
    for w in (cauchy(2), poisson(0.5), hilbert_poisson(), combo(1, -2.5, 3)):
        assert WaveletSpec.from_json(w.to_json()) == w
    assert combo(1, 2).to_dict() == {"kind": "combo", "p": 1.0, "lambda": [1.0, 2.0]}


def test_parse_wavelets():
    ws = parse_wavelets("poisson,hpoisson,combo:1,1", p=2.0)
    assert ws == [poisson(2), hilbert_poisson(2), combo(1, 1, 2)]
    assert [w.lam for w in ws] == [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    with pytest.raises(DomainError):
        parse_wavelets("combo:1")
    with pytest.raises(DomainError):
        parse_wavelets("")
    with pytest.raises(DomainError):
        cauchy().lam
