import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavesign import cwt as cwtmod
from wavesign.cwt import (HyperbolicLattice, bergman_lift, cauchy_energy, cwt_lattice, cwt_point,
                          cwt_points, cwt_scale_grid, default_lattice, density_report,
                          poisson_pair_from_cauchy)
from wavesign.errors import DomainError
from wavesign.generators import hardy_bump, random_real
from wavesign.signal import Signal, analytic_representation, dft, spectrum_from_function
from wavesign.wavelets import admissibility_constant, cauchy, combo, hilbert_poisson, poisson

FIG1_BETA = 4 * math.pi / (5 * math.log(2))


# -- lattices ----------------------------------------------------------------

def brute_count(alpha, beta, m_min, m_max, b_max):
    total = 0
    for m in range(m_min, m_max + 1):
        step = alpha ** m * beta
        reach = int(b_max / step) + 2
        total += sum(1 for n in range(-reach, reach + 1) if abs(n * step) <= b_max)
    return total


@given(st.floats(1.1, 4.0), st.floats(0.05, 5.0), st.integers(-4, 2), st.integers(0, 4),
       st.floats(0.5, 20.0))
def test_lattice_invariants(alpha, beta, m_min, span, b_max):
    lat = HyperbolicLattice(alpha, beta, m_min, m_min + span, b_max)
    assert len(lat) == brute_count(alpha, beta, m_min, m_min + span, b_max)
    assert len(lat) > 0
    assert np.all(lat.a == np.array([alpha ** int(m) for m in lat.m]))
    assert np.all(np.abs(lat.b) <= b_max)
    order = np.lexsort((lat.n, lat.m))
    assert np.array_equal(order, np.arange(len(lat)))
    keys = set(zip(lat.m.tolist(), lat.n.tolist()))
    assert len(keys) == len(lat)


def test_lattice_validation():
    for args in ((1.0, 1.0, 0, 1, 1.0), (2.0, 0.0, 0, 1, 1.0), (2.0, 1.0, 2, 1, 1.0),
                 (2.0, 1.0, 0, 1, -1.0), (2.0, 1.0, 0.5, 1, 1.0)):
        with pytest.raises(DomainError):
            HyperbolicLattice(*args)


def test_default_lattice():
    lat = default_lattice(256, 1 / 16)
    assert lat.beta == pytest.approx(FIG1_BETA)
    assert lat.a.min() <= 1 / 32 and lat.a.max() <= 256 / 16 / 4
    assert HyperbolicLattice.from_dict(lat.to_dict()).to_dict() == lat.to_dict()
    assert lat.density == pytest.approx(4 * math.pi / 5)


# -- pointwise transform -------------------------------------------------------

def test_cauchy_of_cauchy():
    n, dx = 4096, 1 / 64
    spec = spectrum_from_function(lambda xi: np.where(xi > 0, xi * np.exp(-xi), 0.0), n, dx, -n * dx / 2)
    val = cwt_point(spec, cauchy(1), 0.0, 1.0)
    assert abs(val - 0.25) <= 2e-4


def test_zero_signal():
    spec = dft(Signal(np.zeros(64), 0.1, -3.2))
    for w in (cauchy(), poisson(), combo(1, 2)):
        assert cwt_point(spec, w, 0.3, 0.7) == 0


def test_point_errors():
    spec = dft(Signal(np.ones(8), 1.0))
    with pytest.raises(DomainError):
        cwt_point(spec, poisson(), 0.0, 0.0)
    with pytest.raises(DomainError):
        cwt_point(spec, poisson(), 0.0, -1.0)
    with pytest.raises(DomainError):
        cwt_point(spec, poisson(), np.inf, 1.0)


def test_real_wavelet_real_output(rng):
    spec = dft(random_real(rng))
    b = rng.uniform(-8, 8, 50)
    a = np.exp(rng.uniform(np.log(0.03), np.log(4), 50))
    for w in (poisson(), hilbert_poisson(2), combo(1, -3, 0.5)):
        vals = cwt_points(spec, w, b, a)
        assert np.max(np.abs(vals.imag)) <= 1e-10 * np.max(np.abs(vals))


def test_scale_grid_matches_points(rng):
    f = random_real(rng)
    spec = dft(f)
    for w in (cauchy(), hilbert_poisson()):
        for a in (0.05, 0.4, 3.0):
            fast = cwt_scale_grid(spec, w, a)
            slow = cwt_points(spec, w, f.x, np.full(f.n, a))
            assert np.max(np.abs(fast - slow)) <= 1e-12 * np.max(np.abs(slow))


# -- lattice transform ---------------------------------------------------------

def test_grid_matches_points(rng, lattice):
    spec = dft(random_real(rng))
    ws = [poisson(), hilbert_poisson(), cauchy()]
    grid = cwt_lattice(spec, ws, lattice)
    for i, w in enumerate(ws):
        direct = cwt_points(spec, w, lattice.b, lattice.a)
        assert np.max(np.abs(grid[i] - direct)) <= 1e-12 * np.max(np.abs(direct))


def test_single_point_lattice(rng, lattice):
    spec = dft(random_real(rng))
    j = 37
    mask = np.zeros(len(lattice), dtype=bool)
    mask[j] = True
    one = lattice.subset(mask)
    grid = cwt_lattice(spec, [cauchy()], one)
    assert grid.values.shape == (1, 1)
    assert grid[0][0] == pytest.approx(cwt_point(spec, cauchy(), lattice.b[j], lattice.a[j]), rel=1e-13)


def test_lattice_errors(lattice):
    spec = dft(Signal(np.zeros(256), 1 / 16, -8))
    with pytest.raises(DomainError):
        cwt_lattice(spec, [], lattice)


def test_threads_do_not_change_results(rng, lattice):
    spec = dft(random_real(rng))
    ws = [poisson(), cauchy(2)]
    a = cwt_lattice(spec, ws, lattice, workers=1).values
    b = cwt_lattice(spec, ws, lattice, workers=4).values
    assert np.array_equal(a, b)


def test_streamed_kernel_matches_cached(monkeypatch, rng, lattice):
    from wavesign.cwt import LatticeKernel

    spec = dft(random_real(rng))
    cached = LatticeKernel(poisson(), lattice, 256, 1 / 16)
    monkeypatch.setattr(cwtmod, "KERNEL_CACHE_LIMIT", 10)
    streamed = LatticeKernel(poisson(), lattice, 256, 1 / 16)
    assert streamed._rows is None
    c = spec.coefficients
    assert np.allclose(cached.apply(c), streamed.apply(c), rtol=0, atol=1e-14)
    y = rng.standard_normal(len(lattice)) + 0j
    assert np.allclose(cached.adjoint(y), streamed.adjoint(y), rtol=0, atol=1e-13)


def test_real_coefficients_on_lattice(rng, lattice):
    grid = cwt_lattice(dft(random_real(rng)), [poisson(), combo(1, 1)], lattice)
    assert np.max(np.abs(grid.values.imag)) <= 1e-10 * np.max(np.abs(grid.values))


def test_cauchy_poisson_identities_on_lattice(rng, lattice):
    for p in (0.5, 1.0, 2.0):
        spec = dft(random_real(rng))
        grid = cwt_lattice(spec, [poisson(p), hilbert_poisson(p), cauchy(p)], lattice)
        wp, whp = poisson_pair_from_cauchy(grid[2])
        scale = np.max(np.abs(grid.values))
        assert np.max(np.abs(grid[0] - wp)) <= 1e-10 * scale
        assert np.max(np.abs(grid[1] - whp)) <= 1e-10 * scale


def test_half_of_analytic(rng, lattice):
    f = random_real(rng)
    a = cwt_lattice(dft(f), [cauchy()], lattice)[0]
    b = cwt_lattice(dft(analytic_representation(f)), [cauchy()], lattice)[0]
    assert np.max(np.abs(a - 0.5 * b)) <= 1e-10 * np.max(np.abs(a))


# -- density predicates ----------------------------------------------------------

def test_density_fig1():
    rep = density_report(FIG1_BETA, 2.0, 1.0, w=6)
    assert rep.d == pytest.approx(4 * math.pi / 5)
    assert rep.sign_retrieval_unique is True
    assert rep.poisson_pair_frame is True
    assert rep.bergman_sampling(6) is False
    assert rep.unique_slack == pytest.approx(0.0, abs=1e-12)


def test_density_frame_boundary():
    alpha = 3.0
    rep = density_report(2 * math.pi / math.log(alpha), alpha, 1.0)
    assert rep.poisson_pair_frame is False


def test_density_oversampling_limit():
    rep = density_report(1e-9, 1.7, 2.5, w=[1.5, 10.0])
    assert rep.poisson_pair_frame and rep.sign_retrieval_unique
    assert all(v["sampling"] for v in rep.bergman.values())


def test_density_errors():
    for args in ((1.0, 1.0, 1.0), (0.0, 2.0, 1.0), (1.0, 2.0, 0.0)):
        with pytest.raises(DomainError):
            density_report(*args)
    with pytest.raises(DomainError):
        density_report(1.0, 2.0, 1.0, w=1.0)
    with pytest.raises(KeyError):
        density_report(1.0, 2.0, 1.0).bergman_sampling(7.5)


def test_density_json_fields():
    d = density_report(FIG1_BETA, 2.0, 1.0).to_dict()
    assert d["sign_retrieval_unique"]["value"] is True
    assert d["d_angular"] == pytest.approx(2 * math.pi * d["d"])
    assert set(d["bergman_sampling"]) == {"3", "6"}


# -- Bergman lift ---------------------------------------------------------------

def test_lift_unit_scale_row(rng):
    lat = HyperbolicLattice(2.0, 1.0, -1, 1, 4.0)
    grid = cwt_lattice(dft(random_real(rng)), [cauchy(1.5)], lat)
    lift = bergman_lift(grid, 1.5)
    unit = lat.m == 0
    assert np.array_equal(lift.values[unit], grid[0][unit])
    assert np.allclose(lift.z.imag, lat.a)


def test_lift_errors(rng, lattice):
    grid = cwt_lattice(dft(random_real(rng)), [poisson()], lattice)
    with pytest.raises(DomainError):
        bergman_lift(grid, 1.0)
    grid = cwt_lattice(dft(random_real(rng)), [cauchy(2)], lattice)
    with pytest.raises(DomainError):
        bergman_lift(grid, 1.0)


def _bump(center, width, shift, scale=1.0):
    def fhat(xi):
        u = scale * xi
        return np.sqrt(scale) * np.where(u > 0, np.exp(-(u - center) ** 2 / (2 * width ** 2)), 0.0) \
            * np.exp(-2j * np.pi * shift * u)
    return fhat


def test_lift_scale_covariance():
    # g(x) = s^-1/2 f(x/s) with s = alpha maps lattice point (m, n) to (m+1, n):
    # F_g(s z) = s^-(1/2+p) F_f(z)
    p, alpha = 1.0, 2.0
    n, dx = 1024, 1 / 16
    lat = HyperbolicLattice(alpha, FIG1_BETA, -3, 3, 6.0)
    f = spectrum_from_function(_bump(1.0, 0.15, 0.3), n, dx, -n * dx / 2)
    g = spectrum_from_function(_bump(1.0, 0.15, 0.3, scale=alpha), n, dx, -n * dx / 2)
    Ff = bergman_lift(cwt_lattice(f, [cauchy(p)], lat), p)
    Fg = bergman_lift(cwt_lattice(g, [cauchy(p)], lat), p)
    lookup = {(m, k): i for i, (m, k) in enumerate(zip(lat.m.tolist(), lat.n.tolist()))}
    lhs, rhs = [], []
    for i, (m, k) in enumerate(zip(lat.m.tolist(), lat.n.tolist())):
        j = lookup.get((m + 1, k))
        if j is not None:
            lhs.append(Fg.values[j])
            rhs.append(alpha ** -(0.5 + p) * Ff.values[i])
    lhs, rhs = np.array(lhs), np.array(rhs)
    assert lhs.size > 20
    assert np.max(np.abs(lhs - rhs)) <= 1e-8 * np.max(np.abs(rhs))


def test_lift_weighted_norm_tracks_energy():
    p = 1.0
    fp = hardy_bump(1.0, 0.2, 0.3)
    alpha = 2 ** 0.25
    lat = HyperbolicLattice(alpha, 0.05, int(math.floor(math.log(0.05, alpha))),
                            int(math.floor(math.log(4.0, alpha))), 8.0)
    lift = bergman_lift(cwt_lattice(dft(fp), [cauchy(p)], lat), p)
    target = admissibility_constant(p) * fp.norm() ** 2
    assert lift.weighted_norm() == pytest.approx(target, rel=0.05)


def test_cauchy_energy_errors():
    spec = dft(hardy_bump(1.0, 0.2))
    with pytest.raises(DomainError):
        cauchy_energy(spec, 1.0, 1.0, 0.5)
