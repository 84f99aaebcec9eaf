"""Closed-form moments for the quadratic stochastic objects, and the Monte
Carlo machinery that is checked against them."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughstart.equations import EquationSpec, LinearOperator, catalogue
from roughstart.lp import DyadicPartition
from roughstart.random_ic import GaussianICConfig, sample
from roughstart.spectral import SpectralField, TorusLattice, basis_field, sup_norm
from roughstart.stochastic import (
    block_point_second_moment,
    block_point_value,
    block_singularity_curve,
    build_objects,
    deterministic_block_curve,
    deterministic_comparison_field,
    eta0,
    eta1,
    eta1_mode_second_moment,
    eta2,
    eta2_mode_second_moment,
    exact_second_moment,
    fit_power_law,
    mc_block_point_second_moment,
    moment_norm_proxy,
    signed_coefficient_grid,
    singularity_fit,
    singularity_times,
)


def cos_field(lattice, k=1, amp=1.0):
    """amp * cos(kx) as a hermitian spectral field."""
    f = basis_field(lattice, (k,), coeff=amp / 2.0)
    c = f.coeffs.copy()
    c[lattice.N - k] = amp / 2.0
    return SpectralField(lattice, c, hermitian=True, mean_zero=True)


def test_eta0_is_semigroup_decay():
    spec = catalogue("burgers")
    lat = TorusLattice(1, 8)
    op = LinearOperator(spec, lat)
    u0 = cos_field(lat, k=2)
    f = eta0(op, u0, 0.25)
    assert np.isclose(f.coeffs[lat.N + 2], 0.5 * np.exp(-4 * 0.25))


def test_eta1_burgers_closed_form():
    """For u0 = 2 cos x under Burgers, (S(t)u0)^2 = 2 e^{-2t}(1 + cos 2x),
    so eta1(t) = -4 e^{-2t} sin 2x, i.e. coefficient 2i e^{-2t} at k = 2."""
    spec = catalogue("burgers")
    lat = TorusLattice(1, 8)
    op = LinearOperator(spec, lat)
    u0 = cos_field(lat, k=1, amp=2.0)
    t = 0.3
    f = eta1(spec, op, u0, t)
    expect = np.zeros(17, dtype=complex)
    expect[8 + 2] = 2j * np.exp(-2 * t)
    expect[8 - 2] = -2j * np.exp(-2 * t)
    assert np.allclose(f.coeffs, expect, atol=1e-13)


def test_eta2_single_pair_closed_form():
    """u0 = 2 cos x under Burgers: the k = 2 mode of eta2 integrates to
    i (e^{-2t} - e^{-4t}) exactly."""
    spec = catalogue("burgers")
    lat = TorusLattice(1, 8)
    op = LinearOperator(spec, lat)
    u0 = cos_field(lat, k=1, amp=2.0)
    for t in (0.05, 0.3, 1.0):
        f = eta2(spec, op, u0, t)
        got = f.coeffs[lat.N + 2]
        expect = 1j * (np.exp(-2 * t) - np.exp(-4 * t))
        assert abs(got - expect) < 1e-12, (t, got, expect)


def test_eta2_hermitian_and_mean_zero():
    spec = catalogue("burgers")
    cfg = GaussianICConfig(theta=0.5, d=1, N=16, seed=5)
    lat = TorusLattice(1, 16)
    op = LinearOperator(spec, lat)
    u0 = sample(cfg, np.random.default_rng(0))
    f = eta2(spec, op, u0, 0.01)
    assert np.allclose(f.coeffs, np.conj(f.coeffs[::-1]), atol=1e-12)
    assert f.coeffs[lat.N] == 0.0


def test_signed_coefficient_grid_kinds():
    N = 4
    m = np.arange(-N, N + 1, dtype=float)[:, None]
    n = np.arange(-N, N + 1, dtype=float)[None, :]
    k = m + n
    sg = signed_coefficient_grid(catalogue("surface_growth"), N)
    assert np.allclose(sg, np.where(k == 0, 0.0, -(k ** 2) * m * n))
    bu = signed_coefficient_grid(catalogue("burgers"), N)
    assert np.allclose(bu, np.where(k == 0, 0.0, 1j * k))
    with pytest.raises(ValueError):
        signed_coefficient_grid(EquationSpec(kind="generic"), N)


def test_mode_moment_matches_brute_force_wick():
    """E|eta1_k|^2 against a high-replicate Monte Carlo at small N."""
    spec = catalogue("burgers")
    cfg = GaussianICConfig(theta=0.5, d=1, N=6, seed=0)
    lat = TorusLattice(1, 6)
    op = LinearOperator(spec, lat)
    t = 0.05
    exact = eta1_mode_second_moment(spec, cfg, op, t)
    M = 20000
    acc = np.zeros(13)
    rng_base = 77
    for i in range(M):
        u0 = sample(cfg, np.random.default_rng((rng_base, i)))
        f = eta1(spec, op, u0, t)
        acc += np.abs(f.coeffs) ** 2
    mc = acc / M
    # fourth-moment statistics: allow 5 relative standard errors
    nz = exact > 0
    rel = np.abs(mc[nz] - exact[nz]) / exact[nz]
    assert np.max(rel) < 5 * 3.0 / np.sqrt(M)


def test_eta2_moment_matches_brute_force():
    spec = catalogue("burgers")
    cfg = GaussianICConfig(theta=0.5, d=1, N=4, seed=0)
    lat = TorusLattice(1, 4)
    op = LinearOperator(spec, lat)
    t = 0.1
    exact = eta2_mode_second_moment(spec, cfg, op, t)
    M = 20000
    acc = np.zeros(9)
    for i in range(M):
        u0 = sample(cfg, np.random.default_rng((31, i)))
        f = eta2(spec, op, u0, t)
        acc += np.abs(f.coeffs) ** 2
    mc = acc / M
    nz = exact > 0
    rel = np.abs(mc[nz] - exact[nz]) / exact[nz]
    assert np.max(rel) < 5 * 3.0 / np.sqrt(M)


def test_eta1_mean_is_zero():
    """Each Fourier mode of eta1 averages to zero over realizations."""
    spec = catalogue("burgers")
    cfg = GaussianICConfig(theta=0.5, d=1, N=6, seed=0)
    lat = TorusLattice(1, 6)
    op = LinearOperator(spec, lat)
    M = 5000
    acc = np.zeros(13, dtype=complex)
    for i in range(M):
        u0 = sample(cfg, np.random.default_rng((5, i)))
        acc += eta1(spec, op, u0, 0.05).coeffs
    scale = np.sqrt(eta1_mode_second_moment(spec, cfg, op, 0.05).max())
    assert np.max(np.abs(acc / M)) < 5 * scale / np.sqrt(M)


def test_block_point_second_moment_consistency():
    """Wick block moment vs its own Monte Carlo at the fixed point x0 = 0."""
    spec = catalogue("burgers")
    cfg = GaussianICConfig(theta=0.5, d=1, N=16, seed=0)
    part = DyadicPartition(TorusLattice(1, 16))
    t = 0.02
    j = 2
    exact = exact_second_moment(cfg, spec, j, t, part, which="eta1")
    mc = mc_block_point_second_moment(spec, cfg, [j], [t], 3000, seed=8)
    assert abs(mc["mean"][0, 0] - exact) < 4 * mc["se"][0, 0]


def test_duhamel_integral_quadrature_agreement():
    """Exact eta2 vs scipy quadrature of the Duhamel integrand, one mode."""
    from scipy.integrate import quad
    spec = catalogue("ks")
    lat = TorusLattice(1, 6)
    op = LinearOperator(spec, lat)
    cfg = GaussianICConfig(theta=0.5, d=1, N=6, seed=1)
    u0 = sample(cfg, np.random.default_rng(3))
    t = 0.07
    f = eta2(spec, op, u0, t)
    k_probe = 3

    def integrand(s, part):
        g = eta1(spec, op, u0, s)
        lam = op.eigenvalues[lat.N + k_probe]
        val = np.exp((t - s) * lam) * g.coeffs[lat.N + k_probe]
        return val.real if part == "re" else val.imag

    re, _ = quad(integrand, 0.0, t, args=("re",), limit=200)
    im, _ = quad(integrand, 0.0, t, args=("im",), limit=200)
    assert abs(f.coeffs[lat.N + k_probe] - (re + 1j * im)) < 1e-8


def test_build_objects_requires_graded_grid():
    spec = catalogue("burgers")
    cfg = GaussianICConfig(theta=0.5, d=1, N=8, seed=0)
    u0 = sample(cfg, np.random.default_rng(0))
    bad = np.array([0.0, 0.05, 0.07, 0.08])
    with pytest.raises(ValueError):
        build_objects(u0, spec, bad, cfg)
    good = np.array([0.0, 0.01, 0.03, 0.06, 0.1])
    traj = build_objects(u0, spec, good, cfg)
    assert len(traj.eta2) == len(good)
    assert sup_norm(traj.eta2[0]) == 0.0


def test_fit_power_law_recovery():
    ts = np.geomspace(1e-4, 1e-2, 20)
    vals = 3.0 * ts ** (-0.75)
    fit = fit_power_law(ts, vals)
    assert np.isclose(fit["beta"], 0.75, atol=1e-10)
    assert np.isclose(np.exp(fit["log_prefactor"]), 3.0)


def test_singularity_fit_window_guard():
    ts = np.geomspace(1e-6, 1e-3, 10)
    with pytest.raises(ValueError):
        singularity_fit(ts, np.ones_like(ts), alpha=0.0, N=32, tau=2.0)
    ts_ok = singularity_times(32, 2.0)
    fit = singularity_fit(ts_ok, 2.0 * ts_ok ** -0.5, alpha=0.0, N=32, tau=2.0)
    assert np.isclose(fit.beta_hat, 0.5, atol=1e-9)
    assert fit.stderr < 1e-9


def test_block_curve_matches_exact_moment():
    spec = catalogue("burgers")
    cfg = GaussianICConfig(theta=0.5, d=1, N=32, seed=0)
    part = DyadicPartition(TorusLattice(1, 32))
    ts = np.geomspace(1e-3, 1e-2, 4)
    curve = block_singularity_curve(cfg, spec, 2, ts, part, which="eta1")
    for t, v in zip(ts, curve):
        assert np.isclose(v ** 2, exact_second_moment(cfg, spec, 2, t, part))


def test_deterministic_block_curve_positive_decreasing_sing():
    spec = catalogue("burgers")
    cfg = GaussianICConfig(theta=0.5, d=1, N=64, seed=0)
    part = DyadicPartition(TorusLattice(1, 64))
    ts = np.geomspace(3e-4, 3e-3, 5)
    curve = deterministic_block_curve(cfg, spec, 2, ts, part)
    assert np.all(curve > 0)
    assert np.all(np.diff(curve) < 0)


def test_moment_norm_proxy_decreases_in_t():
    spec = catalogue("burgers")
    cfg = GaussianICConfig(theta=0.5, d=1, N=32, seed=0)
    part = DyadicPartition(TorusLattice(1, 32))
    a = moment_norm_proxy(cfg, spec, 1e-3, part)
    b = moment_norm_proxy(cfg, spec, 1e-2, part)
    assert a > b > 0


@settings(max_examples=15, deadline=None)
@given(t=st.floats(1e-4, 1.0))
def test_duhamel_factor_nonnegative_bounded(t):
    """I_mn(t) is a positive integral of e^{negative} over [0, t]."""
    spec = catalogue("ks")
    lat = TorusLattice(1, 12)
    op = LinearOperator(spec, lat)
    from roughstart.stochastic import _duhamel_factors
    I = _duhamel_factors(op, t)
    N = lat.N
    m = np.arange(-N, N + 1)[:, None]
    n = np.arange(-N, N + 1)[None, :]
    valid = np.abs(m + n) <= N
    assert np.all(I[valid] >= 0)
    assert np.all(I[valid] <= t * np.exp(1e-12))
