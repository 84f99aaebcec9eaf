"""Per-mode blow-up times, the Gaussian firing model, and the forcing profile."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from roughstart.blowup import (
    BlowupWeightSpec,
    blowup_time,
    divergent_count_mean,
    mode_blowup_probability,
    mode_ode_oracle,
    regularity_of_xi,
    sample_weights,
    sample_xi0,
    tail_bound_sum,
    trichotomy_mc,
    xi_field,
)


def test_blowup_time_closed_form():
    # xi' = -4 xi + 2 xi^2, xi0 = 4: tau = -log(1 - 2/4)/4 = log(2)/4
    assert abs(blowup_time(2, 4.0) - math.log(2.0) / 4.0) < 1e-12


def test_blowup_time_boundary_conventions():
    assert blowup_time(3, 3.0) == math.inf    # exactly critical
    assert blowup_time(3, 2.9) == math.inf    # subcritical
    assert blowup_time(3, -1.0) == math.inf   # negative data decays
    assert blowup_time(3, 0.0) == math.inf
    with pytest.raises(ValueError):
        blowup_time(0, 1.0)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(1, 12), s=st.floats(1.01, 50.0))
def test_blowup_time_monotone_in_data(k, s):
    """More initial mass blows up sooner: tau_k(s * xi0) <= tau_k(xi0)."""
    xi0 = k * 1.5
    assert blowup_time(k, s * xi0) <= blowup_time(k, xi0)


def test_ode_oracle_agreement():
    for k, xi0 in [(1, 3.0), (2, 4.0), (3, 10.0)]:
        got = mode_ode_oracle(k, xi0)
        assert got["blowup"]
        assert abs(got["time"] - blowup_time(k, xi0)) < 1e-3
    glob = mode_ode_oracle(2, 1.5, t_end=3.0)
    assert not glob["blowup"]
    assert abs(glob["final_value"]) < 1e-2


def test_mode_probability_is_gaussian_tail():
    k, sig, eps = 3, 2.0, 0.5
    level = k / (sig * (1 - math.exp(-eps * k * k)))
    assert np.isclose(mode_blowup_probability(k, sig, eps), norm.sf(level))
    assert mode_blowup_probability(k, 0.0, eps) == 0.0
    assert mode_blowup_probability(k, sig, 0.0) == 0.0


def test_weight_spec_validation():
    with pytest.raises(ValueError):
        BlowupWeightSpec(regime="other", K_max=10)
    with pytest.raises(ValueError):
        BlowupWeightSpec(regime="tail_bounded", K_max=10, lam=1.2)
    with pytest.raises(ValueError):
        BlowupWeightSpec(regime="tail_bounded", K_max=10, epsilon=0.0)
    with pytest.raises(ValueError):
        BlowupWeightSpec(regime="divergent", K_max=10, eps_s=2.5)
    with pytest.raises(ValueError):
        BlowupWeightSpec(regime="divergent", K_max=1)


def test_sigma1_equals_sigma2():
    spec = BlowupWeightSpec(regime="tail_bounded", K_max=8, lam=2.0, epsilon=0.3)
    sig = sample_weights(spec)
    # both use the k -> 2 substitution, so they agree exactly
    assert sig[0] == sig[1]
    assert np.all(sig > 0)


def test_tail_bound_sum_decreases_in_lam():
    a = tail_bound_sum(BlowupWeightSpec(regime="tail_bounded", K_max=500, lam=1.6))
    b = tail_bound_sum(BlowupWeightSpec(regime="tail_bounded", K_max=500, lam=2.5))
    assert a > b > 0


def test_divergent_count_grows_with_k_max():
    a = divergent_count_mean(BlowupWeightSpec(regime="divergent", K_max=100))
    b = divergent_count_mean(BlowupWeightSpec(regime="divergent", K_max=2000))
    # the per-mode series ~ 1/(k sqrt(log k)) diverges, so the partial sums
    # keep growing
    assert b > a + 0.3


def test_trichotomy_report_keys():
    tb = BlowupWeightSpec(regime="tail_bounded", K_max=50, lam=2.0, epsilon=0.2, seed=1)
    rep = trichotomy_mc(tb, 40, [0.05, 0.2])
    assert set(rep["fraction_before"]) == {0.05, 0.2}
    assert "tail_bound" in rep and "own_eps_count_mean" not in rep
    dv = BlowupWeightSpec(regime="divergent", K_max=50, seed=1)
    rep2 = trichotomy_mc(dv, 40, [0.05])
    assert "own_eps_count_mean" in rep2 and "tail_bound" not in rep2


def test_trichotomy_per_mode_matches_analytic():
    spec = BlowupWeightSpec(regime="tail_bounded", K_max=30, lam=1.7,
                            epsilon=0.3, seed=3)
    rep = trichotomy_mc(spec, 2000, [0.3])
    p = rep["per_mode_analytic"]
    se = np.sqrt(np.maximum(p * (1 - p), 1e-12) / 2000)
    assert np.all(np.abs(rep["per_mode_empirical"] - p) < 4 * se + 1e-9)


def test_fraction_monotone_in_epsilon():
    spec = BlowupWeightSpec(regime="divergent", K_max=60, seed=2)
    rep = trichotomy_mc(spec, 200, [0.01, 0.1, 1.0])
    f = [rep["fraction_before"][e] for e in (0.01, 0.1, 1.0)]
    assert f[0] <= f[1] <= f[2]


def test_xi_field_structure():
    spec = BlowupWeightSpec(regime="tail_bounded", K_max=6, lam=2.0,
                            epsilon=0.2, seed=4)
    rng = np.random.default_rng(0)
    f = xi_field(spec, rng)
    assert f.hermitian and f.mean_zero
    # pure sine series: real part of every coefficient vanishes
    assert np.max(np.abs(f.coeffs.real)) < 1e-15
    from roughstart.spectral import physical_samples
    vals = physical_samples(f, oversample=8).real
    # odd function: f(x) + f(-x) = 0 on the sample grid
    assert np.max(np.abs(vals + vals[::-1][np.r_[len(vals) - 1, :len(vals) - 1]])) < 1e-12


def test_regularity_slopes_both_regimes():
    tb = BlowupWeightSpec(regime="tail_bounded", K_max=256, lam=2.0,
                          epsilon=0.2, seed=0)
    dv = BlowupWeightSpec(regime="divergent", K_max=256, seed=0)
    for spec in (tb, dv):
        fit = regularity_of_xi(spec, 40, seed=7)
        assert abs(fit["slope"] - 1.5) < 0.12
