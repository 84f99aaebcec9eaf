"""Stochastic objects built from Gaussian data: the free evolution, its
quadratic image, and the time-integrated second object.

    eta0(t) = S(t) u0
    eta1(t) = B(eta0(t), eta0(t))
    eta2(t) = int_0^t S(t - s) eta1(s) ds

For d = 1 the second moments of every Fourier mode are available in closed
form by Wick's rule, which gives an exact target for the Monte Carlo
estimators used in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .equations import EquationSpec, LinearOperator, nonlinearity, semigroup_apply
from .lp import BesovParams, DyadicPartition, besov_norm
from .random_ic import GaussianICConfig, sample, spectral_weight
from .spectral import SpectralField, TorusLattice


def eta0(op: LinearOperator, u0: SpectralField, t: float) -> SpectralField:
    return semigroup_apply(op, u0, t)


def eta1(spec: EquationSpec, op: LinearOperator, u0: SpectralField, t: float) -> SpectralField:
    e0 = eta0(op, u0, t)
    return nonlinearity(spec, e0, e0)


def signed_coefficient_grid(spec: EquationSpec, N: int) -> np.ndarray:
    """B_{m+n, m, n} as a (2N+1, 2N+1) complex array, d = 1 catalogue kinds."""
    m = np.arange(-N, N + 1, dtype=float)[:, None]
    n = np.arange(-N, N + 1, dtype=float)[None, :]
    k = m + n
    if spec.kind == "surface_growth":
        B = -(k ** 2) * m * n + 0j
    elif spec.kind in ("kpz", "ks"):
        B = m * n + 0j
    elif spec.kind == "reaction_diffusion":
        B = np.ones_like(k) + 0j
    elif spec.kind == "burgers":
        B = 1j * k
    else:
        raise ValueError(f"no closed coefficient grid for kind {spec.kind!r}")
    if spec.mass_conserving:
        B = np.where(k == 0, 0.0, B)
    return B


def _duhamel_factors(op: LinearOperator, t: float) -> np.ndarray:
    """I_mn(t) = int_0^t exp((t-s) lam_k + s (lam_m + lam_n)) ds, k = m + n."""
    lam = op.eigenvalues
    N = op.lattice.N
    lm = lam[:, None]
    ln = lam[None, :]
    m = np.arange(-N, N + 1)[:, None]
    n = np.arange(-N, N + 1)[None, :]
    k = m + n
    valid = np.abs(k) <= N
    lam_k = np.where(valid, lam[np.clip(k + N, 0, 2 * N)], 0.0)
    D = lm + ln - lam_k
    small = np.abs(D) * t < 1e-6
    Dsafe = np.where(small, 1.0, D)
    # difference form stays bounded for any sign of D (all lambdas <= 0);
    # for |D| t small the difference cancels catastrophically, so switch to
    # the series t e^{t lam_k} (1 + D t / 2 + (D t)^2 / 6)
    x = D * t
    I = np.where(small,
                 t * np.exp(t * lam_k) * (1.0 + x / 2.0 + x * x / 6.0),
                 (np.exp(t * (lm + ln)) - np.exp(t * lam_k)) / Dsafe)
    return np.where(valid, I, 0.0)


def eta2(spec: EquationSpec, op: LinearOperator, u0: SpectralField, t: float) -> SpectralField:
    """Exact mode sum eta2_k = sum_{m+n=k} B_kmn u_m u_n I_mn(t), d = 1 only."""
    lat = u0.lattice
    if lat.d != 1:
        raise NotImplementedError("exact eta2 evaluation is one dimensional")
    N = lat.N
    B = signed_coefficient_grid(spec, N)
    I = _duhamel_factors(op, t)
    u = u0.coeffs
    M = B * I * u[:, None] * u[None, :]
    k = (np.arange(-N, N + 1)[:, None] + np.arange(-N, N + 1)[None, :]).ravel()
    keep = np.abs(k) <= N
    idx = k[keep] + N
    vals = M.ravel()[keep]
    coeffs = (np.bincount(idx, weights=vals.real, minlength=2 * N + 1)
              + 1j * np.bincount(idx, weights=vals.imag, minlength=2 * N + 1))
    return SpectralField(lat, coeffs, hermitian=u0.hermitian, mean_zero=spec.mass_conserving)


def eta1_mode_second_moment(spec: EquationSpec, cfg: GaussianICConfig,
                            op: LinearOperator, t: float) -> np.ndarray:
    """E |eta1_k(t)|^2 over the lattice, by Wick's rule (d = 1).

    Both pairings of the Gaussian product contribute, hence the factor 2:
        E|eta1_k|^2 = 2 sum_{m+n=k} |B_kmn|^2 phi_m^2 phi_n^2
                        exp(2 t (lam_m + lam_n)).
    |B_kmn|^2 = |k|^{2a} |m|^{2b} |n|^{2b} for every catalogue kind, so the
    inner sum is a self-convolution of w_m = |m|^{2b} phi_m^2 e^{2 t lam_m}.
    """
    lat = op.lattice
    if lat.d != 1:
        raise NotImplementedError("closed moments are one dimensional")
    N = lat.N
    m = np.arange(-N, N + 1, dtype=float)
    phi2 = spectral_weight(cfg, np.abs(m)) ** 2
    w = np.abs(m) ** (2 * spec.b) * phi2 * np.exp(2 * t * op.eigenvalues)
    conv = fftconvolve(w, w)[N:3 * N + 1]
    k = m
    mom = 2.0 * np.abs(k) ** (2 * spec.a) * conv
    if spec.mass_conserving:
        mom[N] = 0.0
    return mom


def eta2_mode_second_moment(spec: EquationSpec, cfg: GaussianICConfig,
                            op: LinearOperator, t: float) -> np.ndarray:
    """E |eta2_k(t)|^2; the Duhamel factor couples (m, n), so this is a full
    anti-diagonal sum instead of a convolution."""
    lat = op.lattice
    if lat.d != 1:
        raise NotImplementedError("closed moments are one dimensional")
    N = lat.N
    m = np.arange(-N, N + 1, dtype=float)
    phi2 = spectral_weight(cfg, np.abs(m)) ** 2
    B2 = np.abs(signed_coefficient_grid(spec, N)) ** 2
    I = _duhamel_factors(op, t)
    M = B2 * I ** 2 * phi2[:, None] * phi2[None, :]
    k = (np.arange(-N, N + 1)[:, None] + np.arange(-N, N + 1)[None, :]).ravel()
    keep = np.abs(k) <= N
    mom = 2.0 * np.bincount(k[keep] + N, weights=M.ravel()[keep], minlength=2 * N + 1)
    if spec.mass_conserving:
        mom[N] = 0.0
    return mom


def block_point_second_moment(mode_moments: np.ndarray, j: int,
                              partition: DyadicPartition) -> float:
    """E |Delta_j f(t, x0)|^2 at a fixed point: sum_k rho_j(k)^2 E|f_k|^2."""
    w = partition.weight(j)
    return float(np.sum(w ** 2 * mode_moments))


def block_point_value(f: SpectralField, j: int, partition: DyadicPartition,
                      x0_index: int = 0) -> float:
    """Delta_j f evaluated at the grid point x0 = 0 (sum of weighted modes)."""
    if x0_index != 0:
        raise NotImplementedError("only x0 = 0 is supported")
    w = partition.weight(j)
    return float(np.sum(w * f.coeffs).real)


def mc_block_point_second_moment(spec: EquationSpec, cfg: GaussianICConfig,
                                 js, ts, n_samples: int, seed: int) -> dict:
    """Monte Carlo estimate of E |Delta_j eta1(t, 0)|^2 on a (j, t) grid.

    Returns means and standard errors shaped (len(js), len(ts)).
    """
    lat = TorusLattice(cfg.d, cfg.N)
    op = LinearOperator(spec, lat)
    part = DyadicPartition(lat)
    js = list(js)
    ts = list(ts)
    vals = np.zeros((n_samples, len(js), len(ts)))
    for i in range(n_samples):
        u0 = sample(cfg, np.random.default_rng((seed, i)))
        for b, t in enumerate(ts):
            f = eta1(spec, op, u0, t)
            for a, j in enumerate(js):
                vals[i, a, b] = block_point_value(f, j, part) ** 2
    mean = vals.mean(axis=0)
    se = vals.std(axis=0, ddof=1) / np.sqrt(n_samples)
    return {"mean": mean, "se": se, "js": js, "ts": ts}


def deterministic_comparison_field(cfg: GaussianICConfig) -> SpectralField:
    """The non-random profile with |u0_k| = phi_k (all phases flat)."""
    lat = TorusLattice(cfg.d, cfg.N)
    k_abs = lat.k_abs()
    coeffs = spectral_weight(cfg, k_abs).astype(complex)
    return SpectralField(lat, coeffs, hermitian=True, mean_zero=True)


def norm_curve(spec: EquationSpec, cfg: GaussianICConfig, which: str,
               times, n_samples: int, seed: int, alpha: float = 0.0) -> np.ndarray:
    """Mean of ||object(t)||_{C^alpha} over realizations, per time.

    which: "eta1", "eta2", or "eta1_deterministic" (single profile, no MC).
    """
    lat = TorusLattice(cfg.d, cfg.N)
    op = LinearOperator(spec, lat)
    part = DyadicPartition(lat)
    params = BesovParams(alpha=alpha)
    times = np.asarray(times, dtype=float)
    if which == "eta1_deterministic":
        u0 = deterministic_comparison_field(cfg)
        return np.array([besov_norm(eta1(spec, op, u0, t), params, part) for t in times])
    out = np.zeros(len(times))
    for i in range(n_samples):
        u0 = sample(cfg, np.random.default_rng((seed, i)))
        for b, t in enumerate(times):
            f = eta1(spec, op, u0, t) if which == "eta1" else eta2(spec, op, u0, t)
            out[b] += besov_norm(f, params, part)
    return out / n_samples


def fit_power_law(times, values) -> dict:
    """Least squares fit values ~ C t^{-beta}; returns beta and the prefactor."""
    lt = np.log(np.asarray(times, dtype=float))
    lv = np.log(np.asarray(values, dtype=float))
    A = np.column_stack([np.ones_like(lt), -lt])
    coef, res, *_ = np.linalg.lstsq(A, lv, rcond=None)
    return {"beta": float(coef[1]), "log_prefactor": float(coef[0])}


def singularity_times(N: int, tau: float, t_max: float = 0.1, n_points: int = 12) -> np.ndarray:
    """Log spaced fit window [4 N^{-tau}, t_max]: below the lower end the
    truncation dominates and the power law flattens out."""
    t_min = 4.0 * float(N) ** (-tau)
    return np.geomspace(t_min, t_max, n_points)


@dataclass(frozen=True)
class StochasticTrajectory:
    """The three objects on a common graded grid, plus provenance."""

    times: np.ndarray
    eta0: list
    eta1: list
    eta2: list
    ic_config: GaussianICConfig
    equation: EquationSpec


def build_objects(u0: SpectralField, spec: EquationSpec, times,
                  cfg: GaussianICConfig | None = None) -> StochasticTrajectory:
    """Evaluate eta0/eta1 on the grid and eta2 by per-mode product
    integration of the Duhamel integral.  The grid must start at 0 and be
    graded toward it (nondecreasing steps)."""
    times = np.asarray(times, dtype=float)
    steps = np.diff(times)
    if np.any(steps[1:] < steps[:-1] * (1 - 1e-9)):
        raise ValueError("time grid must be graded toward 0 (nondecreasing steps)")
    from .solver import Trajectory, duhamel

    op = LinearOperator(spec, u0.lattice)
    e0 = [eta0(op, u0, float(t)) for t in times]
    e1 = [nonlinearity(spec, f, f) for f in e0]
    e2 = duhamel(op, Trajectory(times, e1)).fields
    return StochasticTrajectory(times, e0, e1, e2, cfg, spec)


def exact_second_moment(cfg: GaussianICConfig, spec: EquationSpec, j: int,
                        t: float, partition: DyadicPartition,
                        which: str = "eta1") -> float:
    """E |Delta_j eta(t, x0)|^2 at a fixed point, by the Wick mode sums."""
    op = LinearOperator(spec, partition.lattice)
    if which == "eta1":
        mom = eta1_mode_second_moment(spec, cfg, op, t)
    elif which == "eta2":
        mom = eta2_mode_second_moment(spec, cfg, op, t)
    else:
        raise ValueError("which must be 'eta1' or 'eta2'")
    return block_point_second_moment(mom, j, partition)


@dataclass(frozen=True)
class ExponentFit:
    beta_hat: float
    stderr: float
    window: tuple
    alpha: float


def moment_norm_proxy(cfg: GaussianICConfig, spec: EquationSpec, t: float,
                      partition: DyadicPartition, alpha: float = 0.0,
                      which: str = "eta1") -> float:
    """sup_j 2^{j alpha} sqrt(E|Delta_j .|^2): a second-moment stand-in for
    the expected Besov norm (upper boundary up to the Gaussian max factor)."""
    op = LinearOperator(spec, partition.lattice)
    mom = (eta1_mode_second_moment if which == "eta1" else eta2_mode_second_moment)(
        spec, cfg, op, t)
    js = np.arange(-1, partition.j_max + 1)
    vals = [2.0 ** (j * alpha) * np.sqrt(block_point_second_moment(mom, int(j), partition))
            for j in js]
    return float(max(vals))


def block_singularity_curve(cfg: GaussianICConfig, spec: EquationSpec, j: int,
                            times, partition: DyadicPartition,
                            which: str = "eta1") -> np.ndarray:
    """sqrt(E|Delta_j eta(t, x0)|^2) along times, from the exact Wick sums.

    A single resolved block isolates the time singularity cleanly: the full
    Besov norm mixes the j ~ log(1/t) crossover into the fit.  Keep the
    window below ~2^{-j tau} so the semigroup damping of the block itself
    stays negligible.
    """
    return np.sqrt([exact_second_moment(cfg, spec, j, float(t), partition, which)
                    for t in times])


def deterministic_block_curve(cfg: GaussianICConfig, spec: EquationSpec, j: int,
                              times, partition: DyadicPartition) -> np.ndarray:
    """||Delta_j B(S(t)u0, S(t)u0)||_inf for the flat-phase profile |u0_k| = phi_k."""
    op = LinearOperator(spec, partition.lattice)
    u0 = deterministic_comparison_field(cfg)
    from .lp import block
    from .spectral import sup_norm
    return np.array([sup_norm(block(eta1(spec, op, u0, float(t)), j, partition))
                     for t in times])


def singularity_fit(times, values, alpha: float, N: int, tau: float) -> ExponentFit:
    """Fit values ~ C t^{-beta} on a window inside the resolved scales."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.min() < float(N) ** (-tau):
        raise ValueError("fit window touches unresolved scales t < N^-tau")
    lt = np.log(times)
    lv = np.log(values)
    A = np.column_stack([np.ones_like(lt), -lt])
    coef, res, *_ = np.linalg.lstsq(A, lv, rcond=None)
    n = len(times)
    dof = max(n - 2, 1)
    resid = lv - A @ coef
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    return ExponentFit(beta_hat=float(coef[1]), stderr=float(np.sqrt(cov[1, 1])),
                       window=(float(times.min()), float(times.max())), alpha=alpha)
