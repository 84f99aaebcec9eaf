"""Dyadic frequency blocks, Hoelder-Besov norms and Bony paraproducts.

The partition of unity is built from a fixed C-infinity transition function:
chi(r) = 1 for r <= 1, chi(r) = 0 for r >= 4/3, and rho(r) = chi(r/2) - chi(r),
so supp rho is contained in the annulus [1, 8/3] and blocks j, j' with
|j - j'| > 1 have disjoint supports.  Golden norm values in the tests are
pinned to this concrete choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import (
    LatticeMismatchError,
    SpectralField,
    TorusLattice,
    convolve,
    sup_norm,
)


def _smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        f0 = np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
        f1 = np.where(x < 1, np.exp(-1.0 / np.maximum(1 - x, 1e-300)), 0.0)
    return f0 / (f0 + f1)


def chi(r):
    """Smooth radial cutoff: 1 on [0, 1], supported in [0, 4/3]."""
    r = np.asarray(r, dtype=float)
    return 1.0 - _smooth_step(3.0 * (r - 1.0))


def rho(r):
    """Smooth annulus bump: chi(r/2) - chi(r), supported in [1, 8/3]."""
    r = np.asarray(r, dtype=float)
    return chi(r / 2.0) - chi(r)


@dataclass(frozen=True)
class DyadicPartition:
    """Dyadic partition of unity for a given lattice.

    j runs over -1 (the chi ball) to j_max; chi(2^-(j_max+1) xi) = 1 on the
    whole lattice, so the telescoping sum is exactly 1 at every lattice point.
    """

    lattice: TorusLattice

    @property
    def j_max(self) -> int:
        r_max = self.lattice.N * math.sqrt(self.lattice.d)
        return max(2, math.ceil(math.log2(r_max)) - 1)

    def weight(self, j):
        """rho_j evaluated on the lattice (rho_{-1} = chi)."""
        return _partition_weight(self.lattice.d, self.lattice.N, j)

    def blocks(self, f: SpectralField):
        """All blocks Delta_j f for j = -1 .. j_max, as a list of fields."""
        return [block(f, j, self) for j in range(-1, self.j_max + 1)]


@lru_cache(maxsize=512)
def _partition_weight(d, N, j):
    from .spectral import _k_abs

    r = _k_abs(d, N)
    w = chi(r) if j == -1 else rho(r / 2.0 ** j)
    w.flags.writeable = False
    return w


@dataclass(frozen=True)
class BesovParams:
    """Parameters of the B^alpha_{p,q} scale; only (p, q) = (inf, inf) is supported."""

    alpha: float
    p: float = math.inf
    q: float = math.inf
    kappa: float = 0.0


@dataclass(frozen=True)
class WeightedNormParams:
    """sup_t t^beta * ell(t)^nu * C^alpha_kappa norm over a time grid in (0, T]."""

    alpha: float
    beta: float
    T: float
    kappa: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("horizon T must be positive")


def block(f: SpectralField, j: int, partition: DyadicPartition) -> SpectralField:
    if j < -1 or j > partition.j_max:
        raise ValueError(f"block index {j} out of range [-1, {partition.j_max}]")
    if f.lattice != partition.lattice:
        raise LatticeMismatchError("field and partition lattices differ")
    return f.with_coeffs(f.coeffs * partition.weight(j))


def _block_weight_factor(j, kappa):
    # (1 + |j|^kappa) with |j| at j = -1; kappa = 0 means the plain Besov norm.
    return 1.0 if kappa == 0.0 else 1.0 + float(abs(j)) ** kappa


def block_sups(f: SpectralField, partition: DyadicPartition):
    """Array of ||Delta_j f||_inf for j = -1 .. j_max."""
    return np.array([sup_norm(block(f, j, partition)) for j in range(-1, partition.j_max + 1)])


def besov_norm(f: SpectralField, params: BesovParams, partition: DyadicPartition) -> float:
    if not (math.isinf(params.p) and math.isinf(params.q)):
        raise NotImplementedError("only (p, q) = (inf, inf) is supported")
    if not f.hermitian:
        raise ValueError("besov_norm requires a hermitian field")
    sups = block_sups(f, partition)
    js = np.arange(-1, partition.j_max + 1)
    weights = np.array([_block_weight_factor(j, params.kappa) for j in js])
    return float((weights * 2.0 ** (js * params.alpha) * sups).max())


def tamed_log(t: float) -> float:
    """ell(t) = log(1/t v 2)."""
    if t <= 0:
        raise ValueError("tamed_log needs t > 0")
    return math.log(max(1.0 / t, 2.0))


def paraproduct_lt(f: SpectralField, g: SpectralField, partition: DyadicPartition) -> SpectralField:
    """Low-high paraproduct: sum over m <= n-2 of (Delta_m f)(Delta_n g).

    The m-range stops two blocks below n so that, together with the resonant
    part over |m - n| <= 1, the three paraproducts tile the (m, n) pairs
    exactly and f.g = (f<g) + (f o g) + (f>g) holds identically.
    """
    if f.lattice != g.lattice:
        raise LatticeMismatchError("paraproduct requires a common lattice")
    fb = partition.blocks(f)
    gb = partition.blocks(g)
    out = f.with_coeffs(np.zeros_like(f.coeffs), mean_zero=False)
    partial = None  # S_{n-2} f = sum_{m <= n-2} Delta_m f
    for n in range(1, partition.j_max + 1):
        add = fb[n - 1]  # block index n - 2
        partial = add if partial is None else partial.with_coeffs(partial.coeffs + add.coeffs)
        term = convolve(partial, gb[n + 1])
        out = out.with_coeffs(out.coeffs + term.coeffs)
    return out


def paraproduct_gt(f, g, partition):
    """High-low paraproduct: f > g = g < f."""
    return paraproduct_lt(g, f, partition)


def paraproduct_res(f: SpectralField, g: SpectralField, partition: DyadicPartition) -> SpectralField:
    """Resonant part: sum over |m - n| <= 1 of (Delta_m f)(Delta_n g)."""
    if f.lattice != g.lattice:
        raise LatticeMismatchError("paraproduct requires a common lattice")
    fb = partition.blocks(f)
    gb = partition.blocks(g)
    n_blocks = len(fb)
    out = None
    for i in range(n_blocks):
        for jj in (i - 1, i, i + 1):
            if 0 <= jj < n_blocks:
                term = convolve(fb[i], gb[jj])
                out = term if out is None else out.with_coeffs(out.coeffs + term.coeffs)
    return out


def weighted_norm(times, fields, params: WeightedNormParams, partition: DyadicPartition) -> float:
    """Grid supremum of t^beta ell(t)^nu ||u(t)||_{C^alpha_kappa} over t in (0, T].

    ``fields`` is a sequence of SpectralField aligned with ``times``; nodes at
    t = 0 or t > T are ignored.  This is a grid supremum, not a true sup.
    """
    bp = BesovParams(alpha=params.alpha, kappa=params.kappa)
    vals = []
    for t, f in zip(times, fields):
        if t <= 0 or t > params.T * (1 + 1e-12):
            continue
        w = t ** params.beta * tamed_log(t) ** params.nu
        vals.append(w * besov_norm(f, bp, partition))
    if not vals:
        raise ValueError("no grid nodes inside (0, T]")
    return float(max(vals))


def vanishing_check(times, fields, params: WeightedNormParams, partition: DyadicPartition,
                    n_windows: int = 6, rel_tol: float = 1e-3):
    """Estimate lim_{T -> 0} of the windowed weighted norm on dyadic windows.

    Windows are (T/2^{i+1}, T/2^i]; the grid must be graded toward 0 so that
    every window contains nodes.  vanishes = True when the last three window
    values decrease monotonically by at least ``rel_tol`` relative.
    """
    T = params.T
    values = []
    for i in range(n_windows):
        lo, hi = T / 2.0 ** (i + 1), T / 2.0 ** i
        sub = [(t, f) for t, f in zip(times, fields) if lo < t <= hi]
        if not sub:
            raise ValueError("time grid is not graded toward 0: empty dyadic window")
        ts, fs = zip(*sub)
        wp = WeightedNormParams(params.alpha, params.beta, hi, params.kappa, params.nu)
        values.append(weighted_norm(ts, fs, wp, partition))
    w1, w2, w3 = values[-3], values[-2], values[-1]
    scale = max(w1, 1e-300)
    vanishes = (w3 < w2 < w1) and (w1 - w3) / scale > rel_tol
    return {"limit_estimate": w3, "vanishes": bool(vanishes), "window_values": values}
