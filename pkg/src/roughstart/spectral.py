"""Truncated Fourier representation of periodic fields on the 1d/2d torus.

Fields are stored as full complex coefficient arrays over the lattice
``{k : |k|_inf <= N}``; index ``k`` lives at array position ``k + N`` along
each axis.  The convolution convention is ``e_m * e_n = e_{m+n}`` with unit
coefficient.  All operations are pure; coefficient arrays are frozen after
construction so fields can be shared freely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve


class LatticeMismatchError(ValueError):
    """Raised when two fields do not live on the same lattice."""


@dataclass(frozen=True)
class TorusLattice:
    """Wave vectors k with |k|_inf <= N on the d-torus, d in {1, 2}."""

    d: int
    N: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if self.N < 2:
            raise ValueError(f"truncation radius must be >= 2, got {self.N}")

    @property
    def shape(self):
        return (2 * self.N + 1,) * self.d

    @property
    def size(self):
        return (2 * self.N + 1) ** self.d

    def wavevectors(self):
        """Array of shape (*shape, d) with the integer wave vector at each slot."""
        return _wavevectors(self.d, self.N)

    def k_abs(self):
        """Euclidean norm |k| at each lattice slot."""
        return _k_abs(self.d, self.N)

    def zero_index(self):
        return (self.N,) * self.d


@lru_cache(maxsize=32)
def _wavevectors(d, N):
    r = np.arange(-N, N + 1)
    if d == 1:
        kv = r[:, None]
    else:
        kx, ky = np.meshgrid(r, r, indexing="ij")
        kv = np.stack([kx, ky], axis=-1)
    kv.flags.writeable = False
    return kv

@lru_cache(maxsize=32)
def _k_abs(d, N):
    kv = _wavevectors(d, N)
    out = np.sqrt((kv.astype(float) ** 2).sum(axis=-1))
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex Fourier coefficients on a TorusLattice.

    ``hermitian`` marks real-valued fields (coeffs(-k) = conj(coeffs(k)));
    ``mean_zero`` marks fields with coeffs(0) = 0 exactly.  Flags drive
    validation only; data is always the full complex array.
    """

    lattice: TorusLattice
    coeffs: np.ndarray
    hermitian: bool = True
    mean_zero: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.lattice.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match lattice {self.lattice.shape}")
        if c is not self.coeffs or c.flags.writeable:
            c = c.copy()
            c.flags.writeable = False
            object.__setattr__(self, "coeffs", c)
        if self.hermitian and not _is_hermitian(c):
            raise ValueError("field flagged hermitian but coeffs(-k) != conj(coeffs(k))")
        if self.mean_zero and self.coeffs[self.lattice.zero_index()] != 0:
            raise ValueError("field flagged mean_zero but coeffs(0) != 0")

    def with_coeffs(self, coeffs, hermitian=None, mean_zero=None):
        return SpectralField(
            self.lattice,
            coeffs,
            self.hermitian if hermitian is None else hermitian,
            self.mean_zero if mean_zero is None else mean_zero,
        )

    def to_json(self):
        """Serialize to the {d, N, coeffs: [[k...], re, im]} record (nonzero modes)."""
        kv = self.lattice.wavevectors()
        flat_k = kv.reshape(-1, self.lattice.d)
        flat_c = self.coeffs.reshape(-1)
        entries = [
            [list(map(int, flat_k[i])), float(flat_c[i].real), float(flat_c[i].imag)]
            for i in np.nonzero(flat_c)[0]
        ]
        return json.dumps({"d": self.lattice.d, "N": self.lattice.N, "coeffs": entries})

    @staticmethod
    def from_json(text):
        rec = json.loads(text)
        lat = TorusLattice(rec["d"], rec["N"])
        c = np.zeros(lat.shape, dtype=complex)
        for k, re, im in rec["coeffs"]:
            idx = tuple(int(ki) + lat.N for ki in k)
            c[idx] = complex(re, im)
        herm = _is_hermitian(c)
        mz = c[lat.zero_index()] == 0
        return SpectralField(lat, c, hermitian=herm, mean_zero=bool(mz))


def _is_hermitian(c, tol=1e-12):
    flipped = np.conj(c[::-1] if c.ndim == 1 else c[::-1, ::-1])
    scale = np.abs(c).max() or 1.0
    return np.abs(c - flipped).max() <= tol * scale


def zero_field(lattice, hermitian=True):
    return SpectralField(lattice, np.zeros(lattice.shape, dtype=complex), hermitian, True)


def basis_field(lattice, k, coeff=1.0):
    """Field coeff * e_k (not hermitian unless k = 0 and coeff real)."""
    k = (k,) if np.isscalar(k) else tuple(k)
    c = np.zeros(lattice.shape, dtype=complex)
    idx = tuple(ki + lattice.N for ki in k)
    c[idx] = coeff
    herm = all(ki == 0 for ki in k) and np.imag(coeff) == 0
    return SpectralField(lattice, c, hermitian=herm, mean_zero=not herm or coeff == 0)


def convolve_coeffs(f, g, N):
    """Coefficient convolution truncated to |k|_inf <= N, via zero-padded FFT."""
    full = fftconvolve(f, g)
    sl = tuple(slice(N, 3 * N + 1) for _ in range(f.ndim))
    return full[sl]


def convolve(f: SpectralField, g: SpectralField) -> SpectralField:
    """Product of the two fields: result_k = sum_{m+n=k} f_m g_n, truncated."""
    if f.lattice != g.lattice:
        raise LatticeMismatchError(f"{f.lattice} vs {g.lattice}")
    if f.hermitian != g.hermitian:
        raise LatticeMismatchError("both fields must be hermitian or both not")
    out = convolve_coeffs(f.coeffs, g.coeffs, f.lattice.N)
    if f.hermitian:
        out = _symmetrize(out)
    return SpectralField(f.lattice, out, hermitian=f.hermitian, mean_zero=False)


def _symmetrize(c):
    # remove the tiny hermitian-breaking FFT noise so the flag stays valid
    flipped = np.conj(c[::-1] if c.ndim == 1 else c[::-1, ::-1])
    return 0.5 * (c + flipped)


def derivative_multiplier(f: SpectralField, order: float) -> SpectralField:
    """|k|^order Fourier multiplier; the zero mode is annihilated for order > 0."""
    if order < 0:
        raise ValueError("derivative order must be >= 0")
    if order == 0:
        return f
    mult = f.lattice.k_abs() ** order
    mult = mult.copy()
    mult[f.lattice.zero_index()] = 0.0
    return f.with_coeffs(f.coeffs * mult, mean_zero=True)


def project_mean_zero(f: SpectralField) -> SpectralField:
    c = f.coeffs.copy()
    c[f.lattice.zero_index()] = 0.0
    return f.with_coeffs(c, mean_zero=True)


def physical_samples(f: SpectralField, oversample: int = 4):
    """Values of the field on a regular grid with >= oversample * (2N+1) points."""
    N, d = f.lattice.N, f.lattice.d
    M = oversample * (2 * N + 1)
    spec = np.zeros((M,) * d, dtype=complex)
    idx = np.arange(-N, N + 1) % M
    if d == 1:
        spec[idx] = f.coeffs
        vals = np.fft.ifft(spec) * M
    else:
        spec[np.ix_(idx, idx)] = f.coeffs
        vals = np.fft.ifft2(spec) * M * M
    return vals


def sup_norm(f: SpectralField, oversample: int = 4) -> float:
    """Max of |f| on an oversampled physical grid (lower bound on the true sup)."""
    if not f.hermitian:
        raise ValueError("sup_norm requires a hermitian (real-valued) field")
    vals = physical_samples(f, oversample)
    return float(np.abs(vals.real).max())
