"""Concrete equations: diagonal semigroup and quadratic nonlinearity B.

Catalogue (d = 1 defaults):

    surface_growth  tau=4  sigma=0  a=2  b=1   B(u,v) = -Lap(grad u . grad v)
    kpz             tau=2  sigma=0  a=0  b=1   B(u,v) = -M(grad u . grad v)
    ks              tau=4  sigma=2  a=0  b=1   B(u,v) = -M(grad u . grad v)
    reaction_diffusion  tau=2  sigma=2  a=0  b=0   B(u,v) = M(u v)
    burgers         tau=2  sigma=1  a=1  b=0   B(u,v) = d/dx(u v)

M is the projection onto mean-zero fields.  Lower-order linear terms (-Lap u
for surface_growth/ks, -u for reaction_diffusion) enter the eigenvalues for
time integration but are excluded from all scaling computations.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .spectral import (
    SpectralField,
    TorusLattice,
    basis_field,
    convolve,
    derivative_multiplier,
    project_mean_zero,
)

CATALOGUE_KINDS = ("surface_growth", "kpz", "ks", "reaction_diffusion", "burgers", "convolution_example")

# kind -> (tau, sigma, a, b, mass_conserving, lower_order)
_CATALOGUE = {
    "surface_growth": (4, 0, 2, 1, True, "laplacian"),
    "kpz": (2, 0, 0, 1, True, None),
    "ks": (4, 2, 0, 1, True, "laplacian"),
    "reaction_diffusion": (2, 2, 0, 0, True, "identity"),
    "burgers": (2, 1, 1, 0, True, None),
    "convolution_example": (2, 2, 1, 0, True, None),
}


@dataclass(frozen=True)
class EquationSpec:
    """One semilinear PDE: dissipation order tau, derivative split (a, b) of B."""

    kind: str = "generic"
    tau: float = 2
    a: float = 0
    b: float = 0
    sigma: float | None = None
    d: int = 1
    degree_m: int = 2
    mass_conserving: bool = True
    lower_order: str | None = None

    def __post_init__(self):
        if self.kind in _CATALOGUE:
            tau, sigma, a, b, mc, lo = _CATALOGUE[self.kind]
            for name, want in (("tau", tau), ("a", a), ("b", b)):
                if getattr(self, name) != want:
                    raise ValueError(f"{self.kind} has fixed {name}={want}; overrides are rejected")
            object.__setattr__(self, "sigma", sigma)
            object.__setattr__(self, "mass_conserving", mc)
            object.__setattr__(self, "lower_order", lo)
        elif self.sigma is None:
            # sigma = (tau - a - m b) / (m - 1); m = 2 gives tau - a - 2b
            m = self.degree_m
            object.__setattr__(self, "sigma", Fraction(self.tau - self.a - m * self.b, m - 1)
                               if all(float(x).is_integer() for x in (self.tau, self.a, self.b))
                               else (self.tau - self.a - m * self.b) / (m - 1))
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.a < 0 or self.b < 0:
            raise ValueError("a, b must be >= 0")
        if self.degree_m < 2:
            raise ValueError("degree_m must be >= 2")


def catalogue(kind: str, d: int = 1) -> EquationSpec:
    if kind not in _CATALOGUE:
        raise ValueError(f"unknown catalogue kind {kind!r}")
    tau, sigma, a, b, mc, lo = _CATALOGUE[kind]
    return EquationSpec(kind=kind, tau=tau, a=a, b=b, d=d)


def equation_from_toml(section: dict) -> EquationSpec:
    """Build an EquationSpec from a parsed TOML [equation] table."""
    kind = section.get("kind", "generic")
    if kind in _CATALOGUE:
        fixed = {"tau", "a", "b", "sigma"}
        bad = fixed & set(section)
        if bad:
            raise ValueError(f"catalogue kind {kind!r} rejects overrides of {sorted(bad)}")
        return catalogue(kind, d=int(section.get("d", 1)))
    kwargs = {k: section[k] for k in ("tau", "a", "b", "d", "degree_m", "mass_conserving") if k in section}
    return EquationSpec(kind=kind, **kwargs)


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Diagonal generator: eigenvalue lambda_k per lattice point, lambda_0 = 0."""

    spec: EquationSpec
    lattice: TorusLattice
    eigenvalues: np.ndarray = field(init=False)

    def __post_init__(self):
        lam = -self.lattice.k_abs() ** self.spec.tau
        k2 = self.lattice.k_abs() ** 2
        if self.spec.lower_order == "laplacian":
            lam = lam + k2  # -Lap contributes +|k|^2
        elif self.spec.lower_order == "identity":
            lam = lam - 1.0
        # semigroup must be non-expanding: neutral modes are nudged below zero
        lam = np.minimum(lam, -1e-9)
        lam = lam.copy()
        lam[self.lattice.zero_index()] = 0.0
        lam.flags.writeable = False
        object.__setattr__(self, "eigenvalues", lam)


def semigroup_apply(op: LinearOperator, f: SpectralField, t: float) -> SpectralField:
    if t < 0:
        raise ValueError("semigroup time must be >= 0")
    if f.lattice != op.lattice:
        raise ValueError("field lattice does not match operator lattice")
    return f.with_coeffs(f.coeffs * np.exp(t * op.eigenvalues))


def _grad_dot(u: SpectralField, v: SpectralField) -> SpectralField:
    """grad u . grad v as a field, computed componentwise in Fourier."""
    lat = u.lattice
    kv = lat.wavevectors()
    out = None
    for axis in range(lat.d):
        du = u.with_coeffs(1j * kv[..., axis] * u.coeffs, hermitian=False)
        dv = v.with_coeffs(1j * kv[..., axis] * v.coeffs, hermitian=False)
        term = convolve(du, dv)
        out = term if out is None else out.with_coeffs(out.coeffs + term.coeffs)
    c = out.coeffs
    if u.hermitian and v.hermitian:
        flipped = np.conj(c[::-1] if c.ndim == 1 else c[::-1, ::-1])
        c = 0.5 * (c + flipped)
    return SpectralField(lat, c, hermitian=u.hermitian and v.hermitian, mean_zero=False)


def nonlinearity(spec: EquationSpec, u: SpectralField, v: SpectralField) -> SpectralField:
    """B(u, v) for the given equation kind."""
    lat = u.lattice
    if v.lattice != lat:
        raise ValueError("u and v must share a lattice")
    if spec.kind in CATALOGUE_KINDS and spec.kind != "convolution_example" and lat.d != spec.d:
        raise ValueError(f"{spec.kind} is configured for d={spec.d}, got lattice d={lat.d}")
    kind = spec.kind
    if kind == "surface_growth":
        w = _grad_dot(u, v)
        return derivative_multiplier(w, 2.0)  # -Lap w = +|k|^2 w
    if kind in ("kpz", "ks"):
        w = _grad_dot(u, v)
        return project_mean_zero(w.with_coeffs(-w.coeffs))
    if kind == "reaction_diffusion":
        return project_mean_zero(convolve(u, v))
    if kind == "burgers":
        w = convolve(u, v)
        kv = lat.wavevectors()
        return w.with_coeffs(1j * kv[..., 0] * w.coeffs, mean_zero=True)
    if kind == "convolution_example":
        # modewise product (u * v)_k = u_k v_k, then d/dx
        kv = lat.wavevectors()
        return SpectralField(lat, 1j * kv[..., 0] * u.coeffs * v.coeffs,
                             hermitian=u.hermitian and v.hermitian, mean_zero=True)
    if kind == "generic":
        w = convolve(derivative_multiplier(u, spec.b), derivative_multiplier(v, spec.b))
        w = derivative_multiplier(w, spec.a) if spec.a > 0 else w
        return project_mean_zero(w) if spec.mass_conserving else w
    raise ValueError(f"unknown equation kind {spec.kind!r}")


def extract_coefficient(spec: EquationSpec, m, n, lattice: TorusLattice):
    """B_kmn = <B(e_m, e_n), e_{m+n}> by direct evaluation on basis fields."""
    em = basis_field(lattice, m)
    en = basis_field(lattice, n)
    em = SpectralField(lattice, em.coeffs, hermitian=False, mean_zero=False)
    en = SpectralField(lattice, en.coeffs, hermitian=False, mean_zero=False)
    out = nonlinearity(spec, em, en)
    m = (m,) if np.isscalar(m) else tuple(m)
    n = (n,) if np.isscalar(n) else tuple(n)
    k = tuple(mi + ni for mi, ni in zip(m, n))
    if any(abs(ki) > lattice.N for ki in k):
        return 0.0
    idx = tuple(ki + lattice.N for ki in k)
    return complex(out.coeffs[idx])


def abs_coefficient_squared(spec: EquationSpec, k, m, n):
    """|B_kmn|^2 from the closed per-kind formulas (arrays allowed, d = 1)."""
    k = np.asarray(k, dtype=float)
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    vals = {
        "surface_growth": (k ** 2 * np.abs(m * n)) ** 2,
        "kpz": (m * n) ** 2,
        "ks": (m * n) ** 2,
        "reaction_diffusion": np.ones_like(k),
        "burgers": k ** 2,
        "generic": np.abs(k) ** (2 * spec.a) * np.abs(m) ** (2 * spec.b) * np.abs(n) ** (2 * spec.b),
    }
    if spec.kind not in vals:
        raise ValueError(f"no closed coefficient formula for kind {spec.kind!r}")
    out = vals[spec.kind]
    if spec.mass_conserving:
        out = np.where(k == 0, 0.0, out)
    return out


def coefficient_bound_check(spec: EquationSpec, sample_size: int = 200, N: int = 16, seed: int = 0):
    """Sample (m, n) pairs and compare |B_kmn| with c |k|^a |m|^b |n|^b.

    Returns the max ratio, whether the bound is attained (sharp within 1e-9),
    and the sampled pairs that attain it.
    """
    lat = TorusLattice(spec.d, N)
    rng = np.random.default_rng(seed)
    ratios = []
    attained = []
    for _ in range(sample_size):
        if spec.d == 1:
            m = int(rng.integers(-N, N + 1))
            n = int(rng.integers(-N, N + 1))
            k = m + n
            kn, mn, nn = abs(k), abs(m), abs(n)
        else:
            m = tuple(rng.integers(-N, N + 1, size=2))
            n = tuple(rng.integers(-N, N + 1, size=2))
            k = tuple(mi + ni for mi, ni in zip(m, n))
            kn = float(np.hypot(*k)); mn = float(np.hypot(*m)); nn = float(np.hypot(*n))
        B = abs(extract_coefficient(spec, m, n, lat))
        bound = kn ** spec.a * mn ** spec.b * nn ** spec.b
        if bound == 0:
            if B > 1e-12:
                ratios.append(np.inf)
            continue
        r = B / bound
        ratios.append(r)
        if abs(r - 1.0) < 1e-9:
            attained.append((m, n))
    max_ratio = max(ratios) if ratios else 0.0
    return {"max_ratio": float(max_ratio), "bounded": bool(np.isfinite(max_ratio)),
            "sharp": bool(attained), "attained_pairs": attained[:10]}
