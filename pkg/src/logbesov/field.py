"""Periodic-torus grids, spectral fields, transforms, multipliers, norms.

Conventions: a spectral field stores one complex amplitude per wavevector
k ∈ [-N/2, N/2)^n in lexicographic (shifted) order, so that the physical
field is u(x) = Σ_k coeff(k) e^{i ξ·x} with ξ = 2πk/L. Real fields are
enforced through Hermitian symmetry coeff(-k) = conj(coeff(k)); the
unpaired Nyquist rows (index 0 of each axis) are kept at zero.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

__all__ = [
    "GridSpec",
    "SpectralField",
    "make_grid",
    "synthesize",
    "transform",
    "apply_multiplier",
    "lp_norm",
    "supnorm_nonneg_spectrum",
]

TWO_PI = 2.0 * math.pi


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [0, L)^n with N points per axis."""

    n: int
    N: int
    L: float = TWO_PI

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"unsupported dimension n={self.n}; need 2 or 3")
        if not _is_power_of_two(self.N) or self.N < 8:
            raise ValueError(f"N={self.N} must be a power of two >= 8")
        if not self.L > 0:
            raise ValueError(f"period L={self.L} must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def k_axis(self) -> np.ndarray:
        """Integer wavevector values per axis, -N/2 .. N/2-1."""
        return np.arange(-self.N // 2, self.N // 2)

    def xi_axes(self) -> np.ndarray:
        """Physical wavevector components, shape (n,) + shape."""
        return _xi_axes(self.n, self.N, self.L)

    def xi_norm2(self) -> np.ndarray:
        """|ξ|² on the grid."""
        return _xi_norm2(self.n, self.N, self.L)

    def x_axes(self) -> np.ndarray:
        """Physical coordinates, shape (n,) + shape."""
        ax = np.arange(self.N) * (self.L / self.N)
        grids = np.meshgrid(*([ax] * self.n), indexing="ij")
        return np.stack(grids)


@functools.lru_cache(maxsize=16)
def _xi_axes(n: int, N: int, L: float) -> np.ndarray:
    k = np.arange(-N // 2, N // 2, dtype=np.float64) * (TWO_PI / L)
    grids = np.meshgrid(*([k] * n), indexing="ij")
    out = np.stack(grids)
    out.setflags(write=False)
    return out

@functools.lru_cache(maxsize=16)
def _xi_norm2(n: int, N: int, L: float) -> np.ndarray:
    xi = _xi_axes(n, N, L)
    out = np.einsum("c...,c...->...", xi, xi)
    out.setflags(write=False)
    return out


def make_grid(n: int, N: int, L: float = TWO_PI) -> GridSpec:
    """Validated grid constructor with fixed wavevector enumeration."""
    return GridSpec(n=n, N=N, L=L)


@dataclass(frozen=True)
class SpectralField:
    """Scalar or vector field; data shape (components,) + grid.shape.

    domain "spectral": complex coefficients in shifted wavevector order.
    domain "physical": real values in grid order.
    """

    grid: GridSpec
    domain: str
    data: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        if self.domain not in ("spectral", "physical"):
            raise ValueError(f"bad domain tag {self.domain!r}")
        if self.data.ndim != self.grid.n + 1 or self.data.shape[1:] != self.grid.shape:
            raise ValueError(
                f"data shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        want = np.complex128 if self.domain == "spectral" else np.float64
        if self.data.dtype != want:
            raise ValueError(f"{self.domain} field needs dtype {want}")
        self.data.setflags(write=False)

    @property
    def components(self) -> int:
        return self.data.shape[0]

    def hermitian_defect(self) -> float:
        """max |coeff(-k) - conj(coeff(k))|, including Nyquist rows."""
        if self.domain != "spectral":
            raise ValueError("hermitian_defect needs a spectral field")
        rev = _reverse_wavevectors(self.data, self.grid.n)
        defect = float(np.max(np.abs(rev.conj() - self.data)))
        nyq = _nyquist_mass(self.data, self.grid.n)
        return max(defect, nyq)


def _reverse_wavevectors(data: np.ndarray, n: int) -> np.ndarray:
    """Map coeff(k) -> coeff(-k) in shifted layout (Nyquist row maps to itself)."""
    out = data
    for ax in range(1, n + 1):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def _nyquist_mass(data: np.ndarray, n: int) -> float:
    mass = 0.0
    for ax in range(1, n + 1):
        sl = [slice(None)] * data.ndim
        sl[ax] = 0
        mass = max(mass, float(np.max(np.abs(data[tuple(sl)]), initial=0.0)))
    return mass


def _zero_nyquist(data: np.ndarray, n: int) -> None:
    for ax in range(1, n + 1):
        sl = [slice(None)] * data.ndim
        sl[ax] = 0
        data[tuple(sl)] = 0.0


def hermitianize(grid: GridSpec, coeffs: np.ndarray) -> SpectralField:
    """Project arbitrary coefficients onto the real-field (Hermitian) cone."""
    c = np.array(coeffs, dtype=np.complex128)
    if c.ndim == grid.n:
        c = c[None]
    sym = 0.5 * (c + _reverse_wavevectors(c, grid.n).conj())
    _zero_nyquist(sym, grid.n)
    return SpectralField(grid, "spectral", sym)


def from_physical(grid: GridSpec, values: np.ndarray) -> SpectralField:
    """Wrap real physical samples (components first or a bare scalar grid)."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim == grid.n:
        v = v[None]
    return SpectralField(grid, "physical", v.copy())


def synthesize(grid: GridSpec,
               modes: Iterable[tuple[Sequence[int], Union[complex, Sequence[complex]]]],
               components: int = 1) -> SpectralField:
    """Build a spectral field from (wavevector, amplitude) pairs.

    Conjugate partners at -k are added automatically so the field is real.
    Amplitudes may be scalars (component 0) or length-``components`` vectors.
    """
    N, n = grid.N, grid.n
    data = np.zeros((components,) + grid.shape, dtype=np.complex128)
    half = N // 2
    for k, amp in modes:
        k = tuple(int(v) for v in k)
        if len(k) != n:
            raise ValueError(f"wavevector {k} has wrong dimension")
        if any(abs(v) >= half for v in k):
            raise ValueError(f"wavevector {k} at or beyond Nyquist |k| < {half}")
        ampvec = np.atleast_1d(np.asarray(amp, dtype=np.complex128))
        if ampvec.shape != (components,):
            if ampvec.size == 1:
                ampvec = np.concatenate([ampvec, np.zeros(components - 1)])
            else:
                raise ValueError("amplitude size does not match component count")
        idx = tuple(v + half for v in k)
        if all(v == 0 for v in k):
            if np.max(np.abs(ampvec.imag)) > 1e-15 * max(1.0, np.max(np.abs(ampvec))):
                raise ValueError("k=0 amplitude must be real for a real field")
            data[(slice(None),) + idx] += ampvec.real
        else:
            idx_conj = tuple(-v + half for v in k)
            data[(slice(None),) + idx] += ampvec
            data[(slice(None),) + idx_conj] += ampvec.conj()
    return SpectralField(grid, "spectral", data)


def zero_field(grid: GridSpec, components: int = 1, domain: str = "spectral") -> SpectralField:
    dtype = np.complex128 if domain == "spectral" else np.float64
    return SpectralField(grid, domain, np.zeros((components,) + grid.shape, dtype=dtype))


def transform(field: SpectralField, direction: str) -> SpectralField:
    """FFT between domains; direction is "to-physical" or "to-spectral"."""
    n = field.grid.n
    axes = tuple(range(1, n + 1))
    if direction == "to-physical":
        if field.domain != "spectral":
            raise ValueError("to-physical needs a spectral field")
        scale = field.grid.N ** n
        phys = np.fft.ifftn(np.fft.ifftshift(field.data, axes=axes), axes=axes) * scale
        # Hermitian inputs leave only roundoff in the imaginary part; it is
        # dropped here, and hermitian_defect() exposes the symmetry check
        return SpectralField(field.grid, "physical", np.ascontiguousarray(phys.real))
    if direction == "to-spectral":
        if field.domain != "physical":
            raise ValueError("to-spectral needs a physical field")
        spec = np.fft.fftshift(
            np.fft.fftn(field.data.astype(np.complex128), axes=axes), axes=axes
        ) / (field.grid.N ** n)
        return SpectralField(field.grid, "spectral", np.ascontiguousarray(spec))
    raise ValueError(f"unknown direction {direction!r}")


def as_spectral(field: SpectralField) -> SpectralField:
    return field if field.domain == "spectral" else transform(field, "to-spectral")


def as_physical(field: SpectralField) -> SpectralField:
    return field if field.domain == "physical" else transform(field, "to-physical")


MultiplierLike = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def apply_multiplier(field: SpectralField, m: MultiplierLike) -> SpectralField:
    """coeff(k) <- m(2πk/L)·coeff(k); m scalar-valued or (c×c)-matrix-valued.

    ``m`` is either an array (grid-shaped, or (c, c)+grid for matrix symbols)
    or a callable receiving the stacked physical wavevectors (n,)+grid.
    """
    if field.domain != "spectral":
        raise ValueError("apply_multiplier needs a spectral field")
    grid = field.grid
    values = m(grid.xi_axes()) if callable(m) else np.asarray(m)
    if not np.all(np.isfinite(values)):
        raise ValueError("multiplier produced non-finite values on the grid")
    c = field.components
    if values.shape == grid.shape:
        data = field.data * values[None]
    elif values.shape == (c, c) + grid.shape:
        data = np.einsum("ij...,j...->i...", values, field.data)
    else:
        raise ValueError(f"multiplier shape {values.shape} unsupported")
    return SpectralField(grid, "spectral", np.ascontiguousarray(data))


def lp_norm(field: SpectralField, p: float) -> float:
    """Grid L^p norm; the pointwise modulus is Euclidean over components."""
    if not (p >= 1):
        raise ValueError(f"p={p} out of range [1, inf]")
    phys = as_physical(field)
    mag = np.sqrt(np.einsum("c...,c...->...", phys.data, phys.data))
    if math.isinf(p):
        return float(np.max(mag))
    cell = (field.grid.L / field.grid.N) ** field.grid.n
    return float((cell * np.sum(mag ** p)) ** (1.0 / p))


def supnorm_nonneg_spectrum(field: SpectralField) -> float:
    """Exact sup norm Σ_k coeff(k) for fields with nonnegative spectrum.

    Requires every coefficient to have nonnegative real part and zero
    imaginary part (within 1e-12 of the coefficient scale); the sum then
    equals the physical value at x = 0, which is the sup norm.
    """
    spec = as_spectral(field)
    coeffs = spec.data
    tol = 1e-12 * max(1.0, float(np.max(np.abs(coeffs), initial=0.0)))
    bad = (coeffs.real < -tol) | (np.abs(coeffs.imag) > tol)
    if np.any(bad):
        comp, *idx = np.argwhere(bad)[0]
        k = tuple(int(i) - spec.grid.N // 2 for i in idx)
        raise ValueError(
            f"spectrum not nonnegative at wavevector {k} (component {comp}): "
            f"coeff={coeffs[(comp, *idx)]:g}"
        )
    return float(np.sum(coeffs.real))
