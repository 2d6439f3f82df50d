"""Smooth dyadic windows and frequency-localizing block operators.

The radial profile is 1 on [0, 5/4], 0 from 3/2 on, with the standard
e^{-1/s} partition glue on the bridge, so the annular windows
ψ_j(ξ) = φ(2^{-j}|ξ|) − φ(2^{-j+1}|ξ|) telescope exactly:
φ(|ξ|) + Σ_{j=1}^{J} ψ_j(ξ) = φ(2^{-J}|ξ|).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import phi_profile_array
from .field import GridSpec, SpectralField, apply_multiplier

__all__ = [
    "phi_profile",
    "psi_j",
    "default_jmax",
    "DyadicWindows",
    "windows",
    "low_pass",
    "lp_block",
    "partition_residual",
]


def phi_profile(t):
    """Smooth radial cutoff: 1 on [0, 5/4], 0 on [3/2, ∞), monotone bridge."""
    return phi_profile_array(t)


def _magnitude(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim == 0:
        return xi
    if xi.ndim == 1:
        return np.sqrt(np.sum(xi * xi))
    # stacked components (n,) + grid
    return np.sqrt(np.einsum("c...,c...->...", xi, xi))


def psi_radial(r, j: int):
    """ψ_j as a function of the radius |ξ| (elementwise on arrays)."""
    r = np.asarray(r, dtype=np.float64)
    return phi_profile(np.ldexp(r, -j)) - phi_profile(np.ldexp(r, -j + 1))


def psi_j(xi, j: int):
    """Annular window ψ_j(ξ) = φ(2^{-j}|ξ|) − φ(2^{-j+1}|ξ|).

    ``xi`` may be a scalar magnitude, an n-vector, or stacked components.
    """
    return psi_radial(_magnitude(xi), j)


def default_jmax(grid: GridSpec) -> int:
    """Largest block whose annulus has full support below Nyquist."""
    return int(math.log2(grid.N // 2)) - 1


@dataclass(frozen=True)
class DyadicWindows:
    """Cached window tables for one grid and truncation level."""

    grid: GridSpec
    jmax: int

    def phi_table(self) -> np.ndarray:
        return _phi_table(self.grid)

    def psi_table(self, j: int) -> np.ndarray:
        if not 1 <= j <= self.jmax:
            raise ValueError(f"block j={j} outside [1, jmax={self.jmax}]")
        return _psi_table(self.grid, j)


@functools.lru_cache(maxsize=32)
def _phi_table(grid: GridSpec) -> np.ndarray:
    r = np.sqrt(grid.xi_norm2())
    out = phi_profile(r)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=256)
def _psi_table(grid: GridSpec, j: int) -> np.ndarray:
    r = np.sqrt(grid.xi_norm2())
    out = phi_profile(np.ldexp(r, -j)) - phi_profile(np.ldexp(r, -j + 1))
    out.setflags(write=False)
    return out


def windows(grid: GridSpec, jmax: int | None = None) -> DyadicWindows:
    return DyadicWindows(grid, default_jmax(grid) if jmax is None else jmax)


def low_pass(u: SpectralField) -> SpectralField:
    """S_0 u: low-frequency complement under the φ window."""
    return apply_multiplier(u, _phi_table(u.grid))


def lp_block(u: SpectralField, j: int, jmax: int | None = None) -> SpectralField:
    """Δ_j u: the dyadic block at scale 2^j."""
    cap = default_jmax(u.grid) if jmax is None else jmax
    if j > cap:
        raise ValueError(f"block j={j} beyond jmax={cap} for N={u.grid.N}")
    if j < 1:
        raise ValueError(f"block index j={j} must be >= 1")
    return apply_multiplier(u, _psi_table(u.grid, j))


def partition_residual(grid: GridSpec, jmax: int | None = None) -> float:
    """max over representable |ξ| ≤ 5·2^{jmax-2} of |1 − φ − Σ_{j≤jmax} ψ_j|."""
    if jmax is None:
        jmax = default_jmax(grid)
    total = _phi_table(grid).copy()
    for j in range(1, jmax + 1):
        total += _psi_table(grid, j)
    r2 = grid.xi_norm2()
    inside = r2 <= (5.0 * 2.0 ** (jmax - 2)) ** 2
    if not np.any(inside):
        return 0.0
    return float(np.max(np.abs(1.0 - total[inside])))
