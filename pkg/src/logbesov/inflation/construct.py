"""Band-limited initial data for the norm-inflation experiments.

The first velocity component is a sum over (k, l) of four modulated bumps
at ±a_k ± b_l carrying the translation phase e^{i c_l·ξ} and amplitude
2^k; the second component is the same spectrum multiplied by -ξ₁/ξ₂, so
ξ·û ≡ 0 pointwise (exactly divergence-free); remaining components vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..field import GridSpec, SpectralField
from .config import (InflationConfig, amplitude_prefactor, bump_offsets,
                     bump_values, lattice_carriers)
from .sparse import VectorCloud

__all__ = ["BumpSet", "build_bump_set", "build_initial_data_sparse",
           "build_initial_data", "GridInfeasibleError"]


class GridInfeasibleError(ValueError):
    """Raised when bump frequencies do not fit the materialization grid."""


@dataclass
class BumpSet:
    """Structured bump list of the initial data's first component.

    Arrays are parallel over bumps: centers (B,3) int64, k/l indices,
    carrier signs, and per-bump coefficient rows (B,P) over the shared
    offset template. ``u2_ratio`` holds the pointwise -ξ₁/ξ₂ factor.
    """

    offsets: np.ndarray          # (P, 3)
    centers: np.ndarray          # (B, 3)
    vals: np.ndarray             # (B, P) complex, component-1 coefficients
    u2_ratio: np.ndarray         # (B, P) float, -ξ₁/ξ₂ on each point
    k_index: np.ndarray          # (B,)
    l_index: np.ndarray          # (B,)
    a_sign: np.ndarray           # (B,) ±1
    b_sign: np.ndarray           # (B,) ±1
    candidates: np.ndarray       # (C, 3) sup-estimation seeds
    amplitude: float             # variant prefactor already applied to vals

    @property
    def points(self) -> np.ndarray:
        return (self.centers[:, None, :] + self.offsets[None, :, :])

    def component_vals(self, comp: int) -> np.ndarray:
        if comp == 0:
            return self.vals
        if comp == 1:
            return self.vals * self.u2_ratio
        return np.zeros_like(self.vals)


def build_bump_set(cfg: InflationConfig) -> BumpSet:
    carriers = lattice_carriers(cfg)
    offsets = bump_offsets(cfg.r_cut)
    profile = bump_values(offsets, cfg.r_cut)
    amp = amplitude_prefactor(cfg)

    centers, vals, ratios = [], [], []
    kk, ll, sa, sb = [], [], [], []
    for k in cfg.K_A:
        a = carriers["a"][k]
        for l in cfg.K_B:
            b = carriers["b"][l]
            c = carriers["c"][l]
            for s_a in (+1, -1):
                for s_b in (+1, -1):
                    center = s_a * a + s_b * b
                    pts = center[None, :] + offsets
                    if np.any(pts[:, 1] == 0):
                        raise ValueError(
                            f"bump ({k},{l},{s_a},{s_b}) touches the plane ξ₂=0"
                        )
                    phase = np.exp(1j * (pts @ c))
                    centers.append(center)
                    vals.append(amp * 2.0 ** k * profile * phase)
                    ratios.append(-pts[:, 0] / pts[:, 1])
                    kk.append(k)
                    ll.append(l)
                    sa.append(s_a)
                    sb.append(s_b)
    cands = np.vstack([np.zeros((1, 3))]
                      + [np.array([-carriers["c"][l], carriers["c"][l]])
                         for l in cfg.K_B])
    return BumpSet(
        offsets=offsets,
        centers=np.asarray(centers, dtype=np.int64),
        vals=np.asarray(vals, dtype=np.complex128),
        u2_ratio=np.asarray(ratios, dtype=np.float64),
        k_index=np.asarray(kk), l_index=np.asarray(ll),
        a_sign=np.asarray(sa), b_sign=np.asarray(sb),
        candidates=np.unique(cands, axis=0),
        amplitude=amp,
    )


def build_initial_data_sparse(cfg: InflationConfig) -> VectorCloud:
    """Initial velocity as a 3-component sparse spectrum (audit separately)."""
    bumps = build_bump_set(cfg)
    coords = bumps.points.reshape(-1, 3)
    u1 = bumps.vals.reshape(-1)
    u2 = (bumps.vals * bumps.u2_ratio).reshape(-1)
    vals = np.vstack([u1, u2, np.zeros_like(u1)])
    return VectorCloud(coords, vals, bumps.candidates).compact()


def build_initial_data(cfg: InflationConfig) -> SpectralField:
    """Materialize the initial data on cfg.grid (must be feasible).

    Every bump point must sit strictly inside the grid's dealiasing cube
    (|component| < N/3); violations raise GridInfeasibleError listing the
    offending bumps.
    """
    if cfg.grid is None:
        raise ValueError("config has no materialization grid")
    grid = cfg.grid
    if grid.n != 3:
        raise ValueError("materialization supports n=3 only")
    cloud = build_initial_data_sparse(cfg)
    limit = grid.N / 3.0
    bad = np.max(np.abs(cloud.coords), axis=1) >= limit
    if np.any(bad):
        sample = cloud.coords[bad][:5].tolist()
        raise GridInfeasibleError(
            f"{int(bad.sum())} spectral points exceed the dealias cube "
            f"|k| < {limit:.1f} on N={grid.N}; first offenders: {sample}"
        )
    data = np.zeros((3,) + grid.shape, dtype=np.complex128)
    half = grid.N // 2
    idx = cloud.coords + half
    for comp in range(3):
        np.add.at(data[comp], (idx[:, 0], idx[:, 1], idx[:, 2]), cloud.vals[comp])
    return SpectralField(grid, "spectral", data)
