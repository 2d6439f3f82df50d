"""Heat semigroup, Leray projection, dealiased nonlinearity, the Duhamel
bilinear operator, Picard iteration for mild solutions, and an
integrating-factor RK4 oracle for the same equation.

The mild formulation solved here is u(t) = e^{tΔ}u₀ + B(u,u)(t) with
B(u,v)(t) = -∫_0^t e^{(t-τ)Δ} P∇·(u⊗v) dτ, matching ∂_t u = Δu − P∇·(u⊗u).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .besov import BesovParams, besov_norm
from .field import (GridSpec, SpectralField, apply_multiplier, as_physical,
                    as_spectral, lp_norm)
from .path_norms import (KatoParams, TimeGrid, TimeSeries, k_norm,
                         kato_region_label, make_timegrid)

__all__ = [
    "Trajectory",
    "SolveDiagnostics",
    "BlowupError",
    "divergence_defect",
    "heat",
    "leray",
    "nonlinear",
    "duhamel_bilinear",
    "picard_solve",
    "rk4_reference",
    "heat_trajectory",
    "xnorm",
    "bilinear_xnorm_report",
]

_GL2 = leggauss(2)


class BlowupError(RuntimeError):
    """Raised when the reference integrator detects runaway growth."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


def divergence_defect(u: SpectralField) -> float:
    """max_k |ξ·û(k)| relative to max_k |û(k)|."""
    u = as_spectral(u)
    xi = u.grid.xi_axes()
    div = np.einsum("c...,c...->...", xi, u.data)
    scale = float(np.max(np.abs(u.data), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(div)) / scale)


@dataclass(frozen=True)
class Trajectory:
    """Divergence-free snapshots of a velocity field on a time grid."""

    grid: GridSpec
    timegrid: TimeGrid
    u0: SpectralField
    snapshots: tuple[SpectralField, ...] = dc_field(repr=False)
    provenance: str = "heat-only"

    def __post_init__(self):
        if len(self.snapshots) != len(self.timegrid.nodes):
            raise ValueError("one snapshot per time node required")
        for k, snap in enumerate(self.snapshots):
            defect = divergence_defect(snap)
            if defect > 1e-10:
                raise ValueError(
                    f"snapshot {k} not divergence-free (defect {defect:.2e})"
                )

    def supnorm_series(self) -> TimeSeries:
        vals = np.array([lp_norm(s, math.inf) for s in self.snapshots])
        return TimeSeries(self.timegrid, vals)


@dataclass
class SolveDiagnostics:
    increments: list[float]
    contraction_ratios: list[float]
    measured_bilinear_constant: float
    converged: bool
    iterations: int


def heat(u: SpectralField, t: float) -> SpectralField:
    """e^{tΔ}: diagonal multiplier e^{-t|ξ|²}."""
    if t < 0:
        raise ValueError("heat flow needs t >= 0")
    if t == 0:
        return u
    u = as_spectral(u)
    return apply_multiplier(u, np.exp(-t * u.grid.xi_norm2()))


def leray(u: SpectralField) -> SpectralField:
    """Project onto divergence-free fields: û - ξ (ξ·û)/|ξ|², ξ=0 untouched."""
    u = as_spectral(u)
    n = u.grid.n
    if u.components != n:
        raise ValueError(f"leray needs {n} components, got {u.components}")
    xi = u.grid.xi_axes()
    xi2 = u.grid.xi_norm2().copy()
    center = (u.grid.N // 2,) * n
    xi2[center] = 1.0  # ξ=0 passes through; avoid 0/0
    dot = np.einsum("c...,c...->...", xi, u.data) / xi2
    data = u.data - xi * dot[None]
    return SpectralField(u.grid, "spectral", np.ascontiguousarray(data))


def _dealias_mask(grid: GridSpec) -> np.ndarray:
    keep = np.abs(grid.k_axis) < grid.N / 3.0
    mask = keep
    for _ in range(grid.n - 1):
        mask = np.logical_and.outer(mask, keep)
    return mask


def _pair_forcing(u: SpectralField, v: SpectralField) -> np.ndarray:
    """Coefficients of -P∇·(u⊗v), products dealiased by the 2/3 rule."""
    grid = u.grid
    n = grid.n
    mask = _dealias_mask(grid)
    pu = as_physical(SpectralField(grid, "spectral",
                                   np.ascontiguousarray(u.data * mask[None]))).data
    pv = pu if v is u else as_physical(
        SpectralField(grid, "spectral", np.ascontiguousarray(v.data * mask[None]))
    ).data
    xi = grid.xi_axes()
    div = np.zeros((n,) + grid.shape, dtype=np.complex128)
    scale_fft = grid.N ** n
    for i in range(n):
        for j in range(n):
            if v is u and j < i:
                continue
            prod_hat = np.fft.fftshift(np.fft.fftn(pu[i] * pv[j])) / scale_fft
            prod_hat *= mask
            div[i] += 1j * xi[j] * prod_hat
            if v is u and j != i:
                div[j] += 1j * xi[i] * prod_hat
    projected = leray(SpectralField(grid, "spectral", div))
    return -projected.data


def nonlinear(u: SpectralField) -> SpectralField:
    """P∇·(u⊗u) with 2/3-rule dealiased physical-space products."""
    u = as_spectral(u)
    if u.components != u.grid.n:
        raise ValueError(f"nonlinear needs {u.grid.n} components")
    mask = _dealias_mask(u.grid)
    outside = float(np.max(np.abs(u.data[:, ~mask]), initial=0.0))
    scale = float(np.max(np.abs(u.data), initial=0.0))
    if scale > 0 and outside > 1e-13 * scale:
        warnings.warn("spectral content beyond the 2/3 cube; dealiasing truncates it",
                      stacklevel=2)
    return SpectralField(u.grid, "spectral", -_pair_forcing(u, u))


def heat_trajectory(u0: SpectralField, timegrid: TimeGrid) -> Trajectory:
    u0 = as_spectral(u0)
    snaps = tuple(heat(u0, t) for t in timegrid.nodes)
    return Trajectory(u0.grid, timegrid, u0, snaps, provenance="heat-only")


def duhamel_bilinear(U: Trajectory, V: Trajectory, t: float,
                     _forcings: Sequence[np.ndarray] | None = None,
                     _forcing0: np.ndarray | None = None) -> SpectralField:
    """B(U,V)(t) = -∫_0^t e^{(t-τ)Δ} P∇·(U⊗V) dτ at a trajectory node.

    τ-panels follow the trajectory grid (plus the (0, t₁] head panel); the
    heat factor is applied exactly at 2-point Gauss nodes with linear
    interpolation of the forcing between snapshots.
    """
    if U.grid != V.grid:
        raise ValueError("trajectories must share a grid")
    if not np.array_equal(U.timegrid.nodes, V.timegrid.nodes):
        raise ValueError("trajectories must share a time grid")
    nodes = U.timegrid.nodes
    idx = int(np.searchsorted(nodes, t * (1.0 - 1e-12)))
    if idx >= len(nodes) or not math.isclose(nodes[idx], t, rel_tol=1e-9):
        raise ValueError(f"t={t} is not a trajectory node")
    grid = U.grid

    if _forcings is None:
        _forcings = [_pair_forcing(U.snapshots[i], V.snapshots[i])
                     for i in range(idx + 1)]
    if _forcing0 is None:
        _forcing0 = _pair_forcing(U.u0, V.u0)

    xi2 = grid.xi_norm2()
    acc = np.zeros_like(U.snapshots[0].data)
    gx, gw = _GL2
    taus = np.concatenate([[0.0], nodes[:idx + 1]])
    for a in range(len(taus) - 1):
        lo, hi = taus[a], taus[a + 1]
        w_lo = _forcing0 if a == 0 else _forcings[a - 1]
        w_hi = _forcings[a]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        for x, w in zip(gx, gw):
            tau = mid + half * x
            lam = (tau - lo) / (hi - lo)
            acc += ((half * w) * np.exp(-(t - tau) * xi2)[None]
                    * ((1.0 - lam) * w_lo + lam * w_hi))
    return SpectralField(grid, "spectral", acc)


def xnorm(U: Trajectory, kp: KatoParams) -> float:
    """Path norm: k_norm of t ↦ ‖u(t)‖_∞."""
    if not math.isclose(U.timegrid.T, kp.T, rel_tol=1e-12):
        raise ValueError("horizon mismatch between trajectory and parameters")
    return k_norm(U.supnorm_series(), kp)


def _difference_xnorm(A: Trajectory, B: Trajectory, kp: KatoParams) -> float:
    vals = np.array([
        lp_norm(SpectralField(A.grid, "spectral", a.data - b.data), math.inf)
        for a, b in zip(A.snapshots, B.snapshots)
    ])
    return k_norm(TimeSeries(A.timegrid, vals), kp)


def picard_solve(u0: SpectralField, T: float, kp: KatoParams,
                 tol: float = 1e-8, maxiter: int = 25,
                 timegrid: TimeGrid | None = None) -> tuple[Trajectory, SolveDiagnostics]:
    """Iterate u ← e^{tΔ}u₀ + B(u,u) until the path-norm increment ≤ tol.

    Divergent runs (increments growing over 3 consecutive iterations) stop
    early and return ``converged=False`` with full diagnostics.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    u0 = as_spectral(u0)
    defect = divergence_defect(u0)
    if defect > 1e-10:
        raise ValueError(f"initial data not divergence-free (defect {defect:.2e})")
    tg = timegrid if timegrid is not None else make_timegrid(T)
    base = heat_trajectory(u0, tg)
    heat_snaps = base.snapshots
    w0 = _pair_forcing(u0, u0)
    current = base
    increments: list[float] = []
    converged = False
    iterations = 0
    for it in range(1, maxiter + 1):
        iterations = it
        forcings = [_pair_forcing(s, s) for s in current.snapshots]
        new_snaps = tuple(
            SpectralField(u0.grid, "spectral",
                          heat_snaps[i].data
                          + duhamel_bilinear(current, current, t,
                                             _forcings=forcings,
                                             _forcing0=w0).data)
            for i, t in enumerate(tg.nodes)
        )
        candidate = Trajectory(u0.grid, tg, u0, new_snaps, provenance="picard")
        inc = _difference_xnorm(candidate, current, kp)
        increments.append(inc)
        current = candidate
        if inc <= tol:
            converged = True
            break
        if len(increments) >= 4 and all(
            increments[-k] > increments[-k - 1] for k in (1, 2, 3)
        ):
            break
    ratios = [increments[i + 1] / increments[i]
              for i in range(len(increments) - 1) if increments[i] > 0]
    xu = xnorm(current, kp)
    bconst = 0.0
    if xu > 0:
        bvals = np.array([
            lp_norm(SpectralField(u0.grid, "spectral", c.data - h.data), math.inf)
            for c, h in zip(current.snapshots, heat_snaps)
        ])
        bconst = k_norm(TimeSeries(tg, bvals), kp) / xu ** 2
    diag = SolveDiagnostics(increments, ratios, bconst, converged, iterations)
    return current, diag


def rk4_reference(u0: SpectralField, T: float, dt: float,
                  timegrid: TimeGrid | None = None) -> Trajectory:
    """Integrating-factor classical RK4 oracle, landing on every grid node."""
    u0 = as_spectral(u0)
    grid = u0.grid
    tg = timegrid if timegrid is not None else make_timegrid(T)
    xi2 = grid.xi_norm2()
    limit = 1e6 * max(lp_norm(u0, math.inf), 1e-300)

    snaps = []
    data = u0.data.copy()
    t_now = 0.0
    for t_target in tg.nodes:
        span = t_target - t_now
        nsub = max(1, int(math.ceil(span / dt - 1e-12)))
        h = span / nsub
        e_half = np.exp(-0.5 * h * xi2)[None]
        e_full = np.exp(-h * xi2)[None]
        for _ in range(nsub):
            f1 = SpectralField(grid, "spectral", data.copy())
            k1 = _pair_forcing(f1, f1)
            f2 = SpectralField(grid, "spectral", e_half * (data + 0.5 * h * k1))
            k2 = _pair_forcing(f2, f2)
            f3 = SpectralField(grid, "spectral", e_half * data + 0.5 * h * k2)
            k3 = _pair_forcing(f3, f3)
            f4 = SpectralField(grid, "spectral", e_full * data + h * e_half * k3)
            k4 = _pair_forcing(f4, f4)
            data = (e_full * data
                    + (h / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4))
        t_now = t_target
        snap = SpectralField(grid, "spectral", data.copy())
        supn = lp_norm(snap, math.inf)
        if supn > limit:
            raise BlowupError(
                f"runaway growth at t={t_now:g}: sup-norm {supn:.3e}",
                {"t": t_now, "supnorm": supn, "limit": limit},
            )
        snaps.append(snap)
    return Trajectory(grid, tg, u0, tuple(snaps), provenance="rk4")


def bilinear_xnorm_report(U: Trajectory, V: Trajectory, kp: KatoParams) -> dict:
    """Path-norm and sup-in-t Besov-norm ratios of B(U,V) over ‖U‖·‖V‖."""
    nodes = U.timegrid.nodes
    forcings = [_pair_forcing(u, v) for u, v in zip(U.snapshots, V.snapshots)]
    w0 = _pair_forcing(U.u0, V.u0)
    bsnaps = [duhamel_bilinear(U, V, t, _forcings=forcings, _forcing0=w0)
              for t in nodes]
    bvals = np.array([lp_norm(b, math.inf) for b in bsnaps])
    xb = k_norm(TimeSeries(U.timegrid, bvals), kp)
    denom = xnorm(U, kp) * xnorm(V, kp)
    params = BesovParams(s=-1.0, sigma=kp.sigma, p=math.inf, q=kp.q)
    sup_besov = max((besov_norm(b, params) for b in bsnaps), default=0.0)
    return {
        "region": kato_region_label(kp.sigma, kp.q),
        "xnorm_ratio": xb / denom if denom > 0 else 0.0,
        "sup_besov_ratio": sup_besov / denom if denom > 0 else 0.0,
        "xnorm_B": xb,
        "sup_besov_B": sup_besov,
    }
