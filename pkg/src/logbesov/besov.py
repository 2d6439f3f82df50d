"""Log-refined Besov norms, the critical log exponent, and the heat-flow
characterization of the same family.

The norm is ‖S_0 u‖_p + ‖{ 2^{js} j^σ ‖Δ_j u‖_p }_j‖_{l^q}: the extra
j^σ factor refines the classical dyadic weight (σ = 0 recovers it).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .field import SpectralField, apply_multiplier, as_spectral, lp_norm
from .littlewood_paley import default_jmax, low_pass, lp_block
from .path_norms import TimeGrid, log_quadrature_weights, log_weight, make_timegrid

__all__ = [
    "BesovParams",
    "HeatCharParams",
    "sigma_q",
    "besov_norm",
    "besov_block_profile",
    "besov_norm_restricted",
    "heat_char_norm",
    "embedding_report",
    "truncation_residual",
]


@dataclass(frozen=True)
class BesovParams:
    s: float
    sigma: float
    p: float
    q: float
    jmax: int | None = None

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if not (self.p >= 1 and self.q >= 1):
            raise ValueError("p and q must lie in [1, inf]")
        if self.jmax is not None and self.jmax < 1:
            raise ValueError("jmax must be >= 1")


@dataclass(frozen=True)
class HeatCharParams:
    t0: float
    gamma: float = 0.0
    timegrid: TimeGrid | None = None

    def __post_init__(self):
        if self.t0 <= 0:
            raise ValueError("horizon t0 must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


def sigma_q(q) -> float:
    """Critical log exponent 1 - min{1 - 1/q, 1/q}; exact for rational q."""
    if isinstance(q, (int, Fraction)) or (isinstance(q, float) and math.isfinite(q)):
        if q < 1:
            raise ValueError("q must lie in [1, inf]")
        qr = Fraction(q)
        inv = 1 / qr
        return float(1 - min(1 - inv, inv))
    if math.isinf(q):
        return 1.0
    raise ValueError(f"bad q: {q!r}")


def _lq_of_sequence(vals: np.ndarray, q: float) -> float:
    if math.isinf(q):
        return float(np.max(vals)) if len(vals) else 0.0
    return float(np.sum(vals ** q) ** (1.0 / q)) if len(vals) else 0.0


def _resolve_jmax(u: SpectralField, params: BesovParams) -> int:
    cap = default_jmax(u.grid)
    if params.jmax is None:
        return cap
    if params.jmax > cap:
        raise ValueError(f"jmax={params.jmax} beyond grid capacity {cap}")
    return params.jmax


def besov_block_profile(u: SpectralField, params: BesovParams) -> np.ndarray:
    """Weighted block norms 2^{js} j^σ ‖Δ_j u‖_p for j = 1..jmax."""
    u = as_spectral(u)
    jmax = _resolve_jmax(u, params)
    out = np.empty(jmax)
    for j in range(1, jmax + 1):
        out[j - 1] = (2.0 ** (j * params.s) * j ** params.sigma
                      * lp_norm(lp_block(u, j, jmax), params.p))
    return out


def besov_norm(u: SpectralField, params: BesovParams) -> float:
    u = as_spectral(u)
    s0 = lp_norm(low_pass(u), params.p)
    return s0 + _lq_of_sequence(besov_block_profile(u, params), params.q)


def besov_norm_restricted(u: SpectralField, params: BesovParams,
                          blocks: Iterable[int]) -> float:
    """l^q of the weighted block norms over an index subset; no S_0 term."""
    blocks = sorted(set(int(j) for j in blocks))
    if not blocks:
        warnings.warn("empty block set: restricted norm is 0", stacklevel=2)
        return 0.0
    u = as_spectral(u)
    jmax = _resolve_jmax(u, params)
    if blocks[0] < 1 or blocks[-1] > jmax:
        raise ValueError(f"blocks {blocks} outside [1, {jmax}]")
    vals = np.array([
        2.0 ** (j * params.s) * j ** params.sigma * lp_norm(lp_block(u, j, jmax), params.p)
        for j in blocks
    ])
    return _lq_of_sequence(vals, params.q)


def truncation_residual(u: SpectralField, jmax: int) -> float:
    """Relative spectral mass above the largest fully covered radius."""
    u = as_spectral(u)
    r2 = u.grid.xi_norm2()
    outside = r2 > (5.0 * 2.0 ** (jmax - 2)) ** 2
    total = float(np.sum(np.abs(u.data)))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(u.data[:, outside])) / total)


def heat_char_norm(u: SpectralField, params: BesovParams,
                   hc: HeatCharParams) -> float:
    """Heat-flow realization of the same norm family.

    ‖e^{t0 Δ}u‖_p plus the L^q(dt/t) norm over (0, t0] of
    t^{-s/2} Λ(t)^σ ‖(√t |D|)^γ e^{tΔ} u‖_p with Λ(t) = |ln(t/(e t0))|.
    """
    if not hc.gamma > params.s:
        raise ValueError(f"need gamma > s, got gamma={hc.gamma}, s={params.s}")
    u = as_spectral(u)
    grid = hc.timegrid if hc.timegrid is not None else make_timegrid(hc.t0)
    if not math.isclose(grid.T, hc.t0, rel_tol=1e-12):
        raise ValueError("timegrid horizon must equal t0")
    xi2 = u.grid.xi_norm2()
    absxi_gamma = xi2 ** (hc.gamma / 2.0) if hc.gamma > 0 else None

    t = grid.nodes
    lam = log_weight(t, hc.t0)
    vals = np.empty(len(t))
    for i, ti in enumerate(t):
        mult = np.exp(-ti * xi2)
        if absxi_gamma is not None:
            mult = mult * (ti ** (hc.gamma / 2.0)) * absxi_gamma
        vals[i] = lp_norm(apply_multiplier(u, mult), params.p)
    weighted = t ** (-params.s / 2.0) * lam ** params.sigma * vals

    end_term = lp_norm(apply_multiplier(u, np.exp(-hc.t0 * xi2)), params.p)
    if math.isinf(params.q):
        return end_term + float(np.max(weighted))
    W = log_quadrature_weights(np.log(t))
    integral = float(W @ (weighted ** params.q))
    return end_term + max(integral, 0.0) ** (1.0 / params.q)


def embedding_report(u: SpectralField,
                     pairs: Sequence[tuple[BesovParams, BesovParams]]) -> list[dict]:
    """Norms for each parameter pair plus the implied comparison direction.

    The smaller space (larger norm) is decided by: larger s wins; at equal
    s, σ₁ ≥ σ₂ with σ₁ + 1/q₁ > σ₂ + 1/q₂ embeds into the latter.
    """
    def invq(q):
        return 0.0 if math.isinf(q) else 1.0 / q

    rows = []
    for pa, pb in pairs:
        if pa.p != pb.p:
            raise ValueError("embedding comparisons require a common p")
        na, nb = besov_norm(u, pa), besov_norm(u, pb)
        smaller = None
        if pa.s > pb.s:
            smaller = "a"
        elif pb.s > pa.s:
            smaller = "b"
        elif pa.sigma >= pb.sigma and pa.sigma + invq(pa.q) > pb.sigma + invq(pb.q):
            smaller = "a"
        elif pb.sigma >= pa.sigma and pb.sigma + invq(pb.q) > pa.sigma + invq(pa.q):
            smaller = "b"
        row = {"params_a": pa, "params_b": pb, "norm_a": na, "norm_b": nb,
               "smaller_space": smaller}
        if smaller == "a":
            row["measured_constant"] = nb / na if na > 0 else math.inf
        elif smaller == "b":
            row["measured_constant"] = na / nb if nb > 0 else math.inf
        rows.append(row)
    return rows
