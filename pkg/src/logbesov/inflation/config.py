"""Configuration for the norm-inflation construction.

Index sets K_A (high-frequency carriers, |a_k| = 2^k) and K_B (measured
low blocks, |b_l| = 2^{l-1}) are free, audited stand-ins for the paper's
dilated ranges; the desk preset keeps the original index ranges
{4m+1..5m} and {m+3..2m+2} with unit spacing so the whole construction
fits the integer frequency lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Sequence

import numpy as np

from ..field import GridSpec
from ..littlewood_paley import phi_profile

__all__ = [
    "CarrierVectors",
    "InflationConfig",
    "rho",
    "carrier_vectors",
    "desk_preset",
    "t_star",
    "amplitude_prefactor",
    "lattice_carriers",
    "scatter_translations",
    "bump_offsets",
    "bump_values",
]

TWO_PI = 2.0 * math.pi

# plastic-number low-discrepancy generator for torus-scattered translations
_PLASTIC = 1.324717957244746
_R3 = np.array([_PLASTIC ** -1, _PLASTIC ** -2, _PLASTIC ** -3])


def rho(xi) -> np.ndarray:
    """Low-frequency bump ρ(ξ) = φ(8|ξ|): 1 for |ξ| ≤ 5/32, 0 beyond 3/16.

    Accepts a scalar magnitude, an array of magnitudes, or one n-vector.
    """
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim == 1 and xi.shape[0] in (2, 3):
        r = math.sqrt(float(np.sum(xi * xi)))
    else:
        r = np.abs(xi)
    return phi_profile(8.0 * r)


@dataclass(frozen=True)
class CarrierVectors:
    """High-frequency center a_k, offset b_k, translation c_k for one index."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


def carrier_vectors(k: int, n: int, eps: float) -> CarrierVectors:
    """Exact carrier vectors with |a_k| = 2|b_k| = |c_k| = 2^k."""
    if n < 3:
        raise ValueError("the construction needs n >= 3 (third offset component)")
    if not 0 < eps < 1.0 / math.sqrt(5.0):
        raise ValueError(f"eps={eps} outside (0, 1/sqrt(5))")
    a = (2.0 ** k / math.sqrt(n)) * np.ones(n)
    b = np.zeros(n)
    b[:3] = 2.0 ** (k - 1) * np.array([eps, 2.0 * eps, math.sqrt(1.0 - 5.0 * eps ** 2)])
    c = np.zeros(n)
    c[0] = 2.0 ** k
    return CarrierVectors(a=a, b=b, c=c)


@dataclass(frozen=True)
class InflationConfig:
    m: int
    K_A: tuple[int, ...]
    K_B: tuple[int, ...]
    n: int = 3
    variant: str = "main"  # main | small-q | large-q
    eps: float = 0.125
    delta: float = 1.0
    sigma: float = 0.0
    q: float = math.inf
    r_cut: float = 1.5
    t_rule: str = "saturate:0.5"
    grid: GridSpec | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("inflation construction needs n >= 3")
        if not 0 < self.eps < 1.0 / math.sqrt(5.0):
            raise ValueError("eps must lie in (0, 1/sqrt(5))")
        if self.variant not in ("main", "small-q", "large-q"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if tuple(sorted(set(self.K_A))) != tuple(self.K_A) or min(self.K_A) < 1:
            raise ValueError("K_A must be a strictly increasing positive tuple")
        if tuple(sorted(set(self.K_B))) != tuple(self.K_B) or min(self.K_B) < 1:
            raise ValueError("K_B must be a strictly increasing positive tuple")
        if max(self.K_B) >= min(self.K_A):
            raise ValueError("K_B must sit strictly below K_A")


def desk_preset(m: int, *, variant: str = "main", sigma: float = 0.0,
                q: float = math.inf, eps: float = 0.125,
                t_rule: str = "saturate:0.5", grid: GridSpec | None = None,
                delta: float = 1.0) -> InflationConfig:
    """Audited desk-scale index sets: K_A = {4m+1..5m}, K_B = {m+3..2m+2}."""
    if m < 2:
        raise ValueError("desk preset needs m >= 2")
    K_A = tuple(range(4 * m + 1, 5 * m + 1))
    K_B = tuple(range(m + 3, 2 * m + 3))
    if variant == "small-q":
        K_A = (4 * m + 1,)
    elif variant == "large-q":
        K_B = (m + 3,)
    return InflationConfig(m=m, K_A=K_A, K_B=K_B, variant=variant, sigma=sigma,
                           q=q, eps=eps, t_rule=t_rule, grid=grid, delta=delta)


def t_star(cfg: InflationConfig) -> float:
    """Evaluation time: coef / min_k |a_k|² with coef from the t-rule."""
    if cfg.t_rule == "eps":
        coef = cfg.eps
    elif cfg.t_rule.startswith("saturate"):
        coef = float(cfg.t_rule.split(":", 1)[1]) if ":" in cfg.t_rule else 0.5
    else:
        raise ValueError(f"unknown t_rule {cfg.t_rule!r}")
    return coef / 4.0 ** min(cfg.K_A)


def amplitude_prefactor(cfg: InflationConfig) -> float:
    """Variant-dependent amplitude normalization of the initial data."""
    invq = 0.0 if math.isinf(cfg.q) else 1.0 / cfg.q
    if cfg.variant == "small-q":
        return float(cfg.m) ** (-cfg.sigma)
    return float(cfg.m) ** (-(cfg.sigma + invq))


def scatter_translations(indices: Sequence[int]) -> dict[int, np.ndarray]:
    """Low-discrepancy torus translations, one per measured index.

    Substitutes the paper's c_l = 2^l e₁, whose reductions mod 2π cluster.
    Keyed by the index itself so a block shared by two sweep configurations
    carries the same translation; pairwise separation is audited.
    """
    return {l: TWO_PI * np.mod(0.5 + l * _R3, 1.0) for l in indices}


def lattice_carriers(cfg: InflationConfig) -> dict[int, dict[str, np.ndarray]]:
    """Integer-rounded carriers â_k, b̂_l plus scattered translations ĉ_l."""
    eps = cfg.eps
    gamma = math.sqrt(1.0 - 5.0 * eps ** 2)
    out: dict[int, dict[str, np.ndarray]] = {"a": {}, "b": {}, "c": {}}
    for k in cfg.K_A:
        exact = (2.0 ** k / math.sqrt(3.0)) * np.ones(3)
        out["a"][k] = np.round(exact).astype(np.int64)
    for l in cfg.K_B:
        exact = 2.0 ** (l - 1) * np.array([eps, 2.0 * eps, gamma])
        out["b"][l] = np.round(exact).astype(np.int64)
    out["c"] = scatter_translations(cfg.K_B)
    return out


def bump_offsets(r_cut: float) -> np.ndarray:
    """Lattice points of the bump support ball |δ| < r_cut (3-D)."""
    r = int(math.floor(r_cut))
    rng = np.arange(-r, r + 1)
    gx, gy, gz = np.meshgrid(rng, rng, rng, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    keep = np.sum(pts * pts, axis=1) < r_cut ** 2
    return pts[keep].astype(np.int64)


def bump_values(offsets: np.ndarray, r_cut: float) -> np.ndarray:
    """Rescaled profile ρ(3δ/(16 r_cut)) sampled on the offset template."""
    r = np.sqrt(np.sum(offsets.astype(np.float64) ** 2, axis=1))
    return np.asarray(phi_profile(1.5 * r / r_cut), dtype=np.float64)
