"""Sweep experiments: growth of the inflation functionals across the family
size m, the well-/ill-posed phase boundary in the log exponent, and the
cubic smallness of the second-order Picard remainder.

The solution at the evaluation time is represented through its exact
Duhamel expansion on the sparse lattice: u² = δ·e^{tΔ}u⁰ + δ²·B(e,e),
u³ adds 2δ³·B(e, B(e,e))_sym + δ⁴·B(B(e,e), B(e,e)); the bilinear maps
are computed by the exact convolution engine, so the δ-powers separate
exactly and a δ-sweep costs one norm evaluation per δ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .audit import AuditReport, support_audit
from .config import InflationConfig, amplitude_prefactor, desk_preset, t_star
from .construct import build_bump_set
from .functionals import (BumpField, cross_functional, heat_bump_field,
                          inflation_functional, nested_duhamel,
                          pressure_functional, u0_bump_field, vector_duhamel)
from .sparse import VectorCloud, besov_bracket, merge_clouds

__all__ = [
    "SweepRow",
    "InflationReport",
    "scaling_experiment",
    "remainder_experiment",
    "norm_comparison",
]


@dataclass
class SweepRow:
    m: int
    sigma: float
    q: float
    t_star: float
    norm_u0: float
    norm_u0_upper: float
    main: float
    cross: float
    pressure: float
    full_solution_norm: float
    slope_fit: float = math.nan
    slope_residual: float = math.nan


@dataclass
class InflationReport:
    rows: list[SweepRow]
    slopes: dict = dc_field(default_factory=dict)
    audits: dict = dc_field(default_factory=dict)

    def rows_for(self, sigma: float, q: float) -> list[SweepRow]:
        return [r for r in self.rows
                if r.sigma == sigma and (r.q == q or (math.isinf(r.q)
                                                      and math.isinf(q)))]


def _fit_slope(ms: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of log(value) against log(m), with rms residual."""
    x = np.log(ms.astype(float))
    y = np.log(values)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - A @ coef) ** 2)))
    return float(coef[0]), resid


@dataclass
class _AmpFreeFields:
    """Per-m amp-free ingredients shared across the (σ, q) list."""

    cfg0: InflationConfig
    tt: float
    main: object
    cross: object
    pressure: object
    e_cloud: VectorCloud
    bee_cloud: VectorCloud


def _prepare(m: int, variant: str, eps: float, t_rule: str,
             delta: float) -> tuple[_AmpFreeFields, AuditReport]:
    cfg0 = desk_preset(m, variant=variant, sigma=0.0, q=math.inf, eps=eps,
                       t_rule=t_rule, delta=delta)
    audit = support_audit(cfg0)
    if not audit.passed:
        raise RuntimeError(
            f"support audit failed for m={m}: "
            + "; ".join(c.name for c in audit.conditions if not c.passed))
    tt = t_star(cfg0)
    bumps = build_bump_set(cfg0)   # amplitude prefactor is 1 at (σ=0, q=∞)
    main = inflation_functional(cfg0, tt, bumps)
    cross = cross_functional(cfg0, tt, bumps)
    pressure = pressure_functional(cfg0, tt, bumps)
    u0f = u0_bump_field(bumps)
    e_cloud = heat_bump_field(u0f, tt).to_cloud()
    bee_cloud = vector_duhamel(u0f, u0f, tt).to_cloud()
    fields = _AmpFreeFields(cfg0=cfg0, tt=tt, main=main, cross=cross,
                            pressure=pressure, e_cloud=e_cloud,
                            bee_cloud=bee_cloud)
    return fields, audit


def scaling_experiment(ms, sigma_q_list, *, variant: str = "main",
                       eps: float = 0.125, delta: float = 1e-3,
                       t_rule: str = "saturate:0.5") -> InflationReport:
    """Build data per m, evaluate functionals and solution norms at t*,
    and fit log-log slopes in m for every (σ, q) pair."""
    ms = list(ms)
    prepared = {}
    audits = {}
    for m in ms:
        prepared[m], audits[m] = _prepare(m, variant, eps, t_rule, delta)

    rows: list[SweepRow] = []
    slopes: dict = {}
    for sigma, q in sigma_q_list:
        per_m = []
        for m in ms:
            f = prepared[m]
            cfg = desk_preset(m, variant=variant, sigma=sigma, q=q, eps=eps,
                              t_rule=t_rule, delta=delta)
            amp = amplitude_prefactor(cfg)
            lo_u0, up_u0 = besov_bracket(f.e_cloud.component(0), -1.0, sigma, q)
            sol = merge_clouds([f.e_cloud, f.bee_cloud],
                               [delta * amp, (delta * amp) ** 2])
            sol_lo, _ = besov_bracket(sol, -1.0, sigma, q)
            row = SweepRow(
                m=m, sigma=sigma, q=q, t_star=f.tt,
                norm_u0=amp * lo_u0, norm_u0_upper=amp * up_u0,
                main=amp ** 2 * f.main.value,
                cross=amp ** 2 * f.cross.value_upper,
                pressure=amp ** 2 * f.pressure.value_upper,
                full_solution_norm=sol_lo,
            )
            per_m.append(row)
        vals = np.array([r.main for r in per_m])
        slope, resid = _fit_slope(np.array(ms), vals)
        invq = 0.0 if math.isinf(q) else 1.0 / q
        for r in per_m:
            r.slope_fit = slope
            r.slope_residual = resid
        slopes[(sigma, q)] = {
            "slope": slope,
            "residual": resid,
            "predicted": 1.0 - sigma - invq,
        }
        rows.extend(per_m)
    return InflationReport(rows=rows, slopes=slopes,
                           audits={m: a.as_dict() for m, a in audits.items()})


def remainder_experiment(m: int = 2, deltas=(1e-3, 2e-3, 4e-3, 8e-3), *,
                         eps: float = 0.125, t_rule: str = "saturate:0.5",
                         nodes: int = 6, include_fourth_order: bool = True,
                         norm_sigma: float = 0.0,
                         norm_q: float = 2.0) -> dict:
    """Regress ‖u(δ,t*) − δ e^{t*Δ}u⁰ − δ² B(e,e)(t*)‖ against δ.

    The remainder of the third Picard iterate is exactly
    2δ³ B(e, B(e,e))_sym + δ⁴ B(B(e,e), B(e,e)); its norm is evaluated in
    the inhomogeneous-norm proxy (s=-1, σ=norm_sigma, q=norm_q).
    """
    cfg = desk_preset(m, sigma=norm_sigma, q=norm_q, eps=eps, t_rule=t_rule)
    audit = support_audit(cfg)
    if not audit.passed:
        raise RuntimeError("support audit failed for the remainder preset")
    tt = t_star(cfg)
    bumps = build_bump_set(cfg)
    u0f = u0_bump_field(bumps)

    def bee_at(tau: float) -> BumpField:
        return vector_duhamel(u0f, u0f, tau)

    r3 = nested_duhamel(u0f, bee_at, tt, nodes=nodes,
                        symmetrize=True).to_cloud()
    parts = [r3]
    if include_fourth_order:
        parts.append(_fourth_order(u0f, tt, nodes))

    norms = []
    for d in deltas:
        weights = [d ** 3] + ([d ** 4] if include_fourth_order else [])
        rem = merge_clouds(parts, weights)
        lo, _ = besov_bracket(rem, -1.0, norm_sigma, norm_q)
        norms.append(lo)
    slope, resid = _fit_slope(np.array(deltas), np.array(norms))
    return {"m": m, "t_star": tt, "deltas": list(deltas), "norms": norms,
            "slope": slope, "residual": resid, "predicted": 3.0}


def _fourth_order(u0f: BumpField, tt: float, nodes: int) -> VectorCloud:
    """B(B(e,e), B(e,e))(t*): both tensor factors are the inner field."""
    from numpy.polynomial.legendre import leggauss

    from .functionals import _leray_divergence, pair_structure

    gx, gw = leggauss(nodes)
    taus = 0.5 * tt * (1.0 + gx)
    weights = 0.5 * tt * gw
    ps = None
    for tau, w in zip(taus, weights):
        inner = vector_duhamel(u0f, u0f, tau)
        if ps is None:
            ps = pair_structure(inner, inner)
        for i in range(3):
            if not np.any(inner.vals[i]):
                continue
            for j in range(3):
                if not np.any(inner.vals[j]):
                    continue
                ps.accumulate((i, j), inner.vals[i], inner.vals[j],
                              inner.np2, inner.np2, tau, mode=1,
                              t_outer=tt, weight=w)
    return ps.assemble(_leray_divergence, u0f.candidates).to_cloud()


def norm_comparison(cfg: InflationConfig) -> dict:
    """Measured constant in ‖u⁰‖_{-1,0,2} ≤ C·|K_A|^{1/2-1/q-σ}·‖u⁰‖_{-1,σ,q}."""
    bumps = build_bump_set(cfg)
    u1 = u0_bump_field(bumps, components=(0,)).scalar_cloud(0)
    lhs, _ = besov_bracket(u1, -1.0, 0.0, 2.0)
    rhs, _ = besov_bracket(u1, -1.0, cfg.sigma, cfg.q)
    invq = 0.0 if math.isinf(cfg.q) else 1.0 / cfg.q
    scale = len(cfg.K_A) ** (0.5 - invq - cfg.sigma)
    c = lhs / (scale * rhs) if rhs > 0 else math.inf
    return {"lhs": lhs, "rhs": rhs, "scale": scale, "constant": c}
