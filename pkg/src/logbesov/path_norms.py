"""Scalar time-function machinery on log-spaced grids over (0, T].

Weighted norms of Kato type,
    ‖f‖ = ‖ √t · Λ(t)^σ · f(t) ‖_{L^q((0,T); dt/t)},   Λ(t) = |ln(t/(eT))|,
the cumulative averages F(t) = ∫_0^t f dτ/τ (plain and log-damped), and
the Abel-type bilinear operator 𝓑(f,g)(t) = ∫_0^t (t-τ)^{-1/2} f g dτ.

All dt/t integrals run in u = ln t. Interpolation of sampled series uses
4-point Lagrange stencils — linear in the sample values, so bilinearity
of 𝓑 is exact; below the smallest node the same stencil extrapolates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "TimeGrid",
    "TimeSeries",
    "KatoParams",
    "make_timegrid",
    "log_weight",
    "kdot_norm",
    "k_norm",
    "hl_average",
    "hl_average_logdamped",
    "scalar_bilinear",
    "lemma23_sides",
    "lemma24_sides",
    "bilinear_constant_report",
    "kato_region_label",
    "builtin_hl_family",
    "builtin_kato_family",
]


@dataclass(frozen=True)
class TimeGrid:
    """Log-spaced sample times in (0, T], last node exactly T."""

    T: float
    nodes: np.ndarray = dc_field(repr=False)
    density: float = 16.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        if nodes.ndim != 1 or len(nodes) < 4:
            raise ValueError("need at least 4 nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if not math.isclose(nodes[-1], self.T, rel_tol=1e-12):
            raise ValueError("last node must equal the horizon T")
        if nodes[0] <= 0:
            raise ValueError("nodes must be positive")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def log_nodes(self) -> np.ndarray:
        return np.log(self.nodes)


def make_timegrid(T: float, density: int = 16, decades: float = 6.0) -> TimeGrid:
    if T <= 0:
        raise ValueError("horizon T must be positive")
    count = int(round(decades * density)) + 1
    expo = np.linspace(math.log10(T) - decades, math.log10(T), count)
    nodes = 10.0 ** expo
    nodes[-1] = T
    return TimeGrid(T=T, nodes=nodes, density=float(density))


@dataclass(frozen=True)
class TimeSeries:
    """Sampled real function on a TimeGrid; ``diverged`` is advisory."""

    grid: TimeGrid
    values: np.ndarray = dc_field(repr=False)
    diverged: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.nodes.shape:
            raise ValueError("values shape does not match grid")
        if not np.all(np.isfinite(values)):
            raise ValueError("series values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: TimeGrid, fn: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, np.asarray(fn(grid.nodes), dtype=np.float64))


@dataclass(frozen=True)
class KatoParams:
    sigma: float
    q: float
    T: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if not self.q >= 1:
            raise ValueError("q must lie in [1, inf]")
        if self.T <= 0:
            raise ValueError("T must be positive")


def log_weight(t, T) -> np.ndarray:
    """Λ(t) = |ln(t/(eT))| = 1 + ln(T/t) for t ≤ T."""
    return np.abs(1.0 + np.log(T / np.asarray(t, dtype=np.float64)))


# -- quadrature in u = ln t ---------------------------------------------------

_GL4 = leggauss(4)


def _lagrange_row(stencil: np.ndarray, x: float) -> np.ndarray:
    w = np.empty(len(stencil))
    for a in range(len(stencil)):
        num = 1.0
        den = 1.0
        for b in range(len(stencil)):
            if b != a:
                num *= x - stencil[b]
                den *= stencil[a] - stencil[b]
        w[a] = num / den
    return w


def log_quadrature_weights(u: np.ndarray) -> np.ndarray:
    """Weights W with ∫ g du ≈ W·g(u): per-panel GL4 on Lagrange-4 stencils."""
    M = len(u)
    W = np.zeros(M)
    gx, gw = _GL4
    for i in range(M - 1):
        half = 0.5 * (u[i + 1] - u[i])
        mid = 0.5 * (u[i] + u[i + 1])
        i0 = min(max(i - 1, 0), M - 4)
        stencil = u[i0:i0 + 4]
        for x, wq in zip(mid + half * gx, half * gw):
            W[i0:i0 + 4] += wq * _lagrange_row(stencil, x)
    return W


def _interp_matrix(u: np.ndarray, uq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """4-point Lagrange interpolation: values[take]·coef sums to f(uq).

    Returns (take, coef) of shape (len(uq), 4); queries outside the node
    range use the boundary stencils (polynomial extrapolation).
    """
    M = len(u)
    base = np.searchsorted(u, uq) - 2
    base = np.clip(base, 0, M - 4)
    take = base[:, None] + np.arange(4)[None, :]
    xs = u[take]
    coef = np.ones((len(uq), 4))
    for a in range(4):
        for b in range(4):
            if b != a:
                coef[:, a] *= (uq - xs[:, b]) / (xs[:, a] - xs[:, b])
    return take, coef


def _head_model(t: np.ndarray, f: np.ndarray, T: float):
    """Estimate ∫_0^{t0} f dτ/τ from the first samples.

    Fits both a power law t^α and a log-power Λ^{-β} through the first two
    samples, keeps whichever predicts the third sample better, and returns
    (head, integrable); integrable=False means the chosen model diverges.
    """
    f1, f2, f3 = f[0], f[1], f[2]
    if f1 <= 0 or f2 <= 0 or f3 <= 0:
        return 0.0, True
    alpha = math.log(f2 / f1) / math.log(t[1] / t[0])
    lam1, lam2, lam3 = (float(log_weight(ti, T)) for ti in t[:3])
    beta = math.log(f2 / f1) / math.log(lam1 / lam2)
    pred_pow = f2 * (t[2] / t[1]) ** alpha
    pred_log = f2 * (lam3 / lam2) ** (-beta)
    use_power = abs(math.log(pred_pow / f3)) <= abs(math.log(pred_log / f3))
    if use_power:
        if alpha > 0.02:
            return f1 / alpha, True
        return 0.0, False
    if beta > 1.05:
        return f1 * lam1 / (beta - 1.0), True
    return 0.0, False


def _decade_divergence(t: np.ndarray, f: np.ndarray) -> bool:
    """Partial dt/t integrals growing >10x between the two smallest decades."""
    hi1, hi2 = t[0] * 10.0, t[0] * 100.0
    if t[-1] < hi2:
        return False
    u = np.log(t)
    m1 = t < hi1
    m2 = (t >= hi1) & (t < hi2)
    if m1.sum() < 2 or m2.sum() < 2:
        return False
    d1 = abs(np.trapezoid(f[m1], u[m1]))
    d2 = abs(np.trapezoid(f[m2], u[m2]))
    return d1 > 10.0 * d2 and d1 > 1e-300


# -- weighted norms -----------------------------------------------------------

def _weighted_lq(t: np.ndarray, w: np.ndarray, q: float, T: float) -> float:
    """‖w‖_{L^q(dt/t)} of nonnegative samples w, with a model head."""
    if math.isinf(q):
        return float(np.max(w))
    g = w ** q
    integral = float(log_quadrature_weights(np.log(t)) @ g)
    head, _ = _head_model(t, g, T)
    total = max(integral + head, 0.0)
    return total ** (1.0 / q)


def kdot_norm(f: TimeSeries, kp: KatoParams) -> float:
    """‖ √t Λ^σ f ‖_{L^q(dt/t)} on the series' grid."""
    if not math.isclose(f.grid.T, kp.T, rel_tol=1e-12):
        raise ValueError(f"horizon mismatch: series T={f.grid.T}, params T={kp.T}")
    t = f.grid.nodes
    w = np.sqrt(t) * log_weight(t, kp.T) ** kp.sigma * np.abs(f.values)
    return _weighted_lq(t, w, kp.q, kp.T)


def k_norm(f: TimeSeries, kp: KatoParams) -> float:
    """kdot at (σ, q) plus kdot at (σ, ∞); at q=∞ the single sup norm."""
    sup = kdot_norm(f, replace(kp, q=math.inf))
    if math.isinf(kp.q):
        return sup
    return kdot_norm(f, kp) + sup


# -- Hardy-Littlewood averages ------------------------------------------------

def hl_average(f: TimeSeries) -> TimeSeries:
    """F(t) = ∫_0^t f dτ/τ: cumulative log-trapezoid plus a model head."""
    t = f.grid.nodes
    u = np.log(t)
    head, integrable = _head_model(t, f.values, f.grid.T)
    mids = 0.5 * (f.values[1:] + f.values[:-1]) * np.diff(u)
    F = head + np.concatenate([[0.0], np.cumsum(mids)])
    flag = _decade_divergence(t, f.values) or not integrable
    return TimeSeries(f.grid, F, diverged=flag)


def hl_average_logdamped(f: TimeSeries) -> TimeSeries:
    """F(t) = ∫_0^t Λ(τ)^{-1} f dτ/τ."""
    damped = TimeSeries(f.grid, f.values / log_weight(f.grid.nodes, f.grid.T))
    out = hl_average(damped)
    return out


# -- Abel-type bilinear operator ----------------------------------------------

_GL32 = leggauss(32)


def scalar_bilinear(f: TimeSeries, g: TimeSeries) -> TimeSeries:
    """𝓑(f,g)(t) = ∫_0^t (t-τ)^{-1/2} f(τ) g(τ) dτ at every node.

    The substitution τ = t(1-s²) removes the endpoint singularity exactly;
    s-panels follow the sample grid (octave-refined below it) with 32-point
    Gauss-Legendre per panel. Sample products come from per-factor Lagrange
    interpolation, so the operator is exactly bilinear in the inputs.
    """
    if f.grid is not g.grid and not np.array_equal(f.grid.nodes, g.grid.nodes):
        raise ValueError("series must share one time grid")
    t_nodes = f.grid.nodes
    u_nodes = np.log(t_nodes)
    gx, gw = _GL32

    prod = np.abs(f.values * g.values)
    flag = False
    if prod[0] > 0 and prod[1] > 0:
        alpha = math.log(prod[1] / prod[0]) / (u_nodes[1] - u_nodes[0])
        flag = alpha <= -0.98

    out = np.zeros_like(t_nodes)
    for i, t in enumerate(t_nodes):
        # τ-breakpoints: this node, grid nodes below, then octaves toward 0
        # (floored where the s-substitution loses resolution; the neglected
        # tail is O(1e-12) of the kernel mass)
        taus = [t] + [tv for tv in t_nodes[:i][::-1]]
        tail = taus[-1]
        while tail > t * 1e-12:
            tail *= 0.5
            taus.append(tail)
        s_break = np.sqrt(np.clip(1.0 - np.asarray(taus) / t, 0.0, 1.0))
        half = 0.5 * np.diff(s_break)
        mid = 0.5 * (s_break[1:] + s_break[:-1])
        sq = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        wq = (half[:, None] * gw[None, :]).ravel()
        tq = t * (1.0 - sq * sq)
        take, coef = _interp_matrix(u_nodes, np.log(tq))
        fv = np.sum(f.values[take] * coef, axis=1)
        gv = np.sum(g.values[take] * coef, axis=1)
        out[i] = 2.0 * math.sqrt(t) * float(wq @ (fv * gv))
    return TimeSeries(f.grid, out, diverged=flag)


# -- inequality checks --------------------------------------------------------

def lemma23_sides(f: TimeSeries, q: float) -> tuple[float, float]:
    """Weighted-average inequality sides for F(t) = ∫_0^t f dτ/τ.

    LHS = [∫ Λ^{q-1} |F|^q dt/t]^{1/q},  RHS = [∫ Λ^{q-1} |f|^{q/2} dt/t]^{2/q};
    at q=∞ these read sup Λ|F| and sup Λ²|f|.
    """
    t = f.grid.nodes
    T = f.grid.T
    lam = log_weight(t, T)
    F = hl_average(f)
    if math.isinf(q):
        return float(np.max(lam * np.abs(F.values))), float(np.max(lam ** 2 * np.abs(f.values)))
    W = log_quadrature_weights(np.log(t))
    lhs_g = lam ** (q - 1.0) * np.abs(F.values) ** q
    rhs_g = lam ** (q - 1.0) * np.abs(f.values) ** (q / 2.0)
    lhs = max(float(W @ lhs_g) + _head_model(t, lhs_g, T)[0], 0.0) ** (1.0 / q)
    rhs = max(float(W @ rhs_g) + _head_model(t, rhs_g, T)[0], 0.0) ** (2.0 / q)
    return lhs, rhs


def lemma24_sides(f: TimeSeries, q: float) -> tuple[float, float]:
    """Log-damped average inequality sides, equal weights Λ on both sides."""
    t = f.grid.nodes
    T = f.grid.T
    lam = log_weight(t, T)
    F = hl_average_logdamped(f)
    if math.isinf(q):
        return float(np.max(lam * np.abs(F.values))), float(np.max(lam * np.abs(f.values)))
    W = log_quadrature_weights(np.log(t))
    lhs_g = (lam * np.abs(F.values)) ** q
    rhs_g = (lam * np.abs(f.values)) ** q
    lhs = max(float(W @ lhs_g) + _head_model(t, lhs_g, T)[0], 0.0) ** (1.0 / q)
    rhs = max(float(W @ rhs_g) + _head_model(t, rhs_g, T)[0], 0.0) ** (1.0 / q)
    return lhs, rhs


def kato_region_label(sigma: float, q: float) -> str:
    """Guaranteed-boundedness region for the bilinear operator norm."""
    if sigma >= 1.0:
        return "region-a"
    if 0.5 <= sigma < 1.0 and q >= 1.0 / sigma and q <= 1.0 / (1.0 - sigma):
        return "region-b"
    return "outside guaranteed region"


def bilinear_constant_report(family: Sequence[tuple[TimeSeries, TimeSeries]],
                             kp: KatoParams) -> dict:
    """Per-pair ratios ‖𝓑(f,g)‖ / (‖f‖·‖g‖) in the 𝓚 norm, plus the max."""
    rows = []
    for fa, fb in family:
        denom = k_norm(fa, kp) * k_norm(fb, kp)
        if denom == 0.0:
            rows.append(0.0)
            continue
        rows.append(k_norm(scalar_bilinear(fa, fb), kp) / denom)
    return {
        "sigma": kp.sigma,
        "q": kp.q,
        "region": kato_region_label(kp.sigma, kp.q),
        "ratios": rows,
        "max_ratio": max(rows) if rows else 0.0,
    }


# -- builtin families ---------------------------------------------------------

def builtin_hl_family(grid: TimeGrid, count: int = 50) -> list[TimeSeries]:
    """Power-log profiles t^a Λ^{-β} with integrable dτ/τ heads (a > 0)."""
    t = grid.nodes
    lam = log_weight(t, grid.T)
    out = []
    alphas = [0.15, 0.3, 0.5, 0.75, 1.0]
    betas = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0]
    for a in alphas:
        for b in betas:
            out.append(TimeSeries(grid, (t / grid.T) ** a * lam ** (-b)))
            if len(out) == count:
                return out
    return out


def builtin_kato_family(grid: TimeGrid, count: int = 50) -> list[TimeSeries]:
    """Near-critical profiles t^{-1/2+a} Λ^{-β} with finite 𝓚 norms."""
    t = grid.nodes
    lam = log_weight(t, grid.T)
    out = []
    alphas = [0.0, 0.05, 0.1, 0.2, 0.3]
    betas = [2.1, 2.4, 2.8, 3.2, 3.6, 4.0, 4.5, 5.0, 5.5, 6.0]
    for a in alphas:
        for b in betas:
            out.append(TimeSeries(grid, (t / grid.T) ** (a - 0.5) * lam ** (-b)))
            if len(out) == count:
                return out
    return out
