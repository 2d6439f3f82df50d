"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The active path is chosen once at import time from the LOGBESOV_NUMBA
environment variable: "1" forces numba, "0" forces the numpy fallback,
anything else (default) uses numba when it imports. ``benchmarks/
bench_kernels.py`` compares the two paths.

Both paths accumulate in a fixed loop order, so results are deterministic
per path; across paths they agree to rounding.
"""

from __future__ import annotations

import math
import os

import numpy as np

_env = os.environ.get("LOGBESOV_NUMBA", "auto").lower()
if _env in ("0", "false", "off"):
    USE_NUMBA = False
elif _env in ("1", "true", "on"):
    import numba  # fail loudly if forced on and missing

    USE_NUMBA = True
else:
    try:
        import numba  # noqa: F401

        USE_NUMBA = True
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


# -- smooth cutoff profile ---------------------------------------------------
# plateau 1 on [0, 5/4], 0 from 3/2 on, e^{-1/s} glue on the bridge

def _phi_scalar_py(t: float) -> float:
    if t <= 1.25:
        return 1.0
    if t >= 1.5:
        return 0.0
    s = (1.5 - t) / 0.25
    hs = math.exp(-1.0 / s)
    h1s = math.exp(-1.0 / (1.0 - s))
    return hs / (hs + h1s)


def _phi_array_loop_py(flat: np.ndarray, out: np.ndarray) -> np.ndarray:
    for i in range(flat.shape[0]):
        out[i] = _phi_scalar_py(flat[i])
    return out


def _phi_array_numpy(t: np.ndarray) -> np.ndarray:
    out = np.ones_like(t)
    out[t >= 1.5] = 0.0
    bridge = (t > 1.25) & (t < 1.5)
    if np.any(bridge):
        s = (1.5 - t[bridge]) / 0.25
        hs = np.exp(-1.0 / s)
        h1s = np.exp(-1.0 / (1.0 - s))
        out[bridge] = hs / (hs + h1s)
    return out


# -- sparse bump-pair convolution --------------------------------------------

def _bilinear_heat_box_py(valsA, valsB, np2A, np2B, flat_idx, nxi2_box,
                          t, mode, t_outer, weight, out_box):
    """Accumulate stacked bump-pair convolutions into a dense offset box.

    mode 0: exact Duhamel factor ∫_0^t e^{-(t-τ)|ξ|² - τ(|p|²+|q|²)} dτ,
            evaluated as e^{-t·min(D,|ξ|²)}·(1-e^{-t|D-|ξ|²|})/|D-|ξ|²|
            so both exponents stay nonpositive (D = |p|²+|q|²)
    mode 1: plain product with factor weight·e^{-(t_outer-t)|ξ|²}
            (side values pre-multiplied by their own heat decay)
    """
    npairs = valsA.shape[0]
    PA = valsA.shape[1]
    PB = valsB.shape[1]
    for g in range(npairs):
        for i in range(PA):
            va = valsA[g, i]
            if va.real == 0.0 and va.imag == 0.0:
                continue
            da = np2A[g, i]
            for j in range(PB):
                vb = valsB[g, j]
                if vb.real == 0.0 and vb.imag == 0.0:
                    continue
                cell = flat_idx[i, j]
                nxi2 = nxi2_box[cell]
                if mode == 0:
                    dd = da + np2B[g, j]
                    lo = dd if dd < nxi2 else nxi2
                    z = t * abs(dd - nxi2)
                    if z < 1e-12:
                        f = t * math.exp(-t * lo)
                    else:
                        f = (t * (-math.expm1(-z)) / z) * math.exp(-t * lo)
                else:
                    f = weight * math.exp(-(t_outer - t) * nxi2)
                out_box[cell] += va * vb * f
    return out_box


def _sparse_eval_py(coords, vals, xs):
    P = coords.shape[0]
    M = xs.shape[0]
    n = coords.shape[1]
    out = np.zeros(M, dtype=np.complex128)
    for m in range(M):
        acc = 0.0 + 0.0j
        for k in range(P):
            ph = 0.0
            for d in range(n):
                ph += coords[k, d] * xs[m, d]
            acc += vals[k] * complex(math.cos(ph), math.sin(ph))
        out[m] = acc
    return out


if USE_NUMBA:
    from numba import njit

    _phi_scalar = njit(cache=True)(_phi_scalar_py)

    @njit(cache=True)
    def _phi_array_loop(flat, out):  # pragma: no cover - thin jit wrapper
        for i in range(flat.shape[0]):
            out[i] = _phi_scalar(flat[i])
        return out

    _bilinear_heat_box = njit(cache=True)(_bilinear_heat_box_py)
    _sparse_eval = njit(cache=True)(_sparse_eval_py)
else:
    _phi_scalar = _phi_scalar_py
    _phi_array_loop = None
    _bilinear_heat_box = _bilinear_heat_box_py
    _sparse_eval = None


def phi_profile_array(t):
    """Vectorized smooth cutoff profile; scalar in, scalar out."""
    arr = np.asarray(t, dtype=np.float64)
    if arr.ndim == 0:
        return _phi_scalar(float(arr))
    if USE_NUMBA:
        flat = np.ascontiguousarray(arr.ravel())
        out = np.empty_like(flat)
        return _phi_array_loop(flat, out).reshape(arr.shape)
    return _phi_array_numpy(arr.copy())


def bilinear_heat_box(valsA, valsB, np2A, np2B, flat_idx, nxi2_box,
                      t, mode=0, t_outer=0.0, weight=1.0, out_box=None):
    """Convolve stacked bump pairs sharing one offset template into a box."""
    if out_box is None:
        out_box = np.zeros(nxi2_box.shape[0], dtype=np.complex128)
    if USE_NUMBA:
        return _bilinear_heat_box(valsA, valsB, np2A, np2B, flat_idx, nxi2_box,
                                  float(t), int(mode), float(t_outer),
                                  float(weight), out_box)
    # vectorized fallback: loop pairs, broadcast over the PA×PB template
    cells = flat_idx.ravel()
    npairs = valsA.shape[0]
    nxi2 = nxi2_box[cells]
    for g in range(npairs):
        prod = np.outer(valsA[g], valsB[g]).ravel()
        if mode == 0:
            dd = (np2A[g][:, None] + np2B[g][None, :]).ravel()
            lo = np.minimum(dd, nxi2)
            z = t * np.abs(dd - nxi2)
            safe = np.where(z == 0.0, 1.0, z)
            f = np.where(z < 1e-12, t, t * (-np.expm1(-z)) / safe)
            f = f * np.exp(-t * lo)
        else:
            f = weight * np.exp(-(t_outer - t) * nxi2)
        np.add.at(out_box, cells, prod * f)
    return out_box


def sparse_eval(coords, vals, xs):
    """Evaluate a sparse trigonometric polynomial at physical points.

    coords: (P, n) frequencies; vals: (P,) complex; xs: (M, n) points.
    """
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    xs = np.ascontiguousarray(np.atleast_2d(np.asarray(xs, dtype=np.float64)))
    vals = np.ascontiguousarray(vals, dtype=np.complex128)
    if USE_NUMBA:
        return _sparse_eval(coords, vals, xs)
    ph = xs @ coords.T
    return (np.exp(1j * ph) * vals[None, :]).sum(axis=1)
