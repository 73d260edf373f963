"""All roots of a complex polynomial by Aberth-Ehrlich simultaneous iteration."""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

EPS = np.finfo(float).eps


def cauchy_bound(coeffs: np.ndarray) -> float:
    """Unique positive root of |a_n| x^n - sum_{i<n} |a_i| x^i.

    Every root of the polynomial lies in the disc of this radius.
    ``coeffs`` is ascending with a nonzero last entry.
    """
    a = np.abs(np.asarray(coeffs))
    n = len(a) - 1
    rest = a[:-1] / a[-1]
    if not np.any(rest):
        return 0.0

    def g(x):
        return 1.0 - np.sum(rest * x ** (np.arange(n) - n))

    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
    lo = hi / 2.0
    while g(lo) > 0 and lo > 1e-300:
        lo /= 2.0
    return brentq(g, lo, hi, xtol=1e-14 * hi)


def _newton_ratio(desc: np.ndarray, rev: np.ndarray, z: np.ndarray):
    """p(z) / p'(z) and a flag for |p(z)| at rounding level.

    Outside the unit disc the reversed polynomial is used so high powers
    never overflow.
    """
    n = len(desc) - 1
    out = np.empty_like(z)
    noise = np.empty(z.shape, dtype=bool)
    inner = np.abs(z) <= 1.0
    if np.any(inner):
        zi = z[inner]
        ai = np.abs(zi)
        p = np.zeros_like(zi)
        dp = np.zeros_like(zi)
        bound = np.zeros(zi.shape)
        for c in desc:
            dp = dp * zi + p
            p = p * zi + c
            bound = bound * ai + abs(c)
        out[inner] = p / dp
        noise[inner] = np.abs(p) <= 4 * n * EPS * bound
    outer = ~inner
    if np.any(outer):
        zo = z[outer]
        w = 1.0 / zo
        aw = np.abs(w)
        q = np.zeros_like(zo)
        dq = np.zeros_like(zo)
        bound = np.zeros(zo.shape)
        for c in rev:
            dq = dq * w + q
            q = q * w + c
            bound = bound * aw + abs(c)
        out[outer] = zo * q / (n * q - w * dq)
        noise[outer] = np.abs(q) <= 4 * n * EPS * bound
    return out, noise


def aberth_roots(coeffs, maxiter: int = 500, tol: float = 1e-13) -> np.ndarray:
    """Roots of ``sum coeffs[i] * z**i``.

    Starting points sit on a circle of Cauchy-bound radius, rotated off the
    real and imaginary axes so mirror-symmetric root sets do not stall the
    iteration.  Iteration stops per root once the correction falls below
    ``tol`` relative to the root magnitude, or once |p(z)| is within the
    rounding error of its evaluation (no further digits are available).
    """
    c = np.asarray(coeffs, dtype=complex)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ValueError("zero polynomial has no finite root set")
    c = c[: nz[-1] + 1]
    zeros_at_origin = int(nz[0])
    c = c[zeros_at_origin:]
    n = len(c) - 1
    if n == 0:
        return np.zeros(zeros_at_origin, dtype=complex)
    if n == 1:
        return np.concatenate([[-c[0] / c[1]], np.zeros(zeros_at_origin)])

    desc = c[::-1] / c[-1]
    rev = c / c[-1]
    radius = cauchy_bound(c)
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles)
    active = np.ones(n, dtype=bool)
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        ratio, noise = _newton_ratio(desc, rev, z[idx])
        diff = z[idx, None] - z[None, :]
        diff[np.arange(idx.size), idx] = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / diff
        inv[np.arange(idx.size), idx] = 0.0
        inv[~np.isfinite(inv)] = 0.0
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = ratio / (1.0 - ratio * s)
        step[~np.isfinite(step)] = 0.0
        z[idx] -= step
        done = noise | (np.abs(step) <= tol * np.maximum(np.abs(z[idx]), 1e-300))
        active[idx[done]] = False
    return np.concatenate([z, np.zeros(zeros_at_origin, dtype=complex)])
