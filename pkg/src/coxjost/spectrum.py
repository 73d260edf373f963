"""Location and classification of all zeros of det B.

Pipeline: expand det B, eliminate k_N..k_2, find every root of the
univariate polynomial, recover the other momenta, polish on the unsquared
system, classify.  The eigenvalue curves of B on the imaginary k1 axis give
an independent route to the bound and virtual states.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy.optimize import brentq

from .elimination import back_substitute, build_detb_poly, eliminate
from .errors import ChainBreakdown, ThresholdCritical, UnpairedZero
from .model import (
    ChannelModel,
    Momenta,
    SheetSignature,
    all_sheets,
    momenta_from_k1,
    sheet_of,
)
from .polyroots import aberth_roots

BOUND = "bound"
VIRTUAL = "virtual"
RESONANCE = "resonance_member"
CANCELLED = "cancelled"
DEGENERATE = "degenerate"
CLASS_ORDER = (BOUND, VIRTUAL, RESONANCE, CANCELLED, DEGENERATE)

MAX_CHANNELS = 10


@dataclass(frozen=True)
class Tolerances:
    polish: float = 1e-11      # accepted scaled residual after Newton
    imag: float = 1e-8         # |Re k1| below this (relative) => imaginary axis
    degenerate: float = 1e-6   # two zeros closer than this => multiplicity >= 2
    same: float = 1e-8         # two polished zeros closer than this are one zero
    cancel: float = 1e-9       # |k_j + i kappa_j| below this => cancelled
    chain: float = 1e-10       # back-substitution denominator cut-off
    aberth: float = 1e-13
    pair: float = 1e-6         # resonance partner matching
    critical: float = 1e-12    # zero eigenvalue of B(0)

    def updated(self, **kw) -> Tolerances:
        names = {f.name for f in fields(self)}
        for key, value in kw.items():
            if key not in names:
                raise ValueError(f"unknown tolerance {key!r}")
            if not float(value) > 0:
                raise ValueError(f"tolerance {key} must be positive")
        return replace(self, **{k: float(v) for k, v in kw.items()})


DEFAULT_TOL = Tolerances()


@dataclass
class SpectralPoint:
    momenta: Momenta
    kind: str
    sheet: SheetSignature
    residual: float

    @property
    def energy(self) -> complex:
        return self.momenta.energy

    @property
    def k(self) -> np.ndarray:
        return self.momenta.k


@dataclass
class EigenCurve:
    sheet: SheetSignature
    grid: np.ndarray
    eigenvalues: np.ndarray
    crossings: list[tuple[int, float]] = field(default_factory=list)


# --------------------------------------------------------------------------
# polishing on the original (unsquared) system

def _minor_index(n: int) -> np.ndarray:
    return np.array([[i for i in range(n) if i != j] for j in range(n)], dtype=int)


def _system(k: np.ndarray, model: ChannelModel, hscale: np.ndarray, tscale: np.ndarray):
    """Scaled residual vector and Jacobian for a batch of momentum vectors."""
    m, n = k.shape
    b = np.broadcast_to(model.u0, (m, n, n)) - 1j * (k[:, :, None] * np.eye(n))
    f = np.empty((m, n), dtype=complex)
    jac = np.zeros((m, n, n), dtype=complex)
    f[:, 0] = np.linalg.det(b) / hscale
    if n == 1:
        jac[:, 0, 0] = -1j / hscale
        return f, jac
    idx = _minor_index(n)
    minors = np.linalg.det(b[:, idx[:, :, None], idx[:, None, :]])
    jac[:, 0, :] = -1j * minors / hscale[:, None]
    f[:, 1:] = (k[:, 1:] ** 2 - k[:, :1] ** 2 + model.delta[1:]) / tscale[:, None]
    jac[:, 1:, 0] = -2 * k[:, :1] / tscale[:, None]
    rows = np.arange(1, n)
    jac[:, rows, rows] = 2 * k[:, 1:] / tscale[:, None]
    return f, jac


def hadamard_scale(k: np.ndarray, model: ChannelModel) -> np.ndarray:
    """Product of row norms of B; an upper bound on |det B|."""
    k = np.atleast_2d(k)
    n = k.shape[1]
    b = model.u0[None] - 1j * (k[:, :, None] * np.eye(n))
    return np.prod(np.linalg.norm(b, axis=2), axis=1)


def residuals(k, model: ChannelModel) -> np.ndarray:
    """max(|det B| / Hadamard bound, threshold mismatch / (1 + |k1|^2))."""
    k = np.atleast_2d(np.asarray(k, dtype=complex))
    n = k.shape[1]
    b = model.u0[None] - 1j * (k[:, :, None] * np.eye(n))
    r = np.abs(np.linalg.det(b)) / np.maximum(hadamard_scale(k, model), 1e-300)
    if n > 1:
        t = np.abs(k[:, 1:] ** 2 - k[:, :1] ** 2 + model.delta[1:]).max(axis=1)
        r = np.maximum(r, t / (1 + np.abs(k[:, 0]) ** 2))
    return r


def polish(k0, model: ChannelModel, maxiter: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Damped Newton on det B = 0, k_j^2 - k1^2 + threshold_j = 0.

    Works on a batch of starting vectors at once; returns polished vectors
    and their residuals.
    """
    k = np.array(np.atleast_2d(k0), dtype=complex)
    hscale = np.maximum(hadamard_scale(k, model), 1e-300)
    tscale = 1 + np.abs(k[:, 0]) ** 2
    f, jac = _system(k, model, hscale, tscale)
    norm = np.linalg.norm(f, axis=1)
    active = np.ones(len(k), dtype=bool)
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        try:
            step = np.linalg.solve(jac[idx], -f[idx][:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(j, -v, rcond=None)[0]
                             for j, v in zip(jac[idx], f[idx])])
        t = np.ones(idx.size)
        pending = np.ones(idx.size, dtype=bool)
        newk = k[idx].copy()
        newf = f[idx].copy()
        newjac = jac[idx].copy()
        newnorm = norm[idx].copy()
        for _halving in range(12):
            p = np.flatnonzero(pending)
            if p.size == 0:
                break
            trial = k[idx[p]] + t[p, None] * step[p]
            ft, jt = _system(trial, model, hscale[idx[p]], tscale[idx[p]])
            nt = np.linalg.norm(ft, axis=1)
            ok = (nt < norm[idx[p]]) | (nt <= 1e-15)
            good = p[ok]
            newk[good], newf[good], newjac[good], newnorm[good] = trial[ok], ft[ok], jt[ok], nt[ok]
            pending[good] = False
            t[p[~ok]] *= 0.5
        moved = ~pending
        k[idx[moved]] = newk[moved]
        f[idx[moved]] = newf[moved]
        jac[idx[moved]] = newjac[moved]
        norm[idx[moved]] = newnorm[moved]
        small = np.linalg.norm(step, axis=1) * t <= 4e-16 * (1 + np.linalg.norm(k[idx], axis=1))
        active[idx[pending | small | (norm[idx] <= 1e-16)]] = False
    return k, residuals(k, model)


# --------------------------------------------------------------------------
# root finding

def _log_derivative(z: np.ndarray, model: ChannelModel) -> np.ndarray:
    """d/dk1 log of prod over sheets of det B, evaluated without coefficients.

    The product runs over both signs of every k_j (j >= 2), so it is a
    polynomial in k1 with the roots of the eliminated polynomial.  With
    d det B / d k_j = -i det B (B^-1)_jj and dk_j/dk1 = k1/k_j the
    logarithmic derivative needs only the diagonal of B^-1 on each sheet.
    """
    n = model.n_channels
    signs = np.array([s.signs for s in all_sheets(n)], dtype=float)
    k = signs[None] * (1j * np.sqrt(model.delta[None, :] - z[:, None] ** 2 + 0j))[:, None, :]
    k[:, :, 0] = z[:, None]
    b = model.u0 - 1j * (k[..., None] * np.eye(n))
    if n > 1:
        idx = _minor_index(n)
        minors = np.linalg.det(b[..., idx[:, :, None], idx[:, None, :]])
    else:
        minors = np.ones(b.shape[:-1], dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = minors / np.linalg.det(b)[..., None]
        dk = z[:, None, None] / k
        dk[:, :, 0] = 1.0
        return np.sum(-1j * diag * dk, axis=(1, 2))


def refine_roots(z, model: ChannelModel, maxiter: int = 60, tol: float = 1e-15) -> np.ndarray:
    """Aberth iteration driven by the exact logarithmic derivative.

    Starting from approximate roots of the eliminated polynomial, this
    removes the error caused by rounding in its coefficients, which is
    large inside clusters.
    """
    z = np.array(z, dtype=complex)
    active = np.ones(len(z), dtype=bool)
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        logd = _log_derivative(z[idx], model)
        diff = z[idx, None] - z[None, :]
        diff[np.arange(idx.size), idx] = np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.sum(1.0 / diff, axis=1)
            step = 1.0 / (logd - s)
        hit = ~np.isfinite(logd)
        step[hit | ~np.isfinite(step)] = 0.0
        z[idx] -= step
        done = hit | (np.abs(step) <= tol * (1 + np.abs(z[idx])))
        active[idx[done]] = False
    return z



def _sheet_seeds(k1: complex, model: ChannelModel) -> np.ndarray:
    """Momentum vectors for one k1 on every sheet, best det B first."""
    seeds = np.array([momenta_from_k1(k1, s, model).k for s in all_sheets(model.n_channels)])
    return seeds[np.argsort(residuals(seeds, model), kind="stable")]


def _is_new(k: np.ndarray, accepted: list[np.ndarray], tol: float) -> bool:
    if not accepted:
        return True
    scale = 1 + np.max(np.abs(k))
    return bool(np.all(np.max(np.abs(np.asarray(accepted) - k), axis=1) > tol * scale))


def find_zeros(model: ChannelModel, tol: Tolerances = DEFAULT_TOL):
    """Polished momentum vectors for every root of the eliminated polynomial.

    Returns (vectors, residuals, degree).  The number of vectors equals the
    polynomial degree; roots that could not be separated are returned as
    repeated vectors so later classification flags them.
    """
    n = model.n_channels
    if n > MAX_CHANNELS:
        raise ValueError(f"at most {MAX_CHANNELS} channels are supported")
    if n > 6:
        warnings.warn(f"degree {n * 2 ** (n - 1)} elimination is poorly conditioned",
                      RuntimeWarning, stacklevel=2)
    chain = eliminate(build_detb_poly(model), model)
    roots = refine_roots(aberth_roots(chain.final, tol=tol.aberth), model)
    seeds = np.array([_sheet_seeds(r, model)[0] for r in roots])
    for i, r in enumerate(roots):
        try:
            alt = back_substitute(r, chain, model, tol=tol.chain).k
        except ChainBreakdown:
            continue
        if residuals(alt, model)[0] < residuals(seeds[i], model)[0]:
            seeds[i] = alt
    polished, res = polish(seeds, model)

    accepted: list[np.ndarray] = []
    accepted_res: list[float] = []

    def accept(k, r) -> bool:
        if r <= tol.polish and _is_new(k, accepted, tol.same):
            accepted.append(k)
            accepted_res.append(float(r))
            return True
        return False

    pending = [i for i in np.argsort(res, kind="stable") if not accept(polished[i], res[i])]

    # U0 is real, so det B(-conj k) = conj det B(k): mirrors of zeros are zeros
    if pending:
        for k, r in list(zip(accepted, accepted_res)):
            if len(accepted) == len(roots):
                break
            accept(-np.conj(k), r)
        pending = pending[: len(roots) - len(accepted)]

    # zeros on the imaginary axis are bracketed reliably by eigenvalue crossings
    if pending:
        for sheet, x in imaginary_axis_zeros(model):
            kc, rc = polish(momenta_from_k1(1j * x, sheet, model).k, model)
            accept(kc[0], rc[0])
        pending = pending[: max(len(roots) - len(accepted), 0)]

    # roots still unaccounted for are repeats of an accepted zero or failed polishes
    for i in pending[: len(roots) - len(accepted)]:
        accepted.append(polished[i])
        accepted_res.append(float(res[i]))
    return np.array(accepted).reshape(-1, n), np.array(accepted_res), chain.degree


def classify(vectors, model: ChannelModel, tol: Tolerances = DEFAULT_TOL,
             point_residuals=None) -> list[SpectralPoint]:
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    m = len(vectors)
    if point_residuals is None:
        point_residuals = residuals(vectors, model) if m else np.zeros(0)
    kap = model.kappa

    size = np.max(np.abs(vectors), axis=1) if m else np.zeros(0)
    diff = vectors[:, None, :] - vectors[None, :, :]
    gap = np.max(np.abs(diff), axis=2) if m else np.zeros((0, 0))
    close = gap < tol.degenerate * (1 + np.maximum(size[:, None], size[None, :]))
    np.fill_diagonal(close, False)
    degenerate = close.any(axis=1)

    points = []
    for i, k in enumerate(vectors):
        if np.any(np.abs(k + 1j * kap) < tol.cancel * (1 + kap)):
            kind = CANCELLED
        elif degenerate[i] or point_residuals[i] > tol.polish:
            kind = DEGENERATE
        elif abs(k[0].real) < tol.imag * (1 + abs(k[0])):
            kind = BOUND if np.all(k.imag > 0) else VIRTUAL
            # such zeros lie on the imaginary axis exactly; drop rounding noise
            k = 1j * k.imag
        else:
            kind = RESONANCE
        points.append(SpectralPoint(Momenta(k, k[0] ** 2), kind, sheet_of(k, model),
                                    float(point_residuals[i])))

    members = [p for p in points if p.kind == RESONANCE]
    used = set()
    for a, p in enumerate(members):
        if a in used:
            continue
        target = -np.conj(p.k)
        best = None
        for b, q in enumerate(members):
            if b != a and b not in used:
                d = np.max(np.abs(q.k - target))
                if d < tol.pair * (1 + np.max(np.abs(p.k))) and (best is None or d < best[0]):
                    best = (d, b)
        if best is None:
            raise UnpairedZero(f"complex zero at E={p.energy:.6g} has no conjugate partner")
        used.update((a, best[1]))
    return sort_points(points)


def sort_points(points: list[SpectralPoint]) -> list[SpectralPoint]:
    return sorted(points, key=lambda p: (CLASS_ORDER.index(p.kind), p.energy.real, p.energy.imag))


def solve_spectrum(model: ChannelModel, tol: Tolerances = DEFAULT_TOL) -> list[SpectralPoint]:
    vectors, res, _ = find_zeros(model, tol)
    return classify(vectors, model, tol, res)


def tally(points: list[SpectralPoint], n_channels: int) -> dict:
    counts = {kind: sum(p.kind == kind for p in points) for kind in CLASS_ORDER}
    out = {
        "n_b": counts[BOUND],
        "n_v": counts[VIRTUAL],
        "n_r": counts[RESONANCE] // 2,
        "n_cancelled": counts[CANCELLED],
        "n_degenerate": counts[DEGENERATE],
        "expected_total": n_channels * 2 ** (n_channels - 1),
    }
    total = out["n_b"] + out["n_v"] + counts[RESONANCE] + out["n_cancelled"] + out["n_degenerate"]
    out["conserved"] = total == out["expected_total"] and counts[RESONANCE] % 2 == 0
    return out


# --------------------------------------------------------------------------
# eigenvalue route

def count_bound_states(model: ChannelModel, tol: float = DEFAULT_TOL.critical) -> int:
    """Number of negative eigenvalues of B at the lowest threshold."""
    b0 = model.u0 + np.diag(np.sqrt(model.delta))
    lam = np.linalg.eigvalsh(b0)
    if np.min(np.abs(lam)) < tol * max(1.0, np.max(np.abs(lam))):
        raise ThresholdCritical("B(0) has a zero eigenvalue")
    return int(np.sum(lam < 0))


def b_sigma(kbar1, sheet: SheetSignature, model: ChannelModel) -> np.ndarray:
    """Real symmetric B on the imaginary axis k1 = i*kbar1, batched over kbar1."""
    x = np.atleast_1d(np.asarray(kbar1, dtype=float))
    diag = np.array(sheet.signs) * np.sqrt(x[:, None] ** 2 + model.delta)
    diag[:, 0] = x
    n = model.n_channels
    return model.u0[None] + diag[:, :, None] * np.eye(n)


def eigenvalue_curves(model: ChannelModel, sheet: SheetSignature, grid,
                      xtol: float = 1e-13) -> EigenCurve:
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    lam = np.linalg.eigvalsh(b_sigma(grid, sheet, model))
    crossings = []
    for j in range(model.n_channels):
        trace = lam[:, j]
        for i in range(len(grid) - 1):
            a, b = trace[i], trace[i + 1]
            if a == 0.0:
                crossings.append((j, float(grid[i])))
            elif a * b < 0:
                x = brentq(lambda t, j=j: np.linalg.eigvalsh(b_sigma(t, sheet, model))[0, j],
                           grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
                crossings.append((j, float(x)))
        if trace[-1] == 0.0:
            crossings.append((j, float(grid[-1])))
    return EigenCurve(sheet, grid, lam, crossings)


def imaginary_zero_bound(model: ChannelModel) -> float:
    """|kbar1| of any imaginary-axis zero is at most the spectral norm of U0."""
    return float(np.linalg.norm(model.u0, 2))


def imaginary_axis_zeros(model: ChannelModel,
                         samples: int = 4001) -> list[tuple[SheetSignature, float]]:
    """(sheet, kbar1) for every eigenvalue crossing, over all sheets."""
    r = imaginary_zero_bound(model) + 1.0
    grid = np.linspace(-r, r, samples)
    out = []
    for s in all_sheets(model.n_channels):
        curve = eigenvalue_curves(model, s, grid)
        out.extend((s, x) for _, x in curve.crossings)
    return out


def spectrum_report(points: list[SpectralPoint], model: ChannelModel) -> dict:
    return {
        "points": [
            {
                "class": p.kind,
                "energy": [p.energy.real, p.energy.imag],
                "momenta": [[z.real, z.imag] for z in p.k],
                "sheet": str(p.sheet),
                "residual": p.residual,
            }
            for p in points
        ],
        "tally": tally(points, model.n_channels),
    }
