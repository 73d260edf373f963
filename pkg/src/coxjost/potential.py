"""Factorization solution, superpotential and transformed potential.

eta(r) = cosh(K r) + K^-1 sinh(K r) U0 is written as exp(K r) A(r) with

    A = (1 + E)/2 + K^-1 (1 - E) U0 / 2,   E = exp(-2 K r),

so only decaying exponentials appear.  From eta' = exp(K r)(K A + E (U0 - K))
the superpotential is

    U = eta' eta^-1 = K + exp(-K r) (U0 - K) A^-1 exp(-K r),

and eta'' = K^2 eta gives U' = K^2 - U^2, hence V = -2 U' = 2 (U^2 - K^2).
With X = U - K this is 2 (K X + X K + X^2), which stays accurate as X -> 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularFactorization
from .model import ChannelModel, regularity_eigenvalues

COND_LIMIT = 1e13


@dataclass
class PotentialSample:
    r: float
    v: np.ndarray
    asymmetry: float = 0.0


@dataclass
class RegularityReport:
    regular: bool
    min_eigenvalue: float
    below_ground_state: bool | None = None


def _radii(r) -> np.ndarray:
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    return r


def factorization_solution_scaled(r, model: ChannelModel):
    """A(r) with eta(r) = exp(K r) A(r), and the exponents K r.

    Accepts a scalar or an array of radii; array input gives stacked
    matrices of shape (len(r), N, N).
    """
    rr = _radii(r)
    kap = model.kappa
    e = np.exp(-2 * kap[None, :] * rr[:, None])
    eye = np.eye(model.n_channels)
    a = 0.5 * (1 + e)[:, :, None] * eye + 0.5 * ((1 - e) / kap)[:, :, None] * model.u0
    expo = kap[None, :] * rr[:, None]
    if np.ndim(r) == 0:
        return a[0], expo[0]
    return a, expo


def _offset(rr: np.ndarray, model: ChannelModel) -> np.ndarray:
    """X = U - K for a batch of radii."""
    a, _ = factorization_solution_scaled(rr, model)
    cond = np.linalg.cond(a)
    bad = np.flatnonzero(~(cond < COND_LIMIT))
    if bad.size:
        raise SingularFactorization(f"factorization solution singular near r = {rr[bad[0]]:.6g}")
    kap = model.kappa
    d = np.exp(-kap[None, :] * rr[:, None])
    m = np.broadcast_to(model.u0 - np.diag(kap), a.shape)
    # (U0 - K) A^-1 = (A^-T (U0 - K)^T)^T
    sol = np.swapaxes(np.linalg.solve(np.swapaxes(a, 1, 2), np.swapaxes(m, 1, 2)), 1, 2)
    return d[:, :, None] * sol * d[:, None, :]


def superpotential(r, model: ChannelModel) -> np.ndarray:
    rr = _radii(r)
    u = _offset(rr, model) + np.diag(model.kappa)
    return u[0] if np.ndim(r) == 0 else u


def potential_matrix(r, model: ChannelModel) -> np.ndarray:
    """2 (U^2 - K^2), symmetrized; scalar or batched radii."""
    rr = _radii(r)
    x = _offset(rr, model)
    kd = np.diag(model.kappa)
    v = 2 * (kd @ x + x @ kd + x @ x)
    v = 0.5 * (v + np.swapaxes(v, 1, 2))
    return v[0] if np.ndim(r) == 0 else v


def potential(r: float, model: ChannelModel) -> PotentialSample:
    rr = _radii(r)
    x = _offset(rr, model)[0]
    kd = np.diag(model.kappa)
    v = 2 * (kd @ x + x @ kd + x @ x)
    asym = float(np.max(np.abs(v - v.T)))
    return PotentialSample(float(r), 0.5 * (v + v.T), asym)


def default_grid(model: ChannelModel, points: int = 2000) -> np.ndarray:
    """[0, 25 / kappa_min]: the potential decays like exp(-2 kappa_min r)."""
    return np.linspace(0.0, 25.0 / float(np.min(model.kappa)), points)


def potential_on_grid(model: ChannelModel, grid=None) -> list[PotentialSample]:
    grid = default_grid(model) if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    rr = _radii(grid)
    x = _offset(rr, model)
    kd = np.diag(model.kappa)
    v = 2 * (kd @ x + x @ kd + x @ x)
    asym = np.max(np.abs(v - np.swapaxes(v, 1, 2)), axis=(1, 2))
    v = 0.5 * (v + np.swapaxes(v, 1, 2))
    return [PotentialSample(float(r), m, float(s)) for r, m, s in zip(rr, v, asym)]


def eta_determinant_sign(r, model: ChannelModel) -> np.ndarray:
    """Sign of det eta(r); det exp(K r) > 0, so this is the sign of det A."""
    a, _ = factorization_solution_scaled(_radii(r), model)
    return np.sign(np.linalg.det(a))


def regularity_check(model: ChannelModel, ground_energy: float | None = None) -> RegularityReport:
    """K + U0 > 0; optionally also whether the factorization energy lies below
    the given ground-state energy."""
    lam = float(regularity_eigenvalues(model)[0])
    below = None if ground_energy is None else bool(model.factorization_energy < ground_energy)
    return RegularityReport(lam > 0, lam, below)
