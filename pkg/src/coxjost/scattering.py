"""S-matrix, channel-1 phase shift and cross section on the real energy axis.

For E above the lowest threshold the physical momenta are
k_j = sqrt(E - threshold_j) in open channels and i*sqrt(threshold_j - E) in
closed ones.  The open block of

    S = k^(-1/2) F(-k) F(k)^-1 k^(1/2)

is unitary and symmetric for the Jost matrix F used here; only the open
rows of F(-k) enter it, so the sign given to closed momenta is immaterial.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoxError, JostSingular, ThresholdProximity
from .model import ChannelModel, jost_matrix

THRESHOLD_TOL = 1e-8
COND_LIMIT = 1e13


@dataclass
class ObservableSample:
    energy: float
    open_count: int
    s: np.ndarray
    delta1: float
    sigma11: float


def physical_momenta(energy: float, model: ChannelModel) -> np.ndarray:
    gap = energy - model.delta
    return np.where(gap > 0, np.sqrt(np.abs(gap)), 1j * np.sqrt(np.abs(gap))).astype(complex)


def s_matrix(energy: float, model: ChannelModel, tol: float = THRESHOLD_TOL) -> ObservableSample:
    """Open-channel S-matrix at one energy, with the principal channel-1 phase."""
    energy = float(energy)
    if not energy > 0:
        raise ValueError("scattering energy must be positive")
    near = np.flatnonzero(np.abs(energy - model.delta) < tol)
    if near.size:
        raise ThresholdProximity(f"E = {energy:.12g} is within {tol:g} of threshold {near[0] + 1}")
    k = physical_momenta(energy, model)
    f_in = jost_matrix(k, model)
    if not np.linalg.cond(f_in) < COND_LIMIT:
        raise JostSingular(f"Jost matrix singular at E = {energy:.12g}")
    f_out = jost_matrix(-k, model)
    o = np.flatnonzero(energy > model.delta)
    m = f_out @ np.linalg.inv(f_in)
    root = np.sqrt(k[o].real)
    s = m[np.ix_(o, o)] * root[None, :] / root[:, None]
    s11 = s[0, 0]
    return ObservableSample(
        energy=energy,
        open_count=int(o.size),
        s=s,
        delta1=float(0.5 * np.angle(s11)),
        sigma11=float(np.pi / k[0].real ** 2 * abs(1 - s11) ** 2),
    )


def unwrap_phase(samples: list[ObservableSample]) -> None:
    """Make delta1 continuous along the list, in place.

    The first sample keeps its principal value in (-pi/2, pi/2]; each later
    one takes the branch nearest its predecessor.
    """
    if not samples:
        return
    twice = np.unwrap([2 * s.delta1 for s in samples])
    for s, t in zip(samples, twice):
        s.delta1 = float(0.5 * t)


def observable_sweep(grid, model: ChannelModel, tol: float = THRESHOLD_TOL):
    """S-matrix data along an increasing energy grid.

    Returns (samples, errors) where errors lists (energy, message) for the
    points that failed; the sweep continues past them and the phase is
    unwrapped over the successful points.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("energy grid must be strictly increasing")
    samples, errors = [], []
    for e in grid:
        try:
            samples.append(s_matrix(e, model, tol))
        except (CoxError, ValueError) as exc:
            errors.append((float(e), str(exc)))
    unwrap_phase(samples)
    return samples, errors


def unitarity_defect(sample: ObservableSample) -> float:
    s = sample.s
    return float(np.max(np.abs(s.conj().T @ s - np.eye(len(s)))))


def symmetry_defect(sample: ObservableSample) -> float:
    return float(np.max(np.abs(sample.s - sample.s.T)))
