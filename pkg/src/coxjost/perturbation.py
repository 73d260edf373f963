"""Zeros of det B for weak inter-channel coupling.

With U0 = diag(alpha) + beta * b the decoupled zeros are known exactly:
level j has k_j = -i alpha_j and every other momentum fixed by the
thresholds.  The leading correction to k_j is of order beta^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import NearDegenerate
from .model import ChannelModel, Momenta, SheetSignature, all_sheets, sheet_of

DENOM_TOL = 1e-6


@dataclass(frozen=True)
class CouplingSplit:
    """U0 = diag(alpha) + beta * b with b symmetric and zero on the diagonal."""

    beta: float
    b: np.ndarray

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("coupling shape must be a square matrix")
        if not np.allclose(b, b.T) or np.any(np.diag(b) != 0):
            raise ValueError("coupling shape must be symmetric with zero diagonal")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_model(cls, model: ChannelModel) -> CouplingSplit:
        """beta = largest |beta_jl|, b = off-diagonal part of U0 divided by it."""
        off = model.u0 - np.diag(np.diag(model.u0))
        beta = float(np.max(np.abs(off))) if off.size else 0.0
        return cls(beta, off / beta if beta > 0 else off)

    def apply(self, model: ChannelModel) -> ChannelModel:
        """The model with its couplings replaced by beta * b."""
        return model.with_u0(np.diag(model.alpha) + self.beta * self.b)


@dataclass
class PerturbedZero:
    level: int                 # 0-based channel whose decoupled level this is
    sheet: SheetSignature      # signs relative to the reference branch, anchored at ``level``
    momenta: Momenta
    zero_width: bool = False   # decoupled level lies above the lowest threshold

    @property
    def k(self) -> np.ndarray:
        return self.momenta.k

    def channel1_sheet(self, model: ChannelModel) -> SheetSignature:
        """Sheet label in the convention with channel 1 as the free variable."""
        return sheet_of(self.k, model)


def level_energies(model: ChannelModel) -> np.ndarray:
    """Decoupled level energies threshold_j - alpha_j^2."""
    return model.delta - np.asarray(model.alpha) ** 2


def _companion_roots(model: ChannelModel, j: int) -> np.ndarray:
    """sqrt(alpha_j^2 + threshold_m - threshold_j) for every channel m."""
    a = np.asarray(model.alpha)
    return np.sqrt(a[j] ** 2 + model.delta - model.delta[j] + 0j)


def decoupled_roots(model: ChannelModel) -> list[PerturbedZero]:
    """All N * 2**(N-1) zeros of det B at zero coupling.

    Level j: k_j = -i alpha_j and k_m = s_m * i * sqrt(alpha_j^2 + threshold_m
    - threshold_j) for m != j, one entry per sign pattern s.
    """
    if model.beta and any(v != 0 for _, _, v in model.beta):
        raise ValueError("decoupled roots need a model without couplings")
    n = model.n_channels
    energies = level_energies(model)
    out = []
    for j in range(n):
        root = _companion_roots(model, j)
        for sheet in all_sheets(n, anchor=j):
            k = np.array(sheet.signs) * 1j * root
            k[j] = -1j * model.alpha[j]
            out.append(PerturbedZero(j, sheet, Momenta(k, energies[j]),
                                     zero_width=bool(energies[j] > 0) and j > 0))
    return out


def correction_coefficient(model: ChannelModel, split: CouplingSplit, j: int,
                           sheet: SheetSignature) -> complex:
    """c2 with k_j = -i alpha_j + i beta^2 c2 + O(beta^3)."""
    a = np.asarray(model.alpha)
    root = _companion_roots(model, j)
    total = 0j
    for l in range(model.n_channels):
        if l == j or split.b[j, l] == 0:
            continue
        denom = a[l] + sheet.signs[l] * root[l]
        if abs(denom) < DENOM_TOL * (1 + abs(a[l]) + abs(root[l])):
            raise NearDegenerate(
                f"level {j + 1}, sheet {sheet}: denominator {denom:.3g} for channel {l + 1}")
        total += split.b[j, l] ** 2 / denom
    return total


def perturbed_roots(model: ChannelModel, split: CouplingSplit | None = None) -> list[PerturbedZero]:
    """Second-order approximations to all zeros, one per (level, sheet).

    The other momenta are expanded to order beta^2 as well:
    k_m = s_m i (sqrt(A_m) - alpha_j beta^2 c2 / sqrt(A_m)) with
    A_m = alpha_j^2 + threshold_m - threshold_j.
    """
    if split is None:
        split = CouplingSplit.from_model(model)
    n = model.n_channels
    a = np.asarray(model.alpha)
    b2 = split.beta**2
    energies = level_energies(model)
    out = []
    for j in range(n):
        root = _companion_roots(model, j)
        for sheet in all_sheets(n, anchor=j):
            c2 = correction_coefficient(model, split, j, sheet)
            signs = np.array(sheet.signs)
            with np.errstate(divide="ignore", invalid="ignore"):
                shift = np.where(root != 0, a[j] * b2 * c2 / root, 0.0)
            k = signs * 1j * (root - shift)
            k[j] = -1j * a[j] + 1j * b2 * c2
            out.append(PerturbedZero(j, sheet, Momenta(k, k[0] ** 2),
                                     zero_width=bool(energies[j] > 0) and j > 0))
    return out


def nondegeneracy_margin(model: ChannelModel) -> float:
    """Smallest of: distance between decoupled zeros, |denominator| in c2,
    and |k_m| of a companion momentum.

    The expansion is reliable when this is large compared with beta times
    the coupling shape; a small value means a level crossing, a vanishing
    denominator, or a level at a threshold.
    """
    n = model.n_channels
    a = np.asarray(model.alpha)
    base = ChannelModel(model.thresholds, model.alpha, (), model.factorization_energy)
    zeros = decoupled_roots(base)
    k = np.array([z.k for z in zeros])
    dist = np.max(np.abs(k[:, None] - k[None]), axis=2)
    np.fill_diagonal(dist, np.inf)
    margin = float(dist.min())
    for z in zeros:
        root = _companion_roots(model, z.level)
        for l in range(n):
            if l != z.level:
                margin = min(margin, abs(a[l] + z.sheet.signs[l] * root[l]), abs(root[l]))
    return margin


def match_to_exact(approx: list[PerturbedZero], exact) -> tuple[np.ndarray, np.ndarray]:
    """Optimal one-to-one matching of approximate and exact momentum vectors.

    Returns (index into ``exact`` for each approximate zero, distances).
    """
    ka = np.array([z.k for z in approx])
    ke = np.array([getattr(p, "k", p) for p in exact])
    cost = np.max(np.abs(ka[:, None, :] - ke[None, :, :]), axis=2)
    rows, cols = linear_sum_assignment(cost)
    order = np.empty(len(approx), dtype=int)
    order[rows] = cols
    return order, cost[rows, cols][np.argsort(rows)]
