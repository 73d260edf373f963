"""Channel parameters, sheet signatures and the B / Jost matrix evaluators.

All channel indices in public data (JSON files, ``beta`` triples) are
1-based; arrays are 0-based.  Channel 1 has threshold zero.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CancellationPole

CANCEL_TOL = 1e-9


@dataclass(frozen=True)
class ChannelModel:
    """Parameters of an N-channel partner of the zero potential.

    Attributes
    ----------
    thresholds : tuple of float
        Channel thresholds, first one zero.
    alpha : tuple of float
        Diagonal of the superpotential at the origin, U0.
    beta : tuple of (j, l, value)
        Off-diagonal entries of U0 with 1-based ``j < l``.  Missing pairs
        are zero.
    factorization_energy : float
        Energy below all thresholds; kappa_j = sqrt(threshold_j - energy).
    """

    thresholds: tuple[float, ...]
    alpha: tuple[float, ...]
    beta: tuple[tuple[int, int, float], ...] = ()
    factorization_energy: float = -1.0

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(x) for x in self.thresholds))
        object.__setattr__(self, "alpha", tuple(float(x) for x in self.alpha))
        if len(self.thresholds) != len(self.alpha):
            raise ValueError("thresholds and alpha must have the same length")
        n = len(self.alpha)
        if n == 0:
            raise ValueError("at least one channel is required")
        cleaned = {}
        for j, l, v in self.beta:
            j, l = int(j), int(l)
            if j == l or not (1 <= j <= n and 1 <= l <= n):
                raise ValueError(f"bad coupling index ({j}, {l}) for {n} channels")
            cleaned[(min(j, l), max(j, l))] = float(v)
        object.__setattr__(
            self, "beta", tuple((j, l, v) for (j, l), v in sorted(cleaned.items()))
        )
        object.__setattr__(self, "factorization_energy", float(self.factorization_energy))

    @classmethod
    def from_u0(cls, u0, thresholds, factorization_energy=-1.0) -> ChannelModel:
        u0 = np.asarray(u0, dtype=float)
        n = u0.shape[0]
        beta = [(j + 1, l + 1, 0.5 * (u0[j, l] + u0[l, j]))
                for j in range(n) for l in range(j + 1, n) if u0[j, l] != 0 or u0[l, j] != 0]
        return cls(tuple(thresholds), tuple(np.diag(u0)), tuple(beta), factorization_energy)

    @classmethod
    def from_dict(cls, d: dict) -> ChannelModel:
        known = {"n", "thresholds", "alpha", "beta", "factorization_energy"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown model keys: {sorted(extra)}")
        model = cls(
            tuple(d["thresholds"]),
            tuple(d["alpha"]),
            tuple(tuple(t) for t in d.get("beta", [])),
            d.get("factorization_energy", -1.0),
        )
        if "n" in d and int(d["n"]) != model.n_channels:
            raise ValueError(f"n={d['n']} does not match {model.n_channels} channels")
        return model

    def to_dict(self) -> dict:
        return {
            "n": self.n_channels,
            "thresholds": list(self.thresholds),
            "alpha": list(self.alpha),
            "beta": [[j, l, v] for j, l, v in self.beta],
            "factorization_energy": self.factorization_energy,
        }

    @property
    def n_channels(self) -> int:
        return len(self.alpha)

    @cached_property
    def delta(self) -> np.ndarray:
        a = np.array(self.thresholds)
        a.setflags(write=False)
        return a

    @cached_property
    def u0(self) -> np.ndarray:
        m = np.diag(np.array(self.alpha))
        for j, l, v in self.beta:
            m[j - 1, l - 1] = m[l - 1, j - 1] = v
        m.setflags(write=False)
        return m

    @cached_property
    def kappa(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            k = np.sqrt(self.delta - self.factorization_energy)
        k.setflags(write=False)
        return k

    def with_kappa1(self, kappa1: float) -> ChannelModel:
        """Same U0 and thresholds, factorization energy ``-kappa1**2``."""
        return ChannelModel(self.thresholds, self.alpha, self.beta, -float(kappa1) ** 2)

    def with_u0(self, u0) -> ChannelModel:
        return ChannelModel.from_u0(u0, self.thresholds, self.factorization_energy)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    min_eigenvalue: float = float("nan")

    @property
    def ok(self) -> bool:
        return not self.violations


def regularity_eigenvalues(model: ChannelModel) -> np.ndarray:
    """Eigenvalues of diag(kappa) + U0 in ascending order."""
    return np.linalg.eigvalsh(np.diag(model.kappa) + model.u0)


def validate(model: ChannelModel) -> ValidationReport:
    rep = ValidationReport()
    d = model.delta
    if d[0] != 0.0:
        rep.violations.append("first threshold must be zero")
    if len(set(model.thresholds)) != len(model.thresholds):
        rep.violations.append("thresholds not distinct")
    if np.any(d < 0):
        rep.violations.append("thresholds must be nonnegative")
    if not model.factorization_energy < d.min():
        rep.violations.append("factorization energy not below all thresholds")
        return rep
    ev = regularity_eigenvalues(model)
    rep.min_eigenvalue = float(ev[0])
    if ev[0] <= 0:
        rep.violations.append("K+U0 not positive definite")
    return rep


@dataclass(frozen=True)
class SheetSignature:
    """Sign of each channel momentum relative to the reference branch.

    ``anchor`` is the channel whose momentum is the free variable; its sign
    is always +1.
    """

    signs: tuple[int, ...]
    anchor: int = 0

    def __post_init__(self):
        s = tuple(int(x) for x in self.signs)
        if any(x not in (1, -1) for x in s):
            raise ValueError("signs must be +1 or -1")
        if s[self.anchor] != 1:
            raise ValueError("anchor sign must be +1")
        object.__setattr__(self, "signs", s)

    @classmethod
    def parse(cls, text: str, anchor: int = 0) -> SheetSignature:
        return cls(tuple(1 if c == "+" else -1 for c in text.strip()), anchor)

    @property
    def n_plus(self) -> int:
        return sum(1 for i, s in enumerate(self.signs) if s == 1 and i != self.anchor)

    @property
    def n_minus(self) -> int:
        return sum(1 for s in self.signs if s == -1)

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)


def all_sheets(n: int, anchor: int = 0) -> list[SheetSignature]:
    """All 2**(n-1) signatures, physical sheet first."""
    out = []
    for free in itertools.product((1, -1), repeat=n - 1):
        signs = list(free)
        signs.insert(anchor, 1)
        out.append(SheetSignature(tuple(signs), anchor))
    return out


def reference_momenta(energy, model: ChannelModel) -> np.ndarray:
    """Channel momenta i*sqrt(threshold - E) on the reference branch.

    The cut of each channel lies on real E above its threshold, so the whole
    imaginary k1 axis is free of cuts: there k_j = i*sqrt(|k1|^2 + threshold).
    """
    return 1j * np.sqrt(model.delta - complex(energy) + 0j)


@dataclass
class Momenta:
    k: np.ndarray
    energy: complex

    def __post_init__(self):
        self.k = np.asarray(self.k, dtype=complex)
        self.energy = complex(self.energy)

    def threshold_residual(self, model: ChannelModel) -> float:
        k = self.k
        return float(np.max(np.abs(k**2 - k[0] ** 2 + model.delta)))


def momenta_from_anchor(kj: complex, sheet: SheetSignature, model: ChannelModel) -> Momenta:
    j = sheet.anchor
    energy = complex(kj) ** 2 + model.delta[j]
    k = np.array(sheet.signs) * reference_momenta(energy, model)
    k[j] = kj
    return Momenta(k, energy)


def momenta_from_k1(k1: complex, sheet: SheetSignature, model: ChannelModel) -> Momenta:
    if sheet.anchor != 0:
        raise ValueError("sheet must be anchored at channel 1")
    return momenta_from_anchor(k1, sheet, model)


def sheet_of(k, model: ChannelModel, anchor: int = 0) -> SheetSignature:
    """Signature of a momentum vector relative to the reference branch."""
    k = np.asarray(k, dtype=complex)
    ref = reference_momenta(k[anchor] ** 2 + model.delta[anchor], model)
    signs = np.where(np.abs(k - ref) <= np.abs(k + ref), 1, -1)
    signs[anchor] = 1
    return SheetSignature(tuple(int(s) for s in signs), anchor)


def _kvec(k) -> np.ndarray:
    return np.asarray(k.k if isinstance(k, Momenta) else k, dtype=complex)


def b_matrix(k, model: ChannelModel) -> np.ndarray:
    return model.u0 - 1j * np.diag(_kvec(k))


def jost_matrix(k, model: ChannelModel, tol: float = CANCEL_TOL) -> np.ndarray:
    """(K - iK_k)^{-1} (U0 - iK_k) with the diagonal prefactor inverted exactly."""
    kv = _kvec(k)
    kap = model.kappa
    gap = np.abs(kv + 1j * kap)
    bad = np.flatnonzero(gap < tol * (1 + kap))
    if bad.size:
        raise CancellationPole(f"k_{bad[0] + 1} = -i*kappa_{bad[0] + 1} within tolerance")
    return (model.u0 - 1j * np.diag(kv)) / (kap - 1j * kv)[:, None]

