"""Reduction of det B = 0 plus the threshold relations to one polynomial in k1.

A polynomial multilinear in k2..kN is stored as a dict mapping a bitmask
(bit ``j - 1`` for channel index ``j >= 1``, 0-based) to an ascending
coefficient array in k1.  Channel m is eliminated by writing the equation
as ``k_m P = Q``, squaring, and replacing every ``k_j**2`` by
``k1**2 - threshold_j``.  Doing this for m = N..2 leaves a univariate
polynomial of degree N * 2**(N-1).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ChainBreakdown, DegenerateLeadingForm
from .model import ChannelModel, Momenta

Terms = dict[int, np.ndarray]


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1] if nz.size else c[:1] * 0


def _add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) < len(b):
        a, b = b, a
    out = a.copy()
    out[: len(b)] += b
    return out


@dataclass
class MultilinearPoly:
    """Polynomial in k1..kN, at most linear in each of k2..kN."""

    n: int
    terms: Terms = field(default_factory=dict)

    def degree_k1(self) -> int:
        return max((len(_trim(c)) - 1 for c in self.terms.values()), default=0)

    def is_multilinear(self) -> bool:
        return all(0 <= m < (1 << (self.n - 1)) for m in self.terms)

    def max_abs_coefficient(self) -> float:
        return max((float(np.max(np.abs(c))) for c in self.terms.values()), default=0.0)

    def _monomials(self, k: np.ndarray, mask: int) -> complex:
        out = 1.0 + 0j
        j = 1
        while mask:
            if mask & 1:
                out *= k[j]
            mask >>= 1
            j += 1
        return out

    def __call__(self, k) -> complex:
        """Evaluate at a full momentum vector (entries for unused channels ignored)."""
        k = np.asarray(k, dtype=complex)
        return sum(
            np.polynomial.polynomial.polyval(k[0], c) * self._monomials(k, m)
            for m, c in self.terms.items()
        )

    def magnitude(self, k) -> float:
        """Sum of absolute term values; the natural scale for cancellation tests."""
        k = np.abs(np.asarray(k, dtype=complex))
        return float(sum(
            np.polynomial.polynomial.polyval(k[0], np.abs(c)) * abs(self._monomials(k, m))
            for m, c in self.terms.items()
        ))


def build_detb_poly(model: ChannelModel) -> MultilinearPoly:
    """Expand det(U0 - i diag(k)) over subsets of diagonal picks.

    det(A + D) = sum over S of prod_{j in S} d_j * det(A restricted to the
    complement of S), with d_j = -i k_j.
    """
    n = model.n_channels
    u0 = model.u0
    terms: Terms = {}
    for size in range(n + 1):
        for subset in itertools.combinations(range(n), size):
            rest = [j for j in range(n) if j not in subset]
            minor = np.linalg.det(u0[np.ix_(rest, rest)]) if rest else 1.0
            coef = (-1j) ** size * minor
            mask = sum(1 << (j - 1) for j in subset if j > 0)
            power = 1 if 0 in subset else 0
            c = terms.setdefault(mask, np.zeros(2, dtype=complex))
            c[power] += coef
    return MultilinearPoly(n, terms)


def _multiply(a: Terms, b: Terms, delta: np.ndarray) -> Terms:
    out: Terms = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            prod = np.convolve(ca, cb)
            common = ma & mb
            j = 1
            while common:
                if common & 1:
                    prod = np.convolve(prod, np.array([-delta[j], 0.0, 1.0]))
                common >>= 1
                j += 1
            key = ma ^ mb
            out[key] = _add(out[key], prod) if key in out else prod
    return out


@dataclass
class SubstitutionChain:
    """Elimination record.

    ``steps[i] = (m, P, Q)`` states ``k_m * P = Q`` with P, Q over channels
    below m; steps are stored in elimination order (m = N-1 first, 0-based).
    ``final`` holds the ascending coefficients of the univariate polynomial.
    """

    n: int
    steps: list[tuple[int, MultilinearPoly, MultilinearPoly]]
    final: np.ndarray
    scales: list[float]

    @property
    def degree(self) -> int:
        return len(self.final) - 1


def eliminate(poly: MultilinearPoly, model: ChannelModel) -> SubstitutionChain:
    if not poly.is_multilinear():
        raise ValueError("polynomial is not multilinear in k2..kN")
    n = poly.n
    delta = model.delta
    cur = {m: c.astype(complex) for m, c in poly.terms.items()}
    steps = []
    scales = []
    k1sq = np.array([0.0, 0.0, 1.0])
    for m in range(n - 1, 0, -1):
        bit = 1 << (m - 1)
        p = {mask ^ bit: c for mask, c in cur.items() if mask & bit}
        q = {mask: -c for mask, c in cur.items() if not mask & bit}
        steps.append((m, MultilinearPoly(n, p), MultilinearPoly(n, q)))
        pp = _multiply(p, p, delta)
        qq = _multiply(q, q, delta)
        shift = k1sq - np.array([delta[m], 0.0, 0.0])
        nxt: Terms = {mask: np.convolve(c, shift) for mask, c in pp.items()}
        for mask, c in qq.items():
            nxt[mask] = _add(nxt[mask], -c) if mask in nxt else -c
        scale = max(float(np.max(np.abs(c))) for c in nxt.values()) if nxt else 0.0
        if scale == 0.0:
            raise DegenerateLeadingForm("elimination produced the zero polynomial")
        cur = {mask: c / scale for mask, c in nxt.items()}
        scales.append(scale)
    final = cur.get(0, np.zeros(1, dtype=complex))
    peak = float(np.max(np.abs(final)))
    if peak == 0.0:
        raise DegenerateLeadingForm("eliminated polynomial is identically zero")
    final = _trim(final / peak)
    if abs(final[-1]) < 1e-200:
        raise DegenerateLeadingForm("leading coefficient underflowed")
    return SubstitutionChain(n, steps, final, scales)


def back_substitute(k1: complex, chain: SubstitutionChain, model: ChannelModel,
                    tol: float = 1e-10) -> Momenta:
    """Recover k2..kN from k1 through the recorded ``k_m P = Q`` relations."""
    k = np.zeros(chain.n, dtype=complex)
    k[0] = k1
    for m, p, q in reversed(chain.steps):
        pv = p(k)
        if abs(pv) <= tol * max(p.magnitude(k), 1e-300):
            raise ChainBreakdown(f"denominator for k_{m + 1} vanishes at k1={k1:.6g}")
        k[m] = q(k) / pv
    return Momenta(k, complex(k1) ** 2)


def chain_residuals(k, chain: SubstitutionChain) -> list[float]:
    """|k_m P_m - Q_m| / scale for every recorded step."""
    k = np.asarray(k, dtype=complex)
    out = []
    for m, p, q in chain.steps:
        scale = max(abs(k[m]) * p.magnitude(k), q.magnitude(k), 1e-300)
        out.append(abs(k[m] * p(k) - q(k)) / scale)
    return out
