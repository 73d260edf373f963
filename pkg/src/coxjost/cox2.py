"""Closed forms for two channels: inverse problem, root completion, presets.

Two zeros (k1, k2) of (k1 + i a1)(k2 + i a2) + beta^2 = 0 with
k1^2 - k2^2 = delta fix the diagonal a1, a2 of U0.  The remaining two
zeros then follow from a quadratic.  Branch ``upper`` / ``lower`` selects
the sign in front of the square root in the formula for a1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoAdmissibleBeta, NonRealAlpha, PairingFailure
from .model import ChannelModel

BRANCHES = ("upper", "lower")
REAL_TOL = 1e-10
PAIR_TOL = 1e-10


def _sign(branch: str) -> int:
    if branch not in BRANCHES:
        raise ValueError(f"branch must be 'upper' or 'lower', got {branch!r}")
    return 1 if branch == "upper" else -1


@dataclass(frozen=True)
class TwoChannelSpec:
    """Threshold, coupling and two prescribed zeros ((k1, k2), (k1, k2))."""

    delta: float
    beta: float
    zeros: tuple[tuple[complex, complex], tuple[complex, complex]]
    branch: str = "upper"

    def __post_init__(self):
        _sign(self.branch)
        zs = tuple((complex(a), complex(b)) for a, b in self.zeros)
        if len(zs) != 2:
            raise ValueError("exactly two prescribed zeros are required")
        object.__setattr__(self, "zeros", zs)
        for k1, k2 in zs:
            scale = 1 + abs(k1) ** 2 + abs(self.delta)
            if abs(k1**2 - k2**2 - self.delta) > 1e-10 * scale:
                raise ValueError(f"zero ({k1}, {k2}) violates k1^2 - k2^2 = delta")
        if self.r1 == 0 or self.r2 == 0:
            raise ValueError("prescribed zeros must differ in both channels")

    @property
    def r1(self) -> complex:
        return self.zeros[1][0] - self.zeros[0][0]

    @property
    def r2(self) -> complex:
        return self.zeros[1][1] - self.zeros[0][1]

    def radicals(self) -> tuple[complex, complex]:
        """Principal square roots of -R1^2 - 4 b^2 R1/R2 and -R2^2 - 4 b^2 R2/R1."""
        b2 = self.beta**2
        r1, r2 = self.r1, self.r2
        return np.sqrt(-r1**2 - 4 * b2 * r1 / r2 + 0j), np.sqrt(-r2**2 - 4 * b2 * r2 / r1 + 0j)


def bound_state_zero(lam: float, delta: float) -> tuple[complex, complex]:
    """Zero with k1 = i*lam on the physical sheet of both channels."""
    return 1j * lam, 1j * np.sqrt(lam**2 + delta)


def _hypot_minus(x: float, y: float) -> float:
    """sqrt(x^2 + y^2) - x without cancellation for x > 0."""
    h = np.hypot(x, y)
    return y**2 / (h + x) if x > 0 else h - x


def resonance_momenta(e_r: float, e_i: float, delta: float, sign: str = "lower"):
    """Resonance zeros with energies e_r -/+ i*e_i in channel 1.

    Returns ``((k1a, k2a), (k1b, k2b))`` where k1a = kr + i ki and
    k1b = -kr + i ki.  ``sign`` picks the sign of ki (upper: ki > 0); pi
    always carries the opposite sign.  The lower sign gives the zero near
    the physical region, i.e. a visible resonance.
    """
    if not e_i > 0:
        raise ValueError("imaginary part of the resonance energy must be positive")
    s = _sign(sign)
    a = _hypot_minus(e_r, e_i)
    kr = e_i / np.sqrt(2) / np.sqrt(a)
    ki = s * np.sqrt(a / 2)
    b = _hypot_minus(delta - e_r, e_i)
    pr = -np.sqrt(b / 2)
    pi = -s * e_i / np.sqrt(2) / np.sqrt(b)
    return (complex(kr, ki), complex(pr, pi)), (complex(-kr, ki), complex(-pr, pi))


def resonance_spec(e_r, e_i, delta, beta, branch="upper", sign="lower") -> TwoChannelSpec:
    return TwoChannelSpec(delta, beta, resonance_momenta(e_r, e_i, delta, sign), branch)


def is_visible_feshbach(e_r: float, e_i: float, delta: float) -> bool:
    """A resonance can show in channel 1 only below the second threshold and narrow."""
    return 0 < e_r < delta and e_i < e_r


def beta_lower_bound(e_r: float, e_i: float, delta: float) -> float:
    """Smallest coupling for which a resonance at e_r - i e_i allows real alpha."""
    (k1, k2), _ = resonance_momenta(e_r, e_i, delta)
    return float(np.sqrt(-k1.real * k2.real))


def forward_residuals(spec: TwoChannelSpec, a1: float, a2: float) -> list[float]:
    """Scaled residual of (k1 + i a1)(k2 + i a2) + beta^2 at both prescribed zeros."""
    out = []
    for k1, k2 in spec.zeros:
        scale = abs(k1 + 1j * a1) * abs(k2 + 1j * a2) + spec.beta**2 + 1e-300
        out.append(abs((k1 + 1j * a1) * (k2 + 1j * a2) + spec.beta**2) / scale)
    return out


def invert_two_roots(spec: TwoChannelSpec) -> tuple[float, float]:
    """Real (alpha1, alpha2) placing both prescribed zeros.

    alpha1 solves the quadratic obtained by eliminating alpha2 from the two
    zero conditions; alpha2 then follows from the first zero condition
    directly, which fixes its sign pairing with alpha1.
    """
    (k1a, k2a), (k1b, _) = spec.zeros
    s1, _ = spec.radicals()
    a1 = 0.5 * (1j * (k1a + k1b) + _sign(spec.branch) * s1)
    a2 = -1j * (-spec.beta**2 / (k1a + 1j * a1) - k2a)
    for name, a in (("alpha1", a1), ("alpha2", a2)):
        if abs(a.imag) > REAL_TOL * (1 + abs(a)):
            raise NonRealAlpha(f"{name} = {a:.6g} is not real for this branch and coupling")
    a1, a2 = float(a1.real), float(a2.real)
    if max(forward_residuals(spec, a1, a2)) > 1e-8:
        raise NonRealAlpha("prescribed zeros are not both realizable with real alpha")
    return a1, a2


def _pair_residual(k1, k2, a1, a2, spec) -> float:
    thr = abs(k1**2 - k2**2 - spec.delta) / (1 + abs(k1) ** 2 + abs(spec.delta))
    prod = abs((k1 + 1j * a1) * (k2 + 1j * a2) + spec.beta**2)
    prod /= abs(k1 + 1j * a1) * abs(k2 + 1j * a2) + spec.beta**2
    return max(thr, prod)


def complete_roots(spec: TwoChannelSpec, a1: float, a2: float):
    """The two zeros not prescribed, as ((k1, k2), (k1, k2)).

    The k1 values solve the quotient quadratic; the k2 values come from the
    same formula with the channels swapped.  The sign in front of the first
    radical and the assignment of k2 to k1 are fixed by requiring both
    zero conditions, since the closed form leaves them ambiguous.
    """
    (k1a, k2a), (k1b, k2b) = spec.zeros
    b2 = spec.beta**2
    r1, r2 = spec.r1, spec.r2
    s1, s2 = spec.radicals()
    d1 = np.sqrt(r1**2 + 4 * b2 * r2 / r1 + 4 * k1a * k1b + 0j)
    d2 = np.sqrt(r2**2 + 4 * b2 * r1 / r2 + 4 * k2a * k2b + 0j)
    sg = _sign(spec.branch)
    k1c = 0.5 * (-sg * 1j * s1 + d1)
    k1d = 0.5 * (-sg * 1j * s1 - d1)
    best = None
    for t in (1, -1):
        cands = (0.5 * (t * 1j * s2 - d2), 0.5 * (t * 1j * s2 + d2))
        for p, q in (cands, cands[::-1]):
            res = max(_pair_residual(k1c, p, a1, a2, spec), _pair_residual(k1d, q, a1, a2, spec))
            if best is None or res < best[0]:
                best = (res, ((k1c, p), (k1d, q)))
    if best[0] > PAIR_TOL:
        raise PairingFailure(f"completed zeros do not satisfy the system (residual {best[0]:.3g})")
    return best[1]


def model_from_alpha(delta: float, beta: float, a1: float, a2: float,
                     kappa1: float) -> ChannelModel:
    return ChannelModel((0.0, delta), (a1, a2), ((1, 2, beta),), -float(kappa1) ** 2)


def beta_for_bound_state(e_r: float, e_i: float, delta: float, lam: float,
                         sign: str = "lower") -> list[float]:
    """Couplings for which the resonance model has a bound state at -lam^2.

    Uses the lower branch.  k1 = i*lam for a completed zero reduces, after
    one squaring, to a quadratic in beta^2; its roots are kept only if they
    respect the coupling bound and the completed zero is really a bound
    state with k1 = i*lam.
    """
    if not lam > 0:
        raise ValueError("bound-state momentum must be positive")
    zeros = resonance_momenta(e_r, e_i, delta, sign)
    (k1a, k2a), (k1b, k2b) = zeros
    r1 = (k1b - k1a).real
    r2 = (k2b - k2a).real
    p = (k1a * k1b).real
    c = r2 / r1 - r1 / r2
    g = p + lam**2
    # (c x + g)^2 = lam^2 (-r1^2 - 4 x r1 / r2), x = beta^2
    coeffs = [c**2, 2 * c * g + 4 * lam**2 * r1 / r2, g**2 + lam**2 * r1**2]
    bound = beta_lower_bound(e_r, e_i, delta)
    found = []
    for x in np.roots(coeffs) if c != 0 else np.roots(coeffs[1:]):
        if abs(x.imag) > 1e-12 * (1 + abs(x)) or x.real <= 0:
            continue
        beta = float(np.sqrt(x.real))
        if beta < bound * (1 - 1e-12):
            continue
        spec = TwoChannelSpec(delta, beta, zeros, "lower")
        try:
            a1, a2 = invert_two_roots(spec)
            rest = complete_roots(spec, a1, a2)
        except (NonRealAlpha, PairingFailure):
            continue
        for k1, k2 in rest:
            scale = 1 + lam
            if abs(k1 - 1j * lam) < 1e-8 * scale and k2.imag > 0:
                found.append(beta)
                break
    if not found:
        raise NoAdmissibleBeta(f"no real coupling gives a bound state at E = {-lam**2:.6g}")
    return sorted(found)


# --------------------------------------------------------------------------
# Table-1 presets

@dataclass
class InverseResult:
    """Reconstructed model with the prescribed and the completed zeros.

    ``completed`` is empty when only one zero is prescribed; the other
    three then come from the forward solver.
    """

    scenario: str
    alpha: tuple[float, float]
    beta: float
    prescribed: tuple[tuple[complex, complex], ...]
    completed: tuple[tuple[complex, complex], ...]
    model: ChannelModel
    notes: dict


SCENARIOS = ("resonance-only", "resonance-plus-bound", "two-bound", "one-bound")


def _require(cond: bool, message: str):
    if not cond:
        raise ValueError(message)


def run_scenario(name: str, delta: float, *, kappa1: float, beta: float | None = None,
                 e_r: float | None = None, e_i: float | None = None,
                 lam: tuple[float, ...] = (), alpha1: float | None = None,
                 branch: str = "upper", sign: str = "lower") -> InverseResult:
    """Build the two-channel model for one of the named data scenarios.

    resonance-only        delta, e_r, e_i, beta      beta >= sqrt(-kr pr)
    resonance-plus-bound  delta, e_r, e_i, lam[0]    kappa1 > lam; beta is solved for
    two-bound             delta, lam[0:2], beta      kappa1 > lam2 > lam1
    one-bound             delta, lam[0], beta, alpha1  kappa1 > lam
    """
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    _require(delta > 0, "delta must be positive")
    notes: dict = {}
    if name in ("resonance-only", "resonance-plus-bound"):
        _require(e_r is not None and e_i is not None, f"{name} needs e_r and e_i")
        notes["visible_feshbach"] = is_visible_feshbach(e_r, e_i, delta)
        bound = beta_lower_bound(e_r, e_i, delta)
        notes["beta_lower_bound"] = bound
        if name == "resonance-only":
            _require(beta is not None, "resonance-only needs beta")
            _require(beta >= bound, f"beta must be at least sqrt(-kr pr) = {bound:.6g}")
        else:
            _require(len(lam) == 1, "resonance-plus-bound needs one bound-state momentum")
            _require(kappa1 > lam[0], "kappa1 must exceed the bound-state momentum")
            branch = "lower"
            betas = beta_for_bound_state(e_r, e_i, delta, lam[0], sign)
            notes["beta_solutions"] = betas
            if beta is None:
                beta = betas[0]
            _require(any(abs(beta - b) <= 1e-9 * b for b in betas),
                     "given beta does not produce the requested bound state")
        spec = resonance_spec(e_r, e_i, delta, beta, branch, sign)
    elif name == "two-bound":
        _require(len(lam) == 2 and beta is not None, "two-bound needs two momenta and beta")
        _require(0 < lam[0] < lam[1], "bound-state momenta must satisfy 0 < lam1 < lam2")
        _require(kappa1 > lam[1], "kappa1 must exceed the larger bound-state momentum")
        spec = TwoChannelSpec(delta, beta, (bound_state_zero(lam[0], delta),
                                            bound_state_zero(lam[1], delta)), branch)
    else:
        _require(len(lam) == 1 and beta is not None and alpha1 is not None,
                 "one-bound needs one momentum, beta and alpha1")
        _require(kappa1 > lam[0], "kappa1 must exceed the bound-state momentum")
        k1, k2 = bound_state_zero(lam[0], delta)
        _require(abs(k1 + 1j * alpha1) > 0, "alpha1 = -lam puts the bound state at a pole")
        a2 = float((-1j * (-beta**2 / (k1 + 1j * alpha1) - k2)).real)
        model = model_from_alpha(delta, beta, alpha1, a2, kappa1)
        return InverseResult(name, (alpha1, a2), beta, ((k1, k2),), (), model, notes)
    a1, a2 = invert_two_roots(spec)
    completed = complete_roots(spec, a1, a2)
    model = model_from_alpha(delta, beta, a1, a2, kappa1)
    return InverseResult(name, (a1, a2), beta, spec.zeros, completed, model, notes)
