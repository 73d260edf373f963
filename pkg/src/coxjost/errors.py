"""Exception hierarchy shared by all modules."""


class CoxError(Exception):
    """Base class for numerical failures raised by this package."""


class CancellationPole(CoxError):
    """Some k_j sits on -i*kappa_j, where the Jost prefactor is singular."""


class DegenerateLeadingForm(CoxError):
    """The eliminated univariate polynomial vanished identically."""


class ChainBreakdown(CoxError):
    """A back-substitution denominator vanished at the evaluation point."""


class ThresholdCritical(CoxError):
    """An eigenvalue of B(0) is zero, so the bound-state count is ambiguous."""


class UnpairedZero(CoxError):
    """A complex zero has no partner under k -> -conj(k)."""


class NearDegenerate(CoxError):
    """A second-order perturbation denominator is too small to trust."""


class NonRealAlpha(CoxError):
    """Prescribed two-channel zeros are not realizable with real alpha."""


class PairingFailure(CoxError):
    """Completed k2 values could not be matched with the k1 values."""


class NoAdmissibleBeta(CoxError):
    """No real coupling satisfies the requested bound-state condition."""


class SingularFactorization(CoxError):
    """The scaled factorization solution is numerically singular."""


class ThresholdProximity(CoxError):
    """Scattering energy too close to a channel threshold."""


class JostSingular(CoxError):
    """The Jost matrix is singular on the real energy axis."""
