"""Controller and observer gain selection from coupling-spectrum bounds.

Given the extreme eigenvalues (lam_min, lam_max) of the positive definite
coupling matrices over all connected modes, the tracking gains must satisfy

    l >= 2 / lam_min        (position coupling)
    k >= 4 + lam_max * l    (velocity damping)

Synthesis returns the boundary values scaled by (1 + margin); the default
margin keeps downstream definiteness checks away from the tolerance edge.
The observer coupling gain defaults to k0 = l / k**2, which is the value
the certificate construction assumes; other k0 values are legal for
simulation but are flagged as non-default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

DEFAULT_MARGIN = 0.05

#: relative tolerance when deciding whether k0 equals the default l / k**2
_K0_REL_TOL = 1e-12


@dataclass(frozen=True)
class Gains:
    """Controller gains (l, k) and observer coupling gain k0.

    ``certified`` records that the gains passed validation against spectrum
    bounds; only :func:`validate_gains` sets it.
    """

    l: float
    k: float
    k0: float | None = None
    certified: bool = False

    def __post_init__(self):
        if not (self.l > 0.0 and self.k > 0.0):
            raise ValueError("gains l and k must be positive")
        if self.k0 is None:
            object.__setattr__(self, "k0", self.l / self.k**2)
        if not self.k0 > 0.0:
            raise ValueError("observer gain k0 must be positive")

    @property
    def is_default_k0(self) -> bool:
        """Whether k0 equals l / k**2 within relative tolerance."""
        default = self.l / self.k**2
        return abs(self.k0 - default) <= _K0_REL_TOL * default


@dataclass(frozen=True)
class GainCheck:
    name: str
    required: float
    actual: float
    passed: bool

    @property
    def slack(self) -> float:
        return self.actual - self.required


@dataclass(frozen=True)
class GainValidation:
    """Per-inequality report of a gain validation."""

    checks: tuple[GainCheck, ...]
    passed: bool
    k0_default: bool
    certified_gains: Gains | None


def validate_gains(g: Gains, lambda_min: float, lambda_max: float) -> GainValidation:
    """Check the two gain inequalities against the given spectrum bounds.

    Returns a report listing each inequality with its slack.  On an overall
    pass the report carries a copy of the gains with ``certified`` set.
    """
    if not (lambda_min > 0.0 and lambda_max >= lambda_min):
        raise ValueError("spectrum bounds must satisfy 0 < lambda_min <= lambda_max")
    checks = (
        GainCheck("l_lower_bound", 2.0 / lambda_min, g.l, g.l >= 2.0 / lambda_min),
        GainCheck(
            "k_lower_bound",
            4.0 + lambda_max * g.l,
            g.k,
            g.k >= 4.0 + lambda_max * g.l,
        ),
    )
    passed = all(c.passed for c in checks)
    certified = dataclasses.replace(g, certified=True) if passed else None
    return GainValidation(checks, passed, g.is_default_k0, certified)


def synthesize_gains(
    lambda_min: float, lambda_max: float, margin: float = DEFAULT_MARGIN
) -> Gains:
    """Boundary gains scaled by (1 + margin), with the default observer gain.

    The result always validates against the same bounds, so it is returned
    already certified.
    """
    if lambda_min <= 0.0:
        raise ValueError(
            "lambda_min must be positive: no connected-mode spectrum available"
        )
    if lambda_max < lambda_min:
        raise ValueError("lambda_max must be at least lambda_min")
    if margin < 0.0:
        raise ValueError("margin must be nonnegative")
    l = (1.0 + margin) * 2.0 / lambda_min
    k = (1.0 + margin) * (4.0 + lambda_max * l)
    g = Gains(l=l, k=k)
    report = validate_gains(g, lambda_min, lambda_max)
    assert report.certified_gains is not None  # holds by construction
    return report.certified_gains
