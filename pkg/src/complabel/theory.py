"""Estimation-error bound calculators for complementary-label learning."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .comp_losses import Scheme
from .exceptions import InvalidInputError


def rademacher_linear(C_w: float, C_phi: float, n: int) -> float:
    """Rademacher complexity bound C_w * C_phi / sqrt(n) for norm-bounded linear models."""
    if not (C_w > 0 and C_phi > 0 and n > 0):
        raise InvalidInputError("C_w, C_phi and n must be positive")
    return C_w * C_phi / math.sqrt(n)


@dataclass(frozen=True)
class BoundInputs:
    K: int
    L_ell: float
    delta: float
    n: int
    rademacher: float | None = None
    C_w: float | None = None
    C_phi: float | None = None

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 2:
            raise InvalidInputError("K must be an integer >= 2")
        if not self.L_ell > 0:
            raise InvalidInputError("L_ell must be positive")
        if not 0 < self.delta < 1:
            raise InvalidInputError("delta must lie in (0, 1)")
        if not self.n >= 1:
            raise InvalidInputError("n must be >= 1")
        if self.rademacher is None:
            if self.C_w is None or self.C_phi is None:
                raise InvalidInputError("give either rademacher or both C_w and C_phi")
            object.__setattr__(self, "rademacher", rademacher_linear(self.C_w, self.C_phi, self.n))
        elif not (self.rademacher >= 0 and math.isfinite(self.rademacher)):
            raise InvalidInputError("rademacher must be finite and nonnegative")


def _terms(scheme, b: BoundInputs):
    scheme = Scheme.parse(scheme)
    K, L, R = b.K, b.L_ell, b.rademacher
    log_term = math.log(2.0 / b.delta) / b.n
    if scheme is Scheme.OVA:
        return 2 * K * (K - 1) * L * R, (K - 1) * math.sqrt(2.0 * log_term)
    if scheme is Scheme.PC:
        return 4 * K * (K - 1) ** 2 * L * R, (K - 1) ** 2 * math.sqrt(log_term / 2.0)
    raise InvalidInputError("bounds are defined for the OVA and PC schemes")


def uniform_deviation_bound(scheme: Scheme, inputs: BoundInputs) -> float:
    """High-probability bound on sup |R_hat(f) - R(f)| over the model class."""
    complexity, concentration = _terms(scheme, inputs)
    return complexity + concentration


def estimation_error_bound(scheme: Scheme, inputs: BoundInputs) -> float:
    """High-probability bound on R(f_hat) - R(f*) for the empirical risk minimizer."""
    scheme = Scheme.parse(scheme)
    K, L, R = inputs.K, inputs.L_ell, inputs.rademacher
    log_term = math.log(2.0 / inputs.delta) / inputs.n
    if scheme is Scheme.OVA:
        return 4 * K * (K - 1) * L * R + (K - 1) * math.sqrt(8.0 * log_term)
    if scheme is Scheme.PC:
        return 8 * K * (K - 1) ** 2 * L * R + (K - 1) ** 2 * math.sqrt(2.0 * log_term)
    raise InvalidInputError("bounds are defined for the OVA and PC schemes")
