"""Parameter containers shared by the samplers, the SSM layer and the filter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class GIGParams:
    """Generalised inverse Gaussian parameters (lam, delta, gamma).

    The implemented sampling regime is lam <= -0.5.  The density is

        f(x) = (gamma/delta)^lam / (2 K_lam(delta*gamma))
               * x^(lam-1) * exp(-(delta^2/x + gamma^2*x) / 2),  x > 0.
    """

    lam: float
    delta: float
    gamma: float

    def __post_init__(self):
        lam = _require_finite("lam", self.lam)
        delta = _require_finite("delta", self.delta)
        gamma = _require_finite("gamma", self.gamma)
        if lam > -0.5:
            raise ValueError(f"lam must be <= -0.5 (implemented regime), got {lam}")
        if delta <= 0.0:
            raise ValueError(f"delta must be positive, got {delta}")
        if gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def abs_lam(self) -> float:
        return abs(self.lam)


@dataclass(frozen=True)
class GHParams:
    """Generalised hyperbolic jump parameters.

    Jump values are built from subordinator jumps Z as

        W = mu_w * Z + sigma_w * sqrt(Z) * U,   U ~ N(0, 1),

    so the time-1 marginal of the jump sum is generalised hyperbolic.  The
    equivalent (lam, alpha, beta, delta, mu) shape parameters under this
    convention are exposed as derived properties; ``mu`` is a deterministic
    location/drift term and does not affect the jumps themselves.
    """

    gig: GIGParams
    mu_w: float = 0.0
    sigma_w: float = 1.0
    mu: float = 0.0

    def __post_init__(self):
        mu_w = _require_finite("mu_w", self.mu_w)
        sigma_w = _require_finite("sigma_w", self.sigma_w)
        mu = _require_finite("mu", self.mu)
        if sigma_w <= 0.0:
            raise ValueError(f"sigma_w must be positive, got {sigma_w}")
        object.__setattr__(self, "mu_w", mu_w)
        object.__setattr__(self, "sigma_w", sigma_w)
        object.__setattr__(self, "mu", mu)

    @property
    def beta(self) -> float:
        """Skewness parameter of the equivalent GH density."""
        return self.mu_w / (self.sigma_w * self.sigma_w)

    @property
    def delta_eff(self) -> float:
        """Scale parameter of the equivalent GH density."""
        return self.gig.delta * self.sigma_w

    @property
    def alpha(self) -> float:
        """Shape parameter of the equivalent GH density."""
        gam_eff = self.gig.gamma / self.sigma_w
        return math.hypot(self.beta, gam_eff)


@dataclass(frozen=True)
class TruncationBudget:
    """Poisson epoch ceiling per unit time for the shot-noise series.

    Candidate jumps are generated until the underlying Poisson epoch passes
    ``gamma_max`` times the interval length.  Larger values retain more (and
    smaller) jumps at proportionally higher cost.
    """

    gamma_max: float = 2000.0

    def __post_init__(self):
        gamma_max = _require_finite("gamma_max", self.gamma_max)
        if gamma_max <= 0.0:
            raise ValueError(f"gamma_max must be positive, got {gamma_max}")
        object.__setattr__(self, "gamma_max", gamma_max)
