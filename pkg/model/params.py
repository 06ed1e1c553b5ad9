"""
Model Parameters

The dimensionless coordinate system of every computation: the
symmetry-breaking strength x = ε/ω₀, the coupling y = g²/(ωω₀) and the
frequency ratio λ = ω/ω₀, with ω₀ = √(ε²+δ²) as the energy unit.
"""

import math
from dataclasses import dataclass

from model.errors import DomainError

# ===================================================================
# Constants
# ===================================================================
X_TRICRITICAL = 1.0 / math.sqrt(5.0)
Y_TRICRITICAL = 1.25

ROUND_TRIP_RTOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """A point (x, y, λ) of the model's parameter space."""
    x: float
    y: float
    lam: float = 1.0

    def __post_init__(self):
        for name in ("x", "y", "lam"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite, got {getattr(self, name)}")
        if not 0.0 <= self.x < 1.0:
            raise DomainError(f"x must satisfy 0 <= x < 1 (x = 1 means delta = 0), got {self.x}")
        if self.y < 0.0:
            raise DomainError(f"y must be non-negative, got {self.y}")
        if self.lam <= 0.0:
            raise DomainError(f"lambda must be positive, got {self.lam}")

    @classmethod
    def from_raw(cls, omega, delta, g, epsilon):
        """
        Builds the dimensionless point from the raw Hamiltonian parameters.

        Args:
            omega: Light frequency ω (> 0).
            delta: Atomic splitting δ (> 0).
            g: Light-atom coupling (>= 0).
            epsilon: Symmetry-breaking field ε (>= 0).

        Returns:
            ModelParams: The point (ε/ω₀, g²/(ωω₀), ω/ω₀).

        Raises:
            DomainError: If any raw parameter is out of range.
        """
        if omega <= 0.0:
            raise DomainError(f"omega must be positive, got {omega}")
        if delta <= 0.0:
            raise DomainError(f"delta must be positive, got {delta}")
        if g < 0.0 or epsilon < 0.0:
            raise DomainError(f"g and epsilon must be non-negative, got g={g}, epsilon={epsilon}")
        omega0 = math.hypot(epsilon, delta)
        return cls(x=epsilon / omega0, y=g * g / (omega * omega0), lam=omega / omega0)

    def raw(self, omega0=1.0):
        """
        Returns the raw parameters (ω, δ, g, ε) for a given energy unit ω₀.
        """
        return {
            "omega": self.lam * omega0,
            "delta": omega0 * math.sqrt(1.0 - self.x * self.x),
            "g": omega0 * math.sqrt(self.y * self.lam),
            "epsilon": self.x * omega0,
        }

    def with_lambda(self, lam):
        return ModelParams(self.x, self.y, lam)
