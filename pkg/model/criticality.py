"""
Criticality Module

Scaling near the second-order critical line y_c = 1/(1−x_c²), including the
tricritical point:
- geometry: perpendicular foot and distance n to the line, normal approaches
- order parameter z ∝ n^α (α = 1/2 on the line, 1/4 at the tricritical point)
- det(Ω²/ω₀²)/λ² = β·√(y_c⁻² + 4x_c²y_c²)·n, β = 1, 2 or 4
- the gap-entropy relation S ≈ 1 − ½ln[4(λ²+1)^{3/2}Δ/λ²]
- the λ-resonance of the critical entropy
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import optimize, stats

from model.errors import DomainError, NumericalError
from model.fluctuations import analyze, build_omega_squared, determinant_sq, spectrum
from model.meanfield import (
    BoundaryPoint,
    Phase,
    TransitionOrder,
    classify_phase,
    critical_line,
    minimize_f,
)
from model.params import ModelParams, X_TRICRITICAL, Y_TRICRITICAL

# ===================================================================
# Configuration
# ===================================================================
MAX_FOOT_DISTANCE = 0.2
FOOT_XTOL = 1e-15
DIVERGENT_GAP = 1e-14
DEFAULT_DISTANCES = tuple(np.geomspace(1e-9, 1e-5, 17))
QTP_AMPLITUDE = 5.0 * math.sqrt(21.0) / 6.0


class Side(str, Enum):
    SUPERRADIANT = "SuperradiantSide"
    NORMAL = "NormalSide"


@dataclass(frozen=True)
class CriticalApproach:
    """Sample points target + n·direction along the normal of the critical line."""
    target: BoundaryPoint
    direction: tuple
    side: Side
    distances: tuple

    def point(self, n):
        return self.target.x_c + n * self.direction[0], self.target.y_c + n * self.direction[1]

    def params(self, n, lam=1.0):
        x, y = self.point(n)
        return ModelParams(x, y, lam)


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    amplitude: float
    r_squared: float
    window: tuple
    reference: Optional[float] = None
    beta: Optional[float] = None

    def to_dict(self):
        return {
            "exponent": self.exponent,
            "amplitude": self.amplitude,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "reference": self.reference,
            "beta": self.beta,
        }


def tricritical_target():
    return BoundaryPoint(X_TRICRITICAL, Y_TRICRITICAL, TransitionOrder.TRICRITICAL, 0.0)


def second_order_target(x_c):
    """The critical-line point above x_c, or the tricritical point when x_c sits on it."""
    if x_c == X_TRICRITICAL:
        return tricritical_target()
    return BoundaryPoint(x_c, critical_line(x_c), TransitionOrder.SECOND_ORDER, 0.0)


def critical_slope(x_c):
    """dy_c/dx_c = 2x_c/(1−x_c²)²."""
    return 2.0 * x_c / (1.0 - x_c * x_c) ** 2


def normal_direction(x_c, side):
    """
    Unit normal of the critical line at x_c. The superradiant side is the
    one where c_2 decreases (larger y); the normal side is its opposite.
    """
    slope = critical_slope(x_c)
    norm = math.hypot(1.0, slope)
    dx, dy = -slope / norm, 1.0 / norm
    if side == Side.NORMAL:
        return -dx, -dy
    return dx, dy


def normal_scale(target):
    """√(y_c⁻² + 4x_c²y_c²), the |∇c_2|·y_c factor common to every amplitude."""
    x_c, y_c = target.x_c, target.y_c
    return math.sqrt(y_c ** -2 + 4.0 * x_c * x_c * y_c * y_c)


def order_parameter_amplitude(target):
    """Predicted z²/n on the critical line, or z⁴/n at the tricritical point."""
    if target.order == TransitionOrder.TRICRITICAL:
        return QTP_AMPLITUDE
    return 2.0 * normal_scale(target) / (1.0 - 5.0 * target.x_c ** 2)


def make_approach(target, side, distances=DEFAULT_DISTANCES):
    """
    Builds a normal approach to a critical-line point and checks that every
    sample point lies in the phase of the declared side.

    Args:
        target: A SecondOrder or Tricritical BoundaryPoint.
        side: Side.SUPERRADIANT or Side.NORMAL.
        distances: Positive distances n.

    Returns:
        CriticalApproach

    Raises:
        DomainError: If the target is first order, a distance is not
            positive, or a sample point lands in the wrong phase.
    """
    if target.order == TransitionOrder.FIRST_ORDER:
        raise DomainError("Critical approaches need a second-order or tricritical target")
    distances = tuple(float(n) for n in distances)
    if not distances or min(distances) <= 0.0:
        raise DomainError(f"Distances must be positive, got {distances}")
    side = Side(side)
    app = CriticalApproach(
        target=target,
        direction=normal_direction(target.x_c, side),
        side=side,
        distances=tuple(sorted(distances)),
    )
    expected = Phase.SUPERRADIANT if side == Side.SUPERRADIANT else Phase.NORMAL
    for n in app.distances:
        phase = classify_phase(app.params(n))
        if phase != expected:
            raise DomainError(f"Approach point at n={n} classifies {phase.value}, expected {expected.value}")
    return app


def perpendicular_foot(x, y):
    """
    Nearest point of the second-order critical line to (x, y).

    Solves (x_c − x) + (y_c(x_c) − y)·y_c'(x_c) = 0 on [0, 1/√5]; the
    endpoints are accepted, the right one being the tricritical point.

    Returns:
        tuple: (BoundaryPoint, n) with n the Euclidean distance.

    Raises:
        DomainError: If x < 0 or (x, y) is farther than 0.2 from the line.
    """
    if x < 0.0:
        raise DomainError(f"x must be non-negative, got {x}")

    def stationarity(t):
        return (t - x) + (1.0 / (1.0 - t * t) - y) * critical_slope(t)

    if stationarity(0.0) >= 0.0:
        x_c = 0.0
    elif stationarity(X_TRICRITICAL) <= 0.0:
        x_c = X_TRICRITICAL
    else:
        x_c = optimize.brentq(stationarity, 0.0, X_TRICRITICAL, xtol=FOOT_XTOL)

    target = second_order_target(x_c)
    n = math.hypot(x - target.x_c, y - target.y_c)
    if n > MAX_FOOT_DISTANCE:
        raise DomainError(f"({x}, {y}) is {n:.3f} from the critical line, beyond {MAX_FOOT_DISTANCE}")
    return target, n


def _fit_log_log(ns, values):
    fit = stats.linregress(np.log(ns), np.log(values))
    return float(fit.slope), float(fit.rvalue ** 2)


def order_parameter_scaling(app):
    """
    Fits ln z against ln n along a superradiant-side approach.

    The amplitude is z^(1/α)/n at the smallest n, with 1/α = 2 on the line
    and 4 at the tricritical point; reference holds the closed-form value.
    The frequency ratio never enters: z depends on (x, y) only.
    """
    if app.side != Side.SUPERRADIANT:
        raise DomainError("order_parameter_scaling needs a superradiant-side approach")
    ns = np.array(app.distances)
    zs = np.array([minimize_f(app.params(n)).z for n in ns])
    if np.any(zs == 0.0):
        raise NumericalError(f"Approach to ({app.target.x_c}, {app.target.y_c}) hit a Normal point")
    exponent, r_squared = _fit_log_log(ns, zs)
    power = 4 if app.target.order == TransitionOrder.TRICRITICAL else 2
    amplitude = float(zs[0] ** power / ns[0])
    logging.debug(f"Order parameter scaling at x_c={app.target.x_c}: alpha={exponent}, amplitude={amplitude}")
    return ScalingFit(exponent, amplitude, r_squared, (float(ns[0]), float(ns[-1])),
                      reference=order_parameter_amplitude(app.target))


def determinant_values(app, lam):
    """det(Ω²/ω₀²)/λ² at every distance of the approach."""
    values = []
    for n in app.distances:
        p = app.params(n, lam)
        fr = spectrum(build_omega_squared(p, minimize_f(p).z))
        values.append(determinant_sq(fr) / (lam * lam))
    return np.array(values)


def determinant_scaling(app, lam):
    """
    Fits det(Ω²/ω₀²)/λ² = β·√(y_c⁻² + 4x_c²y_c²)·n along an approach.

    β is 1 on the normal side, 2 on the superradiant side and 4 when the
    approach ends at the tricritical point from the superradiant side.

    Raises:
        InstabilityError: Propagated from spectrum.
    """
    ns = np.array(app.distances)
    dets = determinant_values(app, lam)
    exponent, r_squared = _fit_log_log(ns, dets)
    amplitude = float(dets[0] / ns[0])
    beta = amplitude / normal_scale(app.target)
    if app.side == Side.NORMAL:
        expected = 1.0
    else:
        expected = 4.0 if app.target.order == TransitionOrder.TRICRITICAL else 2.0
    return ScalingFit(exponent, amplitude, r_squared, (float(ns[0]), float(ns[-1])),
                      reference=expected, beta=beta)


def universal_entropy(gap, lam):
    """S predicted from the gap: 1 − ½ln[4(λ²+1)^{3/2}(Δ/ω₀)/λ²]."""
    return 1.0 - 0.5 * math.log(4.0 * (lam * lam + 1.0) ** 1.5 * gap / (lam * lam))


def gap_entropy_relation(x, y, lam):
    """
    Residual of the universal gap-entropy relation at (x, y, λ).

    Returns:
        float or None: S − (1 − ½ln[4(λ²+1)^{3/2}Δ/λ²]), or None when the gap
            is below 1e-14 (divergent point, no residual).
    """
    fr = analyze(ModelParams(x, y, lam))
    if fr.gap < DIVERGENT_GAP:
        logging.debug(f"Gap {fr.gap:.3e} at ({x}, {y}, {lam}) is divergent; no residual")
        return None
    return fr.entropy - universal_entropy(fr.gap, lam)


def entropy_resonance(target, n, lambdas, side=Side.SUPERRADIANT):
    """
    Entropy as a function of λ at the fixed point target + n·normal.

    Returns:
        tuple: (argmax λ, profile) where profile is a list of (λ, S).
    """
    x, y = target.x_c, target.y_c
    dx, dy = normal_direction(x, Side(side))
    p = ModelParams(x + n * dx, y + n * dy)
    z = minimize_f(p).z
    profile = [(float(lam), analyze(p.with_lambda(float(lam)), z).entropy) for lam in lambdas]
    best = max(profile, key=lambda item: item[1])
    return best[0], profile


def resonance_offset(profile):
    """S(λ) + ½ln(λ + 1/λ) for each λ; constant when S follows the resonance law."""
    return [s + 0.5 * math.log(lam + 1.0 / lam) for lam, s in profile]


def gap_scaling(app, lam):
    """Fits ln Δ against ln n; the exponent is 1/2 on every side of every target."""
    ns = np.array(app.distances)
    gaps = np.array([analyze(app.params(n, lam)).gap for n in ns])
    exponent, r_squared = _fit_log_log(ns, gaps)
    return ScalingFit(exponent, float(gaps[0] / math.sqrt(ns[0])), r_squared,
                      (float(ns[0]), float(ns[-1])), reference=0.5)


def entropy_divergence(app, lam, against="distance"):
    """
    Fits S linearly against ln(1/n) (slope 1/4) or ln(1/Δ) (slope 1/2).

    Args:
        app: CriticalApproach.
        lam: Frequency ratio.
        against: "distance" or "gap".

    Returns:
        ScalingFit: exponent is the slope, amplitude the intercept.
    """
    if against not in ("distance", "gap"):
        raise DomainError(f"against must be 'distance' or 'gap', got {against}")
    ns = np.array(app.distances)
    results = [analyze(app.params(n, lam)) for n in ns]
    entropies = np.array([fr.entropy for fr in results])
    if against == "distance":
        abscissa = -np.log(ns)
        reference = 0.25
    else:
        abscissa = -np.log([fr.gap for fr in results])
        reference = 0.5
    fit = stats.linregress(abscissa, entropies)
    return ScalingFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2),
                      (float(ns[0]), float(ns[-1])), reference=reference)
