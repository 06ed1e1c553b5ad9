"""
Mean-Field Module

Evaluates and minimizes the dimensionless mean-field energy per atom

    f(z) = (z²/y − √(1+2xz+z²) − √(1−2xz+z²)) / 2

and derives the phase diagram from it: the order parameter z, the phase
label, the second-order critical line y_c = 1/(1−x²), the tricritical point
(1/√5, 5/4) and the first-order boundary beyond it.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize

from model.errors import DomainError, NumericalError
from model.params import ModelParams, X_TRICRITICAL

# ===================================================================
# Configuration
# ===================================================================
GRID_POINTS = 401
NEAR_ZERO_POINTS = 48
NEAR_ZERO_START = 1e-7
Z_NORMAL_TOL = 1e-10
ROOT_XTOL = 1e-15
DEGENERACY_TOL = 1e-12
BOUNDARY_Y_TOL = 1e-13
ONSET_Y_TOL = 1e-10
MAX_DERIVATIVE_ORDER = 6
MAX_SERIES_TERMS = 4
TRICRITICAL_GUESS = (0.4, 1.2)
TRICRITICAL_XTOL = 1e-12
TRICRITICAL_RESIDUAL_TOL = 1e-12


class Phase(str, Enum):
    NORMAL = "Normal"
    SUPERRADIANT = "Superradiant"


class TransitionOrder(str, Enum):
    SECOND_ORDER = "SecondOrder"
    FIRST_ORDER = "FirstOrder"
    TRICRITICAL = "Tricritical"


@dataclass(frozen=True)
class MeanFieldSolution:
    """Global minimum of f over z >= 0 plus every local minimum found."""
    z: float
    energy: float
    phase: Phase
    all_minima: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class BoundaryPoint:
    x_c: float
    y_c: float
    order: TransitionOrder
    z_jump: float = 0.0

    def to_dict(self):
        return {"x_c": self.x_c, "y_c": self.y_c, "order": self.order.value, "z_jump": self.z_jump}


def _require_coupling(p):
    if p.y == 0.0:
        raise DomainError("f(z) is undefined at y = 0; the coupling-free point is always Normal with z = 0")


def f_value(z, p):
    """
    Dimensionless mean-field energy per atom, in units of ω₀/2 per atom.

    Args:
        z: Order parameter (any sign; scalar or ndarray).
        p: ModelParams.

    Returns:
        The value of f at z (same shape as z).

    Raises:
        DomainError: If y = 0.
    """
    _require_coupling(p)
    z = np.asarray(z, dtype=float)
    value = (z * z / p.y - np.sqrt(1.0 + 2.0 * p.x * z + z * z) - np.sqrt(1.0 - 2.0 * p.x * z + z * z)) / 2.0
    return float(value) if value.ndim == 0 else value


def _root_derivatives(u, b2, max_order):
    # d^k/du^k of h(u) = √(u² + b²), k = 0..max_order
    h = math.sqrt(u * u + b2)
    table = [
        h,
        u / h,
        b2 / h ** 3,
        -3.0 * b2 * u / h ** 5,
        3.0 * b2 * (4.0 * u * u - b2) / h ** 7,
        15.0 * b2 * u * (3.0 * b2 - 4.0 * u * u) / h ** 9,
        45.0 * b2 * (8.0 * u ** 4 - 12.0 * b2 * u * u + b2 * b2) / h ** 11,
    ]
    return table[:max_order + 1]


def _derivatives(z, x, y, max_order):
    b2 = 1.0 - x * x
    plus = _root_derivatives(z + x, b2, max_order)
    minus = _root_derivatives(z - x, b2, max_order)
    quadratic = [z * z / (2.0 * y), z / y, 1.0 / y]
    result = []
    for k in range(max_order + 1):
        term = quadratic[k] if k < len(quadratic) else 0.0
        result.append(term - (plus[k] + minus[k]) / 2.0)
    return result


def f_derivatives(z, p, max_order):
    """
    Analytic derivatives of f.

    Args:
        z: Evaluation point.
        p: ModelParams.
        max_order: Highest order requested (0..6).

    Returns:
        list: [f(z), f'(z), ..., f^(max_order)(z)], indexed by order.
    """
    _require_coupling(p)
    if not 0 <= max_order <= MAX_DERIVATIVE_ORDER:
        raise DomainError(f"max_order must be in [0, {MAX_DERIVATIVE_ORDER}], got {max_order}")
    return _derivatives(float(z), p.x, p.y, max_order)


def _series(x, y, n_terms):
    derivs = _derivatives(0.0, x, y, 2 * (n_terms - 1))
    return [derivs[2 * n] for n in range(n_terms)]


def series_coefficients(p, n_terms):
    """
    Taylor coefficients c_0, c_2, ... of f at z = 0, normalized so that c_2n
    multiplies z^2n/(2n)!. Hence c_2 = f''(0) = 1/y − (1−x²) and
    c_4 = 3(1−x²)(1−5x²).
    """
    _require_coupling(p)
    if not 1 <= n_terms <= MAX_SERIES_TERMS:
        raise DomainError(f"n_terms must be in [1, {MAX_SERIES_TERMS}], got {n_terms}")
    return _series(p.x, p.y, n_terms)


def _stationarity(z, x, y):
    # f'(z)/z, rearranged so the x-odd parts cancel analytically; equals c_2 at z = 0
    w2 = np.sqrt(1.0 + 2.0 * x * z + z * z)
    w3 = np.sqrt(1.0 - 2.0 * x * z + z * z)
    return 1.0 / y - (1.0 / w2 + 1.0 / w3) / 2.0 + 2.0 * x * x / (w2 * w3 * (w2 + w3))


def _search_grid(y):
    z_max = max(10.0, 4.0 * y)
    uniform = np.linspace(0.0, z_max, GRID_POINTS)
    near_zero = np.geomspace(NEAR_ZERO_START, uniform[1], NEAR_ZERO_POINTS)
    return np.unique(np.concatenate([uniform, near_zero]))


def _minimum_brackets(grid, g):
    # (kind, lo, hi): "rise" brackets a sign change of f'/z from - to +,
    # "dip" a local minimum of f'/z between two positive samples
    brackets = []
    for i in range(len(grid) - 1):
        if g[i] < 0.0 <= g[i + 1]:
            brackets.append(("rise", float(grid[i]), float(grid[i + 1])))
        elif i > 0 and 0.0 < g[i] <= g[i - 1] and g[i] <= g[i + 1]:
            brackets.append(("dip", float(grid[i - 1]), float(grid[i + 1])))
    return brackets


def minimize_f(p):
    """
    Finds the global minimum of f over z >= 0.

    Every local minimum on [0, max(10, 4y)] is bracketed from the sign of
    f'(z)/z on a coarse grid and refined with Brent's method on f'(z)/z.
    The global minimum is the lowest refined value.

    Args:
        p: ModelParams.

    Returns:
        MeanFieldSolution

    Raises:
        NumericalError: If no minimum is bracketed.
    """
    if p.y == 0.0:
        return MeanFieldSolution(z=0.0, energy=-1.0, phase=Phase.NORMAL, all_minima=((0.0, -1.0),))

    x, y = p.x, p.y
    grid = _search_grid(y)
    g = _stationarity(grid, x, y)

    def stationarity(z):
        return float(_stationarity(z, x, y))

    minima = []
    if g[0] > 0.0 or (g[0] == 0.0 and g[1] >= 0.0):
        minima.append(0.0)

    for kind, lo, hi in _minimum_brackets(grid, g):
        if kind == "dip":
            dip = optimize.minimize_scalar(stationarity, bounds=(lo, hi), method="bounded",
                                           options={"xatol": ROOT_XTOL})
            if dip.fun >= 0.0:
                continue
            # the minimum of f sits where f'/z climbs back through zero
            lo = float(dip.x)
        if stationarity(hi) == 0.0:
            minima.append(float(hi))
            continue
        try:
            root = optimize.brentq(stationarity, lo, hi, xtol=ROOT_XTOL, maxiter=200)
        except (ValueError, RuntimeError) as e:
            raise NumericalError(f"Refinement failed on [{lo}, {hi}] at x={x}, y={y}: {e}") from e
        minima.append(root)

    if not minima:
        raise NumericalError(f"No minimum of f bracketed at x={x}, y={y}")

    candidates = sorted({(z, f_value(z, p)) for z in minima})
    z_best, f_best = min(candidates, key=lambda m: (m[1], m[0]))
    if z_best < Z_NORMAL_TOL:
        z_best, f_best = 0.0, -1.0
    phase = Phase.NORMAL if z_best == 0.0 else Phase.SUPERRADIANT

    logging.debug(f"minimize_f x={x} y={y}: z={z_best} f={f_best} minima={candidates}")
    return MeanFieldSolution(z=z_best, energy=f_best, phase=phase, all_minima=tuple(candidates))


def classify_phase(p):
    return minimize_f(p).phase


def critical_line(x_c):
    """
    Second-order critical coupling y_c = 1/(1−x_c²) (the c_2 = 0 line).

    Raises:
        DomainError: If x_c is outside [0, 1/√5]; beyond the tricritical point
            the transition is first order, see first_order_boundary.
    """
    if x_c < 0.0 or x_c > X_TRICRITICAL:
        raise DomainError(
            f"critical_line is defined for 0 <= x_c <= 1/sqrt(5), got {x_c}; use first_order_boundary beyond the tricritical point"
        )
    return 1.0 / (1.0 - x_c * x_c)


def tricritical_point():
    """
    Solves c_2 = c_4 = 0 from the initial guess (0.4, 1.2).

    Returns:
        BoundaryPoint: Tagged Tricritical; analytically (1/√5, 5/4).
    """
    def equations(v):
        _, c2, c4 = _series(v[0], v[1], 3)
        return [c2, c4]

    solution, info, ier, message = optimize.fsolve(equations, TRICRITICAL_GUESS, xtol=TRICRITICAL_XTOL, full_output=True)
    residual = float(np.max(np.abs(equations(solution))))
    # MINPACK reports ier=3 once the step drops below machine precision at an exact root
    if ier != 1 and residual > TRICRITICAL_RESIDUAL_TOL:
        raise NumericalError(f"Tricritical point root-find did not converge: {message} (residual {residual:.3e})")
    x_t, y_t = float(solution[0]), float(solution[1])
    logging.debug(f"Tricritical point found at ({x_t}, {y_t}) after {info['nfev']} evaluations")
    return BoundaryPoint(x_c=x_t, y_c=y_t, order=TransitionOrder.TRICRITICAL, z_jump=0.0)


def _superradiant_minimum(x, y):
    solution = minimize_f(ModelParams(x, y))
    ordered = [m for m in solution.all_minima if m[0] >= Z_NORMAL_TOL]
    if not ordered:
        return None
    return min(ordered, key=lambda m: m[1])


def first_order_boundary(x, y_tol=BOUNDARY_Y_TOL):
    """
    Locates the first-order boundary at a given x > 1/√5.

    The boundary is the coupling at which f has two degenerate global minima,
    f(0) = f(z*) = −1 with z* > 0. Bisection runs in y between y = 1, where
    the normal state is always the global minimum, and the spinodal
    y = 1/(1−x²), where z = 0 stops being a local minimum.

    Args:
        x: Symmetry-breaking strength, 1/√5 < x < 1.
        y_tol: Bisection tolerance on y.

    Returns:
        BoundaryPoint: Tagged FirstOrder with z_jump = z*.
    """
    if x <= X_TRICRITICAL or x >= 1.0:
        raise DomainError(f"first_order_boundary needs 1/sqrt(5) < x < 1, got {x}; the boundary is second order below the tricritical point")

    y_lo, y_hi = 1.0, 1.0 / (1.0 - x * x)
    while y_hi - y_lo > y_tol:
        y_mid = 0.5 * (y_lo + y_hi)
        minimum = _superradiant_minimum(x, y_mid)
        if minimum is None or minimum[1] > -1.0:
            y_lo = y_mid
        else:
            y_hi = y_mid

    candidates = [(y, _superradiant_minimum(x, y)) for y in (y_lo, y_hi)]
    candidates = [(y, m) for y, m in candidates if m is not None]
    if not candidates:
        raise NumericalError(f"No superradiant minimum found near the first-order boundary at x={x}")
    y_b, (z_star, f_star) = min(candidates, key=lambda c: abs(c[1][1] + 1.0))
    if abs(f_star + 1.0) > DEGENERACY_TOL:
        logging.warning(f"First-order boundary at x={x} is degenerate only to {abs(f_star + 1.0):.3e}")
    logging.debug(f"First-order boundary at x={x}: y={y_b}, z*={z_star}, f(z*)+1={f_star + 1.0}")
    return BoundaryPoint(x_c=x, y_c=y_b, order=TransitionOrder.FIRST_ORDER, z_jump=z_star)


def onset_coupling(x, y_tol=ONSET_Y_TOL):
    """
    The smallest y at which minimize_f yields z > 0, by bisection on the phase.

    y = 1 is Normal for every x and y = 2/(1−x²) is Superradiant, so the
    bracket always holds. Below the tricritical point this reproduces
    critical_line(x); above it, first_order_boundary(x).
    """
    if not 0.0 <= x < 1.0:
        raise DomainError(f"x must satisfy 0 <= x < 1, got {x}")
    y_lo, y_hi = 1.0, 2.0 / (1.0 - x * x)
    while y_hi - y_lo > y_tol:
        y_mid = 0.5 * (y_lo + y_hi)
        if classify_phase(ModelParams(x, y_mid)) == Phase.NORMAL:
            y_lo = y_mid
        else:
            y_hi = y_mid
    return y_hi


def photon_density(z, p):
    """Thermodynamic-limit photon number per atom, ψ²/N = z²/(4yλ)."""
    if z == 0.0:
        return 0.0
    _require_coupling(p)
    return z * z / (4.0 * p.y * p.lam)


def classical_energy(p, n_atoms):
    """Mean-field ground energy H_C/ω₀ = N f(z*)/2."""
    return n_atoms * minimize_f(p).energy / 2.0


def trace_boundary(x_min=0.0, x_max=0.95, resolution=20):
    """
    Traces the full phase boundary on [x_min, x_max].

    Args:
        x_min: Left end (>= 0).
        x_max: Right end (< 1).
        resolution: Points per segment (>= 2).

    Returns:
        list: BoundaryPoints ordered by x: the second-order segment, the
            tricritical point (when inside the range), then the first-order
            segment.
    """
    if resolution < 2:
        raise DomainError(f"resolution must be >= 2, got {resolution}")
    if not 0.0 <= x_min < x_max < 1.0:
        raise DomainError(f"x range must satisfy 0 <= x_min < x_max < 1, got [{x_min}, {x_max}]")

    points = []
    if x_min < X_TRICRITICAL:
        for x in np.linspace(x_min, min(x_max, X_TRICRITICAL), resolution, endpoint=x_max < X_TRICRITICAL):
            points.append(BoundaryPoint(float(x), critical_line(float(x)), TransitionOrder.SECOND_ORDER))
    if x_min <= X_TRICRITICAL <= x_max:
        points.append(tricritical_point())
    if x_max > X_TRICRITICAL:
        if x_min > X_TRICRITICAL:
            xs = np.linspace(x_min, x_max, resolution)
        else:
            xs = np.linspace(X_TRICRITICAL, x_max, resolution + 1)[1:]
        for x in xs:
            points.append(first_order_boundary(float(x)))
    logging.info(f"Traced {len(points)} boundary points on [{x_min}, {x_max}]")
    return points
