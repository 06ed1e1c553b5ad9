"""
Fluctuations Module

Quadratic quantum fluctuations above the mean-field state. The effective
Hamiltonian is a three-mode harmonic oscillator (photon, even-group atoms,
odd-group atoms) with the "arrow" matrix

    Ω² = [[λ²,   λ₁₂, λ₁₃],
          [λ₁₂,  ω₂², 0  ],
          [λ₁₃,  0,   ω₃²]]

in units of ω₀². The gap is the smallest eigenvalue of Ω = √(Ω²), the
Gaussian ground state is exp(−Ω_ij X_i X_j / 2) and the photon-atom
entanglement entropy follows from the reduced photon density matrix.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from model.errors import DomainError, InstabilityError, NumericalError
from model.meanfield import minimize_f

# ===================================================================
# Configuration
# ===================================================================
EIGEN_CLAMP = 1e-10
# eigenvalues this close to zero, relative to the spectral norm, are rounding noise
EIGEN_NOISE_RTOL = 64.0 * np.finfo(float).eps
GAP_TOL = 1e-12
DECOUPLED_RTOL = 1e-14
# arccosh cannot resolve γ below √(2·eps)
GAMMA_FLOOR = math.sqrt(2.0 * np.finfo(float).eps)

PHOTON, EVEN, ODD = 0, 1, 2


@dataclass(frozen=True)
class DressedAngles:
    omega2: float
    omega3: float
    theta2: float
    theta3: float


@dataclass(frozen=True, eq=False)
class FluctuationResult:
    """
    Quantum-fluctuation analysis at one mean-field point. Matrices are in
    units of ω₀² (omega_sq) and ω₀ (omega_sqrt), ordered (photon, even, odd).
    Stages fill the optional fields in order: spectrum, matrix_sqrt,
    entanglement_entropy.
    """
    lam: float
    z: float
    omega_sq: np.ndarray
    eigenvalues_sq: Optional[np.ndarray] = None
    eigenvectors: Optional[np.ndarray] = None
    gap: Optional[float] = None
    omega_sqrt: Optional[np.ndarray] = None
    a_plus: Optional[float] = None
    a_minus: Optional[float] = None
    gamma: Optional[float] = None
    entropy: Optional[float] = None
    divergent: bool = False


def dressed_frequencies(x, z):
    """
    Dressed atomic frequencies ω₂,₃ = √(1 ± 2xz + z²) and rotation angles
    θ₂,₃ = tan⁻¹[(z ± x)/√(1−x²)], all in units of ω₀.
    """
    if not 0.0 <= x < 1.0:
        raise DomainError(f"x must satisfy 0 <= x < 1, got {x}")
    if z < 0.0:
        raise DomainError(f"z must be non-negative, got {z}")
    delta = math.sqrt(1.0 - x * x)
    return DressedAngles(
        omega2=math.hypot(delta, z + x),
        omega3=math.hypot(delta, z - x),
        theta2=math.atan2(z + x, delta),
        theta3=math.atan2(z - x, delta),
    )


def stationarity_residual(z, p):
    """
    z/y − (sinθ₂ + sinθ₃)/2: the coefficient of the term linear in the
    shifted photon operator, divided by √N·g/2. It equals f'(z) and vanishes
    at the mean-field solution.
    """
    if p.y == 0.0:
        raise DomainError("stationarity_residual needs y > 0")
    d = dressed_frequencies(p.x, z)
    return z / p.y - (math.sin(d.theta2) + math.sin(d.theta3)) / 2.0


def build_omega_squared(p, z):
    """
    Builds Ω²/ω₀² at the mean-field point z.

    The couplings are λ₁ⱼ/ω₀² = √(λ·ωⱼ·yλ/2)·cosθⱼ, using g = ω₀√(yλ).

    Args:
        p: ModelParams.
        z: Order parameter (normally from minimize_f).

    Returns:
        FluctuationResult: Only the matrix part is filled in.
    """
    d = dressed_frequencies(p.x, z)
    lam = p.lam
    l12 = math.sqrt(lam * d.omega2 * p.y * lam / 2.0) * math.cos(d.theta2)
    l13 = math.sqrt(lam * d.omega3 * p.y * lam / 2.0) * math.cos(d.theta3)
    omega_sq = np.array([
        [lam * lam, l12, l13],
        [l12, d.omega2 * d.omega2, 0.0],
        [l13, 0.0, d.omega3 * d.omega3],
    ])
    return FluctuationResult(lam=lam, z=float(z), omega_sq=omega_sq)


def spectrum(fr):
    """
    Eigenvalues of Ω² in ascending order and the gap Δ/ω₀ = √(min eigenvalue).

    Returns:
        FluctuationResult: With eigenvalues_sq, eigenvectors and gap set.

    Raises:
        InstabilityError: If an eigenvalue is below −1e-10 (z is not a minimum).
    """
    eigenvalues, eigenvectors = np.linalg.eigh(fr.omega_sq)
    noise = EIGEN_NOISE_RTOL * float(np.max(np.abs(eigenvalues)))
    eigenvalues = np.where(np.abs(eigenvalues) <= noise, 0.0, eigenvalues)
    if eigenvalues[0] < -EIGEN_CLAMP:
        raise InstabilityError(
            f"Omega^2 has eigenvalue {eigenvalues[0]:.3e} < -{EIGEN_CLAMP} at z={fr.z}; the mean-field point is not a minimum"
        )
    gap = math.sqrt(max(0.0, float(eigenvalues[0])))
    return replace(fr, eigenvalues_sq=eigenvalues, eigenvectors=eigenvectors, gap=gap)


def matrix_sqrt(fr):
    """
    Principal square root Ω/ω₀ by spectral decomposition, clamping
    eigenvalues in [−1e-10, 0] to zero.
    """
    if fr.eigenvalues_sq is None:
        fr = spectrum(fr)
    roots = np.sqrt(np.clip(fr.eigenvalues_sq, 0.0, None))
    vectors = fr.eigenvectors
    omega = (vectors * roots) @ vectors.T
    return replace(fr, omega_sqrt=(omega + omega.T) / 2.0)


def entropy_from_gamma(gamma):
    """S = γ/(e^γ−1) − ln(1−e^{−γ}); zero for the decoupled limit γ = ∞."""
    if math.isinf(gamma):
        return 0.0
    return gamma / math.expm1(gamma) - math.log(-math.expm1(-gamma))


def _det_omega(fr):
    return float(np.prod(np.sqrt(np.clip(fr.eigenvalues_sq, 0.0, None))))


def entanglement_entropy(fr):
    """
    Photon-atom entanglement entropy of the Gaussian ground state.

    The reduced photon density matrix is
    ρ(X, X') ∝ exp(−A₊(X² + X'²)/2 + A₋XX') with
    A± = (Ω₁₁ ± detΩ/(Ω₂₂Ω₃₃ − Ω₂₃²))/2 and γ = arccosh(A₊/A₋).
    On the critical line (gap < 1e-12) the result is flagged divergent and
    the entropy is evaluated at the resolution floor of γ.

    Returns:
        FluctuationResult: With a_plus, a_minus, gamma, entropy, divergent set.

    Raises:
        NumericalError: If A₋ < 0 or the atomic minor is not positive.
    """
    if fr.omega_sqrt is None:
        fr = matrix_sqrt(fr)
    omega = fr.omega_sqrt
    minor = omega[EVEN, EVEN] * omega[ODD, ODD] - omega[EVEN, ODD] ** 2
    if minor <= 0.0:
        raise NumericalError(f"Atomic minor of Omega is {minor:.3e} at z={fr.z}; the Gaussian state is invalid")
    schur = _det_omega(fr) / minor
    a_plus = 0.5 * (omega[PHOTON, PHOTON] + schur)
    a_minus = 0.5 * (omega[PHOTON, PHOTON] - schur)
    divergent = fr.gap < GAP_TOL

    if abs(a_minus) <= DECOUPLED_RTOL * a_plus:
        gamma = math.inf
    elif a_minus < 0.0:
        raise NumericalError(f"A- = {a_minus:.3e} < 0 at z={fr.z}; upstream instability")
    else:
        # A+/A- = 1 + u, u = (A+ - A-)/A- exactly
        u = schur / a_minus
        gamma = max(math.log1p(u + math.sqrt(u * (u + 2.0))), GAMMA_FLOOR)

    entropy = entropy_from_gamma(gamma)
    if divergent:
        logging.debug(f"Gap {fr.gap:.3e} below {GAP_TOL} at z={fr.z}; entropy {entropy} is a floor value")
    return replace(fr, a_plus=float(a_plus), a_minus=float(a_minus), gamma=gamma, entropy=entropy, divergent=divergent)


def analyze(p, z=None):
    """
    Runs the whole fluctuation pipeline at p.

    Args:
        p: ModelParams.
        z: Mean-field order parameter; minimize_f(p).z when omitted. Passing
            another stationary minimum evaluates that branch on its own.

    Returns:
        FluctuationResult: Fully populated.
    """
    if z is None:
        z = minimize_f(p).z
    fr = build_omega_squared(p, z)
    return entanglement_entropy(matrix_sqrt(spectrum(fr)))


def determinant_sq(fr):
    """det(Ω²/ω₀²)."""
    if fr.eigenvalues_sq is None:
        fr = spectrum(fr)
    return float(np.linalg.det(fr.omega_sq))


def zero_point_shift(fr):
    """
    Ground energy of the fluctuation Hamiltonian in units of ω₀:
    E_Q = (Tr Ω − ω₁ − ω₂ − ω₃)/2. It is the O(1) correction to N·f(z)/2.
    """
    if fr.eigenvalues_sq is None:
        fr = spectrum(fr)
    bare = np.sqrt(np.diag(fr.omega_sq))
    return 0.5 * (float(np.sum(np.sqrt(np.clip(fr.eigenvalues_sq, 0.0, None)))) - float(np.sum(bare)))


def gap_from_determinant(fr):
    """Leading-order gap near the critical line, (1+λ²)^{-1/2}·det(Ω/ω₀)."""
    if fr.eigenvalues_sq is None:
        fr = spectrum(fr)
    return _det_omega(fr) / math.sqrt(1.0 + fr.lam * fr.lam)


def entropy_from_determinant(fr):
    """Leading-order entropy near the critical line, 1 − ½ln[4(λ²+1)det(Ω/ω₀)/λ²]."""
    if fr.eigenvalues_sq is None:
        fr = spectrum(fr)
    lam2 = fr.lam * fr.lam
    return 1.0 - 0.5 * math.log(4.0 * (lam2 + 1.0) * _det_omega(fr) / lam2)
