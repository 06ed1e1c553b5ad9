"""
Exact Diagonalization Module

Finite-N exact diagonalization of

    H = ω b†b + δ(J₂ᶻ + J₃ᶻ) + (g/√N)(b + b†)(J₂ˣ + J₃ˣ) + ε(J₂ˣ − J₃ˣ)

on |n⟩⊗|j₂,m₂⟩⊗|j₃,m₃⟩ with the boson truncated at n_max and the two atom
groups restricted to maximal collective spin (j = N/4 each). The results
validate the thermodynamic-limit predictions of the mean-field and
fluctuation modules.

The symmetry that survives the alternating field is the photon parity
combined with the exchange of the two groups: b → −b, J₂ˣ ↔ −J₃ˣ. Both
parity sectors are diagonalized separately so that near-degenerate parity
doublets never mix.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg

from model.errors import ConfigurationError
from model.fluctuations import analyze, zero_point_shift
from model.meanfield import Phase, minimize_f, photon_density
from model.params import ModelParams

# ===================================================================
# Configuration
# ===================================================================
DEFAULT_TARGET_TOLERANCE = 1e-9
DEFAULT_MAX_DIMENSION = 2_000_000
DEFAULT_DENSE_THRESHOLD = 4000
DEFAULT_MAX_ESCALATIONS = 12
N_MAX_FLOOR = 16
N_MAX_MARGIN = 32
N_MAX_STEP = 8
EIGEN_COUNT = 2


@dataclass(frozen=True)
class EDConfig:
    """
    One finite-N run. Energies are measured in units of omega0, which fixes
    the raw parameters through ModelParams.raw(omega0).
    """
    n_atoms: int
    params: ModelParams
    omega0: float = 1.0
    n_max: Optional[int] = None
    target_tolerance: float = DEFAULT_TARGET_TOLERANCE
    max_dimension: int = DEFAULT_MAX_DIMENSION
    dense_threshold: int = DEFAULT_DENSE_THRESHOLD
    max_escalations: int = DEFAULT_MAX_ESCALATIONS
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.n_atoms, (int, np.integer)) or self.n_atoms < 1:
            raise ConfigurationError(f"n_atoms must be a positive integer, got {self.n_atoms}")
        if self.n_atoms != 1 and self.n_atoms % 2:
            raise ConfigurationError(f"n_atoms must be even (or 1 for the asymmetric Rabi model), got {self.n_atoms}")
        if self.omega0 <= 0.0:
            raise ConfigurationError(f"omega0 must be positive, got {self.omega0}")
        if self.n_max is not None and self.n_max < 1:
            raise ConfigurationError(f"n_max must be >= 1, got {self.n_max}")
        if self.target_tolerance <= 0.0:
            raise ConfigurationError(f"target_tolerance must be positive, got {self.target_tolerance}")

    @classmethod
    def from_raw(cls, n_atoms, omega, delta, g, epsilon, **kwargs):
        p = ModelParams.from_raw(omega, delta, g, epsilon)
        return cls(n_atoms=n_atoms, params=p, omega0=math.hypot(epsilon, delta), **kwargs)

    @property
    def spins(self):
        # even-indexed atoms form group 2, odd-indexed atoms group 3
        even = self.n_atoms // 2
        return even / 2.0, (self.n_atoms - even) / 2.0

    @property
    def parity_resolved(self):
        j2, j3 = self.spins
        return j2 == j3

    def dimension(self, n_max):
        j2, j3 = self.spins
        return (n_max + 1) * int(round(2 * j2 + 1)) * int(round(2 * j3 + 1))

    def initial_n_max(self):
        """max(16, ceil(4·N·z²/(4yλ)) + 32) unless n_max is fixed."""
        if self.n_max is not None:
            return self.n_max
        z = minimize_f(self.params).z
        return max(N_MAX_FLOOR, math.ceil(4.0 * self.n_atoms * photon_density(z, self.params)) + N_MAX_MARGIN)


@dataclass(frozen=True, eq=False)
class EDResult:
    n_atoms: int
    n_max: int
    dimension: int
    ground_energy: float
    gap: float
    intra_sector_gap: float
    ground_parity: Optional[int]
    sector_energies: dict
    n_photon: float
    mean_b: float
    entropy: float
    truncation_converged: bool
    ground_state: np.ndarray = field(repr=False, default=None)

    @property
    def n_photon_per_atom(self):
        return self.n_photon / self.n_atoms

    def to_dict(self):
        return {
            "n_atoms": self.n_atoms,
            "n_max": self.n_max,
            "dimension": self.dimension,
            "ground_energy": self.ground_energy,
            "gap": self.gap,
            "intra_sector_gap": self.intra_sector_gap,
            "ground_parity": self.ground_parity,
            "sector_energies": {str(k): list(v) for k, v in sorted(self.sector_energies.items())},
            "n_photon": self.n_photon,
            "n_photon_per_atom": self.n_photon_per_atom,
            "mean_b": self.mean_b,
            "entropy": self.entropy,
            "truncation_converged": self.truncation_converged,
        }


def _spin_ops(j):
    # (J^z, J^x, J^+) on the 2j+1 states m = -j..j
    dim = int(round(2 * j + 1))
    m = np.arange(dim) - j
    jz = sparse.diags(m, format="csr")
    raise_vals = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = sparse.diags(raise_vals, -1, shape=(dim, dim), format="csr")
    jx = ((jp + jp.T) / 2.0).tocsr()
    return jz, jx, jp


def _boson_ops(n_max):
    b = sparse.diags(np.sqrt(np.arange(1, n_max + 1)), 1, format="csr")
    number = sparse.diags(np.arange(n_max + 1, dtype=float), format="csr")
    return b, number


def collective_operators(cfg, n_max):
    """
    Sparse operators on the truncated product space, keyed by name:
    number, b, jz2, jx2, jp2, jz3, jx3, jp3.
    """
    j2, j3 = cfg.spins
    b, number = _boson_ops(n_max)
    jz2, jx2, jp2 = _spin_ops(j2)
    jz3, jx3, jp3 = _spin_ops(j3)
    i_b = sparse.identity(n_max + 1, format="csr")
    i_2 = sparse.identity(jz2.shape[0], format="csr")
    i_3 = sparse.identity(jz3.shape[0], format="csr")

    def embed(op_b, op_2, op_3):
        return sparse.kron(sparse.kron(op_b, op_2), op_3, format="csr")

    return {
        "number": embed(number, i_2, i_3),
        "b": embed(b, i_2, i_3),
        "jz2": embed(i_b, jz2, i_3),
        "jx2": embed(i_b, jx2, i_3),
        "jp2": embed(i_b, jp2, i_3),
        "jz3": embed(i_b, i_2, jz3),
        "jx3": embed(i_b, i_2, jx3),
        "jp3": embed(i_b, i_2, jp3),
    }


def check_budget(cfg, n_max):
    dimension = cfg.dimension(n_max)
    if dimension > cfg.max_dimension:
        raise ConfigurationError(
            f"Hilbert dimension {dimension} (N={cfg.n_atoms}, n_max={n_max}) exceeds the budget {cfg.max_dimension}"
        )
    return dimension


def build_hamiltonian(cfg, n_max=None):
    """
    Builds H as a real symmetric sparse matrix.

    Args:
        cfg: EDConfig.
        n_max: Boson truncation; cfg.initial_n_max() when omitted.

    Returns:
        scipy.sparse.csr_matrix

    Raises:
        ConfigurationError: If the dimension exceeds cfg.max_dimension
            (checked before anything is allocated).
    """
    n_max = cfg.initial_n_max() if n_max is None else n_max
    check_budget(cfg, n_max)
    raw = cfg.params.raw(cfg.omega0)
    ops = collective_operators(cfg, n_max)
    field_quadrature = ops["b"] + ops["b"].T
    hamiltonian = (
        raw["omega"] * ops["number"]
        + raw["delta"] * (ops["jz2"] + ops["jz3"])
        + (raw["g"] / math.sqrt(cfg.n_atoms)) * (field_quadrature @ (ops["jx2"] + ops["jx3"]))
        + raw["epsilon"] * (ops["jx2"] - ops["jx3"])
    )
    return hamiltonian.tocsr()


def parity_operator(cfg, n_max):
    """
    Photon parity combined with the exchange of the two atom groups, as a
    signed permutation: |n, m₂, m₃⟩ → (−1)^{n + m₂ + m₃ + N/2}|n, m₃, m₂⟩.
    """
    if not cfg.parity_resolved:
        raise ConfigurationError("Parity needs two equal atom groups (even N)")
    d = int(round(2 * cfg.spins[0] + 1))
    n, i2, i3 = np.indices((n_max + 1, d, d)).reshape(3, -1)
    rows = n * d * d + i3 * d + i2
    signs = np.where((n + i2 + i3) % 2 == 0, 1.0, -1.0)
    size = rows.size
    return sparse.csr_matrix((signs, (rows, np.arange(size))), shape=(size, size))


def _sector_basis(cfg, n_max, parity):
    # isometry onto the parity eigenspace; columns pair |n,i2,i3> with |n,i3,i2>
    d = int(round(2 * cfg.spins[0] + 1))
    n, i2, i3 = np.indices((n_max + 1, d, d)).reshape(3, -1)
    index = n * d * d + i2 * d + i3
    partner = n * d * d + i3 * d + i2
    signs = np.where((n + i2 + i3) % 2 == 0, 1, -1)

    fixed = (i2 == i3) & (signs == parity)
    paired = i2 < i3
    n_fixed, n_paired = int(fixed.sum()), int(paired.sum())
    inv_sqrt2 = 1.0 / math.sqrt(2.0)

    rows = np.concatenate([index[fixed], index[paired], partner[paired]])
    cols = np.concatenate([
        np.arange(n_fixed),
        n_fixed + np.arange(n_paired),
        n_fixed + np.arange(n_paired),
    ])
    values = np.concatenate([
        np.ones(n_fixed),
        np.full(n_paired, inv_sqrt2),
        parity * signs[paired] * inv_sqrt2,
    ])
    return sparse.csr_matrix((values, (rows, cols)), shape=(index.size, n_fixed + n_paired))


def _lowest_states(matrix, cfg, count=EIGEN_COUNT):
    size = matrix.shape[0]
    count = min(count, size)
    if size <= cfg.dense_threshold or size <= count + 1:
        values, vectors = np.linalg.eigh(matrix.toarray())
        return values[:count], vectors[:, :count]
    rng = np.random.default_rng(cfg.seed)
    values, vectors = sparse_linalg.eigsh(matrix, k=count, which="SA", v0=rng.standard_normal(size))
    order = np.argsort(values)
    return values[order], vectors[:, order]


def _photon_entropy(state, n_max):
    amplitudes = state.reshape(n_max + 1, -1)
    weights = np.linalg.eigvalsh(amplitudes @ amplitudes.T)
    weights = weights[weights > 1e-300]
    return float(max(0.0, -np.sum(weights * np.log(weights))))


def _solve(cfg, n_max):
    dimension = check_budget(cfg, n_max)
    hamiltonian = build_hamiltonian(cfg, n_max)
    sector_energies = {}
    candidates = []
    if cfg.parity_resolved:
        for parity in (1, -1):
            basis = _sector_basis(cfg, n_max, parity)
            values, vectors = _lowest_states((basis.T @ hamiltonian @ basis).tocsr(), cfg)
            sector_energies[parity] = [float(v) for v in values]
            candidates.append((float(values[0]), parity, basis @ vectors[:, 0]))
        all_energies = sorted(e for values in sector_energies.values() for e in values)
    else:
        values, vectors = _lowest_states(hamiltonian, cfg)
        all_energies = [float(v) for v in values]
        candidates.append((all_energies[0], None, vectors[:, 0]))

    ground_energy, ground_parity, state = min(candidates, key=lambda c: (c[0], -(c[1] or 0)))
    state = state / np.linalg.norm(state)
    if ground_parity is None:
        intra = all_energies[1] - all_energies[0]
    else:
        sector = sector_energies[ground_parity]
        intra = sector[1] - sector[0] if len(sector) > 1 else math.nan

    ops = _boson_ops(n_max)
    b_full = sparse.kron(ops[0], sparse.identity(dimension // (n_max + 1)), format="csr")
    n_photon = float(state @ (b_full.T @ (b_full @ state)))
    mean_b = float(state @ (b_full @ state))

    scale = cfg.omega0
    return EDResult(
        n_atoms=cfg.n_atoms,
        n_max=n_max,
        dimension=dimension,
        ground_energy=ground_energy / scale,
        gap=(all_energies[1] - all_energies[0]) / scale,
        intra_sector_gap=intra / scale,
        ground_parity=ground_parity,
        sector_energies={k: [e / scale for e in v] for k, v in sector_energies.items()},
        n_photon=n_photon,
        mean_b=mean_b,
        entropy=_photon_entropy(state, n_max),
        truncation_converged=False,
        ground_state=state,
    )


def ground_and_gap(cfg):
    """
    Ground energy, gaps and ground-state observables at finite N.

    The boson truncation starts at cfg.initial_n_max() and grows by 8 until
    the ground energy changes by less than target_tolerance (relative). A run
    that never converges, or whose next step would exceed max_dimension, is
    returned with truncation_converged = False.

    Returns:
        EDResult: Energies in units of ω₀.
    """
    n_max = cfg.initial_n_max()
    result = _solve(cfg, n_max)
    max_attempts = cfg.max_escalations if cfg.n_max is None else 1
    for attempt in range(max_attempts):
        if cfg.dimension(n_max + N_MAX_STEP) > cfg.max_dimension:
            logging.warning(f"ED N={cfg.n_atoms}: n_max={n_max + N_MAX_STEP} exceeds the budget {cfg.max_dimension}; keeping n_max={n_max} unconverged")
            return replace(result, truncation_converged=False)
        probe = _solve(cfg, n_max + N_MAX_STEP)
        change = abs(probe.ground_energy - result.ground_energy)
        converged = change < cfg.target_tolerance * max(1.0, abs(probe.ground_energy))
        if cfg.n_max is not None:
            # fixed truncation: report it, flagged by the n_max + 8 probe
            if not converged:
                logging.warning(f"ED N={cfg.n_atoms}: energy changes by {change:.3e} at fixed n_max={n_max}")
            return replace(result, truncation_converged=converged)
        if converged:
            logging.debug(f"ED N={cfg.n_atoms}: truncation converged at n_max={probe.n_max} (change {change:.3e})")
            return replace(probe, truncation_converged=True)
        n_max += N_MAX_STEP
        result = probe
        if attempt < max_attempts - 1:
            logging.info(f"  -> ED N={cfg.n_atoms}: energy changed by {change:.3e}; retrying with n_max={n_max + N_MAX_STEP} (attempt {attempt + 1}/{max_attempts})")
    logging.warning(f"ED N={cfg.n_atoms}: truncation not converged at n_max={n_max} after {max_attempts} escalations")
    return result


def spin_casimirs(cfg, result):
    """⟨J₂²⟩ and ⟨J₃²⟩ in the ground state; both equal j(j+1) by construction."""
    ops = collective_operators(cfg, result.n_max)
    state = result.ground_state
    values = []
    for group in ("2", "3"):
        jz, jp = ops["jz" + group], ops["jp" + group]
        casimir = jz @ jz + (jp @ jp.T + jp.T @ jp) / 2.0
        values.append(float(state @ (casimir @ state)))
    return tuple(values)


def comparable_gap(result, phase):
    """
    The ED gap that tends to the fluctuation gap Δ. In the normal phase the
    soft mode is odd under parity, so Δ is the gap to the other sector; in
    the superradiant phase the parity doublet is quasi-degenerate and Δ is
    the gap within the ground sector.
    """
    if phase == Phase.NORMAL:
        return result.gap
    return result.intra_sector_gap


def finite_size_scan(cfgs):
    """
    Runs ground_and_gap for every config and lines the results up against
    the thermodynamic-limit predictions.

    Args:
        cfgs: EDConfigs sharing (x, y, λ), normally with increasing N.

    Returns:
        list: One dict per config.

    Raises:
        ConfigurationError: If the configs do not share (x, y, λ).
    """
    if not cfgs:
        raise ConfigurationError("finite_size_scan needs at least one config")
    params = cfgs[0].params
    if any(cfg.params != params for cfg in cfgs):
        raise ConfigurationError("All configs of a finite-size scan must share (x, y, lambda)")

    solution = minimize_f(params)
    fluct = analyze(params, solution.z)
    predicted_energy = solution.energy / 2.0
    predicted_density = photon_density(solution.z, params)
    predicted_shift = zero_point_shift(fluct)

    rows = []
    for cfg in cfgs:
        logging.info(f"[ED] N={cfg.n_atoms} at x={params.x}, y={params.y}, lambda={params.lam}")
        result = ground_and_gap(cfg)
        energy_per_atom = result.ground_energy / cfg.n_atoms
        shift = result.ground_energy - cfg.n_atoms * predicted_energy
        compared = comparable_gap(result, solution.phase)
        rows.append({
            **result.to_dict(),
            "ground_energy_per_atom": energy_per_atom,
            "predicted_energy_per_atom": predicted_energy,
            "energy_per_atom_diff": abs(energy_per_atom - predicted_energy),
            "predicted_photon_density": predicted_density,
            "photon_density_diff": abs(result.n_photon_per_atom - predicted_density),
            "predicted_gap": fluct.gap,
            "compared_gap": compared,
            "gap_diff": abs(compared - fluct.gap),
            "energy_shift": shift,
            "predicted_energy_shift": predicted_shift,
            "entropy_gaussian": fluct.entropy,
        })
    return rows
