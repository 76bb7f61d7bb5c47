"""Spin-plus-tunneling doublet: the 4x4 Hamiltonian with Dirac structure.

A particle that can sit in two wells (tunneling frequency Omega) while
carrying a spin coupled to a field B has

    H = [[ hbar*Omega * I2,  mu0 * sigma.B   ],
         [ mu0 * sigma.B,   -hbar*Omega * I2 ]]

which is exactly mu0 * alpha.B + beta * hbar * Omega with alpha_i and
beta obeying the Clifford anticommutation algebra. Both split levels
+-sqrt(hbar^2 Omega^2 + mu0^2 |B|^2) are doubly degenerate. With pc in
place of mu0 B and mc^2 in place of hbar Omega the same algebra gives the
relativistic single-mode spectrum; that substitution is exercised in the
tests, not rebuilt here.

Implements: build_hamiltonian, spectrum / split_energy, verify_clifford
(generators read back off the builder, residuals exactly zero),
component_ratio (small lower block of the positive-energy eigenvector,
linear in the field), and the B = 0 tunneling dynamics with its
event-by-event simulator: the particle hops wells stochastically, never
superposed, with swap probability sin^2(Omega t) set by the interfering
energy-doublet waves exp(+-i Omega t).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import PhysConstants
from .event_engine import BranchSet, EnsembleStats, Pipeline, run_ensemble

WELL_LABELS = ("well1", "well2")

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class DiracFormConfig:
    """Tunneling frequency, field vector, magnetic coupling."""

    omega: float = 1.0
    B: tuple[float, float, float] = (0.0, 0.0, 0.0)
    mu0: float = 1.0
    constants: PhysConstants = PhysConstants()

    def __post_init__(self) -> None:
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")

    @property
    def field_norm(self) -> float:
        return float(np.linalg.norm(self.B))


def build_hamiltonian(c: DiracFormConfig) -> np.ndarray:
    """The 4x4 block matrix; Hermitian by construction."""
    sigma_b = sum(b * s for b, s in zip(c.B, _SIGMA))
    hw = c.constants.hbar * c.omega
    top = np.hstack([hw * np.eye(2), c.mu0 * sigma_b])
    bottom = np.hstack([c.mu0 * sigma_b, -hw * np.eye(2)])
    return np.vstack([top, bottom]).astype(complex)


def split_energy(c: DiracFormConfig) -> float:
    """E = sqrt(hbar^2 Omega^2 + mu0^2 |B|^2)."""
    return float(np.hypot(c.constants.hbar * c.omega, c.mu0 * c.field_norm))


def spectrum(h: np.ndarray) -> np.ndarray:
    """Eigenvalues in ascending order: {-E, -E, +E, +E}."""
    return np.linalg.eigvalsh(h)


def _generators() -> tuple[list[np.ndarray], np.ndarray]:
    """Read alpha_i and beta back off the builder at unit couplings."""
    units = PhysConstants(hbar=1.0)
    alphas = [
        build_hamiltonian(
            DiracFormConfig(omega=0.0, B=tuple(np.eye(3)[i]), mu0=1.0, constants=units)
        )
        for i in range(3)
    ]
    beta = build_hamiltonian(DiracFormConfig(omega=1.0, B=(0.0, 0.0, 0.0), mu0=1.0, constants=units))
    return alphas, beta


def verify_clifford() -> float:
    """Max residual over every anticommutation identity of the generators.

    {alpha_i, alpha_j} = 2 delta_ij, beta^2 = 1, {alpha_i, beta} = 0.
    The generator entries are exact small integers, so the residual is
    exactly zero, not merely small.
    """
    alphas, beta = _generators()
    eye = np.eye(4)
    residual = 0.0
    for i, ai in enumerate(alphas):
        for j, aj in enumerate(alphas):
            anti = ai @ aj + aj @ ai - 2.0 * (1.0 if i == j else 0.0) * eye
            residual = max(residual, float(np.max(np.abs(anti))))
        residual = max(residual, float(np.max(np.abs(ai @ beta + beta @ ai))))
    residual = max(residual, float(np.max(np.abs(beta @ beta - eye))))
    return residual


def component_ratio(c: DiracFormConfig) -> float:
    """Lower-to-upper block norm ratio of a positive-energy eigenvector.

    Every vector of the doubly degenerate +E space has the same ratio
    mu0 |B| / (E + hbar Omega), growing linearly (slope 1 / (2 hbar
    Omega)) while the field stays small against the tunneling splitting.
    """
    hw = c.constants.hbar * c.omega
    if hw > 0 and c.mu0 * c.field_norm > 0.1 * hw:
        warnings.warn(
            "field comparable to the tunneling splitting: the small-component "
            "expansion is leaving its linear regime",
            stacklevel=2,
        )
    h = build_hamiltonian(c)
    _, vecs = np.linalg.eigh(h)
    top_state = vecs[:, -1]  # largest eigenvalue; the ratio is the same
    upper = np.linalg.norm(top_state[:2])  # anywhere in the degenerate pair
    lower = np.linalg.norm(top_state[2:])
    return float(lower / upper)


def component_ratio_fit(
    omega: float,
    mu0: float,
    field_magnitudes: np.ndarray,
    constants: PhysConstants = PhysConstants(),
) -> float:
    """Least-squares slope (through the origin) of ratio vs mu0 |B|."""
    bs = np.asarray(field_magnitudes, dtype=float)
    ratios = np.array(
        [
            component_ratio(DiracFormConfig(omega=omega, B=(0.0, 0.0, b), mu0=mu0, constants=constants))
            for b in bs
        ]
    )
    x = mu0 * bs
    return float(np.sum(x * ratios) / np.sum(x * x))


@dataclass(frozen=True)
class TunnelingState:
    """Well amplitudes at time t for a particle starting in well 1."""

    amp_stay: complex
    amp_swap: complex

    @property
    def p_stay(self) -> float:
        return abs(self.amp_stay) ** 2

    @property
    def p_swap(self) -> float:
        return abs(self.amp_swap) ** 2


def tunneling_evolution(c: DiracFormConfig, t: float) -> TunnelingState:
    """B = 0 doublet dynamics: waves exp(+-i Omega t) on the energy pair.

    Projected back on the wells this is amp_stay = cos(Omega t),
    amp_swap = i sin(Omega t), so the swap probability is sin^2(Omega t).
    """
    if c.field_norm != 0.0:
        raise ValueError("tunneling dynamics is defined for B = 0")
    wt = c.omega * t
    return TunnelingState(amp_stay=complex(np.cos(wt)), amp_swap=1j * np.sin(wt))


def tunneling_pipeline(c: DiracFormConfig, t: float) -> Pipeline:
    """Start in well 1; detect in the well basis after the doublet phases."""
    state = tunneling_evolution(c, t)
    initial = BranchSet([(WELL_LABELS[0], 1.0), (WELL_LABELS[1], 0.0)])
    basis = (
        (WELL_LABELS[0], (state.amp_stay, state.amp_swap)),
        (WELL_LABELS[1], (state.amp_swap, state.amp_stay)),
    )
    return Pipeline(initial=initial, output_basis=basis)


def simulate_tunneling(
    c: DiracFormConfig, t: float, n_events: int, seed: int, workers: int | None = None
) -> EnsembleStats:
    """Event-by-event well detection; each event finds the particle in one
    well, and the swap frequency converges to sin^2(Omega t)."""
    return run_ensemble(tunneling_pipeline(c, t), n_events, seed, workers=workers)
