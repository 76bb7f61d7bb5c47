"""Single-particle interferometers: spin precession between splitter and
recombiner, and the two-arm optical loop.

Implements:
    - SgConfig / sg_split_amplitudes / sg_transition_probability /
      simulate_sg: a spin prepared along +x splits into the two z branches
      with equal weight, each branch wave accumulates the phase +-mu_B t /
      hbar of its magnetic level, and recombination into the x basis gives
      P(x+ -> x-) = (1 - cos(2 mu_B t / hbar)) / 2.
    - spin_flipper_effect: a flipper in one arm always advances that arm's
      wave phase by pi/2, but flips the spin label (and exchanges energy)
      only when the particle actually propagates in that arm.
    - MzConfig / mz_exit_probability / simulate_mz: two-arm loop with
      splitter amplitudes (t, r) and reflection phase i. Port 1 is the
      bright port of the zero-phase loop, so p_port1 = cos^2(dphi/2) for
      the symmetric splitter.

Phase convention is stated here because probabilities alone do not fix
it; any globally-phase-equivalent choice gives the same statistics.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import PhysConstants
from .event_engine import (
    BranchSet,
    EnsembleStats,
    HistoryRecord,
    Pipeline,
    run_ensemble,
)

SQ2 = 1.0 / np.sqrt(2.0)

Z_LABELS = ("z+", "z-")
X_LABELS = ("x+", "x-")


@dataclass(frozen=True)
class SgConfig:
    """Spin interferometer: magnetic energy mu_B = mu*B, evolution time t."""

    mu_B: float = 1.0
    t: float = 1.0
    input_state: str = "x+"
    constants: PhysConstants = PhysConstants()

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t}")
        if self.input_state not in X_LABELS:
            raise ValueError(f"input_state must be one of {X_LABELS}, got {self.input_state!r}")

    @property
    def precession_phase(self) -> float:
        """Relative phase 2 mu_B t / hbar between the two z branches."""
        return 2.0 * self.mu_B * self.t / self.constants.hbar


@dataclass(frozen=True)
class MzConfig:
    """Two-arm loop: per-arm phase shifts and splitter amplitude pair."""

    phi1: float = 0.0
    phi2: float = 0.0
    splitter_ratio: tuple[float, float] = (SQ2, SQ2)

    def __post_init__(self) -> None:
        r, t = self.splitter_ratio
        if abs(r * r + t * t - 1.0) > 1e-12:
            raise ValueError(f"splitter amplitudes must satisfy r^2 + t^2 = 1, got {self.splitter_ratio}")


def sg_transition_probability(c: SgConfig) -> float:
    """P(x+ -> x-) = (1 - cos(2 mu_B t / hbar)) / 2; complement for x+ -> x+."""
    return 0.5 * (1.0 - np.cos(c.precession_phase))


def sg_split_amplitudes(input_state: str) -> BranchSet:
    """Entrance split onto the z branches: x+ -> (1, 1)/sqrt2, x- -> (1, -1)/sqrt2."""
    if input_state == "x+":
        return BranchSet([(Z_LABELS[0], SQ2), (Z_LABELS[1], SQ2)])
    if input_state == "x-":
        return BranchSet([(Z_LABELS[0], SQ2), (Z_LABELS[1], -SQ2)])
    raise ValueError(f"input_state must be one of {X_LABELS}, got {input_state!r}")


def sg_pipeline(c: SgConfig) -> Pipeline:
    """Split -> precession phases (+-mu_B t/hbar) -> recombination into x."""
    omega_t = c.mu_B * c.t / c.constants.hbar
    x_basis = (
        (X_LABELS[0], (SQ2, SQ2)),
        (X_LABELS[1], (SQ2, -SQ2)),
    )
    return Pipeline(
        initial=sg_split_amplitudes(c.input_state),
        phase_increments=(omega_t, -omega_t),
        output_basis=x_basis,
    )


def simulate_sg(c: SgConfig, n_events: int, seed: int, workers: int | None = None) -> EnsembleStats:
    """Event-by-event run: one z branch taken per event, both waves evolve."""
    return run_ensemble(sg_pipeline(c), n_events, seed, workers=workers)


def spin_flipper_effect(h: HistoryRecord, flipped_arm: str, energy_quantum: float = 0.0) -> HistoryRecord:
    """Pass the history through a spin flipper sitting in one arm.

    The wave in that arm always advances by pi/2. The particle itself
    flips (label swapped to the other branch's state, energy_quantum
    logged) only if it is actually propagating in the flipped arm; a
    flipper in the untaken arm touches nothing but the wave phase.
    """
    if flipped_arm not in h.branch_labels:
        raise ValueError(f"arm {flipped_arm!r} not in {h.branch_labels}")
    if len(h.branch_labels) != 2:
        raise ValueError("spin flipper is defined for two-arm records")
    i = h.branch_labels.index(flipped_arm)
    phases = list(h.wave_phases)
    phases[i] += np.pi / 2.0
    out = replace(h, wave_phases=tuple(phases))
    if h.taken_branch == flipped_arm:
        other = h.branch_labels[1 - i]
        out = replace(
            out,
            particle_label=other,
            particle_energy_shift=h.particle_energy_shift + energy_quantum,
        )
    return out


def mz_unitary(splitter_ratio: tuple[float, float]) -> np.ndarray:
    """Splitter matrix [[t, i r], [i r, t]] (reflection phase i)."""
    r, t = splitter_ratio
    return np.array([[t, 1j * r], [1j * r, t]], dtype=complex)


def mz_exit_probability(c: MzConfig) -> tuple[float, float]:
    """(p_port1, p_port2) with port 1 the bright port at zero relative phase.

    p_port1 = 2 r^2 t^2 (1 + cos(phi1 - phi2)), which is cos^2(dphi/2)
    for the symmetric splitter; p_port1 + p_port2 = 1 exactly.
    """
    r, t = c.splitter_ratio
    dphi = c.phi1 - c.phi2
    p1 = 2.0 * r * r * t * t * (1.0 + np.cos(dphi))
    return p1, 1.0 - p1


def mz_pipeline(c: MzConfig) -> Pipeline:
    """First splitter -> arm phases -> second splitter.

    Port labels are chosen so that port1 collects the i r t (e^{i phi1} +
    e^{i phi2}) combination: the whole beam at phi1 = phi2.
    """
    r, t = c.splitter_ratio
    initial = BranchSet([("arm1", t), ("arm2", 1j * r)])
    basis = (
        ("port1", (1j * r, t)),
        ("port2", (t, 1j * r)),
    )
    return Pipeline(
        initial=initial,
        phase_increments=(c.phi1, c.phi2),
        output_basis=basis,
    )


def simulate_mz(c: MzConfig, n_events: int, seed: int, workers: int | None = None) -> EnsembleStats:
    """Event-by-event loop run; frequencies converge to mz_exit_probability."""
    return run_ensemble(mz_pipeline(c), n_events, seed, workers=workers)
