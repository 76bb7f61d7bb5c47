"""Particle in a box: guiding-field velocity against the event model.

The symmetric box state A exp(-i omega t) cos(a x) is a standing pair of
counter-running waves exp(+-i a x). A velocity field read off the phase
gradient, v = (hbar/m) Im(psi'/psi), vanishes identically for this state:
under that account the particle never moves, and acquires its measured
momentum abruptly at detection (no dynamical rule exists for that jump,
so it is reported as commentary, not simulated). The event model instead
puts each particle in exactly one momentum branch +-hbar a per event,
with the two waves co-propagating; ensemble momentum frequencies are
(1/2, 1/2) and the mean vanishes by symmetry.

Implements: BoxState, box_wavefunction (and its two-wave form),
bohm_velocity (exactly zero off the nodes), velocity_from_field (generic
phase-gradient reader used as a control), quantum_potential
-(hbar^2/2m) lap(R)/R (constant +hbar^2 a^2/2m for the box profile), and
sample_box_momenta (the event-model ensemble).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import PhysConstants
from .event_engine import BranchSet, EnsembleStats, Pipeline, run_ensemble
from .schrodinger import Grid1D, spectral_laplacian

NODE_FLOOR = 1e-8
MOMENTUM_LABELS = ("p+", "p-")


@dataclass(frozen=True)
class BoxState:
    """Standing wave A exp(-i omega t) cos(a x) on [-half_width, half_width].

    The box condition cos(a * half_width) = 0 pins a * half_width to an
    odd multiple of pi/2; the default choice 100.5 pi keeps the box far
    larger than the wavelength. The normalization integral then equals
    A^2 * half_width exactly, fixing A.
    """

    a: float
    omega: float
    half_width: float
    constants: PhysConstants = PhysConstants()

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError(f"wavenumber a must be positive, got {self.a}")
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        al = self.a * self.half_width
        if abs(np.cos(al)) > 1e-8 * max(1.0, al):
            raise ValueError(
                f"a * half_width = {al!r} does not satisfy the box condition cos = 0"
            )

    @property
    def amplitude(self) -> float:
        return 1.0 / np.sqrt(self.half_width)

    @property
    def momentum_magnitude(self) -> float:
        return self.constants.hbar * self.a


def make_box(
    half_width: float = 1.0,
    al_over_pi: float = 100.5,
    constants: PhysConstants = PhysConstants(),
) -> BoxState:
    """Box state from its size and the mode count a*l/pi (default 100.5)."""
    a = al_over_pi * np.pi / half_width
    omega = constants.hbar * a * a / (2.0 * constants.mass)
    return BoxState(a=a, omega=omega, half_width=half_width, constants=constants)


def _check_inside(s: BoxState, x: np.ndarray) -> None:
    if np.any(np.abs(x) > s.half_width * (1.0 + 1e-12)):
        raise ValueError("position outside the box")


def box_wavefunction(s: BoxState, x, t: float = 0.0) -> np.ndarray:
    """A exp(-i omega t) cos(a x)."""
    x = np.asarray(x, dtype=float)
    _check_inside(s, x)
    return s.amplitude * np.exp(-1j * s.omega * t) * np.cos(s.a * x)


def box_wavefunction_two_waves(s: BoxState, x, t: float = 0.0) -> np.ndarray:
    """The same state as the explicit pair of counter-running waves."""
    x = np.asarray(x, dtype=float)
    _check_inside(s, x)
    return (
        0.5
        * s.amplitude
        * np.exp(-1j * s.omega * t)
        * (np.exp(1j * s.a * x) + np.exp(-1j * s.a * x))
    )


class VelocityField(NamedTuple):
    values: np.ndarray
    defined: np.ndarray


def bohm_velocity(s: BoxState, x, t: float = 0.0) -> VelocityField:
    """(hbar/m) Im(psi'/psi) for the box state: zero at every non-node point.

    The ratio psi'/psi is (-a sin / cos) times w/w for the shared time
    factor w, so its imaginary part vanishes identically: the phase of
    this state carries no position dependence at all. The field is
    evaluated in that closed form, exact zeros off the nodes. A numeric
    read of the same ratio lands at rounding level instead; see
    velocity_from_field for that control. Nodes (|cos(a x)| below the
    floor) are flagged undefined.
    """
    x = np.asarray(x, dtype=float)
    _check_inside(s, x)
    defined = np.abs(np.cos(s.a * x)) >= NODE_FLOOR
    v = np.zeros_like(x)
    return VelocityField(np.where(defined, v, np.nan), defined)


def velocity_from_field(
    grid: Grid1D, psi: np.ndarray, constants: PhysConstants = PhysConstants()
) -> np.ndarray:
    """Phase-gradient velocity (hbar/m) dS/dx on a periodic window.

    Built from wrap-safe local phase differences; exact for a traveling
    wave exp(ikx) commensurate with the window (returns hbar k / m).
    """
    psi = np.asarray(psi, dtype=complex)
    dtheta_fwd = np.angle(np.roll(psi, -1) * np.conj(psi))
    ds = (dtheta_fwd + np.roll(dtheta_fwd, 1)) / (2.0 * grid.dx)
    return constants.hbar / constants.mass * ds


class PotentialSamples(NamedTuple):
    values: np.ndarray
    defined: np.ndarray


def quantum_potential(
    grid: Grid1D,
    r: np.ndarray,
    constants: PhysConstants = PhysConstants(),
    floor_rel: float = 1e-3,
) -> PotentialSamples:
    """-(hbar^2 / 2m) lap(R) / R on a periodic window, masked near zeros.

    The Laplacian is spectral, so profiles commensurate with the window
    (cos(a x) with a on the grid's mode ladder) come out exact to
    rounding: for R = cos(a x) the value is the constant +hbar^2 a^2 / 2m.
    Points with R below floor_rel * max|R| are flagged undefined.
    """
    r = np.asarray(r, dtype=float)
    lap = np.real(spectral_laplacian(grid, r))
    defined = np.abs(r) >= floor_rel * np.max(np.abs(r))
    with np.errstate(divide="ignore", invalid="ignore"):
        vq = -(constants.hbar**2) / (2.0 * constants.mass) * lap / r
    return PotentialSamples(np.where(defined, vq, np.nan), defined)


def momentum_pipeline(s: BoxState) -> Pipeline:
    """Two momentum branches +-hbar a, equal weight, detected directly."""
    sq2 = 1.0 / np.sqrt(2.0)
    return Pipeline(initial=BranchSet([(MOMENTUM_LABELS[0], sq2), (MOMENTUM_LABELS[1], sq2)]))


def momentum_value(s: BoxState, label: str) -> float:
    """The exact momentum carried by a branch label (+-hbar a)."""
    if label == MOMENTUM_LABELS[0]:
        return s.momentum_magnitude
    if label == MOMENTUM_LABELS[1]:
        return -s.momentum_magnitude
    raise ValueError(f"unknown momentum label {label!r}")


def sample_box_momenta(
    s: BoxState, n_events: int, seed: int, workers: int | None = None
) -> EnsembleStats:
    """Event-model ensemble: each particle in exactly one branch +-hbar a.

    The detected outcome is the taken branch itself, so every history
    carries |p| = hbar a exactly and the frequencies converge to
    (1/2, 1/2).
    """
    return run_ensemble(momentum_pipeline(s), n_events, seed, workers=workers)
