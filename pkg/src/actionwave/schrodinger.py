"""1D grid laboratory for the hybrid wavefunction psi = A exp(iS/hbar).

The field is evolved with a norm-exact Strang-split spectral stepper and
then pulled apart into its amplitude and phase-action components so that
every term identity the amplitude/phase reconstruction asserts can be
checked numerically:

    -(hbar^2/2m) lap(psi) =  psi (grad S)^2 / 2m
                           - (i hbar / 2m) psi lap(S)
                           - (i hbar / m) (psi/A) grad S . grad A
                           - (hbar^2 / 2m) (psi/A) lap(A)

The direct side is spectral; the decomposed side uses compact
second-order stencils on wrap-safe local phase differences, so the gap
between the two closes at second order under grid refinement.

Also here: the continuity residual d(rho)/dt + div(rho grad S / m) from
consecutive snapshots, the amplitude diffusion step da/dt = (i hbar/2m)
lap(a), the dephasing field (i hbar/2m) lap(S) by which phase dynamics
exceeds the classical Hamilton-Jacobi flow, and the WKB classicality
measure (hbar/p^2) |dp/dx|.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import PhysConstants

AMPLITUDE_FLOOR = 1e-8


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [x_min, x_max)."""

    x_min: float = -20.0
    x_max: float = 20.0
    n_points: int = 1024

    def __post_init__(self) -> None:
        if self.n_points < 16:
            raise ValueError(f"n_points must be >= 16, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ValueError(f"need x_max > x_min, got [{self.x_min}, {self.x_max}]")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, self.n_points * factor)


@dataclass(frozen=True)
class PotentialField:
    """Real potential sampled on a grid; must be finite everywhere."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"potential shape {v.shape} does not match grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("potential must be finite everywhere")
        object.__setattr__(self, "values", v)


def free_potential(grid: Grid1D) -> PotentialField:
    return PotentialField(grid, np.zeros(grid.n_points))


def harmonic_potential(grid: Grid1D, omega: float, constants: PhysConstants = PhysConstants()) -> PotentialField:
    return PotentialField(grid, 0.5 * constants.mass * omega**2 * grid.x**2)


@dataclass(frozen=True)
class HybridWavefunction:
    """Complex field on a grid with its amplitude/phase-action views."""

    grid: Grid1D
    psi: np.ndarray
    constants: PhysConstants = PhysConstants()

    def __post_init__(self) -> None:
        psi = np.asarray(self.psi, dtype=complex)
        if psi.shape != (self.grid.n_points,):
            raise ValueError(f"psi shape {psi.shape} does not match grid")
        object.__setattr__(self, "psi", psi)

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.psi)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dx)

    def normalized(self) -> "HybridWavefunction":
        return HybridWavefunction(self.grid, self.psi / np.sqrt(self.norm), self.constants)


def gaussian_packet(
    grid: Grid1D,
    x0: float = 0.0,
    sigma0: float = 1.0,
    k0: float = 0.0,
    constants: PhysConstants = PhysConstants(),
) -> HybridWavefunction:
    """Normalized Gaussian, width sigma0 in |psi|, carrier momentum hbar*k0."""
    psi = np.exp(-((grid.x - x0) ** 2) / (4.0 * sigma0**2) + 1j * k0 * grid.x)
    return HybridWavefunction(grid, psi, constants).normalized()


def stable_dt(grid: Grid1D, constants: PhysConstants = PhysConstants()) -> float:
    """Largest step keeping the kinetic phase below pi/4 at the Nyquist mode."""
    k_nyquist = np.pi / grid.dx
    return (np.pi / 4.0) * 2.0 * constants.mass / (constants.hbar * k_nyquist**2)


class MadelungFields(NamedTuple):
    """Amplitude, unwrapped phase-action, and the nodal mask."""

    amplitude: np.ndarray
    action: np.ndarray
    nodes: np.ndarray


def madelung_decompose(w: HybridWavefunction, floor_rel: float = AMPLITUDE_FLOOR) -> MadelungFields:
    """Split psi into A = |psi| and S = hbar * unwrapped arg(psi).

    Points with A below floor_rel * max(A) are flagged as nodes: the phase
    is genuinely undefined there and S values across a node are only
    meaningful mod pi (a real profile changing sign shifts the phase by
    pi between adjacent lobes). Recomposition A exp(iS/hbar) reproduces
    psi wherever the amplitude is above the floor.
    """
    a = np.abs(w.psi)
    nodes = a < floor_rel * a.max()
    s = w.constants.hbar * np.unwrap(np.angle(w.psi))
    return MadelungFields(a, s, nodes)


def evolve(
    w: HybridWavefunction, v: PotentialField, dt: float, steps: int
) -> HybridWavefunction:
    """Strang-split spectral stepping: half kick, kinetic drift, half kick.

    Each factor is a unit-modulus multiplier, so the norm is conserved to
    rounding. Non-finite values abort with a diagnostic.
    """
    if v.grid != w.grid:
        raise ValueError("potential and wavefunction grids differ")
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if steps == 0 or dt == 0:
        return HybridWavefunction(w.grid, w.psi.copy(), w.constants)
    hbar, m = w.constants.hbar, w.constants.mass
    half_kick = np.exp(-0.5j * v.values * dt / hbar)
    drift = np.exp(-0.5j * hbar * w.grid.k**2 * dt / m)
    psi = w.psi.copy()
    for step in range(steps):
        psi = half_kick * psi
        psi = np.fft.ifft(drift * np.fft.fft(psi))
        psi = half_kick * psi
        if step % 512 == 511 and not np.all(np.isfinite(psi.view(float))):
            raise FloatingPointError(f"non-finite field after step {step + 1} (dt={dt})")
    if not np.all(np.isfinite(psi.view(float))):
        raise FloatingPointError(f"non-finite field after {steps} steps (dt={dt})")
    return HybridWavefunction(w.grid, psi, w.constants)


def imaginary_time_relax(
    grid: Grid1D,
    v: PotentialField,
    constants: PhysConstants = PhysConstants(),
    dt: float = 1e-3,
    steps: int = 2000,
    psi0: np.ndarray | None = None,
) -> HybridWavefunction:
    """Relax toward the potential's ground state by damped stepping.

    The same split scheme with the phase factors turned into decays;
    renormalized every step. Used as an independent eigenstate builder.
    """
    hbar, m = constants.hbar, constants.mass
    half_kick = np.exp(-0.5 * v.values * dt / hbar)
    drift = np.exp(-0.5 * hbar * grid.k**2 * dt / m)
    psi = np.exp(-grid.x**2) if psi0 is None else np.asarray(psi0, dtype=complex)
    for _ in range(steps):
        psi = half_kick * psi
        psi = np.fft.ifft(drift * np.fft.fft(psi))
        psi = half_kick * psi
        psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return HybridWavefunction(grid, psi, constants)


def _roll_gradient(f: np.ndarray, dx: float) -> np.ndarray:
    """Periodic central difference, exact for linear and quadratic data."""
    return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dx)


def _roll_laplacian(f: np.ndarray, dx: float) -> np.ndarray:
    """Periodic 3-point second difference."""
    return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / (dx * dx)


def spectral_laplacian(grid: Grid1D, f: np.ndarray) -> np.ndarray:
    return np.fft.ifft(-(grid.k**2) * np.fft.fft(f))


def spectral_gradient(grid: Grid1D, f: np.ndarray) -> np.ndarray:
    return np.fft.ifft(1j * grid.k * np.fft.fft(f))


@dataclass(frozen=True)
class TermDecomposition:
    """The four decomposition terms against the direct spectral Laplacian."""

    terms: dict[str, np.ndarray]
    direct: np.ndarray
    nodes: np.ndarray
    residual_max: float

    @property
    def term_norms(self) -> dict[str, float]:
        keep = ~self.nodes
        return {name: float(np.max(np.abs(t[keep]))) for name, t in self.terms.items()}


def term_decomposition_residual(w: HybridWavefunction) -> TermDecomposition:
    """Check the four-term expansion of -(hbar^2/2m) lap(psi) pointwise.

    Phase derivatives are built from wrapped local differences
    arg(psi[j+1] conj(psi[j])), which equal the true action increments
    wherever the per-cell phase step stays under half a turn, so no
    global unwrap enters. Amplitude and phase sides use second-order
    stencils; the reference Laplacian is spectral. Nodal cells (and their
    immediate neighbors, whose stencils touch a node) are excluded and
    reported in the mask.
    """
    hbar, m = w.constants.hbar, w.constants.mass
    dx = w.grid.dx
    psi = w.psi
    a = np.abs(psi)
    nodes = a < AMPLITUDE_FLOOR * a.max()
    nodes = nodes | np.roll(nodes, 1) | np.roll(nodes, -1)

    dtheta_fwd = np.angle(np.roll(psi, -1) * np.conj(psi))  # phase step over [j, j+1]
    s_x = hbar * (dtheta_fwd + np.roll(dtheta_fwd, 1)) / (2.0 * dx)
    s_xx = hbar * (dtheta_fwd - np.roll(dtheta_fwd, 1)) / (dx * dx)
    a_x = _roll_gradient(a, dx)
    a_xx = _roll_laplacian(a, dx)
    unit = psi / np.where(nodes, 1.0, a)

    terms = {
        "kinetic_phase": psi * s_x**2 / (2.0 * m),
        "phase_curvature": -(0.5j * hbar / m) * psi * s_xx,
        "cross": -(1j * hbar / m) * unit * s_x * a_x,
        "amplitude_curvature": -(hbar * hbar / (2.0 * m)) * unit * a_xx,
    }
    direct = -(hbar * hbar / (2.0 * m)) * spectral_laplacian(w.grid, psi)
    total = sum(terms.values())
    keep = ~nodes
    residual = float(np.max(np.abs(total[keep] - direct[keep]))) if keep.any() else float("nan")
    return TermDecomposition(terms=terms, direct=direct, nodes=nodes, residual_max=residual)


def probability_current(w: HybridWavefunction) -> np.ndarray:
    """J = (hbar/m) Im(conj(psi) dpsi/dx), spectral derivative."""
    dpsi = spectral_gradient(w.grid, w.psi)
    return w.constants.hbar / w.constants.mass * np.imag(np.conj(w.psi) * dpsi)


def continuity_residual(before: HybridWavefunction, after: HybridWavefunction, dt: float) -> float:
    """RMS of d(rho)/dt + div J between two consecutive snapshots.

    Time derivative by centered difference of the two snapshots, current
    by the midpoint average, divergence spectral; second-order accurate
    in dt, so halving (dt, dx) cuts the residual fourfold for smooth
    evolutions.
    """
    if before.grid != after.grid:
        raise ValueError("snapshots live on different grids")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    rho_dot = (np.abs(after.psi) ** 2 - np.abs(before.psi) ** 2) / dt
    j_mid = 0.5 * (probability_current(before) + probability_current(after))
    div_j = np.real(spectral_gradient(before.grid, j_mid))
    r = rho_dot + div_j
    return float(np.sqrt(np.mean(r**2)))


def amplitude_diffusion_step(
    grid: Grid1D, a: np.ndarray, dt: float, constants: PhysConstants = PhysConstants()
) -> np.ndarray:
    """Advance da/dt = (i hbar / 2m) lap(a) spectrally over one step.

    This is free kinetic evolution of the wave amplitude: an imaginary
    diffusion constant hbar/2m. The integral of |a|^2 is conserved.
    """
    factor = np.exp(-0.5j * constants.hbar * grid.k**2 * dt / constants.mass)
    return np.fft.ifft(factor * np.fft.fft(np.asarray(a, dtype=complex)))


def dephasing_term(
    grid: Grid1D, s: np.ndarray, constants: PhysConstants = PhysConstants()
) -> np.ndarray:
    """(i hbar / 2m) lap(S): the concentration of action that drives phase
    spreading beyond the classical Hamilton-Jacobi flow.

    S is a plain real field (not necessarily periodic), so the Laplacian
    uses nested second-order differences, exact for quadratic actions.
    """
    s = np.asarray(s, dtype=float)
    s_xx = np.gradient(np.gradient(s, grid.dx, edge_order=2), grid.dx, edge_order=2)
    return 0.5j * constants.hbar / constants.mass * s_xx


class WkbField(NamedTuple):
    values: np.ndarray
    defined: np.ndarray


def wkb_classicality(
    grid: Grid1D,
    p: np.ndarray,
    constants: PhysConstants = PhysConstants(),
    p_floor_rel: float = 1e-8,
) -> WkbField:
    """(hbar / p^2) |dp/dx| pointwise; small values mark classical regions.

    Undefined where |p| drops below p_floor_rel * max|p|; those points are
    masked out in `defined` and carry NaN.
    """
    p = np.asarray(p, dtype=float)
    defined = np.abs(p) >= p_floor_rel * np.max(np.abs(p))
    dp = np.gradient(p, grid.dx, edge_order=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = constants.hbar * np.abs(dp) / np.square(p)
    vals = np.where(defined, vals, np.nan)
    return WkbField(vals, defined)


def packet_moments(w: HybridWavefunction) -> tuple[float, float]:
    """(mean, variance) of the position density |psi|^2."""
    rho = np.abs(w.psi) ** 2
    rho = rho / (rho.sum() * w.grid.dx)
    mean = float(np.sum(w.grid.x * rho) * w.grid.dx)
    var = float(np.sum((w.grid.x - mean) ** 2 * rho) * w.grid.dx)
    return mean, var


def free_gaussian_width(sigma0: float, t: float, constants: PhysConstants = PhysConstants()) -> float:
    """Closed-form width of a freely spreading Gaussian density."""
    rate = constants.hbar * t / (2.0 * constants.mass * sigma0**2)
    return sigma0 * np.sqrt(1.0 + rate**2)
