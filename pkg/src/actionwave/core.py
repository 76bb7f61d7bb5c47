"""Shared numeric foundations.

Implements:
    - PhysConstants: the action scale hbar and the particle mass, kept
      symbolic in every formula so both natural units (hbar = 1) and
      dimensional configurations run unchanged.
    - ActionWave: a complex phase carrier amplitude * exp(i*phase) attached
      to a dynamical branch. A lone wave has unit modulus; the amplitude
      field exists so branch weights can ride along with the phase.
    - RngStream and the counter-based randomness contract: every uniform
      draw is addressed by (seed, event_index, draw_index) and generated
      with Philox counters, so draw j of event k has the same value no
      matter how an ensemble is ordered, chunked, or spread over workers.

Phases are accumulated unwrapped; wrap_phase is applied only when a value
is reported.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Philox

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhysConstants:
    """Action scale and mass used by every dynamical formula."""

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self) -> None:
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class ActionWave:
    """Phase carrier exp(i*phase) scaled by a non-negative branch weight."""

    phase: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be non-negative, got {self.amplitude}")


def wave_value(w: ActionWave) -> complex:
    """Complex value amplitude * (cos(phase) + i sin(phase))."""
    return complex(w.amplitude * np.cos(w.phase), w.amplitude * np.sin(w.phase))


def wrap_phase(phase: float | np.ndarray) -> float | np.ndarray:
    """Reduce a phase to [0, 2*pi). Used at output time only."""
    # np.mod of a tiny negative phase rounds up to exactly 2*pi; fold it back
    out = np.mod(phase, TWO_PI)
    out = np.where(out == TWO_PI, 0.0, out)
    return float(out) if np.isscalar(phase) or np.ndim(phase) == 0 else out


@dataclass(frozen=True)
class RngStream:
    """Address of one event's private block of uniform draws.

    The draws for event k depend only on (seed, k): each event owns a
    contiguous run of Philox outputs, so evaluation order and worker
    partitioning cannot change any value.
    """

    seed: int
    event_index: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if self.event_index < 0:
            raise ValueError(f"event_index must be non-negative, got {self.event_index}")


def uniform_block(
    seed: int, first_event: int, n_events: int, draws_per_event: int
) -> np.ndarray:
    """Uniforms in [0, 1) for events [first_event, first_event + n_events).

    Returns shape (n_events, draws_per_event). Event k's row is read from
    Philox raw outputs [k*D, (k+1)*D) for the given seed, with D the
    draws_per_event of the experiment, so any contiguous or ragged
    partition of an ensemble reproduces identical rows. The counter is
    fast-forwarded to the first needed 4-word block and the sub-block
    offset is discarded.
    """
    if n_events < 0:
        raise ValueError(f"n_events must be non-negative, got {n_events}")
    if draws_per_event < 1:
        raise ValueError(f"draws_per_event must be >= 1, got {draws_per_event}")
    if n_events == 0:
        return np.empty((0, draws_per_event))
    start = first_event * draws_per_event
    offset = start % 4
    bg = Philox(key=seed, counter=[start // 4, 0, 0, 0])
    raw = bg.random_raw(offset + n_events * draws_per_event)[offset:]
    u = (raw >> np.uint64(11)) * 2.0**-53
    return u.reshape(n_events, draws_per_event)


def event_uniforms(rng: RngStream, n: int) -> np.ndarray:
    """First n uniform draws of one event's block (stride n)."""
    return uniform_block(rng.seed, rng.event_index, 1, n)[0]


def uniform_phase(rng: RngStream) -> float:
    """One phase uniform on [0, 2*pi), deterministic in (seed, event_index)."""
    return TWO_PI * float(uniform_block(rng.seed, rng.event_index, 1, 1)[0, 0])
