"""Event-by-event stochastic sampler.

Implements:
    - BranchSet: the labeled dynamical possibilities of one stage with
      complex wave amplitudes, sum |a_i|^2 = 1.
    - HistoryRecord: one stochastic history. The particle takes exactly one
      branch; waves co-propagate in every branch, taken or not.
    - EnsembleStats: outcome counts with frequencies and standard errors;
      merging is a commutative monoid so partial ensembles combine freely.
    - Pipeline: source branch set -> per-branch phase advance -> optional
      unitary recombination -> terminal detection.
    - run_ensemble / run_event / sample_history: vectorized and scalar
      execution of the pipeline under the counter-based draw contract
      (draw j of event k depends only on (seed, k, j)).
    - born_convergence: frequency-error scaling against the analytic
      branch probabilities over a ladder of ensemble sizes.

Draw layout: an event consumes draws_per_event consecutive uniforms;
draw 0 picks the taken branch, draw 1 (when a recombiner is present)
picks the detected outcome from the interfered wave weights. Outcome
statistics are set by the waves alone, so the two draws are independent,
and changing phase settings can never change which branch was taken.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import uniform_block

NORM_TOL = 1e-12
UNITARITY_TOL = 1e-10
_CHUNK_EVENTS = 1 << 20


class NonUnitaryError(ValueError):
    """A recombiner failed the norm-preservation check."""


@dataclass(frozen=True)
class BranchSet:
    """Labeled branches with complex amplitudes, sum |a_i|^2 = 1."""

    labels: tuple[str, ...]
    amplitudes: np.ndarray

    def __init__(self, branches: Sequence[tuple[str, complex]]):
        labels = tuple(str(lbl) for lbl, _ in branches)
        amps = np.asarray([a for _, a in branches], dtype=complex)
        if len(labels) == 0:
            raise ValueError("a branch set needs at least one branch")
        if len(set(labels)) != len(labels):
            raise ValueError(f"branch labels must be unique, got {labels}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"branch amplitudes must satisfy sum |a|^2 = 1, got {norm!r}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class HistoryRecord:
    """One history: the single taken branch plus all co-propagating phases.

    wave_phases always has one entry per branch, including branches the
    particle did not take. particle_label tracks the particle's internal
    state (it can be flipped by local interactions in the taken branch
    only); particle_energy_shift logs energy exchanged with such devices.
    """

    event_index: int
    branch_labels: tuple[str, ...]
    branch_amplitudes: tuple[complex, ...]
    wave_phases: tuple[float, ...]
    taken_branch: str
    particle_label: str = ""
    particle_energy_shift: float = 0.0

    def __post_init__(self) -> None:
        if self.taken_branch not in self.branch_labels:
            raise ValueError(f"taken branch {self.taken_branch!r} not in {self.branch_labels}")
        if len(self.wave_phases) != len(self.branch_labels):
            raise ValueError("wave_phases must cover every branch")
        if len(self.branch_amplitudes) != len(self.branch_labels):
            raise ValueError("branch_amplitudes must cover every branch")
        if self.particle_label == "":
            object.__setattr__(self, "particle_label", self.taken_branch)


@dataclass(frozen=True)
class EnsembleStats:
    """Outcome counts with derived frequencies and binomial standard errors."""

    labels: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (len(self.labels),):
            raise ValueError("counts must have one entry per label")
        if np.any(c < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.total

    @property
    def std_errors(self) -> np.ndarray:
        p = self.frequencies
        return np.sqrt(p * (1.0 - p) / self.total)

    def frequency(self, label: str) -> float:
        return float(self.frequencies[self.labels.index(label)])

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        if self.labels != other.labels:
            raise ValueError(f"label mismatch: {self.labels} vs {other.labels}")
        return EnsembleStats(self.labels, self.counts + other.counts)


def sample_branch(b: BranchSet, rng) -> str:
    """Draw the one branch the particle takes, probability |a_k|^2.

    rng may be an RngStream (its event's first stride-1 draw is used) or a
    uniform float in [0, 1) supplied by a pipeline. Boundary draws that
    land exactly on a cumulative edge resolve to the lower-indexed branch.
    """
    if hasattr(rng, "seed"):
        u = float(uniform_block(rng.seed, rng.event_index, 1, 1)[0, 0])
    else:
        u = float(rng)
    cum = np.cumsum(b.probabilities)
    idx = int(np.searchsorted(cum, u, side="left"))
    return b.labels[min(idx, len(b) - 1)]


def evolve_waves(h: HistoryRecord, phase_increments: Sequence[float]) -> HistoryRecord:
    """Advance every branch phase independently; the taken branch is untouched.

    Waves carry action only, no energy or momentum, so propagation never
    feeds back on the particle's branch.
    """
    if len(phase_increments) != len(h.branch_labels):
        raise ValueError(
            f"expected {len(h.branch_labels)} increments, got {len(phase_increments)}"
        )
    new_phases = tuple(p + d for p, d in zip(h.wave_phases, phase_increments))
    return replace(h, wave_phases=new_phases)


def recombine(
    h: HistoryRecord, output_basis: Sequence[tuple[str, Sequence[complex]]]
) -> BranchSet:
    """Interfere the branch waves through a unitary map onto output labels.

    Output amplitude for label j is sum_i proj_j[i] * a_i * exp(i phase_i).
    Norm drift beyond 1e-10 marks a non-unitary map and raises; the exact
    result is renormalized to keep downstream Born weights clean.
    """
    values = np.asarray(h.branch_amplitudes, dtype=complex) * np.exp(
        1j * np.asarray(h.wave_phases)
    )
    out_labels = tuple(lbl for lbl, _ in output_basis)
    proj = np.asarray([row for _, row in output_basis], dtype=complex)
    if proj.shape != (len(out_labels), len(h.branch_labels)):
        raise ValueError("projection rows must match the branch count")
    out = proj @ values
    norm = float(np.sum(np.abs(out) ** 2))
    if abs(norm - 1.0) > UNITARITY_TOL:
        raise NonUnitaryError(f"recombiner norm drift {abs(norm - 1.0):.3e} exceeds 1e-10")
    out = out / np.sqrt(norm)
    return BranchSet(list(zip(out_labels, out)))


@dataclass(frozen=True)
class Pipeline:
    """Branch pipeline: source -> phase advance -> optional recombiner.

    output_basis None means the detector reads the branch basis directly,
    so the outcome is the taken branch itself (one draw per event).
    With a recombiner the outcome is drawn from the interfered weights
    (two draws per event).
    """

    initial: BranchSet
    phase_increments: tuple[float, ...] = ()
    output_basis: tuple[tuple[str, tuple[complex, ...]], ...] | None = None

    def __post_init__(self) -> None:
        if not self.phase_increments:
            object.__setattr__(self, "phase_increments", (0.0,) * len(self.initial))
        if len(self.phase_increments) != len(self.initial):
            raise ValueError("phase_increments must cover every branch")

    @property
    def draws_per_event(self) -> int:
        return 1 if self.output_basis is None else 2

    def final_branches(self) -> BranchSet:
        """Branch set at the detector (recombined, or the source itself)."""
        if self.output_basis is None:
            return self.initial
        h = HistoryRecord(
            event_index=0,
            branch_labels=self.initial.labels,
            branch_amplitudes=tuple(self.initial.amplitudes),
            wave_phases=self.phase_increments,
            taken_branch=self.initial.labels[0],
        )
        return recombine(h, self.output_basis)

    def outcome_labels(self) -> tuple[str, ...]:
        return self.final_branches().labels


def run_event(p: Pipeline, seed: int, event_index: int) -> tuple[HistoryRecord, str]:
    """One history and its detected outcome, reproducible in (seed, event)."""
    u = uniform_block(seed, event_index, 1, p.draws_per_event)[0]
    taken = sample_branch(p.initial, u[0])
    h = HistoryRecord(
        event_index=event_index,
        branch_labels=p.initial.labels,
        branch_amplitudes=tuple(p.initial.amplitudes),
        wave_phases=(0.0,) * len(p.initial),
        taken_branch=taken,
    )
    h = evolve_waves(h, p.phase_increments)
    if p.output_basis is None:
        return h, taken
    final = recombine(h, p.output_basis)
    outcome = sample_branch(final, u[1])
    return h, outcome


def sample_history(p: Pipeline, seed: int, event_index: int) -> HistoryRecord:
    """The propagation record of one event (before terminal detection)."""
    return run_event(p, seed, event_index)[0]


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else ACTIONWAVE_THREADS (0 = auto), else 1."""
    if workers is None:
        env = os.environ.get("ACTIONWAVE_THREADS", "").strip()
        if env == "":
            return 1
        try:
            workers = int(env)
        except ValueError:
            raise ValueError(f"ACTIONWAVE_THREADS must be an integer, got {env!r}") from None
    if workers < 0:
        raise ValueError(f"worker count must be >= 0, got {workers}")
    if workers == 0:
        workers = os.cpu_count() or 1
    return workers


def _count_range(
    cum_initial: np.ndarray,
    cum_final: np.ndarray | None,
    n_outcomes: int,
    seed: int,
    first_event: int,
    n_events: int,
    draws: int,
) -> np.ndarray:
    counts = np.zeros(n_outcomes, dtype=np.int64)
    a = first_event
    stop = first_event + n_events
    while a < stop:
        n = min(_CHUNK_EVENTS, stop - a)
        u = uniform_block(seed, a, n, draws)
        if cum_final is None:
            idx = np.searchsorted(cum_initial, u[:, 0], side="left")
        else:
            idx = np.searchsorted(cum_final, u[:, 1], side="left")
        np.minimum(idx, n_outcomes - 1, out=idx)
        counts += np.bincount(idx, minlength=n_outcomes)
        a += n
    return counts


def run_ensemble(
    p: Pipeline,
    n_events: int,
    seed: int,
    workers: int | None = None,
    first_event: int = 0,
) -> EnsembleStats:
    """N independent histories, one definite outcome each, counts aggregated.

    Counts are identical for every worker count and chunking because each
    event's draws are addressed by (seed, event index) alone.
    """
    if n_events < 1:
        raise ValueError(f"n_events must be >= 1, got {n_events}")
    workers = resolve_workers(workers)
    cum_initial = np.cumsum(p.initial.probabilities)
    if p.output_basis is None:
        labels = p.initial.labels
        cum_final = None
    else:
        final = p.final_branches()
        labels = final.labels
        cum_final = np.cumsum(final.probabilities)
    n_out = len(labels)
    draws = p.draws_per_event

    if workers == 1 or n_events < 2 * _CHUNK_EVENTS:
        counts = _count_range(cum_initial, cum_final, n_out, seed, first_event, n_events, draws)
        return EnsembleStats(labels, counts)

    step = -(-n_events // workers)
    ranges = [
        (first_event + a, min(step, n_events - a)) for a in range(0, n_events, step)
    ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(
            lambda r: _count_range(cum_initial, cum_final, n_out, seed, r[0], r[1], draws),
            ranges,
        )
        counts = sum(parts, np.zeros(n_out, dtype=np.int64))
    return EnsembleStats(labels, counts)


@dataclass(frozen=True)
class BornConvergence:
    """Frequency-error ladder and the fitted log-log scaling slope."""

    sizes: tuple[int, ...]
    errors: tuple[float, ...]
    slope: float | None
    replicates: int = 1


def born_convergence(
    p: Pipeline,
    n_list: Sequence[int],
    seed: int,
    replicates: int = 1,
    workers: int | None = None,
) -> BornConvergence:
    """Max |frequency - probability| per ensemble size, with the fitted slope.

    Every (size, replicate) run reads a disjoint event range of the same
    seed, so the whole ladder is one reproducible draw layout. Replicate
    averaging tightens the error estimate without touching the scaling;
    the slope is the least-squares fit of log error against log N and sits
    at -1/2 for any non-degenerate branch distribution. Degenerate
    pipelines (some p in {0, 1}) report zero error and no slope.
    """
    probabilities = p.final_branches().probabilities
    sizes = [int(n) for n in n_list]
    offset = 0
    mean_errors = []
    for n in sizes:
        errs = []
        for _ in range(max(1, replicates)):
            stats = run_ensemble(p, n, seed, workers=workers, first_event=offset)
            offset += n
            errs.append(float(np.max(np.abs(stats.frequencies - probabilities))))
        mean_errors.append(float(np.mean(errs)))
    degenerate = bool(np.any(np.isclose(probabilities, 0.0)) or np.any(np.isclose(probabilities, 1.0)))
    slope = None
    if not degenerate and all(e > 0 for e in mean_errors) and len(sizes) >= 2:
        slope = float(np.polyfit(np.log10(sizes), np.log10(mean_errors), 1)[0])
    return BornConvergence(tuple(sizes), tuple(mean_errors), slope, max(1, replicates))
