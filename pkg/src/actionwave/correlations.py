"""Two-particle experiments: momentum-correlated pair interference and
spin-singlet correlations, with the local-model baseline they are tested
against.

The source emits anti-correlated pairs. Each event is entirely in one of
the two joint configurations, (+,-) or (-,+), never a superposition of
them; the paired waves carry a shared random source parameter (phase phi
or emission point y_s) that cancels from every joint law but randomizes
every single-detector law.

Implements:
    - pair_local_intensity / pair_coincidence_rate: fringe laws
      1 + cos(dk (y - y_s)) and (1 + cos(dk (y1 - y2))) / 2.
    - simulate_pair: event-by-event pair positions. Singles wash out when
      the source extent covers many fringes; coincidences keep full
      visibility because the second wave is referenced to its partner.
      A mixing fraction breaks that pairing and degrades visibility
      toward the 1/2 floor of fully unpaired waves.
    - singlet_* : local probability given the source orientation, the
      phi-independent joint law, and the correlation -cos(ds * dtheta).
    - sample_pair_event / simulate_singlet: per-event realization drawn
      from the joint law (the shared phi alone fixes no local outcome
      pair; see the baseline below for the model that pretends it does).
    - chsh_statistic: S = |C(a,b) - C(a,b') + C(a',b) + C(a',b')|.
    - lhv_baseline_correlation: each side sampled independently from its
      local law with the partner's orientation anti-aligned; integrates
      to -cos(ds * dtheta) / 2, which caps its CHSH at 2.
    - singlet_basis_invariance: the antisymmetric pair state rebuilt in a
      rotated spin basis matches the original to rounding.
    - visibility_with_mixing: fringe visibility of the paired/unpaired
      mixture, evaluated numerically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core import TWO_PI, uniform_block

_PAIR_DRAWS = 4
_SINGLET_DRAWS = 3


@dataclass(frozen=True)
class PairSourceConfig:
    """Momentum-pair source: wavenumber difference, extent, detector spots."""

    delta_k: float = 1.0
    source_extent: float | None = None
    y1: float = 0.0
    y2: float = 0.0

    def __post_init__(self) -> None:
        if self.delta_k <= 0:
            raise ValueError(f"delta_k must be positive, got {self.delta_k}")
        if self.source_extent is None:
            # ten fringe periods: comfortably beyond the decorrelation bound
            object.__setattr__(self, "source_extent", 10.0 * TWO_PI / self.delta_k)
        if self.source_extent * self.delta_k < TWO_PI:
            raise ValueError(
                "source_extent * delta_k must be >= 2*pi so the source spans "
                f"at least one fringe, got {self.source_extent * self.delta_k}"
            )


@dataclass(frozen=True)
class SingletConfig:
    """Analyzer angles and the spin difference ds of the anti-correlated pair."""

    theta1: float = 0.0
    theta2: float = 0.0
    delta_s: float = 1.0

    def __post_init__(self) -> None:
        if self.delta_s <= 0:
            raise ValueError(f"delta_s must be positive, got {self.delta_s}")


@dataclass(frozen=True)
class PairEvent:
    """One emitted pair: shared source draw, definite joint state, outcomes."""

    source_phase: float
    joint_state: tuple[int, int]
    outcomes: tuple[int, int]

    def __post_init__(self) -> None:
        if self.joint_state not in ((1, -1), (-1, 1)):
            raise ValueError(f"joint_state must be (+1,-1) or (-1,+1), got {self.joint_state}")


def pair_local_intensity(y: float, y_s: float, c: PairSourceConfig) -> float:
    """Single-detector fringe 1 + cos(dk (y - y_s)) for emission point y_s."""
    return 1.0 + np.cos(c.delta_k * (y - y_s))


def pair_coincidence_rate(y1: float, y2: float, c: PairSourceConfig) -> float:
    """Joint rate (1 + cos(dk (y1 - y2))) / 2: the source point has cancelled."""
    return 0.5 * (1.0 + np.cos(c.delta_k * (y1 - y2)))


def singlet_local_probability(theta: float, phi: float, c: SingletConfig) -> float:
    """P(+1 at analyzer theta | source orientation phi) = 1/2 + cos(ds(theta-phi))/2."""
    return 0.5 + 0.5 * np.cos(c.delta_s * (theta - phi))


def singlet_joint_probabilities(c: SingletConfig) -> tuple[float, float]:
    """(P_opposite, P_same); the source orientation has cancelled exactly."""
    p_opp = 0.5 * (1.0 + np.cos(c.delta_s * (c.theta1 - c.theta2)))
    return p_opp, 1.0 - p_opp


def singlet_correlation(c: SingletConfig) -> float:
    """C = P_same - P_opposite = -cos(ds (theta1 - theta2))."""
    return -np.cos(c.delta_s * (c.theta1 - c.theta2))


def sample_pair_event(c: SingletConfig, rng) -> PairEvent:
    """One pair event: phi drawn, joint state drawn, outcomes from the joint law.

    The joint state is fixed at the source and analyzers never change it;
    they only set the outcome statistics. When the outcomes fall in the
    "opposite" class they realize the source's anti-correlated labels.
    """
    if hasattr(rng, "seed"):
        u = uniform_block(rng.seed, rng.event_index, 1, _SINGLET_DRAWS)[0]
    else:
        u = np.asarray(rng, dtype=float)
    phi = TWO_PI * u[0]
    s1 = 1 if u[1] < 0.5 else -1
    p_opp, _ = singlet_joint_probabilities(c)
    opposite = u[2] < p_opp
    o2 = -s1 if opposite else s1
    return PairEvent(source_phase=phi, joint_state=(s1, -s1), outcomes=(s1, o2))


SINGLET_CELLS = ("+-", "-+", "++", "--")


@dataclass(frozen=True)
class SingletRun:
    """Joint outcome counts of a singlet ensemble, cells (+-, -+, ++, --)."""

    config: SingletConfig
    counts: np.ndarray
    seed: int

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.total

    @property
    def correlation(self) -> float:
        f = self.frequencies
        return float(f[2] + f[3] - f[0] - f[1])

    @property
    def correlation_std_err(self) -> float:
        c = self.correlation
        return float(np.sqrt(max(1.0 - c * c, 0.0) / self.total))

    @property
    def opposite_fraction(self) -> float:
        f = self.frequencies
        return float(f[0] + f[1])

    @property
    def marginal1_plus(self) -> float:
        f = self.frequencies
        return float(f[0] + f[2])

    @property
    def marginal2_plus(self) -> float:
        f = self.frequencies
        return float(f[1] + f[2])


def simulate_singlet(
    c: SingletConfig, n_events: int, seed: int, first_event: int = 0
) -> SingletRun:
    """Vectorized singlet ensemble; cells counted as (+-, -+, ++, --)."""
    if n_events < 1:
        raise ValueError(f"n_events must be >= 1, got {n_events}")
    p_opp, _ = singlet_joint_probabilities(c)
    counts = np.zeros(4, dtype=np.int64)
    a, stop = first_event, first_event + n_events
    chunk = 1 << 20
    while a < stop:
        n = min(chunk, stop - a)
        u = uniform_block(seed, a, n, _SINGLET_DRAWS)
        s1_plus = u[:, 1] < 0.5
        opposite = u[:, 2] < p_opp
        # cell code: 0 "+-", 1 "-+", 2 "++", 3 "--"
        code = np.where(
            opposite, np.where(s1_plus, 0, 1), np.where(s1_plus, 2, 3)
        )
        counts += np.bincount(code, minlength=4)
        a += n
    return SingletRun(config=c, counts=counts, seed=seed)


def chsh_statistic(a, a_prime, b, b_prime, correlation_fn) -> float:
    """S = |C(a,b) - C(a,b') + C(a',b) + C(a',b')|."""
    return abs(
        correlation_fn(a, b)
        - correlation_fn(a, b_prime)
        + correlation_fn(a_prime, b)
        + correlation_fn(a_prime, b_prime)
    )


@dataclass(frozen=True)
class ChshRun:
    """Empirical CHSH: the four setting pairs, their correlations, and S."""

    settings: tuple[tuple[float, float], ...]
    correlations: tuple[float, ...]
    std_errors: tuple[float, ...]
    n_per_setting: tuple[int, ...]

    @property
    def statistic(self) -> float:
        c = self.correlations
        return abs(c[0] - c[1] + c[2] + c[3])

    @property
    def statistic_std_err(self) -> float:
        return float(np.sqrt(np.sum(np.square(self.std_errors))))


def simulate_chsh(
    a: float,
    a_prime: float,
    b: float,
    b_prime: float,
    n_total: int,
    seed: int,
    delta_s: float = 1.0,
) -> ChshRun:
    """Singlet ensembles at the four CHSH setting pairs, n_total events split.

    The four runs read disjoint event ranges of one seed, so the whole
    sweep is one reproducible draw layout.
    """
    pairs = ((a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime))
    n_each = [n_total // 4] * 4
    for i in range(n_total % 4):
        n_each[i] += 1
    cs, ses, offset = [], [], 0
    for (t1, t2), n in zip(pairs, n_each):
        run = simulate_singlet(SingletConfig(t1, t2, delta_s), n, seed, first_event=offset)
        offset += n
        cs.append(run.correlation)
        ses.append(run.correlation_std_err)
    return ChshRun(pairs, tuple(cs), tuple(ses), tuple(n_each))


def lhv_baseline_correlation(theta1: float, theta2: float, c: SingletConfig | None = None) -> float:
    """Correlation when each side samples its local law independently.

    The shared variable is the source orientation phi; the partner wave
    carries the opposite spin, so its local law is evaluated at phi
    shifted by half a turn of the spin argument. Averaging the product of
    the two (2P - 1) biases over one period of phi gives
    -cos(ds (theta1 - theta2)) / 2: an independent-outcome model reaches
    only half the paired-wave correlation.
    """
    if c is None:
        c = SingletConfig()
    ds = c.delta_s
    period = TWO_PI / ds
    anti = np.pi / ds

    def integrand(phi: float) -> float:
        b1 = 2.0 * singlet_local_probability(theta1, phi, c) - 1.0
        b2 = 2.0 * singlet_local_probability(theta2, phi + anti, c) - 1.0
        return b1 * b2

    val, _ = quad(integrand, 0.0, period, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val / period


def singlet_basis_invariance(angle: float, axis: tuple[float, float, float] = (0.0, 1.0, 0.0)) -> float:
    """Residual of the antisymmetric pair state rebuilt in a rotated basis.

    Rotating both spins by the same angle about any axis and forming
    (|+n,-n> - |-n,+n>)/sqrt(2) reproduces the original state up to a
    global phase; the returned residual is the max component deviation
    after phase alignment.
    """
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    n_sigma = n[0] * sx + n[1] * sy + n[2] * sz
    rot = np.cos(angle / 2.0) * np.eye(2) - 1j * np.sin(angle / 2.0) * n_sigma
    up = rot @ np.array([1.0, 0.0], dtype=complex)
    dn = rot @ np.array([0.0, 1.0], dtype=complex)
    rebuilt = (np.kron(up, dn) - np.kron(dn, up)) / np.sqrt(2.0)
    original = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)
    overlap = np.vdot(rebuilt, original)
    if abs(overlap) > 0:
        rebuilt = rebuilt * (overlap / abs(overlap))
    return float(np.max(np.abs(rebuilt - original)))


def _fringe_inverse_cdf(v: np.ndarray) -> np.ndarray:
    """Solve u + sin(u) = 2*pi*v - pi for u in [-pi, pi] (bisection).

    Inverts the CDF of the fringe density (1 + cos u) / (2 pi); the left
    side is strictly increasing, so 52 halvings pin u to ~2^-52 * 2*pi.
    """
    m = TWO_PI * v - np.pi
    lo = np.full_like(m, -np.pi)
    hi = np.full_like(m, np.pi)
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        below = mid + np.sin(mid) < m
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PairRun:
    """Visibility summary of a pair-interference ensemble."""

    config: PairSourceConfig
    mixing: float
    total: int
    coincidence_visibility: float
    coincidence_visibility_std_err: float
    singles_visibility_1: float
    singles_visibility_2: float


def _harmonic_visibility(phases: np.ndarray) -> tuple[float, float]:
    """First circular harmonic estimate of fringe visibility.

    For a fringe law (1 + V cos x) / (2 pi) the mean of exp(i x) is V/2,
    so 2 |mean| estimates V = (max - min) / (max + min) directly.
    """
    z = np.exp(1j * phases).mean()
    v = 2.0 * abs(z)
    se = 2.0 * np.sqrt(max(1.0 - abs(z) ** 2, 0.0) / phases.size)
    return float(v), float(se)


def simulate_pair(
    c: PairSourceConfig, n_events: int, seed: int, mixing: float = 0.0
) -> PairRun:
    """Event-by-event pair positions on the detection screen.

    Per event: emission point y_s uniform over the source extent; the
    first detection drawn from the fringe around y_s; the second drawn
    from the fringe around its partner's position (paired) or around y_s
    independently (unpaired, probability `mixing`). Singles visibility
    dies with source averaging; coincidence visibility survives pairing.
    """
    if n_events < 1:
        raise ValueError(f"n_events must be >= 1, got {n_events}")
    if not 0.0 <= mixing <= 1.0:
        raise ValueError(f"mixing must be in [0, 1], got {mixing}")
    dk = c.delta_k
    half = 0.5 * c.source_extent
    phase_diffs = np.empty(n_events)
    y1_phases = np.empty(n_events)
    y2_phases = np.empty(n_events)
    a, done, chunk = 0, 0, 1 << 20
    while done < n_events:
        n = min(chunk, n_events - done)
        u = uniform_block(seed, a, n, _PAIR_DRAWS)
        y_s = (u[:, 0] - 0.5) * 2.0 * half
        y1 = y_s + _fringe_inverse_cdf(u[:, 1]) / dk
        paired_y2 = y1 + _fringe_inverse_cdf(u[:, 2]) / dk
        unpaired_y2 = y_s + _fringe_inverse_cdf(u[:, 2]) / dk
        y2 = np.where(u[:, 3] < mixing, unpaired_y2, paired_y2)
        phase_diffs[done : done + n] = dk * (y1 - y2)
        y1_phases[done : done + n] = dk * y1
        y2_phases[done : done + n] = dk * y2
        a += n
        done += n
    v_coinc, se = _harmonic_visibility(phase_diffs)
    v1, _ = _harmonic_visibility(y1_phases)
    v2, _ = _harmonic_visibility(y2_phases)
    return PairRun(
        config=c,
        mixing=mixing,
        total=n_events,
        coincidence_visibility=v_coinc,
        coincidence_visibility_std_err=se,
        singles_visibility_1=v1,
        singles_visibility_2=v2,
    )


def visibility_with_mixing(q: float, c: PairSourceConfig | None = None, n_grid: int = 720) -> float:
    """Coincidence fringe visibility when a fraction q of events is unpaired.

    Numeric mixture: the paired fringe (1 + cos d)/(2 pi) is mixed with
    the unpaired coincidence law, itself the source average of two
    independent local fringes. Visibility is read off the mixture as
    (max - min) / (max + min) on a dense grid of the detector separation.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    d = np.linspace(-np.pi, np.pi, n_grid + 1)
    a = np.linspace(-np.pi, np.pi, 4096 + 1)
    paired = (1.0 + np.cos(d)) / TWO_PI
    # unpaired: both fringes hang on the shared source point, then average it out
    prod = (1.0 + np.cos(a)[None, :]) * (1.0 + np.cos(a[None, :] - d[:, None]))
    unpaired = np.trapezoid(prod, a, axis=1) / (TWO_PI * TWO_PI)
    mix = (1.0 - q) * paired + q * unpaired
    return float((mix.max() - mix.min()) / (mix.max() + mix.min()))


def source_averaged_visibility(c: PairSourceConfig) -> float:
    """Singles fringe visibility left after averaging over the source.

    A uniform emission line of extent E washes the local fringe
    cos(delta_k (y - y_s)) down by |sin(delta_k E / 2) / (delta_k E / 2)|,
    which hits an exact zero whenever E delta_k is a multiple of 2 pi.
    """
    half = 0.5 * c.delta_k * c.source_extent
    return float(abs(np.sin(half) / half))
