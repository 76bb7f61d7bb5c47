"""Core primitives: wave values, phase wrapping, and the counter RNG.

The partition properties here are what the reproducibility guarantees
of the whole event engine stand on: an event's draws depend only on
(seed, event index, draws per event), never on how a run is chunked.
"""
import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.random import Generator, Philox

from actionwave.core import (
    TWO_PI,
    ActionWave,
    PhysConstants,
    RngStream,
    event_uniforms,
    uniform_block,
    uniform_phase,
    wave_value,
    wrap_phase,
)


class TestPhysConstants:
    def test_defaults(self):
        c = PhysConstants()
        assert c.hbar == 1.0 and c.mass == 1.0

    @pytest.mark.parametrize("kwargs", [{"hbar": 0.0}, {"hbar": -1.0}, {"mass": 0.0}, {"mass": -0.5}])
    def test_rejects_nonpositive(self, kwargs):
        with pytest.raises(ValueError):
            PhysConstants(**kwargs)


class TestActionWave:
    def test_wave_value_at_zero_phase(self):
        assert wave_value(ActionWave(0.0)) == 1.0 + 0.0j

    def test_negative_amplitude_rejected(self):
        with pytest.raises(ValueError):
            ActionWave(0.3, amplitude=-0.1)

    @given(
        phase=st.floats(-50.0, 50.0),
        amplitude=st.floats(0.0, 10.0),
    )
    def test_modulus_is_amplitude(self, phase, amplitude):
        w = wave_value(ActionWave(phase, amplitude))
        assert abs(w) == pytest.approx(amplitude, abs=1e-12)

    def test_phase_spot_values(self):
        assert wave_value(ActionWave(np.pi / 2)) == pytest.approx(1j, abs=1e-15)
        assert wave_value(ActionWave(np.pi, 2.0)) == pytest.approx(-2.0, abs=1e-15)


class TestWrapPhase:
    def test_scalar(self):
        assert wrap_phase(-0.5) == pytest.approx(TWO_PI - 0.5)
        assert wrap_phase(TWO_PI) == 0.0
        assert wrap_phase(0.0) == 0.0

    @given(st.floats(-1e6, 1e6))
    def test_range(self, phi):
        w = wrap_phase(phi)
        assert 0.0 <= w < TWO_PI

    def test_array(self):
        out = wrap_phase(np.array([0.0, TWO_PI + 1.0, -np.pi]))
        assert np.allclose(out, [0.0, 1.0, np.pi])


class TestRngStream:
    def test_valid(self):
        s = RngStream(seed=7, event_index=3)
        assert s.seed == 7 and s.event_index == 3

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_bad_seed(self, seed):
        with pytest.raises(ValueError):
            RngStream(seed=seed)

    def test_bad_event_index(self):
        with pytest.raises(ValueError):
            RngStream(seed=0, event_index=-1)


class TestUniformBlock:
    def test_shape_and_range(self):
        u = uniform_block(seed=11, first_event=0, n_events=1000, draws_per_event=3)
        assert u.shape == (1000, 3)
        assert u.dtype == np.float64
        assert np.all(u >= 0.0) and np.all(u < 1.0)

    def test_empty(self):
        u = uniform_block(seed=0, first_event=5, n_events=0, draws_per_event=2)
        assert u.shape == (0, 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            uniform_block(seed=0, first_event=0, n_events=-1, draws_per_event=1)
        with pytest.raises(ValueError):
            uniform_block(seed=0, first_event=0, n_events=1, draws_per_event=0)
        with pytest.raises(ValueError):
            uniform_block(seed=-3, first_event=0, n_events=1, draws_per_event=1)

    def test_matches_philox_stream(self):
        # the counter layout must reproduce numpy's Philox stream exactly
        u = uniform_block(seed=42, first_event=0, n_events=5, draws_per_event=4)
        reference = Generator(Philox(key=42)).random(20)
        assert np.array_equal(u.ravel(), reference)

    def test_offset_reads_the_same_stream(self):
        whole = uniform_block(seed=9, first_event=0, n_events=200, draws_per_event=3)
        tail = uniform_block(seed=9, first_event=57, n_events=143, draws_per_event=3)
        assert np.array_equal(tail, whole[57:])

    def test_deterministic(self):
        a = uniform_block(seed=123, first_event=10, n_events=50, draws_per_event=2)
        b = uniform_block(seed=123, first_event=10, n_events=50, draws_per_event=2)
        assert np.array_equal(a, b)

    def test_seed_changes_stream(self):
        a = uniform_block(seed=0, first_event=0, n_events=10, draws_per_event=2)
        b = uniform_block(seed=1, first_event=0, n_events=10, draws_per_event=2)
        assert not np.array_equal(a, b)

    @given(
        seed=st.integers(0, 2**64 - 1),
        first=st.integers(0, 10_000),
        cuts=st.lists(st.integers(0, 300), min_size=2, max_size=2),
        draws=st.integers(1, 5),
    )
    def test_ragged_partition_invariance(self, seed, first, cuts, draws):
        # any split of [first, first + n) into contiguous pieces re-stacks
        # to the unsplit block
        n = 300
        a, b = sorted(cuts)
        whole = uniform_block(seed, first, n, draws)
        parts = [
            uniform_block(seed, first, a, draws),
            uniform_block(seed, first + a, b - a, draws),
            uniform_block(seed, first + b, n - b, draws),
        ]
        assert np.array_equal(np.vstack(parts), whole)

    @given(seed=st.integers(0, 2**32), k=st.integers(0, 5_000), draws=st.integers(1, 4))
    def test_single_event_equals_batch_row(self, seed, k, draws):
        row = uniform_block(seed, k, 1, draws)[0]
        batch = uniform_block(seed, 0, k + 1, draws)
        assert np.array_equal(row, batch[k])


class TestEventHelpers:
    def test_event_uniforms_matches_block(self):
        rng = RngStream(seed=5, event_index=17)
        u = event_uniforms(rng, 3)
        assert np.array_equal(u, uniform_block(5, 17, 1, 3)[0])

    def test_uniform_phase(self):
        rng = RngStream(seed=8, event_index=2)
        phi = uniform_phase(rng)
        assert phi == TWO_PI * uniform_block(8, 2, 1, 1)[0, 0]
        assert 0.0 <= phi < TWO_PI
