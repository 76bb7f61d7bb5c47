"""Split-step evolution and the amplitude/phase term bookkeeping.

Oracles: the freely spreading Gaussian width (closed form), the
harmonic ground state (independently built by imaginary-time
relaxation), and exact finite-difference identities on quadratic data.
"""
import numpy as np
import pytest

from actionwave.core import PhysConstants
from actionwave.schrodinger import (
    AMPLITUDE_FLOOR,
    Grid1D,
    HybridWavefunction,
    PotentialField,
    amplitude_diffusion_step,
    continuity_residual,
    dephasing_term,
    evolve,
    free_gaussian_width,
    free_potential,
    gaussian_packet,
    harmonic_potential,
    imaginary_time_relax,
    madelung_decompose,
    packet_moments,
    probability_current,
    stable_dt,
    term_decomposition_residual,
    wkb_classicality,
)

GRID = Grid1D(-20.0, 20.0, 1024)


def chirped_packet(grid: Grid1D) -> HybridWavefunction:
    # curved wavefronts: every decomposition term is nonzero
    x = grid.x
    psi = np.exp(-(x**2) / (4.0 * 1.2**2) + 1j * (1.5 * x + 0.35 * x**2))
    return HybridWavefunction(grid, psi).normalized()


class TestGrid:
    def test_geometry(self):
        g = Grid1D(-2.0, 2.0, 16)
        assert g.length == 4.0
        assert g.dx == 0.25
        assert g.x[0] == -2.0
        assert g.x[-1] == pytest.approx(2.0 - 0.25)
        assert len(g.x) == 16

    def test_wavenumbers(self):
        g = Grid1D(-2.0, 2.0, 16)
        assert np.array_equal(g.k, 2.0 * np.pi * np.fft.fftfreq(16, d=0.25))

    def test_refined(self):
        assert GRID.refined().n_points == 2048
        assert GRID.refined(4).n_points == 4096

    def test_validation(self):
        with pytest.raises(ValueError):
            Grid1D(-1.0, 1.0, 8)
        with pytest.raises(ValueError):
            Grid1D(1.0, -1.0, 64)


class TestPotentials:
    def test_free_is_zero(self):
        assert not np.any(free_potential(GRID).values)

    def test_harmonic_values(self):
        g = Grid1D(-2.0, 2.0, 16)
        v = harmonic_potential(g, 3.0, PhysConstants(mass=2.0))
        assert np.allclose(v.values, 0.5 * 2.0 * 9.0 * g.x**2)

    def test_validation(self):
        with pytest.raises(ValueError):
            PotentialField(GRID, np.zeros(3))
        bad = np.zeros(GRID.n_points)
        bad[0] = np.inf
        with pytest.raises(ValueError):
            PotentialField(GRID, bad)


class TestGaussianPacket:
    def test_normalized(self):
        w = gaussian_packet(GRID, x0=1.0, sigma0=0.8, k0=2.0)
        assert w.norm == pytest.approx(1.0, abs=1e-12)

    def test_moments(self):
        w = gaussian_packet(GRID, x0=-2.0, sigma0=1.3)
        mean, var = packet_moments(w)
        assert mean == pytest.approx(-2.0, abs=1e-9)
        assert var == pytest.approx(1.3**2, rel=1e-9)

    def test_carrier_momentum_in_current(self):
        w = gaussian_packet(GRID, k0=1.5)
        j = probability_current(w)
        rho = np.abs(w.psi) ** 2
        # J = (hbar k0 / m) rho for a uniform-phase-gradient packet
        core = rho > 1e-6 * rho.max()
        assert np.allclose(j[core] / rho[core], 1.5, rtol=1e-6)


class TestStableDt:
    def test_formula(self):
        k_ny = np.pi / GRID.dx
        assert stable_dt(GRID) == pytest.approx((np.pi / 4.0) * 2.0 / k_ny**2)

    def test_mass_scaling(self):
        assert stable_dt(GRID, PhysConstants(mass=3.0)) == pytest.approx(3.0 * stable_dt(GRID))


class TestMadelung:
    def test_recomposition(self):
        w = chirped_packet(GRID)
        f = madelung_decompose(w)
        rebuilt = f.amplitude * np.exp(1j * f.action)
        keep = ~f.nodes
        assert np.max(np.abs(rebuilt[keep] - w.psi[keep])) < 1e-12

    def test_plane_wave_action_is_linear(self):
        k0 = 2.0 * np.pi * 8 / GRID.length  # commensurate mode
        w = HybridWavefunction(GRID, np.exp(1j * k0 * GRID.x))
        f = madelung_decompose(w)
        expected = k0 * (GRID.x - GRID.x[0]) + f.action[0]
        assert np.max(np.abs(f.action - expected)) < 1e-9

    def test_sign_change_is_flagged(self):
        psi = GRID.x * np.exp(-(GRID.x**2))
        f = madelung_decompose(HybridWavefunction(GRID, psi))
        mid = np.argmin(np.abs(GRID.x))
        assert f.nodes[mid]
        # far tails are below the amplitude floor too
        assert f.nodes[0] and f.nodes[-1]


class TestEvolve:
    def test_zero_steps_is_identity(self):
        w = gaussian_packet(GRID)
        v = free_potential(GRID)
        assert np.array_equal(evolve(w, v, 1e-3, 0).psi, w.psi)
        assert np.array_equal(evolve(w, v, 0.0, 10).psi, w.psi)

    def test_norm_conserved(self):
        w = gaussian_packet(GRID, sigma0=0.9, k0=1.0)
        v = harmonic_potential(GRID, 1.0)
        out = evolve(w, v, 1e-3, 2000)
        assert abs(out.norm - 1.0) < 1e-11

    def test_free_dispersion_matches_closed_form(self):
        w = gaussian_packet(GRID, sigma0=1.0)
        t = 3.0
        out = evolve(w, free_potential(GRID), 2e-3, 1500)
        _, var = packet_moments(out)
        assert np.sqrt(var) == pytest.approx(free_gaussian_width(1.0, t), rel=1e-9)

    def test_ground_state_is_stationary(self):
        v = harmonic_potential(GRID, 1.0)
        w0 = imaginary_time_relax(GRID, v, steps=4000, dt=2e-3)
        wt = evolve(w0, v, 1e-3, 2000)
        overlap = abs(np.sum(np.conj(w0.psi) * wt.psi) * GRID.dx)
        assert overlap == pytest.approx(1.0, abs=1e-10)

    def test_constant_shift_is_a_global_phase(self):
        w = gaussian_packet(GRID, sigma0=0.8, k0=0.5)
        v = harmonic_potential(GRID, 1.0)
        c = 2.7
        shifted = PotentialField(GRID, v.values + c)
        dt, steps = 1e-3, 200
        a = evolve(w, v, dt, steps)
        b = evolve(w, shifted, dt, steps)
        realigned = b.psi * np.exp(1j * c * dt * steps)
        assert np.max(np.abs(realigned - a.psi)) < 1e-12

    def test_grid_mismatch(self):
        w = gaussian_packet(GRID)
        with pytest.raises(ValueError):
            evolve(w, free_potential(GRID.refined()), 1e-3, 1)

    def test_non_finite_field_aborts(self):
        psi = gaussian_packet(GRID).psi.copy()
        psi[0] = np.inf
        w = HybridWavefunction(GRID, psi)
        with np.errstate(invalid="ignore"), pytest.raises(FloatingPointError):
            evolve(w, free_potential(GRID), 1e-3, 1)


class TestImaginaryTimeRelax:
    def test_harmonic_ground_state(self):
        v = harmonic_potential(GRID, 1.0)
        w0 = imaginary_time_relax(GRID, v, steps=4000, dt=2e-3)
        _, var = packet_moments(w0)
        assert var == pytest.approx(0.5, abs=1e-5)  # hbar / (2 m omega)
        assert w0.norm == pytest.approx(1.0, abs=1e-12)

    def test_ground_energy(self):
        v = harmonic_potential(GRID, 1.0)
        w0 = imaginary_time_relax(GRID, v, steps=4000, dt=2e-3)
        kin = np.real(
            np.sum(np.conj(w0.psi) * np.fft.ifft(0.5 * GRID.k**2 * np.fft.fft(w0.psi)))
            * GRID.dx
        )
        pot = float(np.sum(v.values * np.abs(w0.psi) ** 2) * GRID.dx)
        assert kin + pot == pytest.approx(0.5, abs=1e-9)


class TestTermDecomposition:
    def test_term_names(self):
        td = term_decomposition_residual(chirped_packet(GRID))
        assert set(td.terms) == {
            "kinetic_phase",
            "phase_curvature",
            "cross",
            "amplitude_curvature",
        }
        assert set(td.term_norms) == set(td.terms)

    def test_second_order_convergence(self):
        residuals = []
        for n in (256, 512, 1024, 2048):
            g = Grid1D(-20.0, 20.0, n)
            residuals.append(term_decomposition_residual(chirped_packet(g)).residual_max)
        for coarse, fine in zip(residuals, residuals[1:]):
            assert coarse / fine > 3.5  # halving dx must cut the gap ~4x

    def test_plane_wave_is_pure_kinetic_phase(self):
        k0 = 2.0 * np.pi * 16 / GRID.length
        psi = np.exp(1j * k0 * GRID.x) / np.sqrt(GRID.length)
        td = term_decomposition_residual(HybridWavefunction(GRID, psi))
        assert td.residual_max < 1e-10
        # constant amplitude: the two amplitude-bearing terms vanish
        assert td.term_norms["cross"] < 1e-10
        assert td.term_norms["amplitude_curvature"] < 1e-10
        # |psi| = 1/sqrt(L), s_x = hbar k0: the term has modulus k0^2/(2 sqrt(L))
        assert td.term_norms["kinetic_phase"] == pytest.approx(
            0.5 * k0**2 / np.sqrt(GRID.length), rel=1e-6
        )

    def test_nodes_are_masked(self):
        psi = GRID.x * np.exp(-(GRID.x**2) / 4.0)
        td = term_decomposition_residual(HybridWavefunction(GRID, psi).normalized())
        assert td.nodes.any()
        assert np.isfinite(td.residual_max)


class TestContinuity:
    def test_residual_scales_second_order(self):
        w = gaussian_packet(GRID, sigma0=1.2, k0=0.8)
        v = harmonic_potential(GRID, 1.0)
        res = []
        for dt in (2e-3, 1e-3):
            after = evolve(w, v, dt, 1)
            res.append(continuity_residual(w, after, dt))
        assert res[0] < 1e-6
        assert 3.5 < res[0] / res[1] < 4.5

    def test_validation(self):
        w = gaussian_packet(GRID)
        w2 = gaussian_packet(GRID.refined())
        with pytest.raises(ValueError):
            continuity_residual(w, w2, 1e-3)
        with pytest.raises(ValueError):
            continuity_residual(w, w, 0.0)


class TestDiffusionAndDephasing:
    def test_diffusion_step_is_free_kinetic_evolution(self):
        a = np.exp(-(GRID.x**2) / 4.0)
        w = HybridWavefunction(GRID, a.astype(complex))
        dt = 1e-3
        via_evolve = evolve(w, free_potential(GRID), dt, 1).psi
        direct = amplitude_diffusion_step(GRID, a, dt)
        assert np.max(np.abs(direct - via_evolve)) < 1e-14

    def test_density_integral_conserved(self):
        a = np.exp(-(GRID.x**2) / 2.0)
        out = amplitude_diffusion_step(GRID, a, 5e-3)
        assert np.sum(np.abs(out) ** 2) == pytest.approx(np.sum(a**2), rel=1e-12)

    def test_dephasing_exact_on_quadratic_action(self):
        s = 0.3 * GRID.x**2 + 0.1 * GRID.x + 2.0
        out = dephasing_term(GRID, s)
        assert np.allclose(out, 0.5j * 0.6, atol=1e-10)

    def test_dephasing_mass_scaling(self):
        s = GRID.x**2
        heavy = dephasing_term(GRID, s, PhysConstants(mass=4.0))
        light = dephasing_term(GRID, s)
        assert np.allclose(heavy, light / 4.0, atol=1e-12)


class TestWkb:
    def test_linear_momentum_profile(self):
        g = Grid1D(1.0, 5.0, 256)
        p = 2.0 + 0.5 * g.x
        out = wkb_classicality(g, p)
        assert np.all(out.defined)
        assert np.allclose(out.values, 0.5 / p**2, rtol=1e-10)

    def test_zero_crossing_masked(self):
        g = Grid1D(-1.0, 1.0, 256)
        p = g.x.copy()
        out = wkb_classicality(g, p)
        mid = np.argmin(np.abs(g.x))
        assert not out.defined[mid]
        assert np.isnan(out.values[mid])
        assert np.isfinite(out.values[out.defined]).all()
