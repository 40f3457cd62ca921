"""Particle storage, initialization, and moment-estimation tests."""

import numpy as np
import pytest

from fprqmc.dynamics import GasModel
from fprqmc.ensemble import (Grid1D, InternalConsistencyError, ParticleEnsemble,
                             cell_partition, compute_moments, cut_plane_normal,
                             initialize_anisotropic_cut, initialize_maxwellian,
                             moments_by_cell, reassign_cells)
from fprqmc.rng import PseudoStream, SobolGenerator

GAS = GasModel.argon()
KT_OVER_M = GAS.kb_over_m * 300.0


def cut_syz_closed_form(angle_deg):
    """Half-normal covariance of the tilted cut after per-component rescaling.

    Cutting a standard Gaussian at the plane with unit normal n leaves
    covariance I - (2/pi) n n^T; rescaling each component to unit variance
    gives the off-diagonal (2/pi) s c / sqrt((1-(2/pi)s^2)(1-(2/pi)c^2)).
    """
    s, c = np.sin(np.deg2rad(angle_deg)), np.cos(np.deg2rad(angle_deg))
    f = 2.0 / np.pi
    return f * s * c / np.sqrt((1 - f * s * s) * (1 - f * c * c))


class TestComputeMoments:
    def test_single_particle(self):
        m = compute_moments(np.array([[3.0, -1.0, 2.0]]))
        assert np.array_equal(m.mean, [3.0, -1.0, 2.0])
        assert m.energy == 0.0
        assert np.all(m.stress == 0.0) and np.all(m.heat_flux == 0.0)

    def test_two_particle_hand_case(self):
        a = 7.0
        m = compute_moments(np.array([[a, 0.0, 0.0], [-a, 0.0, 0.0]]))
        assert np.allclose(m.mean, 0.0)
        assert m.energy == pytest.approx(a * a / 2)
        assert m.stress[0, 0] == pytest.approx(2 * a * a / 3)
        assert m.stress[1, 1] == pytest.approx(-a * a / 3)
        assert m.stress[2, 2] == pytest.approx(-a * a / 3)
        assert np.allclose(m.heat_flux, 0.0)

    def test_empty_cell_marker(self):
        assert compute_moments(np.empty((0, 3))) is None

    def test_maxwellian_energy(self):
        n = 2**16
        gen = np.random.default_rng(5)
        v = np.sqrt(KT_OVER_M) * gen.standard_normal((n, 3))
        m = compute_moments(v)
        target = 1.5 * KT_OVER_M
        bound = 3.0 * np.sqrt(1.5) * KT_OVER_M / np.sqrt(n)
        assert abs(m.energy - target) <= bound

    def test_trace_free_and_symmetric(self):
        v = np.random.default_rng(0).standard_normal((500, 3)) * [1.0, 2.0, 0.5]
        m = compute_moments(v)
        assert abs(np.trace(m.stress)) <= 1e-12 * m.energy
        assert np.allclose(m.stress, m.stress.T)

    def test_translation_consistency(self):
        rng = np.random.default_rng(1)
        v = rng.standard_normal((300, 3))
        w = np.array([10.0, -4.0, 2.5])
        m0, m1 = compute_moments(v), compute_moments(v + w)
        assert np.allclose(m1.mean, m0.mean + w, rtol=1e-12, atol=1e-12)
        assert m1.energy == pytest.approx(m0.energy, rel=1e-12)
        assert np.allclose(m1.stress, m0.stress, rtol=1e-10, atol=1e-12)
        assert np.allclose(m1.heat_flux, m0.heat_flux, rtol=1e-9, atol=1e-10)

    def test_rotation_consistency_energy(self):
        rng = np.random.default_rng(2)
        v = rng.standard_normal((400, 3)) * [1.0, 3.0, 0.2]
        th = 0.7
        rot = np.array([[np.cos(th), -np.sin(th), 0.0],
                        [np.sin(th), np.cos(th), 0.0],
                        [0.0, 0.0, 1.0]])
        assert compute_moments(v @ rot.T).energy == pytest.approx(
            compute_moments(v).energy, rel=1e-12)


class TestMomentsByCell:
    def test_matches_per_cell_computation(self):
        rng = np.random.default_rng(8)
        n, n_cells = 2000, 7
        v = rng.standard_normal((n, 3))
        cell = rng.integers(0, n_cells, n)
        cell[cell == 3] = 4  # leave cell 3 empty
        counts, mean, energy, stress, heat = moments_by_cell(v, cell, n_cells)
        for j in range(n_cells):
            sel = v[cell == j]
            if len(sel) == 0:
                assert counts[j] == 0 and np.isnan(energy[j])
                continue
            m = compute_moments(sel)
            assert counts[j] == m.count
            assert np.allclose(mean[j], m.mean, rtol=1e-12, atol=1e-14)
            assert energy[j] == pytest.approx(m.energy, rel=1e-12)
            assert np.allclose(stress[j], m.stress, rtol=1e-9, atol=1e-13)
            assert np.allclose(heat[j], m.heat_flux, rtol=1e-9, atol=1e-13)


class TestInitializeMaxwellian:
    def test_zero_temperature_collapses_to_bulk(self):
        bulk = np.array([5.0, 6.0, 7.0])
        v = initialize_maxwellian(64, 0.0, bulk,
                                  lambda n: PseudoStream(1).uniforms(n, 3), 0.0)
        assert np.allclose(v, bulk)

    def test_energy_matches_temperature(self):
        n = 2**18
        v = initialize_maxwellian(n, 300.0, np.zeros(3),
                                  lambda k: PseudoStream(2).uniforms(k, 3), KT_OVER_M)
        m = compute_moments(v)
        assert m.energy == pytest.approx(1.5 * KT_OVER_M, rel=0.01)

    def test_sobol_provider_mean_accuracy(self):
        n = 2**14
        gen = SobolGenerator(3)
        v = initialize_maxwellian(n, 300.0, np.zeros(3),
                                  lambda k: np.clip(gen.raw_block(k, start=1)
                                                    .astype(np.float64) / 2**32,
                                                    1e-12, 1 - 1e-12), KT_OVER_M)
        assert np.max(np.abs(v.mean(axis=0))) < 1e-3 * np.sqrt(KT_OVER_M)


class TestAnisotropicCut:
    def test_zero_angle_cuts_upper_half(self):
        # raw accepted z <= 0, so after the affine transform z is bounded by
        # (0 - mean_z)/std_z = sqrt((pi - 2)/ ... ) ~ 1.32
        out = initialize_anisotropic_cut(4096, 0.0, PseudoStream(3))
        assert out[:, 2].max() <= 1.35
        assert out[:, 2].min() < -2.5

    def test_exact_normalization(self):
        out = initialize_anisotropic_cut(513, 25.0, PseudoStream(4))
        assert np.max(np.abs(out.mean(axis=0))) < 1e-12
        assert np.max(np.abs(out.var(axis=0) - 1.0)) < 1e-12

    def test_deterministic(self):
        a = initialize_anisotropic_cut(256, 25.0, PseudoStream(5, (1,)))
        b = initialize_anisotropic_cut(256, 25.0, PseudoStream(5, (1,)))
        assert np.array_equal(a, b)

    def test_off_diagonal_stress_matches_half_normal_theory(self):
        n = 2**16
        target = cut_syz_closed_form(25.0)
        vals = []
        for seed in (10, 11, 12):
            out = initialize_anisotropic_cut(n, 25.0, PseudoStream(seed))
            vals.append(np.mean(out[:, 1] * out[:, 2]))
        se = 3.0 / np.sqrt(n)  # generous bound on the product-moment error
        for v in vals:
            assert v == pytest.approx(target, abs=se)
        # x-symmetric component stays within noise of zero
        assert abs(np.mean(out[:, 0] * out[:, 1])) < se

    def test_normal_vector(self):
        n = cut_plane_normal(0.0)
        assert np.allclose(n, [0, 0, 1])

    def test_needs_two(self):
        with pytest.raises(ValueError):
            initialize_anisotropic_cut(1, 25.0, PseudoStream(1))


class TestCells:
    def test_locate_boundaries(self):
        grid = Grid1D(10, 1.0)
        assert grid.locate(np.array([0.0]))[0] == 0
        assert grid.locate(np.array([1.0]))[0] == 9

    def test_reassign_matches_brute_force(self):
        grid = Grid1D(13, 2.5)
        rng = np.random.default_rng(9)
        x = rng.uniform(0, 2.5, 10**4)
        ens = ParticleEnsemble(np.column_stack([x, x * 0, x * 0]),
                               np.zeros((10**4, 3)), np.zeros(10**4, dtype=np.int64))
        cell = reassign_cells(ens, grid)
        brute = np.minimum((x / (2.5 / 13)).astype(int), 12)
        assert np.array_equal(cell, brute)
        assert np.bincount(cell, minlength=13).sum() == 10**4

    def test_out_of_domain_raises(self):
        grid = Grid1D(4, 1.0)
        ens = ParticleEnsemble(np.array([[-0.1, 0, 0]]), np.zeros((1, 3)),
                               np.zeros(1, dtype=np.int64))
        with pytest.raises(InternalConsistencyError):
            reassign_cells(ens, grid)

    def test_partition_is_stable_and_complete(self):
        rng = np.random.default_rng(4)
        cell = rng.integers(0, 5, 1000)
        order, starts, counts = cell_partition(cell, 5)
        assert np.array_equal(np.sort(order), np.arange(1000))
        for j in range(5):
            ids = order[starts[j]: starts[j] + counts[j]]
            assert np.all(cell[ids] == j)
            assert np.all(np.diff(ids) > 0)  # global order preserved

    def test_ensemble_validation_and_dump(self, tmp_path):
        with pytest.raises(ValueError):
            ParticleEnsemble(np.zeros((2, 3)), np.zeros((3, 3)),
                             np.zeros(3, dtype=np.int64))
        ens = ParticleEnsemble(np.zeros((2, 3)), np.ones((2, 3)),
                               np.zeros(2, dtype=np.int64))
        path = tmp_path / "snap.csv"
        ens.snapshot_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x,y,z,vx,vy,vz,cell"
        assert len(lines) == 3
