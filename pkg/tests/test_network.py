import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from harmonic_qrc.errors import DimensionMismatch, InvalidParameter, SamplingBudgetExhausted, UnstableHamiltonian
from harmonic_qrc.gaussian import is_symplectic, symplectic_form
from harmonic_qrc.network import (
    OMEGA0,
    NetworkSpec,
    assemble_blocks,
    assemble_joint,
    blocks_from_potential,
    coupled_blocks,
    joint_potential,
    laplacian,
    partition_blocks,
    potential_matrix,
    propagator,
    random_channel,
    random_reservoir,
)


def random_joint(rng, n, m, dt=None):
    res = random_reservoir(n, rng)
    g = rng.uniform(0, 0.2, size=(n, m))
    dt = dt if dt is not None else rng.uniform(1, 60)
    return res, g, dt


class TestPotential:
    def test_single(self):
        spec = NetworkSpec([OMEGA0], [[0.0]])
        assert np.allclose(potential_matrix(spec), [[0.0625]])

    def test_pair(self):
        g = 0.13
        spec = NetworkSpec([OMEGA0] * 2, [[0, g], [g, 0]])
        assert np.allclose(potential_matrix(spec), [[OMEGA0**2 + g, -g], [-g, OMEGA0**2 + g]])

    def test_laplacian_rows_sum_to_zero(self, rng):
        assert np.allclose(laplacian(random_reservoir(6, rng).couplings).sum(axis=1), 0)

    @pytest.mark.parametrize(
        "freqs,g,exc",
        [
            ([1.0, 1.0], [[0, 1], [0.5, 0]], InvalidParameter),
            ([1.0, 1.0], [[0, -1], [-1, 0]], InvalidParameter),
            ([0.0], [[0.0]], InvalidParameter),
            ([1.0], [[0, 0], [0, 0]], DimensionMismatch),
        ],
    )
    def test_bad_spec(self, freqs, g, exc):
        with pytest.raises(exc):
            NetworkSpec(freqs, g)

    def test_positive_definite_for_random_draws(self, rng):
        for _ in range(200):
            res, g, _ = random_joint(rng, int(rng.integers(1, 9)), int(rng.integers(1, 3)))
            v = potential_matrix(assemble_joint(res, g.shape[1], g))
            assert np.linalg.eigvalsh(v).min() > 0

    def test_spec_json_roundtrip(self, rng):
        spec = random_reservoir(4, rng)
        back = NetworkSpec.from_dict(json.loads(spec.to_json()))
        assert np.array_equal(back.couplings, spec.couplings)


class TestJoint:
    def test_one_plus_one(self):
        g = 0.07
        joint = assemble_joint(NetworkSpec([OMEGA0], [[0.0]]), 1, [[g]])
        assert np.allclose(laplacian(joint.couplings), [[g, -g], [-g, g]])

    def test_zero_coupling_decouples(self, rng):
        res = random_reservoir(3, rng)
        blocks = coupled_blocks(res, np.zeros((3, 2)), 17.0)
        assert np.allclose(blocks.B, 0) and np.allclose(blocks.C, 0)
        assert blocks.rho_a == pytest.approx(1.0, abs=1e-9)

    def test_joint_potential_shortcut(self, rng):
        res, g, _ = random_joint(rng, 4, 2)
        direct = potential_matrix(assemble_joint(res, 2, g))
        assert np.allclose(joint_potential(potential_matrix(res), g), direct)

    def test_shape(self, rng):
        with pytest.raises(DimensionMismatch):
            assemble_joint(random_reservoir(3, rng), 1, np.zeros((2, 1)))


class TestPropagator:
    @pytest.mark.parametrize("w,dt", [(0.25, 1.3), (1.0, 0.4), (2.0, 10.0)])
    def test_single_oscillator(self, w, dt):
        s = propagator(np.array([[w**2]]), dt)
        c, sn = np.cos(w * dt), np.sin(w * dt)
        assert np.allclose(s, [[c, sn / w], [-w * sn, c]])

    def test_full_period(self):
        assert np.allclose(propagator(np.array([[OMEGA0**2]]), 2 * np.pi / OMEGA0), np.eye(2), atol=1e-12)

    def test_flow(self, rng):
        res, g, _ = random_joint(rng, 4, 1)
        v = potential_matrix(assemble_joint(res, 1, g))
        assert np.allclose(propagator(v, 3.0) @ propagator(v, 4.5), propagator(v, 7.5), atol=1e-9)

    @pytest.mark.parametrize("k", [2, 5, 12, 20])
    def test_matches_expm(self, rng, k):
        a = rng.standard_normal((k, k))
        v = a @ a.T + 0.1 * np.eye(k)
        dt = 0.7
        generator = np.block([[np.zeros((k, k)), np.eye(k)], [-v, np.zeros((k, k))]])
        assert np.allclose(propagator(v, dt), expm(dt * generator), atol=1e-10, rtol=0)

    def test_symplectic_and_unit_determinant(self, rng):
        for _ in range(50):
            res, g, dt = random_joint(rng, int(rng.integers(1, 9)), int(rng.integers(1, 3)))
            s = propagator(potential_matrix(assemble_joint(res, g.shape[1], g)), dt)
            assert is_symplectic(s, 1e-9)
            assert np.linalg.det(s) == pytest.approx(1.0, abs=1e-6)

    def test_rejects(self):
        with pytest.raises(InvalidParameter):
            propagator(np.eye(2), 0.0)
        with pytest.raises(UnstableHamiltonian):
            propagator(-np.eye(2), 1.0)


class TestBlocks:
    def test_roundtrip(self, rng):
        res, g, dt = random_joint(rng, 3, 2)
        blocks = coupled_blocks(res, g, dt)
        assert np.array_equal(assemble_blocks(blocks), blocks.S)

    def test_shapes(self, rng):
        res, g, dt = random_joint(rng, 4, 2)
        b = coupled_blocks(res, g, dt)
        assert b.A.shape == (8, 8) and b.B.shape == (8, 4) and b.C.shape == (4, 8) and b.D.shape == (4, 4)

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatch):
            partition_blocks(np.eye(6), 2, 2)

    def test_fading_memory_example(self):
        res = NetworkSpec([OMEGA0], [[0.0]])
        assert coupled_blocks(res, [[0.2]], 2 * np.pi / OMEGA0).rho_a < 1.0

    def test_kernel_blocks_match_partition(self, rng):
        res, g, dt = random_joint(rng, 5, 2)
        ref = coupled_blocks(res, g, dt)
        fast = blocks_from_potential(joint_potential(potential_matrix(res), g), 5, dt)
        for name in "SABCD":
            assert np.allclose(getattr(fast, name), getattr(ref, name), atol=1e-12)
        assert fast.rho_a == pytest.approx(ref.rho_a)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 3))
    def test_det_a_equals_det_d(self, seed, n, m):
        rng = np.random.default_rng(seed)
        res, g, dt = random_joint(rng, n, m)
        b = coupled_blocks(res, g, dt)
        assert np.linalg.det(b.A) == pytest.approx(np.linalg.det(b.D), abs=1e-9)

    def test_memory_block_can_expand(self):
        # S is symplectic, not orthogonal, so its compression A is not a contraction
        rng = np.random.default_rng(0)
        res, g, dt = random_joint(rng, 3, 1)
        assert coupled_blocks(res, g, dt).rho_a > 1.05


class TestRandom:
    def test_single(self, rng):
        assert np.all(random_reservoir(1, rng).couplings == 0)

    def test_edges(self, rng):
        g = random_reservoir(4, rng).couplings
        upper = g[np.triu_indices(4, 1)]
        assert upper.size == 6 and np.all((upper >= 0) & (upper <= 0.2))

    def test_reproducible(self):
        a = random_reservoir(5, np.random.default_rng(9))
        b = random_reservoir(5, np.random.default_rng(9))
        assert np.array_equal(a.couplings, b.couplings)

    def test_channel(self, rng):
        for _ in range(5):
            spec, coupling, blocks = random_channel(1, 1.5 * np.pi / OMEGA0, rng)
            assert blocks.rho_a <= 0.95
            assert spec.size == 2 and coupling.shape == (2, 1)

    def test_channel_reproducible(self):
        dt = 1.5 * np.pi / OMEGA0
        a = random_channel(2, dt, np.random.default_rng(4))[2]
        b = random_channel(2, dt, np.random.default_rng(4))[2]
        assert np.array_equal(a.S, b.S)

    def test_channel_zero_coupling_rejected(self, rng):
        with pytest.raises(SamplingBudgetExhausted):
            random_channel(1, 1.0, rng, g_max=0.0, max_attempts=20)

    def test_symplectic_form_sign(self):
        assert np.array_equal(symplectic_form(1), [[0, 1], [-1, 0]])
