import numpy as np
import pytest

from harmonic_qrc.de import DEConfig
from harmonic_qrc.engine import PhasePlan, ground_state_covariance
from harmonic_qrc.errors import DimensionMismatch, InfeasibleProblem, InvalidParameter
from harmonic_qrc.gaussian import is_symplectic, vacuum
from harmonic_qrc.network import (
    OMEGA0,
    NetworkSpec,
    PropagatorBlocks,
    coupled_blocks,
    potential_matrix,
    random_channel,
    random_reservoir,
    spectral_radius,
)
from harmonic_qrc.tasks import (
    delay_scan,
    entropy_feature_map,
    nmse,
    random_guess_baseline,
    run_entangler,
    run_entropy_detection,
    run_qce,
    run_state_preparation,
    state_sampler,
    stqm_cost,
    train_linear_readout,
    train_stqm,
)
from harmonic_qrc.tasks.common import CouplingProblem, mean_fidelity
from harmonic_qrc.tasks.entangler import delayed_negativities
from harmonic_qrc.tasks.preparation import preparation_sequences
from harmonic_qrc.tasks.qce import compose_channel, multiplex
from harmonic_qrc.tasks.stqm import evaluate_delay, stqm_inputs

SINGLE = NetworkSpec([OMEGA0], [[0.0]])
SWAP_G = 0.625 * OMEGA0**2
FAST = DEConfig(max_generations=3, population_size=8)
SMALL_PLAN = PhasePlan(10, 20, 10)


def identity_blocks(m):
    eye = np.eye(2 * m)
    return PropagatorBlocks(S=None, A=eye, B=np.zeros((2 * m, 2 * m)), C=np.zeros((2 * m, 2 * m)), D=eye, rho_a=1.0, n=m, m_eff=m)


class TestScan:
    def test_default(self):
        assert delay_scan() == pytest.approx([2 * np.pi * k / OMEGA0 for k in (1, 2, 3, 4)])

    def test_problem_rejects(self, rng):
        with pytest.raises(InvalidParameter):
            CouplingProblem(random_reservoir(2, rng), 1, 0.0)
        with pytest.raises(InvalidParameter):
            CouplingProblem(random_reservoir(2, rng), 1, 1.0, rho_policy="loose")


class TestStqmCost:
    def test_tau0_identity(self):
        blocks = identity_blocks(1)
        assert stqm_cost(blocks, 0, np.array([[0.2]])) == pytest.approx(5.0)

    def test_tau0_zero_coupling(self):
        assert stqm_cost(identity_blocks(1), 0, np.zeros((1, 1))) == float("inf")

    def test_tau1_perfect(self):
        z, eye = np.zeros((2, 2)), np.eye(2)
        blocks = PropagatorBlocks(S=None, A=z, B=eye, C=eye, D=z, rho_a=0.0, n=1, m_eff=1)
        assert stqm_cost(blocks, 1, np.array([[0.1]])) == 0.0

    def test_tau1_zero_coupling(self, rng):
        blocks = coupled_blocks(random_reservoir(3, rng), np.zeros((3, 1)), 5.0)
        cost = stqm_cost(blocks, 1, np.zeros((3, 1)))
        # C = 0, so the transfer term is 5 |I_2|_F = 5 sqrt(2)
        assert cost == pytest.approx(0.5 * np.linalg.norm(blocks.D) + 5 * np.sqrt(2))

    def test_negative_tau(self):
        with pytest.raises(InvalidParameter):
            stqm_cost(identity_blocks(1), -1, np.ones((1, 1)))


class TestAnalyticSwap:
    """Two equal oscillators with normal-mode frequencies w and 1.5 w."""

    def test_single_swap_is_tau1_delay_line(self):
        blocks = coupled_blocks(SINGLE, [[SWAP_G]], 2 * np.pi / OMEGA0)
        assert blocks.rho_a == pytest.approx(0.0, abs=1e-12)
        assert stqm_cost(blocks, 1, np.array([[SWAP_G]])) == pytest.approx(0.0, abs=1e-12)

    def test_double_swap_solves_tau0(self, rng):
        blocks = coupled_blocks(SINGLE, [[SWAP_G]], 4 * np.pi / OMEGA0)
        assert np.allclose(blocks.D, np.eye(2), atol=1e-12)
        inputs = stqm_inputs(1, 160, rng)
        sigma0 = ground_state_covariance(np.array([[OMEGA0**2]]))
        assert evaluate_delay(blocks, sigma0, inputs, 0, PhasePlan())["test"] == pytest.approx(1.0, abs=1e-12)

    def test_single_swap_delays_by_one(self, rng):
        blocks = coupled_blocks(SINGLE, [[SWAP_G]], 2 * np.pi / OMEGA0)
        inputs = stqm_inputs(1, 160, rng)
        sigma0 = ground_state_covariance(np.array([[OMEGA0**2]]))
        assert evaluate_delay(blocks, sigma0, inputs, 1, PhasePlan())["test"] == pytest.approx(1.0, abs=1e-12)


class TestTrainStqm:
    def test_result_shape(self, rng):
        res = train_stqm(random_reservoir(2, rng), 1, 1, rng, config=FAST, plan=SMALL_PLAN)
        assert res.task == "stqm" and res.coupling.shape == (2, 1)
        assert 0 < res.figure_of_merit <= 1
        assert res.dt in delay_scan()

    def test_input_independent(self):
        res = random_reservoir(2, np.random.default_rng(0))
        rng_inputs = np.random.default_rng(99)
        a = train_stqm(res, 1, 1, np.random.default_rng(1), config=FAST, plan=SMALL_PLAN)
        b = train_stqm(
            res, 1, 1, np.random.default_rng(1), config=FAST, plan=SMALL_PLAN, inputs=stqm_inputs(1, 40, rng_inputs)
        )
        assert np.array_equal(a.coupling, b.coupling)

    def test_strict_policy_feasible(self, rng):
        res = train_stqm(random_reservoir(2, rng), 1, 1, rng, config=FAST, plan=SMALL_PLAN)
        assert res.rho_a <= 0.99


class TestCompose:
    def random_pair(self, rng, m=1, c=2, n=3):
        dt = 1.5 * np.pi / OMEGA0
        _, _, channel = random_channel(m, dt, rng, c=c)
        reservoir = coupled_blocks(random_reservoir(n, rng), rng.uniform(0, 0.2, (n, m)), dt)
        return channel, reservoir

    def test_identity_channel(self, rng):
        _, reservoir = self.random_pair(rng)
        eye = np.eye(2)
        channel = PropagatorBlocks(S=None, A=eye, B=np.zeros((2, 2)), C=np.zeros((2, 2)), D=eye, rho_a=1.0, n=1, m_eff=1)
        composed = compose_channel(channel, reservoir)
        assert np.allclose(composed.D, reservoir.D)
        res_idx = [1, 2, 3, 5, 6, 7]
        assert np.allclose(composed.A[np.ix_(res_idx, res_idx)], reservoir.A)
        assert np.allclose(composed.B[res_idx], reservoir.B)
        assert np.allclose(composed.C[:, res_idx], reservoir.C)

    @pytest.mark.parametrize("m,c,n", [(1, 2, 3), (2, 1, 2), (2, 3, 4)])
    def test_block_product(self, rng, m, c, n):
        channel, reservoir = self.random_pair(rng, m, c, n)
        # blocked basis (channel, reservoir, input), each group q..q p..p
        kc, kn, km = 2 * c, 2 * n, 2 * m
        total = kc + kn + km
        ch, rs, inp = slice(0, kc), slice(kc, kc + kn), slice(kc + kn, total)
        step_ch = np.eye(total)
        step_ch[ch, ch], step_ch[ch, inp] = channel.A, channel.B
        step_ch[inp, ch], step_ch[inp, inp] = channel.C, channel.D
        step_ch[inp, inp] = channel.D
        step_res = np.eye(total)
        step_res[rs, rs], step_res[rs, inp] = reservoir.A, reservoir.B
        step_res[inp, rs], step_res[inp, inp] = reservoir.C, reservoir.D
        product = step_res @ step_ch
        order = np.concatenate([np.arange(c), kc + np.arange(n), c + np.arange(c), kc + n + np.arange(n)])
        composed = compose_channel(channel, reservoir)
        state = slice(0, kc + kn)
        assert np.allclose(composed.A, product[state, state][np.ix_(order, order)], atol=1e-12)
        assert np.allclose(composed.B, product[state, inp][order], atol=1e-12)
        assert np.allclose(composed.C, product[inp, state][:, order], atol=1e-12)
        assert np.allclose(composed.D, product[inp, inp], atol=1e-12)
        assert is_symplectic(composed.S, 1e-9)

    def test_spectral_radius_is_max(self, rng):
        for _ in range(20):
            channel, reservoir = self.random_pair(rng)
            composed = compose_channel(channel, reservoir)
            assert composed.rho_a == pytest.approx(max(channel.rho_a, reservoir.rho_a), rel=1e-9)
            assert composed.rho_a == pytest.approx(spectral_radius(composed.A))

    def test_mismatch(self, rng):
        channel, _ = self.random_pair(rng, m=2)
        _, reservoir = self.random_pair(rng, m=1)
        with pytest.raises(DimensionMismatch):
            compose_channel(channel, reservoir)

    def test_multiplex(self):
        cov = np.array([[2.0, 0.3], [0.3, 1.0]])
        out = multiplex(cov, 2)
        assert np.allclose(out, [[2, 0, 0.3, 0], [0, 2, 0, 0.3], [0.3, 0, 1, 0], [0, 0.3, 0, 1]])


class TestQce:
    @pytest.mark.parametrize("spatial,temporal", [(1, 1), (2, 1), (1, 3)])
    def test_runs(self, rng, spatial, temporal):
        res = run_qce(rng, spatial=spatial, temporal=temporal, config=FAST, plan=SMALL_PLAN)
        assert 0 < res.figure_of_merit <= 1
        assert res.dt == pytest.approx(1.5 * np.pi / OMEGA0)
        assert res.coupling.shape == (3, spatial)

    def test_rejects(self, rng):
        with pytest.raises(InvalidParameter):
            run_qce(rng, spatial=0)


class TestEntangler:
    def test_zero_coupling(self, rng):
        blocks = coupled_blocks(random_reservoir(3, rng), np.zeros((3, 1)), 10.0)
        inputs = np.repeat(vacuum(1, OMEGA0).covariance[None], 20, axis=0)
        values = delayed_negativities(blocks, ground_state_covariance(np.eye(3) * OMEGA0**2), inputs, 1)
        assert np.all(values == 0.0)

    def test_runs(self, rng):
        res = run_entangler(rng, n=2, tau=1, config=FAST, plan=SMALL_PLAN)
        assert res.figure_of_merit >= 0 and res.phase_metrics["training"] >= 0

    def test_tau_zero_rejected(self, rng):
        with pytest.raises(InvalidParameter):
            run_entangler(rng, tau=0)

    @pytest.mark.parametrize("seed", range(5))
    def test_bounded_by_one_step_squeezing(self, seed):
        # E_N <= 2 r_max, where e^{r_max} is the largest singular value of S in vacuum units
        rng = np.random.default_rng(seed)
        n = 3
        res = random_reservoir(n, rng)
        blocks = coupled_blocks(res, rng.uniform(0, 0.2, (n, 1)), rng.uniform(5, 60))
        scale = np.diag([np.sqrt(OMEGA0)] * (n + 1) + [1 / np.sqrt(OMEGA0)] * (n + 1))
        r_max = np.log(np.linalg.svd(scale @ blocks.S @ np.linalg.inv(scale), compute_uv=False).max())
        inputs = np.repeat(vacuum(1, OMEGA0).covariance[None], 60, axis=0)
        sigma0 = ground_state_covariance(potential_matrix(res))
        for tau in (1, 2, 3):
            assert delayed_negativities(blocks, sigma0, inputs, tau).max() <= 2 * r_max + 1e-12


class TestPreparation:
    def test_sequences(self):
        series = np.linspace(0, 1, 20)
        inputs, targets = preparation_sequences(series, 2, 10)
        assert inputs.shape == targets.shape == (10, 2, 2)
        assert np.allclose(np.linalg.det(inputs), (series[:10] + 0.5) ** 2)
        assert np.allclose(np.linalg.det(targets), 0.25)

    def test_too_short(self):
        with pytest.raises(InvalidParameter):
            preparation_sequences(np.zeros(10), 3, 8)

    def test_constant_series_advance_irrelevant(self, rng):
        series = np.full(60, 0.4)
        a = preparation_sequences(series, 0, 40)
        b = preparation_sequences(series, 5, 40)
        assert np.array_equal(a[1], b[1])

    def test_runs(self, rng):
        series = rng.uniform(0, 1, 60)
        res = run_state_preparation(rng, series, n=2, advance=1, config=FAST, plan=SMALL_PLAN)
        assert 0 < res.figure_of_merit <= 1


class TestEntropy:
    def test_feature_count(self, rng):
        cov = rng.standard_normal((40, 40))
        assert entropy_feature_map(cov).shape == (781,)

    def test_zero_row(self):
        feats = entropy_feature_map(np.zeros((6, 6)))
        assert np.all(feats[:-1] == 0) and feats[-1] == 1

    def test_permutation(self, rng):
        cov = rng.standard_normal((6, 6))
        perm = np.array([0, 3, 1, 4, 2, 5])
        a = entropy_feature_map(cov)[:-1]
        b = entropy_feature_map(cov[:, perm])[:-1]
        assert np.allclose(np.sort(a), np.sort(b))

    def test_readout_recovery(self, rng):
        x = rng.standard_normal((200, 12))
        w = rng.standard_normal(12)
        assert np.allclose(train_linear_readout(x, x @ w, ridge=0.0), w, atol=1e-8)
        assert np.allclose(train_linear_readout(x, x @ w), w, atol=1e-8)

    def test_readout_shape(self):
        with pytest.raises(InvalidParameter):
            train_linear_readout(np.ones((3, 2)), np.ones(4))

    def test_nmse(self, rng):
        y = rng.standard_normal(100)
        assert nmse(y, y) == 0.0
        assert nmse(np.full_like(y, y.mean()), y) == pytest.approx(1.0)
        with pytest.raises(InvalidParameter):
            nmse(y, np.ones(100))

    def test_small_run(self, rng):
        out = run_entropy_detection(rng, n=4, m=2, taus=[0, 1], plan=PhasePlan(20, 100, 30), scan=[7.0, 9.0, 11.0, 13.0])
        assert [r.params["tau"] for r in out] == [0, 1]
        assert all(np.isfinite(r.figure_of_merit) for r in out)

    @pytest.mark.parametrize("topology", ["isolated", "connected"])
    def test_weak_input_coupling_infeasible(self, topology):
        with pytest.raises(InfeasibleProblem):
            run_entropy_detection(np.random.default_rng(0), n=20, m=10, taus=[0], topology=topology, input_g_max=0.2)

    def test_pairing(self, rng):
        with pytest.raises(InvalidParameter):
            run_entropy_detection(rng, n=5, m=2, taus=[0])


class TestBaseline:
    def test_identical_deterministic(self, rng):
        fixed = lambda _: vacuum(1, OMEGA0).covariance
        assert random_guess_baseline(rng, fixed, samples=10) == pytest.approx(1.0)

    def test_vacuum_vs_thermal(self, rng):
        thermal_sampler = state_sampler(r_range=(0.0, 0.0))
        vac = lambda _: vacuum(1, OMEGA0).covariance
        samples = 10_000
        value = random_guess_baseline(rng, vac, thermal_sampler, samples)
        # fidelity 1/(n+1) with n ~ U[0,10]; its standard deviation is about 0.18
        n = rng.uniform(0, 10, 100_000)
        se = np.std(1 / (n + 1)) / np.sqrt(samples)
        assert abs(value - np.log(11) / 10) < 4 * se

    def test_fidelity_vs_thermal_closed_form(self):
        n = np.array([0.0, 1.0, 4.0])
        outs = np.array([np.diag([(2 * k + 1) / (2 * OMEGA0), (2 * k + 1) * OMEGA0 / 2]) for k in n])
        vac = np.repeat(vacuum(1, OMEGA0).covariance[None], 3, axis=0)
        assert mean_fidelity(outs, vac) == pytest.approx(np.mean(1 / (n + 1)))

    def test_samples(self, rng):
        with pytest.raises(InvalidParameter):
            random_guess_baseline(rng, samples=0)
