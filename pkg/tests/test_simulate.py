import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from postdisc import (
    EnsemblePair,
    MeasurementModel,
    MeasurementTable,
    PostProcessor,
    Povm,
    born_sample,
    certify_pair,
    derandomize,
    ket,
    run_protocol,
    theoretical_success_rate,
)
from postdisc.simulate import BLOCK, born_probabilities
from postdisc import fixtures

from _support import certifiable_pair, random_unitary

BASIS = Povm(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], dtype=complex))


def bb84_model():
    return MeasurementModel(BASIS, PostProcessor.deterministic([0, 1], [0, 0], 2, 2))


def plus_minus_model():
    return MeasurementModel.from_table(fixtures.plus_minus_table())


class TestBorn:
    def test_eigenstate(self):
        rng = np.random.default_rng(0)
        assert all(born_sample(ket(1, 0), BASIS, rng) == 0 for _ in range(100))

    def test_plus_state_frequency(self):
        rng = np.random.default_rng(1)
        draws = [born_sample(ket(1, 1), BASIS, rng) for _ in range(100_000)]
        assert abs(np.mean(np.array(draws) == 0) - 0.5) < 0.01

    def test_plus_minus_cells(self):
        p, clamped = born_probabilities(ket(1, 1, 0), fixtures.plus_minus_table().as_povm())
        np.testing.assert_allclose(p, [0.5, 0.5, 0, 0], atol=1e-12)
        assert clamped < 1e-9

    def test_clamps_tiny_negatives(self):
        ops = np.array([np.diag([1 + 1e-12, 0.0]), np.diag([-1e-12, 1.0])], dtype=complex)
        p, clamped = born_probabilities(ket(1, 0), Povm(ops))
        assert p.min() >= 0 and clamped == pytest.approx(1e-12)

    def test_rejects_bad_totals(self):
        with pytest.raises(ValueError, match="sum"):
            born_probabilities(ket(1, 0), Povm(np.array([np.diag([0.5, 0.5])], dtype=complex)))


class TestPostProcessor:
    def test_coordinates(self):
        post = PostProcessor.coordinates(2, 3)
        assert post.f_a.tolist() == [0, 0, 0, 1, 1, 1]
        assert post.f_b.tolist() == [0, 1, 2, 0, 1, 2]
        assert post.mode == "deterministic"

    def test_probabilistic_validation(self):
        with pytest.raises(ValueError, match="distributions"):
            PostProcessor.probabilistic([[0.5, 0.4]], [[1.0]])
        post = PostProcessor.probabilistic([[0.5, 0.5]], [[1.0]])
        assert post.mode == "probabilistic"

    def test_model_outcome_mismatch(self):
        with pytest.raises(ValueError, match="outcomes"):
            MeasurementModel(BASIS, PostProcessor.coordinates(2, 2))


class TestTheory:
    def test_bb84_three_quarters(self):
        assert theoretical_success_rate(fixtures.bb84_pair(), bb84_model()) == pytest.approx(0.75, abs=1e-12)

    def test_certified_is_one(self):
        pair = fixtures.five_level_pair()
        model = MeasurementModel.from_table(certify_pair(pair).table)
        assert theoretical_success_rate(pair, model) == pytest.approx(1.0, abs=1e-10)

    def test_uniform_guess_half(self):
        post = PostProcessor.probabilistic(np.full((4, 2), 0.5), np.full((4, 2), 0.5))
        model = MeasurementModel(fixtures.plus_minus_table().as_povm(), post)
        assert theoretical_success_rate(fixtures.plus_minus_pair(), model) == pytest.approx(0.5)

    def test_priors(self):
        pair = fixtures.bb84_pair()
        # only A cells: always right; only B cells: right half the time
        assert theoretical_success_rate(pair, bb84_model(), {"A": [0.5, 0.5], "B": [0, 0]}) == pytest.approx(1)
        assert theoretical_success_rate(pair, bb84_model(), [0, 0, 0.5, 0.5]) == pytest.approx(0.5)

    def test_bad_priors(self):
        with pytest.raises(ValueError, match="priors"):
            theoretical_success_rate(fixtures.bb84_pair(), bb84_model(), [1, 0, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            theoretical_success_rate(fixtures.plus_minus_pair(), bb84_model())


class TestRunProtocol:
    def test_zero_trials(self):
        stats = run_protocol(fixtures.bb84_pair(), bb84_model(), 0)
        assert stats.empirical_rate is None
        assert stats.successes == 0 and stats.attempts.sum() == 0

    def test_perfect_is_exact(self):
        stats = run_protocol(fixtures.plus_minus_pair(), plus_minus_model(), 30_000, seed=3)
        assert stats.successes == stats.trials == 30_000
        assert stats.max_clamped < 1e-9

    def test_seed_determinism(self):
        a = run_protocol(fixtures.bb84_pair(), bb84_model(), 20_000, seed=9)
        b = run_protocol(fixtures.bb84_pair(), bb84_model(), 20_000, seed=9)
        assert a.successes == b.successes
        np.testing.assert_array_equal(a.per_cell, b.per_cell)
        c = run_protocol(fixtures.bb84_pair(), bb84_model(), 20_000, seed=10)
        assert c.successes != a.successes

    @pytest.mark.parametrize("threads", [2, 3, 8])
    @pytest.mark.parametrize("trials", [1, BLOCK - 1, BLOCK, 3 * BLOCK + 17])
    def test_threads_match_serial(self, threads, trials):
        serial = run_protocol(fixtures.bb84_pair(), bb84_model(), trials, seed=4)
        par = run_protocol(fixtures.bb84_pair(), bb84_model(), trials, seed=4, threads=threads)
        np.testing.assert_array_equal(serial.per_cell, par.per_cell)
        np.testing.assert_array_equal(serial.attempts, par.attempts)

    def test_cell_accessor(self):
        stats = run_protocol(fixtures.bb84_pair(), bb84_model(), 10_000, seed=1)
        wins, tries = stats.cell("A", 0)
        assert wins == tries > 0
        # B states are always guessed as 0
        wins, tries = stats.cell("B", 0)
        assert wins == tries > 0
        wins, tries = stats.cell("B", 1)
        assert wins == 0 < tries

    @pytest.mark.parametrize("priors", [None, [0.1, 0.2, 0.3, 0.4], [0.25, 0.25, 0.5, 0.0]])
    def test_agrees_with_theory(self, priors):
        trials = 50_000
        r = theoretical_success_rate(fixtures.bb84_pair(), bb84_model(), priors)
        stats = run_protocol(fixtures.bb84_pair(), bb84_model(), trials, seed=12, priors=priors)
        assert abs(stats.empirical_rate - r) <= 4 * np.sqrt(r * (1 - r) / trials)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_random_model_within_band(self, seed):
        rng = np.random.default_rng(seed)
        pair, _ = certifiable_pair(2, 2, rng, extra_dims=1)
        post = PostProcessor.probabilistic(rng.dirichlet([1, 1], 3), rng.dirichlet([1, 1], 3))
        d = pair.dim
        # random 3-outcome POVM from an isometry
        W = random_unitary(3 * d, rng)[:, :d].reshape(3, d, d)
        model = MeasurementModel(Povm(np.einsum("kij,kil->kjl", W.conj(), W)), post)
        r = theoretical_success_rate(pair, model)
        trials = 20_000
        stats = run_protocol(pair, model, trials, seed=seed % 1000)
        assert abs(stats.empirical_rate - r) <= 4 * np.sqrt(r * (1 - r) / trials) + 1e-12

    def test_negative_trials(self):
        with pytest.raises(ValueError):
            run_protocol(fixtures.bb84_pair(), bb84_model(), -1)


class TestDerandomize:
    def test_basis(self):
        pair = fixtures.computational_basis_pair(2)
        post = PostProcessor.probabilistic(np.eye(2), np.eye(2))
        det = derandomize(BASIS, post, pair)
        assert det.f_a.tolist() == [0, 1] and det.f_b.tolist() == [0, 1]

    def test_plus_minus_coordinates(self):
        povm = fixtures.plus_minus_table().as_povm()
        coords = PostProcessor.coordinates(2, 2)
        post = PostProcessor.probabilistic(coords.guess_a, coords.guess_b)
        det = derandomize(povm, post, fixtures.plus_minus_pair())
        np.testing.assert_array_equal(det.f_a, coords.f_a)
        np.testing.assert_array_equal(det.f_b, coords.f_b)

    def test_dead_outcome_maps_to_zero(self):
        # qubit pair in C^3: the |2> projector never fires
        pair = EnsemblePair.from_states([ket(1, 0, 0), ket(0, 1, 0)], [ket(1, 0, 0), ket(0, 1, 0)])
        povm = Povm(np.array([np.diag(e) for e in np.eye(3)], dtype=complex))
        pa = np.array([[1, 0], [0, 1], [0.3, 0.7]])
        det = derandomize(povm, PostProcessor.probabilistic(pa, pa), pair)
        assert det.f_a.tolist() == [0, 1, 0] and det.f_b.tolist() == [0, 1, 0]
        assert theoretical_success_rate(pair, MeasurementModel(povm, det)) == pytest.approx(1.0)

    def test_noisy_rule_on_dead_outcomes_still_perfect(self):
        pair = fixtures.five_level_pair()
        table = certify_pair(pair).table
        povm = table.as_povm()
        coords = PostProcessor.coordinates(2, 2)
        rng = np.random.default_rng(0)
        pa, pb = coords.guess_a.copy(), coords.guess_b.copy()
        born = np.array([povm.probabilities(s) for s in pair.states()])
        for w in range(4):
            if born[:2, w].max() < 1e-9:
                pa[w] = rng.dirichlet([1, 1])
            if born[2:, w].max() < 1e-9:
                pb[w] = rng.dirichlet([1, 1])
        det = derandomize(povm, PostProcessor.probabilistic(pa, pb), pair)
        rate = theoretical_success_rate(pair, MeasurementModel(povm, det))
        assert rate == pytest.approx(1.0, abs=1e-10)

    def test_imperfect_rule_rejected(self):
        post = PostProcessor.probabilistic(np.full((2, 2), 0.5), np.eye(2))
        with pytest.raises(ValueError, match="not perfect: state A"):
            derandomize(BASIS, post, fixtures.computational_basis_pair(2))
