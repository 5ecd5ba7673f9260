import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lossynet import (
    IterationOutOfRangeError,
    NotRowStochasticError,
    WindowTooShortError,
    all_reliable,
    augment,
    bernoulli_b_bounded,
    build_graph,
    certify_contraction,
    certify_entry_lower_bound,
    contraction_constants,
    delta_coefficient,
    evolve_by_matrices,
    iteration_matrix,
    lambda_coefficient,
    matrix_product,
    periodic_adversarial,
    random_strongly_connected,
    run_convergent_robust_push_sum,
    scripted_schedule,
)

# Augmented two-cycle: nodes 1, 2 then buffers for (1,2) and (2,1).
M_RELIABLE = np.array(
    [
        [0.25, 0.25, 0.25, 0.25],
        [0.25, 0.25, 0.25, 0.25],
        [0.0, 0.5, 0.0, 0.5],
        [0.5, 0.0, 0.5, 0.0],
    ]
)
M_DROP_12 = np.array(
    [
        [0.25, 0.0, 0.75, 0.0],
        [0.25, 0.25, 0.25, 0.25],
        [0.0, 0.0, 1.0, 0.0],
        [0.5, 0.0, 0.5, 0.0],
    ]
)


def random_row_stochastic(rng, m):
    A = rng.uniform(0, 1, size=(m, m)) ** 2
    return A / A.sum(axis=1, keepdims=True)


class TestIterationMatrix:
    def test_all_links_delivered(self, two_cycle):
        M = iteration_matrix(augment(two_cycle), all_reliable(two_cycle, 1), 1)
        assert np.array_equal(M, M_RELIABLE)

    def test_one_link_dropped(self, two_cycle):
        table = {((1, 2), 1): 0, ((2, 1), 1): 1, ((1, 2), 2): 1, ((2, 1), 2): 1}
        schedule = scripted_schedule(two_cycle, 2, table)
        M = iteration_matrix(augment(two_cycle), schedule, 1)
        assert np.array_equal(M, M_DROP_12)

    def test_rejects_foreign_schedule(self, two_cycle, asym3):
        with pytest.raises(ValueError):
            iteration_matrix(augment(two_cycle), all_reliable(asym3, 1), 1)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 7))
    def test_always_row_stochastic(self, seed, n):
        rng = np.random.default_rng(seed)
        g = random_strongly_connected(n, rng)
        schedule = bernoulli_b_bounded(g, 0.5, 3, 5, seed=seed)
        for t in range(1, 6):
            M = iteration_matrix(augment(g), schedule, t)
            assert M.min() >= 0.0
            assert np.abs(M.sum(axis=1) - 1.0).max() <= 1e-12


class TestMatrixProduct:
    def test_empty_window_is_identity(self, two_cycle):
        ag = augment(two_cycle)
        P = matrix_product(ag, all_reliable(two_cycle, 4), 5, 4)
        assert np.array_equal(P, np.eye(4))

    def test_constant_schedule_is_a_power(self, two_cycle):
        ag = augment(two_cycle)
        P = matrix_product(ag, all_reliable(two_cycle, 3), 1, 3)
        assert np.array_equal(P, np.linalg.matrix_power(M_RELIABLE, 3))
        assert P.min() == 0.1875

    def test_window_bounds_checked(self, two_cycle):
        ag = augment(two_cycle)
        schedule = all_reliable(two_cycle, 3)
        with pytest.raises(IterationOutOfRangeError):
            matrix_product(ag, schedule, 0, 2)
        with pytest.raises(IterationOutOfRangeError):
            matrix_product(ag, schedule, 1, 4)
        with pytest.raises(IterationOutOfRangeError):
            matrix_product(ag, schedule, 4, 2)


class TestEvolveMatchesSimulation:
    def test_scripted_lossy_run(self, asym3, lossy6):
        y = np.array([0.25, 1.5, -2.0])
        sim = run_convergent_robust_push_sum(asym3, y, lossy6, 6)
        mat = evolve_by_matrices(augment(asym3), lossy6, y, 6)
        assert np.abs(sim.values - mat.values).max() < 1e-11
        assert np.abs(sim.weights - mat.weights).max() < 1e-11

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_random_runs(self, seed):
        rng = np.random.default_rng(seed)
        g = random_strongly_connected(int(rng.integers(2, 6)), rng)
        schedule = bernoulli_b_bounded(g, 0.6, 2, 25, seed=seed)
        y = rng.uniform(-3, 3, size=g.n)
        sim = run_convergent_robust_push_sum(g, y, schedule, 25)
        mat = evolve_by_matrices(augment(g), schedule, y, 25)
        assert np.abs(sim.values - mat.values).max() < 1e-11
        assert np.abs(sim.weights - mat.weights).max() < 1e-11

    def test_horizon_checked(self, two_cycle):
        with pytest.raises(IterationOutOfRangeError):
            evolve_by_matrices(
                augment(two_cycle), all_reliable(two_cycle, 2), [0.0, 1.0], 3
            )


class TestSpreadCoefficients:
    def test_identical_rows_have_zero_spread(self):
        A = np.full((3, 3), 1.0 / 3.0)
        assert delta_coefficient(A) == 0.0
        assert lambda_coefficient(A) == 0.0

    def test_identity_has_full_spread(self):
        assert delta_coefficient(np.eye(4)) == 1.0
        assert lambda_coefficient(np.eye(4)) == 1.0

    def test_frozen_values_on_round_matrix(self):
        assert delta_coefficient(M_RELIABLE) == 0.5
        assert lambda_coefficient(M_RELIABLE) == 1.0

    def test_rejects_non_square(self):
        with pytest.raises(NotRowStochasticError):
            delta_coefficient(np.ones((2, 3)) / 3.0)

    def test_rejects_bad_row_sum(self):
        with pytest.raises(NotRowStochasticError):
            delta_coefficient(np.array([[0.5, 0.4], [0.5, 0.5]]))

    def test_rejects_negative_entries(self):
        with pytest.raises(NotRowStochasticError):
            lambda_coefficient(np.array([[1.2, -0.2], [0.5, 0.5]]))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), m=st.integers(2, 8))
    def test_delta_at_most_lambda(self, seed, m):
        A = random_row_stochastic(np.random.default_rng(seed), m)
        d, l = delta_coefficient(A), lambda_coefficient(A)
        assert 0.0 <= d <= 1.0
        assert 0.0 <= l <= 1.0
        assert d <= l + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), m=st.integers(2, 6))
    def test_left_factor_contracts_spread(self, seed, m):
        # delta(A @ B) <= lambda(A) * delta(B): prepending a round can only
        # shrink the spread, which is what drives geometric decay.
        rng = np.random.default_rng(seed)
        A = random_row_stochastic(rng, m)
        B = random_row_stochastic(rng, m)
        assert delta_coefficient(A @ B) <= lambda_coefficient(A) * delta_coefficient(B) + 1e-12


class TestEntryLowerBound:
    def test_reliable_two_cycle(self, two_cycle):
        report = certify_entry_lower_bound(
            augment(two_cycle), all_reliable(two_cycle, 3), 1, 3, 1
        )
        assert report.passed
        assert report.min_entry == 0.1875
        assert report.bound == 0.25**3

    def test_window_shorter_than_block(self, two_cycle):
        with pytest.raises(WindowTooShortError):
            certify_entry_lower_bound(
                augment(two_cycle), all_reliable(two_cycle, 3), 1, 2, 1
            )

    def test_lossy_schedules(self):
        for seed in range(6):
            rng = np.random.default_rng(9200 + seed)
            g = random_strongly_connected(int(rng.integers(2, 6)), rng)
            B = int(rng.integers(1, 4))
            block = g.n * B + 1
            schedule = bernoulli_b_bounded(g, 0.6, B, block + 4, seed=seed)
            report = certify_entry_lower_bound(augment(g), schedule, 2, block + 1, B)
            assert report.passed


class TestContraction:
    def test_reliable_two_cycle(self, two_cycle):
        report = certify_contraction(
            augment(two_cycle), all_reliable(two_cycle, 6), 1, 6, 1
        )
        assert report.passed
        assert report.gamma_bound == (1.0 - 0.25**3) ** 2
        assert report.delta <= report.lambda_product

    def test_empty_window_rejected(self, two_cycle):
        with pytest.raises(IterationOutOfRangeError):
            certify_contraction(augment(two_cycle), all_reliable(two_cycle, 3), 3, 2, 1)

    def test_lossy_schedules(self):
        for seed in range(6):
            rng = np.random.default_rng(9300 + seed)
            g = random_strongly_connected(int(rng.integers(2, 6)), rng)
            B = int(rng.integers(1, 4))
            block = g.n * B + 1
            T = block + int(rng.integers(0, 2 * block))
            schedule = bernoulli_b_bounded(g, 0.5, B, T, seed=seed)
            assert certify_contraction(augment(g), schedule, 1, T, B).passed

    def test_spread_can_rise_as_window_grows_right(self, two_cycle):
        # Extending a product on the right is NOT monotone: with deliveries
        # only every second round, the spread of M[1]...M[t] goes back up
        # after each delivery before decaying again.
        ag = augment(two_cycle)
        schedule = periodic_adversarial(two_cycle, 2, 8)
        spread = [
            delta_coefficient(matrix_product(ag, schedule, 1, t)) for t in (2, 3)
        ]
        assert spread == [0.5, 0.875]

    def test_spread_shrinks_as_window_grows_left(self):
        # Prepending rounds is monotone; that is the direction the decay
        # argument uses.
        for seed in range(5):
            rng = np.random.default_rng(9400 + seed)
            g = random_strongly_connected(int(rng.integers(2, 5)), rng)
            schedule = bernoulli_b_bounded(g, 0.6, 2, 12, seed=seed)
            ag = augment(g)
            t = 12
            spreads = [
                delta_coefficient(matrix_product(ag, schedule, r, t))
                for r in range(t + 1, 0, -1)
            ]
            assert all(b <= a + 1e-12 for a, b in zip(spreads, spreads[1:]))

    def test_gamma_matches_contraction_constants(self, asym3):
        _, gamma, block = contraction_constants(asym3, 2)
        schedule = bernoulli_b_bounded(asym3, 0.4, 2, 2 * block, seed=3)
        report = certify_contraction(augment(asym3), schedule, 1, 2 * block, 2)
        assert report.gamma_bound == gamma**2
