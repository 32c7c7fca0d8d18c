import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aeboost import ensemble as ens
from aeboost.autoencoder import TrainConfig
from aeboost.exceptions import ConfigurationError, DataError

positive_errors = st.lists(
    st.floats(min_value=1e-9, max_value=1e6, allow_nan=False, allow_infinity=False),
    min_size=1, max_size=20)


def tiny_config():
    return TrainConfig(max_epochs=3, convergence_tol=1e-12, batch_size=16)


def unit_box_data(n=40, d=2, seed=0):
    return np.random.default_rng(seed).uniform(0, 1, size=(n, d))


class TestSamplingDistribution:
    def test_uniform_errors_give_uniform_probabilities(self):
        np.testing.assert_allclose(ens.sampling_distribution([2, 2, 2, 2]), 0.25, atol=1e-15)

    def test_two_point_inverse_ratio(self):
        np.testing.assert_allclose(ens.sampling_distribution([1, 3]), [0.75, 0.25], atol=1e-15)

    def test_hand_normalized_inverses(self):
        np.testing.assert_allclose(ens.sampling_distribution([0.5, 1.0, 2.0]),
                                   [4 / 7, 2 / 7, 1 / 7], atol=1e-12)

    def test_empty_input_rejected(self):
        with pytest.raises(DataError):
            ens.sampling_distribution([])

    def test_negative_or_nonfinite_rejected(self):
        with pytest.raises(DataError):
            ens.sampling_distribution([0.5, -1.0])
        with pytest.raises(DataError):
            ens.sampling_distribution([0.5, np.inf])

    def test_zero_errors_are_floored_not_fatal(self):
        probs = ens.sampling_distribution([0.0, 1.0])
        assert np.all(probs > 0)
        assert probs[0] > probs[1]

    @given(positive_errors)
    def test_sums_to_one(self, errors):
        assert abs(ens.sampling_distribution(errors).sum() - 1.0) < 1e-12

    @given(positive_errors)
    def test_antitone_in_error(self, errors):
        errors = np.asarray(errors)
        probs = ens.sampling_distribution(errors)
        for i in range(len(errors)):
            for j in range(len(errors)):
                if errors[i] < errors[j]:
                    assert probs[i] > probs[j]

    @given(positive_errors, st.floats(min_value=1e-3, max_value=1e3))
    def test_scale_invariant(self, errors, c):
        base = ens.sampling_distribution(errors)
        scaled = ens.sampling_distribution(np.asarray(errors) * c)
        np.testing.assert_allclose(scaled, base, atol=1e-12)


class TestResample:
    def test_point_mass_always_selects_that_row(self):
        idx = ens.resample([1.0, 0.0, 0.0], np.random.default_rng(0))
        assert np.all(idx == 0)
        assert len(idx) == 3

    def test_uniform_frequencies_converge(self):
        dist = np.full(4, 0.25)
        draws = np.concatenate([
            ens.resample(dist, rng) for rng in
            [np.random.default_rng(s) for s in range(25000)]])  # 4 draws per call
        freqs = np.bincount(draws, minlength=4) / draws.size
        np.testing.assert_allclose(freqs, 0.25, atol=0.01)

    def test_same_seed_same_indices(self):
        dist = ens.sampling_distribution(np.arange(1, 11, dtype=float))
        a = ens.resample(dist, np.random.default_rng(42))
        b = ens.resample(dist, np.random.default_rng(42))
        np.testing.assert_array_equal(a, b)


class TestConsensusWeights:
    def test_equal_sums_share_weight(self):
        np.testing.assert_allclose(ens.consensus_weights([5.0, 5.0]), [0.5, 0.5], atol=1e-15)

    def test_hand_normalized_inverses(self):
        np.testing.assert_allclose(ens.consensus_weights([2.0, 4.0, 8.0]),
                                   [4 / 7, 2 / 7, 1 / 7], atol=1e-12)

    def test_single_component_gets_full_weight(self):
        np.testing.assert_array_equal(ens.consensus_weights([3.0]), [1.0])

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            ens.consensus_weights([])

    def test_smallest_sum_wins(self):
        weights = ens.consensus_weights([9.0, 1.0, 4.0])
        assert np.argmax(weights) == 1

    @given(positive_errors, st.floats(min_value=1e-3, max_value=1e3))
    def test_scale_invariant(self, sums, c):
        base = ens.consensus_weights(sums)
        scaled = ens.consensus_weights(np.asarray(sums) * c)
        np.testing.assert_allclose(scaled, base, atol=1e-12)


def fake_state(error_vectors, first_errors=None):
    """EnsembleState with given error vectors for the scored components."""
    n = len(error_vectors[0])
    first = ens.Component(None, np.arange(n),
                          np.asarray(first_errors if first_errors is not None else np.ones(n),
                                     dtype=float), 1.0)
    comps = [first]
    for vec in error_vectors:
        vec = np.asarray(vec, dtype=float)
        comps.append(ens.Component(None, np.arange(n), vec, float(vec.sum())))
    weights = ens.consensus_weights([c.sample_error_sum for c in comps[1:]])
    return ens.EnsembleState(components=comps, weights=weights)


class TestConsensusScores:
    def test_single_component_passthrough(self):
        state = fake_state([[0.3, 0.7]])
        np.testing.assert_allclose(ens.consensus_scores(state), [0.3, 0.7], atol=1e-15)

    def test_hand_average_of_two_components(self):
        state = fake_state([[0.2, 0.6], [0.4, 0.6]])
        state.weights = np.array([0.5, 0.5])
        np.testing.assert_allclose(ens.consensus_scores(state)[0], 0.3, atol=1e-15)

    def test_zero_errors_give_zero_scores(self):
        state = fake_state([[0.0, 0.0], [0.0, 0.0]])
        np.testing.assert_array_equal(ens.consensus_scores(state), [0.0, 0.0])

    def test_mismatched_lengths_is_internal_error(self):
        state = fake_state([[0.1, 0.2], [0.3, 0.4]])
        state.components[2].errors = np.array([0.3, 0.4, 0.5])
        with pytest.raises(ValueError, match="internal"):
            ens.consensus_scores(state)

    def test_scores_lie_between_component_extremes(self):
        rng = np.random.default_rng(3)
        vectors = rng.uniform(0.01, 5.0, size=(4, 9))
        state = fake_state(list(vectors))
        scores = ens.consensus_scores(state)
        assert np.all(scores >= vectors.min(axis=0) - 1e-12)
        assert np.all(scores <= vectors.max(axis=0) + 1e-12)

    def test_first_component_is_ignored(self):
        state = fake_state([[0.2, 0.6], [0.4, 0.8]], first_errors=[1.0, 2.0])
        baseline = ens.consensus_scores(state)
        state.components[0].errors = np.array([99.0, -5.0])
        state.components[0].sample_error_sum = 1e9
        np.testing.assert_array_equal(ens.consensus_scores(state), baseline)
        np.testing.assert_array_equal(
            ens.consensus_weights([c.sample_error_sum for c in state.scored_components()]),
            state.weights)


class TestRunBoosting:
    def test_two_components_score_equals_second_component_errors(self):
        result = ens.run_boosting(unit_box_data(), 2, 3, tiny_config(), seed=5)
        np.testing.assert_array_equal(result.scores, result.state.components[1].errors)

    def test_same_seed_bit_identical_scores(self):
        a = ens.run_boosting(unit_box_data(), 3, 3, tiny_config(), seed=9)
        b = ens.run_boosting(unit_box_data(), 3, 3, tiny_config(), seed=9)
        np.testing.assert_array_equal(a.scores, b.scores)

    def test_growing_ensemble_preserves_earlier_iterations(self):
        small = ens.run_boosting(unit_box_data(), 3, 3, tiny_config(), seed=7)
        large = ens.run_boosting(unit_box_data(), 5, 3, tiny_config(), seed=7)
        for ca, cb in zip(small.state.components, large.state.components):
            np.testing.assert_array_equal(ca.errors, cb.errors)
            np.testing.assert_array_equal(ca.sample_indices, cb.sample_indices)

    def test_ensemble_size_below_two_rejected(self):
        with pytest.raises(ConfigurationError):
            ens.run_boosting(unit_box_data(), 1, 3, tiny_config())

    def test_empty_data_rejected(self):
        with pytest.raises(DataError):
            ens.run_boosting(np.empty((0, 2)), 2, 3, tiny_config())

    def test_unscaled_data_rejected(self):
        data = unit_box_data() * 3.0 - 1.0
        with pytest.raises(DataError):
            ens.run_boosting(data, 2, 3, tiny_config())

    def test_diagnostics_cover_every_iteration(self):
        m = 4
        result = ens.run_boosting(unit_box_data(), m, 3, tiny_config(), seed=1)
        assert [d["iteration"] for d in result.diagnostics] == list(range(m))
        first = result.diagnostics[0]
        np.testing.assert_array_equal(first["sample_indices"], np.arange(40))
        for diag in result.diagnostics:
            assert len(diag["next_sample_indices"]) == 40
            assert diag["sample_error_sum"] >= 0
        assert len(result.sampled_sets) == m

    def test_training_samples_chain_through_iterations(self):
        result = ens.run_boosting(unit_box_data(), 4, 3, tiny_config(), seed=2)
        for prev, nxt in zip(result.diagnostics, result.diagnostics[1:]):
            np.testing.assert_array_equal(prev["next_sample_indices"], nxt["sample_indices"])

    def test_weights_sum_to_one(self):
        result = ens.run_boosting(unit_box_data(), 5, 3, tiny_config(), seed=3)
        assert abs(result.state.weights.sum() - 1.0) < 1e-12
        assert np.all(result.state.weights >= 0)

    def test_scores_finite_and_nonnegative(self):
        result = ens.run_boosting(unit_box_data(), 3, 5, tiny_config(), seed=4)
        assert np.all(np.isfinite(result.scores))
        assert np.all(result.scores >= 0)


class TestDepthSelection:
    def test_singleton_candidate(self):
        sel = ens.select_depth(unit_box_data(), 2, [5], tiny_config(), seed=0)
        assert sel.chosen_depth == 5
        assert set(sel.objectives) == {5}

    def test_injected_objectives_argmin(self):
        assert ens.choose_depth({3: 3.0, 5: 2.0}) == 5
        assert ens.choose_depth({9: 1.0, 3: 4.0}) == 9

    def test_tie_goes_to_smallest_depth(self):
        assert ens.choose_depth({5: 1.0, 3: 1.0, 7: 2.0}) == 3

    def test_empty_candidates_rejected(self):
        with pytest.raises(ConfigurationError):
            ens.select_depth(unit_box_data(), 2, [], tiny_config())
        with pytest.raises(ConfigurationError):
            ens.choose_depth({})

    def test_chosen_depth_has_minimum_recorded_objective(self):
        sel = ens.select_depth(unit_box_data(), 3, [3, 5], tiny_config(), seed=11)
        assert sel.objectives[sel.chosen_depth] == min(sel.objectives.values())
        assert sel.best.depth == sel.chosen_depth

    def test_candidates_run_on_independent_streams(self):
        sel = ens.select_depth(unit_box_data(), 2, [3, 5], tiny_config(), seed=11)
        again = ens.run_boosting(unit_box_data(), 2, sel.chosen_depth, tiny_config(),
                                 seed=sel.best.seed)
        np.testing.assert_array_equal(sel.best.scores, again.scores)


class TestRunManifest:
    def test_manifest_is_json_ready_and_complete(self):
        import json
        config = tiny_config()
        result = ens.run_boosting(unit_box_data(), 3, 3, config, seed=6)
        manifest = ens.run_manifest(result, 3, config)
        text = json.dumps(manifest)
        assert manifest["seed"] == 6
        assert manifest["ensemble_size"] == 3
        assert manifest["depth"] == 3
        assert manifest["layer_sizes"] == [2, 3, 2]
        assert len(manifest["iterations"]) == 3
        assert "sample_indices" not in manifest["iterations"][0]
        assert json.loads(text) == manifest

    def test_manifest_can_embed_sample_indices(self):
        config = tiny_config()
        result = ens.run_boosting(unit_box_data(), 2, 3, config, seed=6)
        manifest = ens.run_manifest(result, 2, config, include_sample_indices=True)
        assert manifest["iterations"][0]["sample_indices"] == list(range(40))
