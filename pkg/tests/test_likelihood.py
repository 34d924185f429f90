"""Probabilities, log-likelihood, score, and observed information."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_dataset, random_design, random_params
from hetmnl import (
    ChoiceDataset,
    ChoiceRow,
    ConfigError,
    EvaluationError,
    ModelSpec,
    ParameterVector,
    build_design,
    choice_probabilities,
    heterogeneity_factor,
    log_likelihood,
    make_block,
    observed_information,
    odds,
    probability_table,
    score,
    unpack,
)
from hetmnl.likelihood import HET_EXPONENT_LIMIT


def constants_params(values, gamma=(), reference=1):
    j = len(values)
    return ParameterVector(values, [], np.zeros((j, 0)), gamma, reference=reference)


class TestHeterogeneityFactor:
    def test_zero_gamma_gives_one(self):
        assert heterogeneity_factor([1.0, 0.0], [0.0, 0.0]) == 1.0

    def test_hand_evaluated_exponent(self):
        assert heterogeneity_factor([1.0, 0.0], [math.log(2), 5.0]) == pytest.approx(2.0)

    def test_empty_heterogeneity_reduces_to_one(self):
        assert heterogeneity_factor([], []) == 1.0

    def test_clamp_warns_and_caps(self):
        sink = []
        value = heterogeneity_factor([1.0], [40.0], sink=sink)
        assert value == pytest.approx(math.exp(HET_EXPONENT_LIMIT))
        assert sink and "clamped" in sink[0]

    def test_non_finite_exponent_raises(self):
        with pytest.raises(EvaluationError):
            heterogeneity_factor([1e308], [1e308])


class TestChoiceProbabilities:
    def test_constants_softmax(self):
        params = constants_params([0.0, math.log(2), 0.0])
        block = make_block(ModelSpec(3))
        np.testing.assert_allclose(
            choice_probabilities(block, params), [0.25, 0.5, 0.25], atol=1e-15
        )

    def test_scaled_utilities(self):
        # w'gamma = ln 2 doubles every utility: softmax(0, 2 ln 2, 0)
        spec = ModelSpec(3, w_names=("w1",))
        params = constants_params([0.0, math.log(2), 0.0], gamma=[math.log(2)])
        block = make_block(spec, w={"w1": 1.0})
        np.testing.assert_allclose(
            choice_probabilities(block, params), [1 / 6, 4 / 6, 1 / 6], atol=1e-14
        )

    def test_equal_utilities_uniform_for_any_gamma(self):
        spec = ModelSpec(4, w_names=("w1",))
        for gamma in (-2.0, 0.0, 1.5):
            params = constants_params([0.0] * 4, gamma=[gamma])
            block = make_block(spec, w={"w1": 1.3})
            np.testing.assert_allclose(choice_probabilities(block, params), 0.25, atol=1e-15)

    def test_strong_negative_heterogeneity_flattens(self):
        spec = ModelSpec(4, w_names=("w1",))
        params = constants_params([0.0, 1.0, -0.5, 2.0], gamma=[-10.0])
        block = make_block(spec, w={"w1": 1.0})
        probs = choice_probabilities(block, params)
        assert np.max(np.abs(probs - 0.25)) < 1e-3

    @given(
        j=st.integers(2, 5),
        k=st.integers(0, 2),
        m=st.integers(0, 2),
        length=st.integers(0, 2),
        seed=st.integers(0, 2**31 - 1),
    )
    @settings(max_examples=50, deadline=None)
    def test_normalization_property(self, j, k, m, length, seed):
        # bounded params keep |w'gamma| <= 5 and utilities moderate
        design, spec = random_design(j, k, m, length, 8, seed)
        params = random_params(spec, seed, scale=0.6, gamma_scale=0.4)
        table = probability_table(design, params)
        np.testing.assert_allclose(table.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(table > 0)

    def test_location_shift_invariance(self):
        # adding the same constant to every alternative's z leaves probabilities alone
        spec = ModelSpec(3, z_names=("z1",), w_names=("w1",))
        params = ParameterVector(
            [0.0, 0.4, -0.2], [0.7], np.zeros((3, 0)), [0.3], reference=1
        )
        rng = np.random.default_rng(7)
        for _ in range(10):
            z = rng.normal(size=3)
            w = rng.normal()
            block = make_block(spec, z={"z1": z}, w={"w1": w})
            shifted = make_block(spec, z={"z1": z + 1.7}, w={"w1": w})
            np.testing.assert_allclose(
                choice_probabilities(block, params),
                choice_probabilities(shifted, params),
                atol=1e-10,
            )

    def test_mnl_reduction_matches_independent_path(self):
        # gamma absent must coincide with a plain softmax computed from scratch
        dataset, spec = random_dataset(4, 2, 1, 0, 25, seed=13)
        design = build_design(dataset, spec)
        params = random_params(spec, 21)
        table = probability_table(design, params)
        z, s, _, _ = oracles.dataset_arrays(dataset, spec.z_names, spec.s_names, 4)
        for i in range(design.n_choosers):
            direct = oracles.mnl_block_probabilities(
                params.constants, params.alpha, params.betas, z[i], s[i]
            )
            np.testing.assert_allclose(table[i], direct, atol=1e-12)

    def test_distinctness_monotonicity(self):
        # the modal alternative's probability rises with w'gamma and saturates
        spec = ModelSpec(4, w_names=("w1",))
        base = constants_params([0.0, 0.3, 1.0, -0.2], gamma=[1.0])
        probs = []
        for exponent in range(-3, 4):
            block = make_block(spec, w={"w1": float(exponent)})
            probs.append(choice_probabilities(block, base)[2])
        assert all(a < b for a, b in zip(probs, probs[1:]))
        big = make_block(spec, w={"w1": 12.0})
        assert choice_probabilities(big, base)[2] > 0.999999


class TestOdds:
    def test_identical_rows_give_one(self):
        spec = ModelSpec(3, z_names=("z1",))
        params = ParameterVector([0, 0, 0], [0.5], np.zeros((3, 0)), [])
        block = make_block(spec, z={"z1": [2.0, 2.0, 1.0]})
        assert odds(block, params, 1, 2) == pytest.approx(1.0)

    def test_constant_gap_hand_value(self):
        params = constants_params([0.0, math.log(2)])
        block = make_block(ModelSpec(2))
        assert odds(block, params, 2, 1) == pytest.approx(2.0)

    def test_doubling_factor_squares_odds(self):
        spec = ModelSpec(2, w_names=("w1",))
        params = constants_params([0.0, 0.8], gamma=[math.log(2)])
        at_zero = odds(make_block(spec, w={"w1": 0.0}), params, 2, 1)
        at_ln2 = odds(make_block(spec, w={"w1": 1.0}), params, 2, 1)
        assert at_ln2 == pytest.approx(at_zero**2, rel=1e-12)

    def test_matches_probability_ratio(self):
        design, spec = random_design(4, 1, 1, 1, 6, seed=3)
        params = random_params(spec, 4)
        for i in range(len(design)):
            block = design.block(i)
            probs = choice_probabilities(block, params)
            for j, s in ((2, 1), (3, 4), (4, 2)):
                assert odds(block, params, j, s) == pytest.approx(
                    probs[j - 1] / probs[s - 1], rel=1e-10
                )

    def test_chain_consistency(self):
        design, spec = random_design(4, 2, 0, 1, 4, seed=8)
        params = random_params(spec, 15)
        block = design.block(0)
        lhs = odds(block, params, 1, 2) * odds(block, params, 2, 3)
        assert lhs == pytest.approx(odds(block, params, 1, 3), rel=1e-10)

    def test_same_alternative_rejected(self):
        block = make_block(ModelSpec(2))
        with pytest.raises(ConfigError):
            odds(block, constants_params([0.0, 0.0]), 1, 1)


class TestLogLikelihood:
    def test_single_chooser_hand_value(self):
        spec = ModelSpec(3)
        rows = [ChoiceRow("a", a, int(a == 2), {}) for a in (1, 2, 3)]
        design = build_design(ChoiceDataset(tuple(rows)), spec)
        params = constants_params([0.0, math.log(2), 0.0])
        assert log_likelihood(design, params) == pytest.approx(math.log(0.5), abs=1e-12)

    def test_uniform_model_closed_form(self):
        dataset, spec = random_dataset(4, 0, 0, 0, 37, seed=2)
        design = build_design(dataset, spec)
        params = constants_params([0.0] * 4)
        assert log_likelihood(design, params) == -37 * math.log(4)

    def test_duplication_doubles_exactly(self):
        dataset, spec = random_dataset(3, 1, 1, 1, 7, seed=19)
        design = build_design(dataset, spec)
        params = random_params(spec, 23)
        doubled_rows = list(dataset.rows) + [
            ChoiceRow("x" + r.chooser_id, r.alternative, r.chosen, r.covariates)
            for r in dataset.rows
        ]
        doubled = build_design(ChoiceDataset(tuple(doubled_rows)), spec)
        assert log_likelihood(doubled, params) == 2.0 * log_likelihood(design, params)


class TestScore:
    @pytest.mark.parametrize("seed", range(20))
    def test_matches_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        j = int(rng.integers(2, 6))
        design, spec = random_design(j, int(rng.integers(0, 3)),
                                     int(rng.integers(0, 3)), int(rng.integers(0, 3)),
                                     12, seed + 1000)
        params = random_params(spec, seed)
        theta = params.pack()
        analytic = score(design, params)
        numeric = oracles.central_difference_gradient(
            lambda th: log_likelihood(design, unpack(th, spec)), theta
        )
        err = np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric)))
        assert err < 1e-6

    def test_gamma_block_zero_when_location_zero(self):
        design, spec = random_design(3, 1, 1, 2, 15, seed=4)
        params = unpack(np.zeros(spec.n_free), spec)
        np.testing.assert_array_equal(score(design, params)[spec.n_location :], 0.0)

    def test_dimension(self):
        design, spec = random_design(4, 2, 1, 1, 9, seed=6)
        assert score(design, random_params(spec, 2)).shape == (spec.n_free,)


class TestObservedInformation:
    def test_binary_logit_closed_form(self):
        # J=2 with alternative 1's z zeroed reduces to textbook binary logit
        spec = ModelSpec(2, z_names=("z1",))
        rng = np.random.default_rng(31)
        rows = []
        zvals = rng.normal(size=60)
        for i, z in enumerate(zvals):
            chosen = int(rng.random() < 0.5) + 1
            rows.append(ChoiceRow(f"c{i:02d}", 1, int(chosen == 1), {"z1": 0.0}))
            rows.append(ChoiceRow(f"c{i:02d}", 2, int(chosen == 2), {"z1": float(z)}))
        design = build_design(ChoiceDataset(tuple(rows)), spec)
        params = ParameterVector([0.0, 0.4], [0.7], np.zeros((2, 0)), [])
        info = observed_information(design, params)
        x2 = design.x[:, 1, :]                       # (n, 2): dummy and z
        p2 = probability_table(design, params)[:, 1]
        expected = oracles.binary_logit_information(x2, p2)
        np.testing.assert_allclose(info, expected, atol=1e-5)

    def test_symmetry_residual_small_then_symmetrized(self):
        design, spec = random_design(3, 1, 1, 1, 40, seed=44)
        params = random_params(spec, 3)
        raw = observed_information(design, params, symmetrize=False)
        resid = np.max(np.abs(raw - raw.T)) / np.max(np.abs(raw))
        assert resid < 1e-6
        sym = observed_information(design, params)
        np.testing.assert_array_equal(sym, sym.T)

    def test_positive_definite_at_mle(self):
        from hetmnl import fit

        dataset, spec = random_dataset(3, 1, 1, 0, 120, seed=55)
        design = build_design(dataset, spec)
        result = fit(design, spec)
        info = observed_information(design, result.params)
        assert np.all(np.linalg.eigvalsh(info) > 0)


class TestEvaluationErrors:
    def test_non_finite_utility_names_chooser(self):
        spec = ModelSpec(2, w_names=("w1",))
        rows = [ChoiceRow("c9", 1, 1, {"w1": 1e308}), ChoiceRow("c9", 2, 0, {"w1": 1e308})]
        design = build_design(ChoiceDataset(tuple(rows)), spec)
        params = constants_params([0.0, 1.0], gamma=[1e308])
        with pytest.raises(EvaluationError, match="c9"):
            probability_table(design, params)

    def test_clamp_recorded_in_sink(self):
        spec = ModelSpec(2, w_names=("w1",))
        rows = [ChoiceRow("a", 1, 1, {"w1": 50.0}), ChoiceRow("a", 2, 0, {"w1": 50.0})]
        design = build_design(ChoiceDataset(tuple(rows)), spec)
        params = constants_params([0.0, 0.5], gamma=[1.0])
        sink = []
        table = probability_table(design, params, sink=sink)
        assert np.all(np.isfinite(table))
        assert any("clamped" in m for m in sink)

    def test_dimension_mismatch_rejected(self):
        design, _ = random_design(3, 1, 0, 0, 5, seed=1)
        wrong = constants_params([0.0, 0.1, 0.2])  # missing the z coefficient
        with pytest.raises(ConfigError):
            probability_table(design, wrong)
