"""Tests for partial likelihood evidence."""
import math

import numpy as np
import pytest

from app.core.exceptions import DomainError, MLEDivergesError, NoEventsError
from app.schemas.evidence import (
    Classification,
    EvidenceThresholds,
    Hypotheses,
    SurvivalDataset,
)
from app.services import evidence
from tests.oracles import (
    FAVOURS_TREATMENT,
    FOUR_SUBJECTS,
    TIED_CENSORED,
    brute_loglik,
    grid,
    grid_mle,
    grid_support,
)

HAND_THETA = -0.8795


class TestPartialLikelihood:
    def test_null_value_is_inverse_risk_set_sizes(self, two_subjects):
        assert evidence.cox_partial_loglik(two_subjects, 0.0) == pytest.approx(math.log(0.5), abs=1e-12)

    def test_hand_evaluation(self, two_subjects):
        assert evidence.cox_partial_loglik(two_subjects, HAND_THETA) == pytest.approx(-1.2266, abs=1e-4)

    def test_no_events(self):
        data = SurvivalDataset.from_tuples([(1.0, 0, 1), (2.0, 0, 0)])
        with pytest.raises(NoEventsError):
            evidence.cox_partial_loglik(data, 0.0)

    def test_non_finite_theta(self, two_subjects):
        with pytest.raises(DomainError):
            evidence.cox_partial_loglik(two_subjects, math.inf)

    @pytest.mark.parametrize("theta", [-2.0, -0.3, 0.0, 0.7, 3.0])
    def test_matches_brute_force_with_ties_and_censoring(self, tied_censored, theta):
        expected = float(brute_loglik(TIED_CENSORED, [theta])[0])
        assert evidence.cox_partial_loglik(tied_censored, theta) == pytest.approx(expected, abs=1e-12)

    def test_rank_invariance(self, tied_censored):
        rows = [(math.exp(t) * 10.0, e, z) for t, e, z in TIED_CENSORED]
        stretched = SurvivalDataset.from_tuples(rows)
        for theta in (-1.0, 0.4):
            assert evidence.cox_partial_loglik(stretched, theta) == pytest.approx(
                evidence.cox_partial_loglik(tied_censored, theta), abs=1e-12
            )

    def test_group_swap_antisymmetry(self, tied_censored):
        swapped = SurvivalDataset.from_tuples([(t, e, 1 - z) for t, e, z in TIED_CENSORED])
        for theta in (-1.3, 0.2, 2.0):
            assert evidence.cox_partial_loglik(swapped, theta) == pytest.approx(
                evidence.cox_partial_loglik(tied_censored, -theta), abs=1e-12
            )

    @pytest.mark.parametrize("theta", [-1.0, 0.0, 0.5])
    def test_score_matches_finite_difference(self, tied_censored, theta):
        h = 1e-5
        numeric = (
            evidence.cox_partial_loglik(tied_censored, theta + h)
            - evidence.cox_partial_loglik(tied_censored, theta - h)
        ) / (2 * h)
        assert evidence.cox_score(tied_censored, theta) == pytest.approx(numeric, rel=1e-6)

    def test_huge_ratio_does_not_overflow(self):
        rows = [(float(t), 1, 0) for t in range(1, 1000)] + [(5000.0, 0, 1)] * 1000
        data = SurvivalDataset.from_tuples(rows)
        report = evidence.partial_lr(data, Hypotheses(theta0=0.0, theta1=-5.0))
        assert report.log_lr > 710
        assert math.isinf(report.lr)
        assert report.classification == Classification.STRONG_H1


class TestPartialLR:
    def test_hand_example(self, two_subjects):
        report = evidence.partial_lr(two_subjects, Hypotheses(theta0=0.0, theta1=HAND_THETA))
        assert report.lr == pytest.approx(0.5866, abs=1e-4)
        assert report.d_events == 2
        assert report.classification == Classification.WEAK

    def test_time_scale_does_not_matter(self, two_subjects):
        scaled = SurvivalDataset.from_tuples([(10.0, 1, 1), (20.0, 1, 0)])
        hyps = Hypotheses(theta0=0.0, theta1=HAND_THETA)
        assert evidence.partial_lr(scaled, hyps).lr == pytest.approx(
            evidence.partial_lr(two_subjects, hyps).lr, abs=1e-12
        )

    def test_reparameterisation_invariance(self, four_subjects):
        by_theta = evidence.partial_lr(four_subjects, Hypotheses(theta0=0.0, theta1=math.log(0.415)))
        by_psi = evidence.partial_lr(four_subjects, Hypotheses.from_hazard_ratios(0.415))
        assert by_psi.lr == pytest.approx(by_theta.lr, rel=1e-12)

    def test_identical_hypotheses_rejected(self):
        with pytest.raises(ValueError):
            Hypotheses(theta0=0.1, theta1=0.1)

    @pytest.mark.parametrize(
        "lr, expected",
        [
            (20.0, Classification.STRONG_H1),
            (19.99, Classification.WEAK),
            (1.0, Classification.WEAK),
            (0.05, Classification.STRONG_H0),
        ],
    )
    def test_classification_regions(self, lr, expected):
        assert evidence.classify(lr, EvidenceThresholds.symmetric(20)) == expected

    def test_thresholds_must_straddle_one(self):
        with pytest.raises(ValueError):
            EvidenceThresholds(k0=1.5, k1=20)

    def test_benchmark_labels(self):
        assert evidence.benchmark_label(40) == "strong"
        assert evidence.benchmark_label(1 / 10) == "moderate"
        assert evidence.benchmark_label(2) == "weak"


class TestMLE:
    @pytest.mark.parametrize(
        "rows, lower, upper",
        [(FOUR_SUBJECTS, -5.0, 5.0), (TIED_CENSORED, -8.0, 8.0), (FAVOURS_TREATMENT, -8.0, 0.0)],
    )
    def test_matches_grid_oracle(self, rows, lower, upper):
        data = SurvivalDataset.from_tuples(rows)
        theta_hat = evidence.mle_theta(data)
        assert theta_hat == pytest.approx(grid_mle(rows, lower, upper), abs=1e-4)
        assert abs(evidence.cox_score(data, theta_hat)) < 1e-8

    def test_group_swap_negates(self):
        swapped = SurvivalDataset.from_tuples([(t, e, 1 - z) for t, e, z in FOUR_SUBJECTS])
        original = SurvivalDataset.from_tuples(FOUR_SUBJECTS)
        assert evidence.mle_theta(swapped) == pytest.approx(-evidence.mle_theta(original), abs=1e-8)

    def test_events_in_one_arm_diverge(self):
        data = SurvivalDataset.from_tuples([(1.0, 1, 1), (2.0, 1, 1), (3.0, 0, 0)])
        with pytest.raises(MLEDivergesError) as excinfo:
            evidence.mle_theta(data)
        assert excinfo.value.direction == 1

    def test_peto_estimate_has_the_mle_sign(self, favours_treatment):
        assert evidence.peto_estimate(favours_treatment) < 0


class TestSupportInterval:
    @pytest.mark.parametrize(
        "rows, lower, upper",
        [(FOUR_SUBJECTS, -5.0, 5.0), (TIED_CENSORED, -8.0, 8.0), (FAVOURS_TREATMENT, -8.0, 0.0)],
    )
    def test_matches_grid_oracle(self, rows, lower, upper):
        interval = evidence.support_interval(SurvivalDataset.from_tuples(rows), 8.0)
        oracle_lower, oracle_upper = grid_support(rows, 8.0, lower, upper)
        assert interval.lower == pytest.approx(oracle_lower, abs=2e-4)
        assert interval.upper == pytest.approx(oracle_upper, abs=2e-4)

    def test_endpoints_sit_at_one_over_k(self, four_subjects):
        interval = evidence.support_interval(four_subjects, 8.0)
        peak = evidence.cox_partial_loglik(four_subjects, interval.theta_hat)
        for endpoint in (interval.lower, interval.upper):
            drop = evidence.cox_partial_loglik(four_subjects, endpoint) - peak
            assert drop == pytest.approx(-math.log(8.0), abs=1e-8)

    def test_nesting(self, four_subjects):
        narrow = evidence.support_interval(four_subjects, 8.0)
        wide = evidence.support_interval(four_subjects, 32.0)
        assert wide.lower < narrow.lower <= narrow.theta_hat <= narrow.upper < wide.upper

    def test_collapses_as_k_approaches_one(self, four_subjects):
        interval = evidence.support_interval(four_subjects, 1.0 + 1e-10)
        assert interval.upper - interval.lower < 1e-3

    def test_k_must_exceed_one(self, four_subjects):
        with pytest.raises(DomainError):
            evidence.support_interval(four_subjects, 1.0)


class TestPosthocSupremum:
    def test_mle_above_null_gives_one(self, four_subjects):
        assert evidence.suplr_posthoc(four_subjects, 0.0) == 1.0

    def test_matches_grid_oracle(self, four_subjects):
        thetas = grid(-5.0, 2.0)
        thetas = thetas[thetas < 2.0]
        values = brute_loglik(FOUR_SUBJECTS, thetas) - brute_loglik(FOUR_SUBJECTS, [2.0])[0]
        expected = math.exp(float(values.max()))
        assert evidence.suplr_posthoc(four_subjects, 2.0) == pytest.approx(expected, rel=1e-4)

    def test_dominates_every_fixed_alternative_below(self, favours_treatment):
        sup = evidence.suplr_posthoc(favours_treatment, 0.0)
        for theta1 in (-3.0, -1.0, -0.2):
            lr = evidence.partial_lr(favours_treatment, Hypotheses(theta0=0.0, theta1=theta1)).lr
            assert sup >= lr

    def test_monotone_likelihood_uses_the_limit(self):
        # L(-inf)/L(0) = (1/2)/(1/3 * 1/2)
        data = SurvivalDataset.from_tuples([(1.0, 1, 0), (2.0, 1, 0), (3.0, 0, 1)])
        assert evidence.suplr_posthoc(data, 0.0) == pytest.approx(3.0, rel=1e-12)

    def test_two_sided_is_at_least_one_sided(self, four_subjects):
        assert evidence.twosided_suplr(four_subjects, 2.0) >= evidence.suplr_posthoc(four_subjects, 2.0)


class TestEvidenceSummary:
    def test_includes_intervals_when_mle_exists(self, four_subjects):
        report, theta_hat, intervals = evidence.evidence_summary(
            four_subjects, Hypotheses(theta0=0.0, theta1=0.5), EvidenceThresholds.symmetric(8)
        )
        assert theta_hat is not None
        assert [i.k_level for i in intervals] == [8.0, 32.0]
        assert report.d_events == 4

    def test_divergent_mle_gives_no_intervals(self):
        data = SurvivalDataset.from_tuples([(1.0, 1, 1), (2.0, 0, 0)])
        _, theta_hat, intervals = evidence.evidence_summary(
            data, Hypotheses(theta0=0.0, theta1=0.5), EvidenceThresholds.symmetric(8)
        )
        assert theta_hat is None
        assert intervals == []

    def test_risk_table_counts(self, tied_censored):
        table = evidence.RiskTable.from_dataset(tied_censored)
        assert table.d == 5
        np.testing.assert_array_equal(table.n1, [4, 4, 2, 2, 1])
        np.testing.assert_array_equal(table.n0, [3, 3, 2, 2, 0])
