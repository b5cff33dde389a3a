"""Tests for normal-approximation design projections."""
import math

import pytest

from app.core.exceptions import DomainError
from app.schemas.design import EventBudget, NormalDesign
from app.schemas.evidence import EvidenceThresholds, Hypotheses
from app.services import design_normal


def make_design(k0, k1, psi1=0.415, **options):
    return NormalDesign(
        hyps=Hypotheses.from_hazard_ratios(psi1),
        thresholds=EvidenceThresholds(k0=k0, k1=k1),
        **options,
    )


def delta_design(k0, k1, delta, **options):
    """Design whose per-event distance is exactly delta"""
    return NormalDesign(
        hyps=Hypotheses(theta0=0.0, theta1=-2.0 * delta),
        thresholds=EvidenceThresholds(k0=k0, k1=k1),
        **options,
    )


class TestDistances:
    @pytest.mark.parametrize("psi1, expected", [(0.415, 0.4398), (0.61, 0.2472)])
    def test_from_hazard_ratio(self, psi1, expected):
        assert design_normal.delta_from_hazard_ratio(psi1) == pytest.approx(expected, abs=1e-4)

    def test_equal_hazard_ratios_rejected(self):
        with pytest.raises(DomainError):
            design_normal.delta_from_hazard_ratio(1.0, 1.0)

    def test_nonpositive_hazard_ratio_rejected(self):
        with pytest.raises(DomainError):
            design_normal.delta_from_hazard_ratio(0.0)

    def test_design_delta_matches_helper(self):
        assert make_design(1 / 20, 20).delta == pytest.approx(design_normal.delta_from_hazard_ratio(0.415))

    def test_unequal_allocation_shrinks_delta(self):
        balanced = design_normal.delta_from_events(-0.88, 0.0)
        unbalanced = design_normal.delta_from_events(-0.88, 0.0, allocation=3.0)
        assert balanced == pytest.approx(0.44)
        assert unbalanced < balanced


class TestFreedmanMoments:
    def test_null(self):
        mean, variance = design_normal.freedman_moments(1.0, 25)
        assert mean == 0.0
        assert variance == pytest.approx(4.0 / 25)

    def test_values(self):
        mean, variance = design_normal.freedman_moments(0.415, 100)
        assert mean == pytest.approx(-0.8269, abs=1e-4)
        assert variance == pytest.approx(0.03316, abs=1e-5)

    def test_close_to_log_near_one(self):
        mean, _ = design_normal.freedman_moments(0.8, 1)
        assert abs(mean - math.log(0.8)) < 0.01

    def test_needs_an_event(self):
        with pytest.raises(DomainError):
            design_normal.freedman_moments(0.5, 0)


class TestOperatingCharacteristics:
    def test_symmetric_twenty(self):
        oc = design_normal.operating_characteristics(make_design(1 / 20, 20))
        assert oc.alpha_l == pytest.approx(0.037, abs=1e-3)
        assert oc.power_l == pytest.approx(0.963, abs=1e-3)
        assert design_normal.table_events(oc.e_events_null) == 32
        assert design_normal.table_events(oc.e_events_alt) == 32

    def test_asymmetric_row(self):
        oc = design_normal.operating_characteristics(make_design(1 / 10, 20))
        assert oc.alpha_l == pytest.approx(0.036, abs=1e-3)
        assert oc.power_l == pytest.approx(0.925, abs=1e-3)
        assert design_normal.table_events(oc.e_events_null) == 25
        assert design_normal.table_events(oc.e_events_alt) == 30

    def test_quarter_distance_row(self):
        oc = design_normal.operating_characteristics(delta_design(1 / 8, 8, 0.25))
        assert oc.alpha_l == pytest.approx(0.098, abs=1e-3)
        assert oc.power_l == pytest.approx(0.903, abs=1e-3)
        assert design_normal.table_events(oc.e_events_null) == 58

    @pytest.mark.parametrize("delta", [0.44, round(design_normal.delta_from_hazard_ratio(0.415), 10)])
    def test_rounded_and_full_precision_distance_agree(self, delta):
        oc = design_normal.operating_characteristics(delta_design(1 / 20, 20, delta))
        assert oc.alpha_l == pytest.approx(0.037, abs=1e-3)

    def test_symmetric_design_is_balanced(self):
        oc = design_normal.operating_characteristics(make_design(1 / 32, 32))
        assert oc.alpha_l == pytest.approx(1.0 - oc.power_l, abs=1e-12)
        assert oc.e_events_null == pytest.approx(oc.e_events_alt, rel=1e-12)

    @pytest.mark.parametrize("k0", [1 / 64, 1 / 32, 1 / 20, 1 / 8])
    @pytest.mark.parametrize("k1", [8.0, 20.0, 32.0, 64.0])
    @pytest.mark.parametrize("delta", [0.1, 0.25, 0.44, 1.0])
    def test_printed_inequalities(self, k0, k1, delta):
        oc = design_normal.operating_characteristics(delta_design(k0, k1, delta))
        assert 0.0 <= oc.alpha_l <= (1 - k0) / (k1 - k0)
        assert oc.power_l >= k1 * (1 - k0) / (k1 - k0)
        assert oc.e_events_null > 0 and oc.e_events_alt > 0

    def test_higher_upper_threshold_lowers_both_rates(self):
        results = [
            design_normal.operating_characteristics(make_design(1 / 20, k1)) for k1 in (8.0, 20.0, 32.0, 64.0)
        ]
        alphas = [oc.alpha_l for oc in results]
        powers = [oc.power_l for oc in results]
        assert all(a > b for a, b in zip(alphas, alphas[1:]))
        assert all(a > b for a, b in zip(powers, powers[1:]))

    def test_expected_events_fall_with_distance(self):
        events = [
            design_normal.operating_characteristics(delta_design(1 / 20, 20, d)).e_events_null
            for d in (0.1, 0.25, 0.44, 1.0)
        ]
        assert all(a > b for a, b in zip(events, events[1:]))

    def test_overshoot_lowers_alpha(self):
        corrected = design_normal.operating_characteristics(make_design(1 / 20, 20))
        continuous = design_normal.operating_characteristics(make_design(1 / 20, 20, rho=0.0))
        assert corrected.alpha_l < continuous.alpha_l
        # Wald's continuous-time rate for symmetric thresholds
        assert continuous.alpha_l == pytest.approx(1 / 21, rel=1e-12)


class TestSubjects:
    @pytest.mark.parametrize("events, expected", [(55, 69), (25, 32), (75, 94)])
    def test_reference_counts(self, events, expected):
        assert design_normal.subjects_needed(EventBudget(events=events, event_probability=0.8)) == expected

    def test_exact_multiple_is_not_rounded_up(self):
        assert design_normal.subjects_needed(EventBudget(events=40, event_probability=0.8)) == 50

    def test_zero_probability_rejected(self):
        with pytest.raises(ValueError):
            EventBudget(events=10, event_probability=0.0)


class TestDesignReport:
    def test_report_with_subjects(self):
        report = design_normal.design_report(make_design(1 / 20, 20), event_probability=0.8)
        assert report.model == "normal"
        assert report.subjects_null == math.ceil(report.characteristics.e_events_null / 0.8 - 1e-9)
        assert report.notes == []

    def test_unequal_allocation_is_noted(self):
        report = design_normal.design_report(make_design(1 / 20, 20, allocation=2.0))
        assert report.subjects_null is None
        assert any("allocation" in note for note in report.notes)
