"""Adjustment estimators, verdicts and capacity comparisons."""

import numpy as np
import pytest

from causalrating import (
    NOISE,
    SIGNAL,
    UNIDENTIFIABLE,
    CriterionNotMet,
    EffectQuery,
    LatentAdjustmentError,
    OverlapError,
    PositivityViolation,
    backdoor_adjust,
    build_dag,
    build_scm,
    condition,
    confounded_direct_example,
    confounded_mediation_example,
    confounding_gap,
    do_distribution,
    exact_joint,
    frontdoor_adjust,
    marginal,
    mutual_information,
    noise_verdict,
    random_scm,
    rating_comparison,
    rule1_deletion_check,
    template,
)
from causalrating.errors import ParameterError


def observed_joint(scm):
    return marginal(exact_joint(scm), set(scm.dag.nodes) - set(scm.dag.latent))


class TestBackdoorAdjust:
    def test_no_confounding_equals_conditioning(self):
        scm = random_scm(template("Fig1c"), 3)
        j = exact_joint(scm)
        got = backdoor_adjust(j, scm.dag, "X_c", "Y_f", set())
        for x in range(2):
            want = marginal(condition(j, {"X_c": x}), {"Y_f"}).probs
            assert np.abs(got[x] - want).max() < 1e-12

    def test_observed_confounder_matches_oracle(self):
        dag = build_dag(["W", "X", "Y"], [("W", "X"), ("W", "Y"), ("X", "Y")], [])
        for seed in range(20):
            scm = random_scm(dag, seed)
            j = exact_joint(scm)
            got = backdoor_adjust(j, dag, "X", "Y", {"W"})
            for x in range(2):
                oracle = do_distribution(scm, "Y", {"X": x})
                assert np.abs(got[x] - oracle).max() < 1e-9

    def test_unblockable_backdoor_rejected(self):
        scm = random_scm(template("Fig2b"), 0)
        with pytest.raises(CriterionNotMet) as exc:
            backdoor_adjust(observed_joint(scm), scm.dag, "X_c", "Y_f", set())
        assert exc.value.witness is not None

    def test_latent_adjustment_rejected(self):
        scm = random_scm(template("Fig2b"), 0)
        with pytest.raises(LatentAdjustmentError):
            backdoor_adjust(exact_joint(scm), scm.dag, "X_c", "Y_f", {"U"})


class TestFrontdoorAdjust:
    def test_null_confounder_reduces_to_conditioning(self):
        dag = template("Fig3")
        scm = random_scm(dag, 5)
        # U keeps its edges but carries no effect: make Y_f ignore U.
        cpt = {v: np.array(scm.cpt[v]) for v in dag.nodes}
        yf = np.array(cpt["Y_f"])
        half = yf.shape[0] // 2
        yf[half:] = yf[:half]  # rows for U=1 copy rows for U=0
        cpt["Y_f"] = yf
        scm = build_scm(dag, scm.card, cpt)
        j = observed_joint(scm)
        got = frontdoor_adjust(j, dag, "X_c", "Y_f", {"Z"})
        for x in range(2):
            want = marginal(condition(j, {"X_c": x}), {"Y_f"}).probs
            assert np.abs(got[(x, ())] - want).max() < 1e-9

    def test_matches_oracle_on_mediated_graph(self):
        dag = template("Fig3")
        for seed in range(100):
            scm = random_scm(dag, seed)
            got = frontdoor_adjust(observed_joint(scm), dag, "X_c", "Y_f", {"Z"})
            for x in range(2):
                oracle = do_distribution(scm, "Y_f", {"X_c": x})
                assert np.abs(got[(x, ())] - oracle).max() < 1e-9

    def test_matches_oracle_on_canonical_graph_with_stratum(self):
        dag = template("Fig6Canonical", 2)
        M = {"S_0", "S_1", "S_2"}
        for seed in range(30):
            scm = random_scm(dag, seed)
            got = frontdoor_adjust(
                observed_joint(scm), dag, "D", "Y_f", M, given={"Y_h"}
            )
            for (x, g), dist in got.items():
                oracle = do_distribution(scm, "Y_f", {"D": x}, given={"Y_h": g[0]})
                assert np.abs(dist - oracle).max() < 1e-9

    def test_criterion_failure_has_witness(self):
        scm = random_scm(template("Fig2b"), 0)
        with pytest.raises(CriterionNotMet):
            frontdoor_adjust(observed_joint(scm), scm.dag, "X_c", "Y_f", {"Y_h"})

    def test_positivity_violation_names_cell(self):
        dag = template("Fig3")
        cpt = {
            "Y_h": [[0.5, 0.5]],
            "U": [[0.5, 0.5]],
            # X_c deterministic: X_c = 0 always, so P(X_c=1, m) = 0
            "X_c": [[1, 0]] * 4,
            "Z": [[0.5, 0.5], [0.2, 0.8]],
            "Y_f": [[0.5, 0.5]] * 4,
        }
        scm = build_scm(dag, {v: 2 for v in dag.nodes}, cpt)
        with pytest.raises(PositivityViolation) as exc:
            frontdoor_adjust(observed_joint(scm), dag, "X_c", "Y_f", {"Z"})
        assert exc.value.cell is not None

    def test_distributions_normalized(self):
        scm = random_scm(template("Fig3"), 77)
        got = frontdoor_adjust(observed_joint(scm), scm.dag, "X_c", "Y_f", {"Z"})
        for dist in got.values():
            assert abs(float(dist.sum()) - 1.0) < 1e-9

    def test_conditioning_biased_on_shipped_fixture(self):
        scm = confounded_mediation_example()
        j = observed_joint(scm)
        fd = frontdoor_adjust(j, scm.dag, "X_c", "Y_f", {"Z"})
        for x in range(2):
            oracle = do_distribution(scm, "Y_f", {"X_c": x})
            naive = marginal(condition(j, {"X_c": x}), {"Y_f"}).probs
            assert np.abs(fd[(x, ())] - oracle).max() < 1e-9
            assert 0.5 * np.abs(naive - oracle).sum() > 0.01


class TestRule1:
    def test_canonical_deletion(self):
        for depth in (1, 2, 3):
            dag = template("Fig6Canonical", depth)
            assert rule1_deletion_check(dag, "Y_f", "Y_h", {"J_o", "D"})

    def test_confounded_deletion_fails(self):
        assert not rule1_deletion_check(template("Fig2c"), "Y_f", "Y_h", {"X_c"})

    def test_direct_edge_fails(self):
        assert not rule1_deletion_check(template("Fig1a"), "Y_f", "Y_h", set())

    def test_candidate_in_do_set_rejected(self):
        with pytest.raises(OverlapError):
            rule1_deletion_check(template("Fig1a"), "Y_f", "Y_h", {"Y_h"})

    def test_deletion_soundness_against_oracle(self):
        # Whenever deletion is licensed, the oracle must not depend on
        # the candidate's observed value.
        dag = template("Fig6Canonical", 2)
        assert rule1_deletion_check(dag, "Y_f", "Y_h", {"J_o", "D"})
        for seed in range(10):
            scm = random_scm(dag, seed)
            for jo in range(2):
                for d in range(2):
                    dists = [
                        do_distribution(
                            scm, "Y_f", {"J_o": jo, "D": d}, given={"Y_h": h}
                        )
                        for h in range(2)
                    ]
                    base = do_distribution(scm, "Y_f", {"J_o": jo, "D": d})
                    for dist in dists:
                        assert np.abs(dist - base).max() < 1e-9

    def test_observation_matches_intervention_on_journey_switch(self):
        # On the canonical graph P(D | do(J_o)) equals P(D | J_o): the
        # journey switch has no back-door route into the decision.
        dag = template("Fig6Canonical", 2)
        for seed in range(20):
            scm = random_scm(dag, seed)
            j = exact_joint(scm)
            for jo in range(2):
                a = do_distribution(scm, "D", {"J_o": jo})
                b = marginal(condition(j, {"J_o": jo}), {"D"}).probs
                assert np.abs(a - b).max() < 1e-9


class TestNoiseVerdict:
    def test_mediated_history_observational(self):
        v = noise_verdict(template("Fig1d"), "Y_h", "Y_f", {"X_c"})
        assert v.verdict == NOISE
        assert v.justification.startswith("observational:")

    def test_history_confounder_fork(self):
        v = noise_verdict(template("Fig2a"), "Y_h", "Y_f", {"X_c"})
        assert v.verdict == NOISE

    def test_outcome_confounder_fork_unidentifiable(self):
        v = noise_verdict(template("Fig2c"), "Y_h", "Y_f", {"X_c"})
        assert v.verdict == UNIDENTIFIABLE
        assert v.justification.startswith("open-backdoor:")

    def test_canonical_graph_noise(self):
        for depth in (1, 2, 3):
            v = noise_verdict(
                template("Fig6Canonical", depth), "Y_h", "Y_f", {"J_o", "D"}
            )
            assert v.verdict == NOISE

    def test_direct_cause_is_signal(self):
        v = noise_verdict(template("Fig1a"), "Y_h", "Y_f", set())
        assert v.verdict == SIGNAL
        assert v.justification.startswith("blocked-backdoor:")

    def test_on_direct_confounder_graph(self):
        # History is deprecable even though the behavior effect itself
        # stays confounded; the two questions are independent.
        scm = confounded_direct_example()
        v = noise_verdict(scm.dag, "Y_h", "Y_f", {"X_c"})
        assert v.verdict == NOISE
        j = observed_joint(scm)
        for x in range(2):
            naive = marginal(condition(j, {"X_c": x}), {"Y_f"}).probs
            oracle = do_distribution(scm, "Y_f", {"X_c": x})
            assert 0.5 * np.abs(naive - oracle).sum() > 0.01
        with pytest.raises(CriterionNotMet):
            backdoor_adjust(j, scm.dag, "X_c", "Y_f", {"Y_h"})

    def test_latent_observed_rejected(self):
        with pytest.raises(LatentAdjustmentError):
            noise_verdict(template("Fig2c"), "Y_h", "Y_f", {"U"})

    def test_candidate_equals_outcome_rejected(self):
        with pytest.raises(OverlapError):
            noise_verdict(template("Fig1a"), "Y_f", "Y_f", set())


class TestConfoundingGap:
    def test_identity_on_confounded_models(self):
        dag = template("Fig2b")
        for seed in range(100):
            scm = random_scm(dag, seed)
            g = confounding_gap(scm, "X_c", "Y_f", "U")
            assert abs(g.i_x_y - (g.i_ux_y - g.i_u_y_given_x)) < 1e-9
            assert g.i_u_y_given_x >= 0.0

    def test_strong_confounder_fixture_gap(self):
        g = confounding_gap(confounded_direct_example(), "X_c", "Y_f", "U")
        assert g.i_u_y_given_x > 0.01

    def test_null_confounder(self):
        dag = template("Fig2b")
        scm = random_scm(dag, 1)
        cpt = {v: np.array(scm.cpt[v]) for v in dag.nodes}
        yf = np.array(cpt["Y_f"])
        half = yf.shape[0] // 2
        yf[half:] = yf[:half]
        cpt["Y_f"] = yf
        scm = build_scm(dag, scm.card, cpt)
        g = confounding_gap(scm, "X_c", "Y_f", "U")
        assert g.i_u_y_given_x < 1e-9
        assert abs(g.i_x_y - g.i_ux_y) < 1e-9

    def test_extreme_confounding(self):
        dag = template("Fig2b")
        cpt = {
            "Y_h": [[0.5, 0.5]],
            "U": [[0.5, 0.5]],
            "X_c": [[0.5, 0.5]] * 4,
            "Y_f": [[1, 0], [1, 0], [0, 1], [0, 1]],  # Y_f = U exactly
        }
        scm = build_scm(dag, {v: 2 for v in dag.nodes}, cpt)
        g = confounding_gap(scm, "X_c", "Y_f", "U")
        assert g.i_x_y < 1e-9
        assert abs(g.i_ux_y - 1.0) < 1e-9

    def test_non_latent_u_rejected(self):
        scm = random_scm(template("Fig1d"), 0)
        with pytest.raises(ParameterError):
            confounding_gap(scm, "X_c", "Y_f", "Y_h")


class TestRatingComparison:
    def test_mediated_graph_minor_term_vanishes(self):
        j = exact_joint(random_scm(template("Fig1d"), 41))
        r = rating_comparison(j, "Y_h", "X_c", "Y_f")
        assert r.phyd_minor < 1e-9
        assert abs(r.augmented_bms - r.phyd_major) < 1e-9

    def test_independent_outcome_all_zero(self):
        dag = build_dag(["Y_h", "X_c", "Y_f"], [("Y_h", "X_c")], [])
        j = exact_joint(random_scm(dag, 2))
        r = rating_comparison(j, "Y_h", "X_c", "Y_f")
        for val in (r.naive_bms, r.augmented_bms, r.phyd_major, r.phyd_minor):
            assert abs(val) < 1e-9

    def test_history_retains_value_under_outcome_fork(self):
        scm = random_scm(template("Fig2c"), 12, concentration=0.5)
        j = observed_joint(scm)
        r = rating_comparison(j, "Y_h", "X_c", "Y_f")
        assert r.phyd_minor > 1e-6

    def test_internal_identities(self):
        for seed in range(50):
            j = exact_joint(random_scm(template("Fig2b"), seed))
            r = rating_comparison(j, "Y_h", "X_c", "Y_f")
            assert r.augmented_bms >= r.naive_bms - 1e-9
            assert abs(r.augmented_bms - (r.phyd_major + r.phyd_minor)) < 1e-9


class TestEffectQuery:
    def test_disjointness_enforced(self):
        with pytest.raises(OverlapError):
            EffectQuery("Y_f", {"Y_f": 1})
        with pytest.raises(OverlapError):
            EffectQuery("Y_f", {"D": 1}, frozenset({"D"}))
