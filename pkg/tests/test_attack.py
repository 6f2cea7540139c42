import numpy as np
import pytest

from squarebox.attack import AttackConfig, p_schedule, run_attack, side_length
from squarebox.classifiers import OracleClassifier
from squarebox.errors import AttackInterrupted
from squarebox.losses import untargeted_goal
from squarebox.tensors import Norm, ThreatModel, lp_norm


def linf_config(eps=0.3, n=500, seed=0, **kw):
    return AttackConfig(
        tm=ThreatModel(Norm.LINF, eps), n_queries=n, goal=untargeted_goal(0),
        seed=seed, **kw,
    )


def linear_classifier(a):
    a = np.asarray(a, dtype=np.float64)
    return OracleClassifier(
        lambda img: np.array([a @ img.ravel(), -(a @ img.ravel())]), 2
    )


def mixed_sign_weights(n=16, seed=5):
    # fixed +-1 pattern with positive sum so the clean midpoint image is class 0
    signs = np.where(np.sin(np.arange(n) * 12.9898 + seed) > 0, 1.0, -1.0)
    if signs.sum() <= 0:
        signs[: int(abs(signs.sum())) + 1] = 1.0
    return signs


class TestSideLength:
    def test_rounding_arithmetic(self):
        assert side_length(0.05, 224, Norm.LINF) == 50  # 224 * sqrt(.05) = 50.09

    def test_l2_clamp_to_three(self):
        assert side_length(0.001, 28, Norm.L2) == 3  # raw rounds to 1

    def test_full_image(self):
        assert side_length(1.0, 10, Norm.LINF) == 10

    def test_never_exceeds_side(self):
        assert side_length(1.0, 2, Norm.L2) == 2

    def test_rejects_bad_p(self):
        with pytest.raises(ValueError):
            side_length(0.0, 10, Norm.LINF)


class TestPSchedule:
    def test_before_first_breakpoint(self):
        assert p_schedule(0, 10000, 0.8) == 0.8
        assert p_schedule(9, 10000, 0.8) == 0.8

    def test_first_breakpoint(self):
        assert p_schedule(10, 10000, 0.8) == 0.4

    def test_eight_halvings(self):
        assert p_schedule(8000, 10000, 0.8) == 0.8 / 256

    def test_rescaled_budget(self):
        assert p_schedule(19, 20000, 0.8) == 0.8
        assert p_schedule(20, 20000, 0.8) == 0.4  # breakpoints doubled

    def test_tiny_budget_breakpoints_floor_at_one(self):
        # at N=10 the scaled breakpoints are {1, 1, 1, 1, 2, 4, 6, 8}
        assert p_schedule(1, 10, 0.8) == 0.8 / 16
        assert p_schedule(8, 10, 0.8) == 0.8 / 256


class TestRunAttack:
    def test_initially_adversarial_costs_one_query(self):
        clf = OracleClassifier(lambda img: np.array([0.0, 1.0]), 2)
        res = run_attack(clf, linf_config(n=100), np.full((1, 4, 4), 0.5))
        assert res.success and res.queries_used == 1
        assert clf.query_count == 1
        assert len(res.loss_trace) == 1

    def test_constant_classifier_exhausts_budget(self):
        clf = OracleClassifier(lambda img: np.array([1.0, 0.0]), 2)
        res = run_attack(clf, linf_config(n=120), np.full((1, 4, 4), 0.5))
        assert not res.success
        assert res.queries_used == 120
        assert clf.query_count == 120
        assert len(res.loss_trace) == 120
        assert np.all(np.diff(res.loss_trace) <= 0)

    def test_linear_model_attack_succeeds(self):
        a = mixed_sign_weights()
        res = run_attack(
            linear_classifier(a), linf_config(eps=0.4, n=2000, seed=7),
            np.full((1, 4, 4), 0.5),
        )
        assert res.success
        assert res.final_class == 1

    def test_oracle_matches_acceptance_decisions_query_for_query(self):
        # Replay the attack's query stream through an analytic margin oracle
        # and verify every acceptance decision and the whole best-loss trace.
        for a in (mixed_sign_weights(), np.ones(16)):
            queried = []

            def logits_fn(img, a=a, queried=queried):
                queried.append(img.copy())
                v = a @ img.ravel()
                return np.array([v, -v])

            clf = OracleClassifier(logits_fn, 2)
            cfg = linf_config(eps=0.35, n=300, seed=11)
            res = run_attack(clf, cfg, np.full((1, 4, 4), 0.5))

            assert len(queried) == res.queries_used
            # analytic margin of a (a, -a) linear pair is 2 <a, x>
            margins = [2.0 * float(a @ img.ravel()) for img in queried]
            l_star = margins[0]
            expected_trace = [l_star]
            for m in margins[1:]:
                if m < l_star:  # strict-improvement acceptance
                    l_star = m
                expected_trace.append(l_star)
            assert expected_trace == res.loss_trace.tolist()

    def test_all_ones_weights_cannot_be_beaten_in_box(self):
        res = run_attack(
            linear_classifier(np.ones(16)), linf_config(eps=0.6, n=400, seed=3),
            np.full((1, 4, 4), 0.5),
        )
        assert not res.success

    def test_feasibility_after_every_accept(self):
        a = mixed_sign_weights(36, seed=2)
        x = np.linspace(0.1, 0.9, 36).reshape(1, 6, 6)
        for norm, eps in ((Norm.LINF, 0.15), (Norm.L2, 1.0)):
            accepted = []

            def logits_fn(img, a=a):
                v = a @ img.ravel()
                return np.array([v, -v])

            cfg = AttackConfig(
                tm=ThreatModel(norm, eps), n_queries=300,
                goal=untargeted_goal(0), seed=9,
            )
            res = run_attack(OracleClassifier(logits_fn, 2), cfg, x)
            final = np.asarray(res.final_image)
            assert lp_norm(final - x, norm) <= eps + 1e-9
            assert final.min() >= 0.0 and final.max() <= 1.0

    def test_determinism_byte_for_byte(self):
        a = mixed_sign_weights(25, seed=4)
        x = np.full((1, 5, 5), 0.45)
        cfg = linf_config(eps=0.2, n=250, seed=21)
        r1 = run_attack(linear_classifier(a), cfg, x)
        r2 = run_attack(linear_classifier(a), cfg, x)
        assert r1.queries_used == r2.queries_used
        assert r1.loss_trace.tobytes() == r2.loss_trace.tobytes()
        assert np.asarray(r1.final_image).tobytes() == np.asarray(r2.final_image).tobytes()

    def test_budget_equals_counter(self):
        a = mixed_sign_weights(16, seed=8)
        clf = linear_classifier(a)
        res = run_attack(clf, linf_config(eps=0.02, n=77, seed=2), np.full((1, 4, 4), 0.5))
        assert clf.query_count == res.queries_used == len(res.loss_trace)

    def test_literal_init_loss_costs_extra_query(self):
        clf = OracleClassifier(lambda img: np.array([1.0, 0.0]), 2)
        res = run_attack(
            clf, linf_config(n=50, literal_init_loss=True), np.full((1, 4, 4), 0.5)
        )
        assert res.queries_used == 50
        assert len(res.loss_trace) == 50

    def test_literal_init_loss_success_at_second_query(self):
        # adversarial everywhere: literal mode still needs the init check query
        clf = OracleClassifier(lambda img: np.array([0.0, 1.0]), 2)
        res = run_attack(
            clf, linf_config(n=50, literal_init_loss=True), np.full((1, 4, 4), 0.5)
        )
        assert res.success and res.queries_used == 2

    def test_skip_null_updates_spends_fewer_queries(self):
        # saturated image: every linf proposal projects back to the iterate
        clf = OracleClassifier(lambda img: np.array([1.0, 0.0]), 2)
        cfg = linf_config(eps=0.3, n=60, skip_null_updates=True)
        res = run_attack(clf, cfg, np.ones((1, 4, 4)))
        # init stripes on an all-ones image clip to the image itself; every
        # subsequent +2eps proposal is fully clipped, -2eps ones are not
        assert res.queries_used <= 60
        clf2 = OracleClassifier(lambda img: np.array([1.0, 0.0]), 2)
        base = run_attack(clf2, linf_config(eps=0.3, n=60), np.ones((1, 4, 4)))
        assert base.queries_used == 60

    def test_classifier_failure_propagates_with_partial_count(self):
        calls = {"n": 0}

        def fragile(img):
            calls["n"] += 1
            if calls["n"] >= 5:
                raise RuntimeError("backend down")
            v = float(img.sum())
            return np.array([v, -v])

        clf = OracleClassifier(fragile, 2)
        with pytest.raises(AttackInterrupted) as exc:
            run_attack(clf, linf_config(n=100), np.full((1, 4, 4), 0.5))
        assert exc.value.queries_used == 4

    def test_l2_attack_runs_and_respects_sphere(self):
        a = mixed_sign_weights(64, seed=12)
        x = np.full((1, 8, 8), 0.5)
        cfg = AttackConfig(
            tm=ThreatModel(Norm.L2, 1.5), n_queries=400,
            goal=untargeted_goal(0), seed=13, p_init=0.1,
        )
        clf = linear_classifier(a)
        res = run_attack(clf, cfg, x)
        final = np.asarray(res.final_image)
        assert lp_norm(final - x, Norm.L2) <= 1.5 + 1e-9
        assert res.success  # 64 mixed signs at eps 1.5 is an easy flip

    def test_rejects_bad_config(self):
        with pytest.raises(ValueError):
            linf_config(n=0)
        with pytest.raises(ValueError):
            linf_config(p_init=0.0)
        with pytest.raises(ValueError):
            run_attack(
                OracleClassifier(lambda i: np.array([1.0, 0.0]), 2),
                linf_config(update="bogus"),
                np.full((1, 4, 4), 0.5),
            )
