import json
import math

import numpy as np
import pytest

from renyigas import entropy_functions as ef
from renyigas import matrix_checks as mc

SMALL = mc.RandomEnsembleSpec(n=6, trials=60, seed=3)


class TestSpec:
    @pytest.mark.parametrize("kw", [dict(n=0), dict(n=17), dict(trials=0), dict(rank="all"),
                                    dict(n=4, rank=5)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            mc.RandomEnsembleSpec(**kw)

    def test_draw_shapes(self, rng):
        A, V = mc.RandomEnsembleSpec(n=5, rank=2).draw(rng)
        w = np.linalg.eigvalsh(A)
        assert w.min() >= -1e-12 and w.max() <= 1 + 1e-12
        np.testing.assert_allclose(V.T @ V, np.eye(2), atol=1e-12)

    def test_half_rank(self, rng):
        assert mc.RandomEnsembleSpec(n=7, rank="half").draw(rng)[1].shape == (7, 3)

    def test_orthogonal(self, rng):
        Q = mc.random_orthogonal(6, rng)
        np.testing.assert_allclose(Q @ Q.T, np.eye(6), atol=1e-12)


class TestMargins:
    def test_identity_projection(self, rng):
        A, _ = SMALL.draw(rng)
        P = np.eye(6)
        assert abs(mc.davis_margin(0.5, A, P)) < 1e-12
        assert abs(mc.berezin_margin(1.5, A, P)) < 1e-12

    def test_scalar_operator(self):
        c, n, r = 0.3, 5, 2
        A = c * np.eye(n)
        P = np.diag([1.0] * r + [0.0] * (n - r))
        f = ef.renyi(0.5)
        # PAP has eigenvalue c on ran P and 0 elsewhere; eta(0) = 0
        lhs = np.trace(P @ mc.matrix_function(f, P @ A @ P) @ P)
        np.testing.assert_allclose(lhs, r * f(np.array([c]))[0], rtol=1e-12)
        assert abs(mc.berezin_margin(0.5, A, P)) < 1e-12

    def test_compression_matches_berezin(self, rng):
        A, _ = mc.RandomEnsembleSpec(n=8).draw(rng)
        mask = np.zeros(8, bool)
        mask[[0, 2, 3, 6]] = True
        P = np.diag(mask.astype(float))
        gammas = [0.5, 1.0, 2.0]
        np.testing.assert_allclose(mc.compression_margins(A, mask, gammas),
                                   [mc.berezin_margin(g, A, P) for g in gammas], atol=1e-12)

    def test_midpoint_equal_pair(self):
        A = np.diag([0.2, 0.7])
        assert abs(mc.midpoint_margin(ef.renyi(2.0), A, A)) < 1e-14


class TestChecks:
    def test_davis_passes(self):
        rep = mc.davis_check(0.5, SMALL)
        assert rep.passed and rep.worst_margin >= -1e-9 and rep.witness is None

    def test_berezin_passes(self):
        rep = mc.berezin_check(2.0, SMALL)
        assert rep.passed and rep.margins.shape == (60,)

    def test_deterministic(self):
        r1 = mc.berezin_check(1.0, SMALL)
        r2 = mc.berezin_check(1.0, SMALL)
        np.testing.assert_array_equal(r1.margins, r2.margins)

    def test_thread_independent(self):
        r1 = mc.davis_check(1.0, SMALL, threads=1)
        r4 = mc.davis_check(1.0, SMALL, threads=4)
        np.testing.assert_array_equal(r1.margins, r4.margins)

    @pytest.mark.parametrize("fn,gamma", [(mc.davis_check, 1.5), (mc.berezin_check, 3.0),
                                          (mc.davis_check, 0.0)])
    def test_gamma_range(self, fn, gamma):
        with pytest.raises(ValueError):
            fn(gamma, SMALL)

    def test_witness_on_failure(self):
        # a margin that always fails exercises the witness path
        rep = mc._run("davis", 0.5, SMALL, lambda g, A, P: -1.0, None)
        assert not rep.passed
        rec = json.loads(rep.to_json())
        assert np.asarray(rec["witness"]["A"]).shape == (6, 6)
        assert np.asarray(rec["witness"]["P"]).shape == (6, 6)


class TestMidpoint:
    def test_counterexample_above_one(self):
        res = mc.midpoint_concavity_search(3.0, budget=1000)
        assert res.found and res.expected and res.margin < -1e-9
        rec = res.to_record()
        assert rec["passed"] and "witness" in rec
        f = ef.renyi(3.0)
        assert mc.midpoint_margin(f, res.A, res.B) == res.margin

    def test_none_below_one(self):
        res = mc.midpoint_concavity_search(0.5, budget=500)
        assert res.status == "no_violation" and res.expected and res.trials == 500
        assert res.margin >= -1e-9


class TestBranchProbe:
    @pytest.mark.parametrize("gamma", [1.5, 2.0, 3.0, 5.0])
    def test_root(self, gamma):
        np.testing.assert_allclose(mc.branch_point_probe(gamma), math.tan(math.pi / (2 * gamma)),
                                   rtol=1e-10)

    def test_gamma_two(self):
        assert abs(mc.branch_point_probe(2.0) - 1.0) < 1e-12

    @pytest.mark.parametrize("gamma", [0.5, 0.8, 1.0])
    def test_no_root(self, gamma):
        assert mc.branch_point_probe(gamma) == math.inf

    def test_profile_at_zero(self):
        assert mc.branch_profile(2.0, 0.0) == 0.5

    def test_positive_gamma(self):
        with pytest.raises(ValueError):
            mc.branch_point_probe(0.0)


def test_run_suite_records():
    recs = mc.run_suite(SMALL, gammas_search=(0.5, 3.0), budget=200)
    assert [r["check"] for r in recs].count("davis") == 2
    assert all(r["passed"] for r in recs)
