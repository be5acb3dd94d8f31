import math

import numpy as np
import pytest

import lswn


def test_simulate_shape_and_determinism():
    a = lswn.simulate(model=1, n=40, p=3, N=6, seed=2)
    assert a.shape == (40, 6, 3)
    assert np.array_equal(a, lswn.simulate(model=1, n=40, p=3, N=6, seed=2))
    assert not np.array_equal(a, lswn.simulate(model=1, n=40, p=3, N=6, seed=3))


def test_run_test_returns_a_decision():
    x = lswn.simulate(n=120, p=2, N=8, seed=4)
    result = lswn.run_test(x, B=200, seed=1)
    assert isinstance(result["reject"], bool)
    assert result["params"]["B"] == 200
    assert result["provenance"]["tau"] == "gcv"
    assert result == lswn.run_test(x, B=200, seed=1, jobs=2)


def test_user_tuning_and_errors():
    x = lswn.simulate(n=120, p=2, N=8, seed=4)
    result = lswn.run_test(x, B=150, tau=0.2, L=3)
    assert result["params"]["tau"] == 0.2
    assert result["provenance"]["L"] == "user"
    with pytest.raises(lswn.LswnError, match="ConfigInfeasible"):
        lswn.run_test(x, tau=0.9)
    with pytest.raises(lswn.LswnError):
        lswn.run_test(np.zeros((5, 2, 1)))


def test_local_linear_reproduces_lines():
    n = 50
    t = np.arange(1, n + 1) / n
    x = np.broadcast_to(t[:, None, None], (n, 3, 2)).copy()
    assert np.allclose(lswn.estimate_mean(x, 0.2), x, atol=1e-10)
    b, curve = lswn.gcv_bandwidth(np.ones((n, 3, 2)))
    assert b == curve[-1][0]


def test_statistic_matches_oracle():
    rng = np.random.default_rng(0)
    e = rng.standard_normal((40, 3, 2))
    q = lswn.q_statistic(e, 0.2, 4, 1)
    g = max(abs(lswn.g_sum_oracle(e, c / 40, j, 0.2, 4, 1)) for c in range(8, 33) for j in range(3))
    assert math.isclose(q, math.sqrt(8 * 4) * g, rel_tol=1e-9)


def test_rules_and_round_trip(tmp_path):
    assert lswn.rule_lags(200) == 4
    assert lswn.rule_gap(200) == 1
    x = lswn.simulate(n=10, p=2, N=3, seed=1)
    for name in ("p.csv", "p.ndjson"):
        lswn.save_panel(x, str(tmp_path / name))
        assert np.array_equal(lswn.load_panel(str(tmp_path / name)), x)
