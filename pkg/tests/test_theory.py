import numpy as np
import pytest

from infswap.theory import (
    alpha_sweep,
    default_resolution,
    min_permutation_pairing,
    min_permutation_pairing_bruteforce,
    optimal_alpha,
    random_schedule,
    rate_bound,
    v_probability,
    v_probability_grid_oracle,
    v_risk,
    v_risk_grid_oracle,
)


@pytest.mark.parametrize("k", range(1, 9))
def test_optimal_schedule_attains_bound(k):
    assert abs(v_probability(optimal_alpha(k)).value - (2 - 0.5 ** (k - 1))) < 1e-12
    assert rate_bound(k) == 2 - 0.5 ** (k - 1)


def test_known_values():
    assert rate_bound(2) == 1.5
    assert rate_bound(6) == 1.96875
    assert v_probability((1.0,)).value == 1.0
    assert v_probability((1.0, 0.0)).value == 1.0
    assert v_probability((1.0, 1.0)).value == 1.0


def test_two_temperature_sweep():
    a = np.round(np.arange(0, 101) * 0.01, 2)
    np.testing.assert_allclose(alpha_sweep(a), np.minimum(1 + a, 2 - a), atol=1e-12)


def test_minimizer_is_a_chain_vertex():
    res = v_probability(optimal_alpha(4))
    assert res.minimizing_i_vector[0] == 1.0
    assert set(res.minimizing_i_vector) <= {0.0, 1.0}


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_grid_oracle_agrees_on_random_schedules(k):
    rng = np.random.default_rng(100 + k)
    res = default_resolution(k)
    for _ in range(100):
        sched = random_schedule(rng, k)
        assert abs(v_probability_grid_oracle(sched) - v_probability(sched).value) <= res * k


def test_optimal_schedule_beats_random_ones():
    rng = np.random.default_rng(0)
    for k in range(2, 6):
        best = v_probability(optimal_alpha(k)).value
        for _ in range(200):
            assert v_probability(random_schedule(rng, k)).value <= best + 1e-12


def test_rearrangement_pairing():
    rng = np.random.default_rng(1)
    for _ in range(200):
        k = int(rng.integers(1, 7))
        sched = random_schedule(rng, k)
        r = rng.exponential(size=k)
        assert min_permutation_pairing(r, sched) == pytest.approx(min_permutation_pairing_bruteforce(r, sched))


def test_v_risk_values():
    assert v_risk((1.0, 0.5), [(1.0, 0.0)]).value == pytest.approx(1.5)
    assert v_risk((1.0, 0.5), [(1.0, 0.0), (0.2, 0.5)]).value == pytest.approx(1.3)
    assert v_risk((1.0,), [(0.5, 0.1)]).value == pytest.approx(0.7)


def test_v_risk_grid_oracle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        sched = random_schedule(rng, 3)
        d = rng.uniform(0, 1, size=(3, 2))
        assert abs(v_risk_grid_oracle(sched, d, 1e-2) - v_risk(sched, d).value) <= 3e-2


def test_errors():
    with pytest.raises(ValueError):
        optimal_alpha(0)
    with pytest.raises(ValueError):
        optimal_alpha(9)
    with pytest.raises(ValueError):
        v_probability_grid_oracle((1.0, 0.5), 0.1)
    with pytest.raises(ValueError):
        v_probability_grid_oracle((1.0, 0.5), 0.003)
    with pytest.raises(ValueError):
        v_risk((1.0, 0.5), [])
    with pytest.raises(ValueError):
        v_risk((1.0, 0.5), [(-1.0, 0.0)])
    with pytest.raises(ValueError):
        min_permutation_pairing((0.1,), (1.0, 0.5))
