import math

import numpy as np
import pytest
from scipy import stats

from infswap import rng
from infswap.estimator import run_simulation
from infswap.rng import derive_substream
from infswap.samplers import (
    REGISTRY,
    BrownianCrossing,
    DiscreteModel,
    GaussianWalk,
    GeometricModel,
    GibbsModel,
    MetropolisChain,
    RandomWalkCrossing,
    SchauderCoefficients,
    coupled_brownian_trial,
    crossing_indicator,
    exact_probability,
    exact_probability_a2,
    gaussian_nd_draw,
    gaussian_walk_draw,
    geometric_via_exponential,
    make_model,
    mh_gibbs_draw,
    random_walk_path,
    rate_4d,
    schauder_function,
    schauder_path,
)
from infswap.samplers.brownian import DyadicPath, flat_index, schauder_path_direct
from infswap.samplers.geometric import geometric_lambda
from infswap.samplers.gibbs import X_MODE, in_a1, thinning
from infswap.theory import optimal_alpha
from infswap.weights import TemperatureSchedule


# --- Gaussian walk -------------------------------------------------------------

def test_gaussian_zero_point():
    class Zero:
        def normal(self, n=None):
            return 0.0 if n is None else np.zeros(n)
    x, r, hit = gaussian_walk_draw(0.01, Zero())
    assert (x, r, hit) == (0.0, 0.0, False)
    x, r, hit = gaussian_nd_draw(0.01, 4, Zero())
    assert r == 0.0 and not hit


def test_gaussian_analytic_matches_large_mc():
    eps = 1e-2
    p = exact_probability(eps)
    n = 10_000_000
    hits = 0
    for s in range(0, n, 1 << 20):
        t = np.arange(s, min(n, s + (1 << 20)))
        x = 0.1 * rng.normals(17, t, 0, 1)[:, 0]
        hits += int(((x <= -0.25) | (x >= 0.2)).sum())
    se = math.sqrt(p * (1 - p) / n)
    assert abs(hits / n - p) < 3 * se


def test_gaussian_nd_dimension_one_matches_walk():
    s1, s2 = derive_substream(1, 2, 3), derive_substream(1, 2, 3)
    x1, r1, h1 = gaussian_walk_draw(0.02, s1)
    x2, r2, h2 = gaussian_nd_draw(0.02, 1, s2)
    assert x1 == x2[0] and r1 == r2 and h1 == h2


def test_gaussian_temperature_scaling():
    # draws at eps/alpha have the base law with eps replaced by eps/alpha
    sched = TemperatureSchedule((1.0, 0.5))
    rates, _ = GaussianWalk().draw_trials(4, np.arange(20000), 0.02, sched)
    direct, _ = GaussianWalk().draw_trials(5, np.arange(20000), 0.04, TemperatureSchedule((1.0,)))
    assert stats.ks_2samp(rates[:, 1], direct[:, 0]).pvalue > 0.001


def test_gaussian_dimension_validation():
    with pytest.raises(ValueError):
        GaussianWalk(0)


# --- 4-D Gibbs -----------------------------------------------------------------

def test_rate_4d_values():
    assert rate_4d(X_MODE) == pytest.approx(6.25e-4, abs=1e-15)
    assert rate_4d(np.zeros(4)) == pytest.approx(1.36, abs=1e-15)
    assert rate_4d(np.full(4, 10.0)) > 1e4
    with pytest.raises(ValueError):
        rate_4d(np.zeros(3))


def test_rate_4d_local_minimum():
    rs = np.random.default_rng(0)
    d = rs.normal(size=(10_000, 4))
    d *= (0.05 * rs.random(10_000) ** 0.25 / np.linalg.norm(d, axis=1))[:, None]
    assert (rate_4d(X_MODE + d) >= rate_4d(X_MODE) - 1e-12).all()


def test_target_sets():
    x = np.array([-0.2, 0.0, 0.1, 0.0])
    assert in_a1(x)
    assert not in_a1(np.array([0.0, 0.0, 0.1, 0.0]))
    # a point with I = 0.6 is in A2
    q = math.sqrt(0.6 + 2.64) - 1.625
    y = X_MODE + np.array([math.sqrt(q), 0, 0, 0])
    assert rate_4d(y) == pytest.approx(0.6)
    assert GibbsModel("A2").target == "A2"
    with pytest.raises(ValueError):
        GibbsModel("A3")


def test_thinning_interval():
    assert thinning(1 / 20) == 160
    assert thinning(1 / 40) == 320
    assert thinning(0.07) == 115


def test_chain_requires_state():
    with pytest.raises(ValueError):
        mh_gibbs_draw(0.05, derive_substream(0, 0, 0), None)


def test_chain_draw_and_acceptance():
    c = MetropolisChain(0.05, derive_substream(0, 0, 0))
    x, r, (a1, a2) = mh_gibbs_draw(0.05, c.stream, c)
    assert c.steps == 160 and r == pytest.approx(rate_4d(x))
    assert 0.2 < c.acceptance_rate < 1.0


def test_chain_mean_rate_stable_across_seeds():
    means = []
    for seed in (1, 2):
        c = MetropolisChain(0.05, derive_substream(seed, 0, 1 << 41))
        c.advance(50_000)
        means.append(rate_4d(c.sample(4000)).mean())
    assert abs(means[0] - means[1]) < 0.05 * np.mean(means)


def test_chain_matches_quadrature_mean_rate():
    # E I under mu^eps from the same one-dimensional reduction used for A2
    from scipy.integrate import quad
    eps = 0.05

    def moment(power):
        f = lambda q: ((1.625 + q) ** 2 - 2.64) ** power * q ** 0.75 * math.exp(-((1.625 + q) ** 2) / eps)
        return quad(f, 0, 3, epsabs=0, epsrel=1e-10, limit=200)[0]

    exact = moment(1) / moment(0)
    c = MetropolisChain(eps, derive_substream(3, 0, 1 << 41))
    c.advance(100_000)
    est = rate_4d(c.sample(20_000)).mean()
    assert abs(est - exact) < 0.05 * exact


def test_gibbs_a2_quadrature_matches_mcmc():
    est = run_simulation(GibbsModel("A2"), optimal_alpha(4), 1 / 20, 20_000, 8).report
    truth = exact_probability_a2(1 / 20)
    assert truth == pytest.approx(2.704e-4, rel=1e-3)
    assert abs(est.estimate - truth) < 4 * est.std_error


def test_gibbs_block_rules():
    model = GibbsModel("A2", burn_in=100, block=8)
    sched = optimal_alpha(2)
    rates, hits = model.draw_trials(0, np.arange(8, 16), 0.05, sched)
    assert rates.shape == hits.shape == (8, 2)
    # a block restarts its chains, so it does not depend on earlier blocks
    again, _ = GibbsModel("A2", burn_in=100, block=8).draw_trials(0, np.arange(8, 16), 0.05, sched)
    assert np.array_equal(rates, again)
    for bad in (np.arange(3, 8), np.arange(4, 12), np.array([0, 2, 3])):
        with pytest.raises(ValueError):
            model.draw_trials(0, bad, 0.05, sched)
    with pytest.raises(TypeError):
        model.draw(0.05, derive_substream(0, 0, 0))


# --- geometric ----------------------------------------------------------------

def test_geometric_lambda():
    assert geometric_lambda(0.5) == pytest.approx(math.log(2), abs=1e-15)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            geometric_lambda(bad)


def test_geometric_support_and_pmf():
    eps, p = 0.1, 0.3
    lam = geometric_lambda(p)
    u = rng.uniforms(6, np.arange(1_000_000), 0, 1)[:, 0]
    y = -(eps / lam) * np.log1p(-u)
    k = np.floor(y / eps) + 1.0
    assert (k >= 1).all() and (k == np.round(k)).all()
    assert abs((k == 1).mean() - p) < 0.01 * p
    assert abs((k == 3).mean() - p * (1 - p) ** 2) < 0.02 * p * (1 - p) ** 2
    x, yy, lam2 = geometric_via_exponential(eps, p, derive_substream(0, 0, 0))
    assert lam2 == lam and x / eps == pytest.approx(round(x / eps))


def test_geometric_estimators_unbiased():
    m = GeometricModel(p=0.5, threshold=1.0)
    r = run_simulation(m, optimal_alpha(3), 0.1, 200_000, 2).report
    assert m.analytic_truth(0.1) == pytest.approx(0.5 ** 9)
    assert abs(r.estimate - m.analytic_truth(0.1)) < 4 * r.std_error
    risk = GeometricModel(p=0.5, threshold=1.0, mode="risk", slope=0.5)
    r = run_simulation(risk, optimal_alpha(3), 0.1, 200_000, 2).report
    assert abs(r.estimate - risk.analytic_truth(0.1)) < 4 * r.std_error


# --- discrete -----------------------------------------------------------------

def test_discrete_sampling_frequencies():
    m = DiscreteModel([0.0, 0.5, 1.2], [False, False, True])
    idx = m._pick(rng.uniforms(1, np.arange(200_000), 0, 1)[:, 0], 0.5)
    freq = np.bincount(idx, minlength=3) / 200_000
    np.testing.assert_allclose(freq, m.probabilities(0.5), atol=0.005)
    with pytest.raises(ValueError):
        DiscreteModel([0.0, 1.0], [True])


# --- Brownian -----------------------------------------------------------------

def test_schauder_function_values():
    assert schauder_function(1, 1, 0.5) == 0.5
    for n, k in [(1, 1), (2, 3), (3, 5), (5, 17)]:
        assert schauder_function(n, k, (k - 1) / 2 ** n) == 0.0
        if (k + 1) / 2 ** n <= 1:
            assert schauder_function(n, k, (k + 1) / 2 ** n) == 0.0
        assert schauder_function(n, k, k / 2 ** n) == pytest.approx(2 ** (-(n + 1) / 2))
    assert schauder_function(2, 3, 0.25) == 0.0
    with pytest.raises(ValueError):
        schauder_function(2, 2, 0.5)
    with pytest.raises(ValueError):
        schauder_function(2, 1, 1.5)


def test_flat_index_layout():
    assert [flat_index(1, 1), flat_index(2, 1), flat_index(2, 3), flat_index(3, 1)] == [1, 2, 3, 4]
    with pytest.raises(ValueError):
        flat_index(2, 2)


def test_schauder_path_matches_direct_sum():
    rs = np.random.default_rng(0)
    for _ in range(20):
        c = SchauderCoefficients.from_flat(rs.normal(size=16))
        a = schauder_path(c, 0.3).values
        b = schauder_path_direct(c, 0.3).values
        assert np.abs(a - b).max() < 1e-12


def test_schauder_special_paths():
    assert (schauder_path(SchauderCoefficients.zeros(5), 1.0).values == 0).all()
    line = schauder_path(SchauderCoefficients.from_flat([0.5] + [0.0] * 15), 1.0)
    np.testing.assert_allclose(line.values, 0.5 * line.times, atol=1e-15)
    assert line.values[0] == 0.0 and len(line) == 17


def test_schauder_refinement_keeps_existing_points():
    rs = np.random.default_rng(1)
    c = SchauderCoefficients.from_flat(rs.normal(size=32))
    coarse = schauder_path(c, 1.0).values
    fine = schauder_path(c.refined(), 1.0).values
    assert np.array_equal(fine[::2], coarse)
    assert np.array_equal(fine[1::2], 0.5 * (coarse[:-1] + coarse[1:]))


def test_schauder_shape_errors():
    with pytest.raises(ValueError):
        SchauderCoefficients(0.0, [[1.0], [1.0]])
    with pytest.raises(ValueError):
        SchauderCoefficients.from_flat(np.zeros(6))


def test_schauder_path_variance_is_time():
    z = rng.normals(2, np.arange(40_000), 0, 64)
    vals = np.array([schauder_path(SchauderCoefficients.from_flat(row), 1.0).values for row in z[:4000]])
    np.testing.assert_allclose(vals.var(axis=0)[1:], np.linspace(0, 1, 65)[1:], rtol=0.08)


def test_crossing_indicator():
    assert not crossing_indicator(DyadicPath(np.zeros(9)), 0.5)
    line = DyadicPath(np.linspace(0, 0.5, 9))
    assert crossing_indicator(line, 0.5)
    rs = np.random.default_rng(2)
    for _ in range(200):
        v = DyadicPath(np.concatenate([[0.0], np.cumsum(rs.normal(size=32)) * 0.2]))
        b1, b2 = sorted(rs.uniform(0.01, 2, size=2))
        if crossing_indicator(v, b2):
            assert crossing_indicator(v, b1)


def test_crossing_monotone_under_refinement():
    rs = np.random.default_rng(3)
    for _ in range(200):
        c = SchauderCoefficients.from_flat(rs.normal(size=64))
        crossed = crossing_indicator(schauder_path(c, 0.5), 0.6)
        finer = crossing_indicator(schauder_path(c.refined(rs.normal(size=64)), 0.5), 0.6)
        assert finer or not crossed


def test_coupled_trial_shares_tail():
    sched = optimal_alpha(3)
    rates, crossed = coupled_brownian_trial(0.03, sched, 6, 0.0, derive_substream(0, 0, 0))
    assert crossed.all() and rates.shape == (3,) and (rates >= 0).all()
    with pytest.raises(ValueError):
        coupled_brownian_trial(0.03, sched, 1, 0.5, derive_substream(0, 0, 0))


def test_coupled_trial_equal_alphas():
    s = derive_substream(1, 0, 0)
    sched = TemperatureSchedule((1.0, 1.0, 1.0))
    rates, _ = coupled_brownian_trial(0.03, sched, 5, 0.5, s)
    s2 = derive_substream(1, 0, 0)
    leads = s2.normal(12).reshape(3, 4)
    np.testing.assert_allclose(rates, 0.5 * 0.03 * (leads ** 2).sum(axis=1), rtol=1e-14)


def test_coupled_paths_match_schauder_path():
    eps, m, b = 0.05, 6, 0.3
    sched = optimal_alpha(3)
    model = BrownianCrossing(m, b)
    rates, crossed = model.draw_trials(4, np.arange(50), eps, sched)
    for t in range(50):
        tail = rng.normals(4, [t], rng.SHARED_SLOT, 2 ** m - 4)[0]
        for j, a in enumerate(sched.alphas):
            lead = rng.normals(4, [t], j, 4)[0]
            z = np.concatenate([lead / math.sqrt(a), tail])
            path = schauder_path(SchauderCoefficients.from_flat(z), math.sqrt(eps))
            # lead scaled by sqrt(eps/alpha) and tail by sqrt(eps)
            assert crossed[t, j] == crossing_indicator(path, b) or abs(path.values.max() - b) < 1e-12
            assert rates[t, j] == pytest.approx(0.5 * eps / a * (lead ** 2).sum(), rel=1e-13)


def test_brownian_marginal_at_each_temperature():
    # each temperature's path is sqrt(eps/alpha) W: check the endpoint variance of slot j
    eps, m = 0.04, 4
    sched = optimal_alpha(2)
    model = BrownianCrossing(m, 10.0, tail_scaling="per_temperature")
    t = np.arange(20_000)
    for j, a in enumerate(sched.alphas):
        z0 = rng.normals(9, t, j, 4)[:, 0] * math.sqrt(eps / a)
        assert abs(z0.var() / (eps / a) - 1) < 0.03
    assert model.config()["tail_scaling"] == "per_temperature"
    with pytest.raises(ValueError):
        BrownianCrossing(10, 0.5, tail_scaling="other")


def test_brownian_ins_matches_plain_mc_on_same_construction():
    eps, m, b = 0.05, 6, 0.5
    ins = run_simulation(BrownianCrossing(m, b), optimal_alpha(3), eps, 100_000, 1).report
    mc = run_simulation(BrownianCrossing(m, b), (1.0,), eps, 400_000, 2).report
    assert abs(ins.estimate - mc.estimate) < 3 * math.hypot(ins.std_error, mc.std_error)


def test_random_walk_path():
    s = derive_substream(0, 0, 0)
    z = derive_substream(0, 0, 0).normal(1)
    p = random_walk_path(0.03, 1, s)
    assert np.array_equal(p.values, [0.0, math.sqrt(0.03) * z[0]])
    end = np.array([random_walk_path(0.5, 8, derive_substream(1, i, 0)).values[-1] for i in range(20_000)])
    assert abs(end.var() / 0.5 - 1) < 0.03
    with pytest.raises(ValueError):
        random_walk_path(0.1, 0, s)


def test_random_walk_marginal_variance_large():
    z = rng.normals(3, np.arange(100_000), 0, 16)
    end = math.sqrt(0.03 / 16) * z.sum(axis=1)
    assert abs(end.var() / 0.03 - 1) < 0.02


def test_random_walk_kernel_matches_path():
    model = RandomWalkCrossing(37, 0.2)
    sched = TemperatureSchedule((1.0,))
    _, crossed = model.draw_trials(5, np.arange(300), 0.03, sched)
    ref = [crossing_indicator(random_walk_path(0.03, 37, derive_substream(5, i, 0)), 0.2) for i in range(300)]
    assert np.array_equal(crossed[:, 0], ref)
    with pytest.raises(ValueError):
        model.draw_trials(5, np.arange(3), 0.03, optimal_alpha(2))


# --- registry -----------------------------------------------------------------

def test_registry():
    assert set(REGISTRY) >= {"gaussian", "gibbs4d", "brownian", "random-walk", "geometric", "discrete"}
    assert isinstance(make_model("gaussian", dim=2), GaussianWalk)
    with pytest.raises(ValueError):
        make_model("nope")
