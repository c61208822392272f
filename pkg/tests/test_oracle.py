import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from powergame.oracle import (
    InstanceTooLargeError, Oracle, OutcomeDistribution, brute_force_nb, brute_force_pareto, exact_utility,
    is_epsilon_cce, is_epsilon_ce, nash_product, pure_nash_equilibria, write_report,
)
from _instances import degenerate_pair, example1_game, naive_tensor, naive_utility, random_sparse, toy_game


def profiles(game):
    return list(itertools.product(*[range(L) for L in game.sizes]))


def naive_ce_violation(phi, game):
    """max over (i, k, j) of sum_{k_-i} phi(k, k_-i) (u_i(j, k_-i) - u_i(k, k_-i))."""
    worst = -np.inf
    for i in range(game.n_users):
        for k in range(game.sizes[i]):
            for j in range(game.sizes[i]):
                gain = 0.0
                for prof, p in phi.items():
                    if prof[i] != k:
                        continue
                    dev = prof[:i] + (j,) + prof[i + 1:]
                    gain += p * (naive_utility(game, dev)[i] - naive_utility(game, prof)[i])
                worst = max(worst, gain)
    return worst


def naive_cce_violation(phi, game):
    worst = -np.inf
    for i in range(game.n_users):
        for j in range(game.sizes[i]):
            gain = sum(p * (naive_utility(game, prof[:i] + (j,) + prof[i + 1:])[i] - naive_utility(game, prof)[i])
                       for prof, p in phi.items())
            worst = max(worst, gain)
    return worst


# ---------------------------------------------------------------- utilities

def test_degenerate_pair_hand_threshold():
    # gamma = 1 * 20 / (2**0.75 - 1) - 1, interference 0.25 * 20 = 5
    gamma = 20 / (2 ** 0.75 - 1) - 1
    assert gamma == pytest.approx(28.33, abs=0.01)
    assert 0.25 * 20 <= gamma
    g = degenerate_pair()
    assert naive_utility(g, (0, 0)).tolist() == [1.0, 1.0]
    assert exact_utility((0, 0), g).tolist() == [1.0, 1.0]


def test_degenerate_pair_interference_limited():
    # at rate 3 the threshold 20/7 - 1 = 1.857 is below the interference of 5
    g = degenerate_pair(rate=3.0)
    assert naive_utility(g, (0, 0)).tolist() == [0.0, 0.0]
    assert exact_utility((0, 0), g).tolist() == [0.0, 0.0]


@pytest.mark.parametrize("make", [toy_game, lambda: example1_game(5, 2), lambda: toy_game(cross=(0.5, 0.8), budget=7.5)])
def test_utility_tensor_matches_full_enumeration(make):
    g = make()
    o = Oracle(g)
    for i in range(g.n_users):
        np.testing.assert_allclose(o.utility_tensor(i), naive_tensor(g, i), atol=1e-12)


def test_three_user_utilities_match_enumeration():
    g = toy_game(n_users=3, levels=(0, 10), budget=5.0)
    o = Oracle(g)
    for k in profiles(g):
        np.testing.assert_allclose(o.utility(k), naive_utility(g, k), atol=1e-12)


def test_all_zero_profile_has_zero_utility():
    g = toy_game()
    zero = tuple(g.policy_sets[i].index([0.0, 0.0]) for i in range(2))
    assert exact_utility(zero, g).tolist() == [0.0, 0.0]


def test_oracle_is_deterministic_and_cached():
    g = example1_game(10, 2)
    o = Oracle(g, cache_size=4)
    first = o.utility_tensor(0)
    np.testing.assert_array_equal(first, Oracle(g).utility_tensor(0))
    assert len(o._cache) <= 4
    np.testing.assert_array_equal(o.utility_tensor(0), first)


def test_too_many_channel_states():
    with pytest.raises(InstanceTooLargeError):
        Oracle(example1_game(5), max_state_combos=10)


def test_too_many_profiles():
    g = example1_game(15)
    assert np.prod(g.sizes) > 1e6
    with pytest.raises(InstanceTooLargeError):
        Oracle(g).utility_tensor(0)


# ---------------------------------------------------------------- CE / CCE checks

def test_pure_nash_point_mass_is_exact_ce_and_cce():
    g = toy_game()
    o = Oracle(g)
    T = [naive_tensor(g, i) for i in range(2)]
    # pure NE by an independent best-response scan
    ne = [k for k in profiles(g)
          if T[0][k] >= T[0][:, k[1]].max() - 1e-15 and T[1][k] >= T[1][k[0], :].max() - 1e-15]
    assert ne and ne == pure_nash_equilibria(g, o)
    for k in ne:
        phi = OutcomeDistribution.point_mass(k, g.sizes)
        assert is_epsilon_ce(phi, g, 0.0, o).passed
        assert is_epsilon_cce(phi, g, 0.0, o).passed


def test_point_mass_violation_equals_best_response_gap():
    g = toy_game()
    o = Oracle(g)
    T0 = naive_tensor(g, 0)
    k = (0, 0)  # zero power everywhere: user 0 never succeeds
    gap = T0[:, 0].max() - T0[0, 0]
    assert gap > 0
    phi = OutcomeDistribution.point_mass(k, g.sizes)
    ce = is_epsilon_ce(phi, g, 0.0, o)
    cce = is_epsilon_cce(phi, g, 0.0, o)
    assert ce.max_violation == pytest.approx(gap, abs=1e-12)
    assert cce.max_violation == pytest.approx(gap, abs=1e-12)
    assert not ce.passed and is_epsilon_ce(phi, g, gap + 1e-9, o).passed
    assert ce.witness_action == 0


def test_uniform_distribution_against_naive_sums():
    g = toy_game()
    L = g.sizes[0]
    phi = {k: 1.0 / L ** 2 for k in profiles(g)}
    dist = OutcomeDistribution.dense(np.full(g.sizes, 1.0 / L ** 2))
    assert is_epsilon_ce(dist, g, 0.0).max_violation == pytest.approx(naive_ce_violation(phi, g), abs=1e-12)
    assert is_epsilon_cce(dist, g, 0.0).max_violation == pytest.approx(naive_cce_violation(phi, g), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), support=st.integers(1, 8))
def test_sparse_violations_match_naive(seed, support):
    g = toy_game(cross=(0.5, 0.8), budget=7.5)
    phi = random_sparse(np.random.default_rng(seed), g.sizes, support)
    dist = OutcomeDistribution.sparse(phi, g.sizes)
    assert is_epsilon_ce(dist, g, 0.0).max_violation == pytest.approx(naive_ce_violation(phi, g), abs=1e-12)
    assert is_epsilon_cce(dist, g, 0.0).max_violation == pytest.approx(naive_cce_violation(phi, g), abs=1e-12)


def test_representations_agree():
    g = toy_game()
    rng = np.random.default_rng(3)
    a = rng.dirichlet(np.ones(g.sizes[0]), size=4)
    b = rng.dirichlet(np.ones(g.sizes[1]), size=4)
    prod = OutcomeDistribution.product_mixture([a, b])
    table = sum(np.outer(x, y) for x, y in zip(a, b)) / 4
    dense = OutcomeDistribution.dense(table)
    sparse = OutcomeDistribution.sparse({k: table[k] for k in profiles(g)}, g.sizes)
    for check in (is_epsilon_ce, is_epsilon_cce):
        vals = [check(d, g, 0.0).max_violation for d in (prod, dense, sparse)]
        assert vals[0] == pytest.approx(vals[1], abs=1e-12) == pytest.approx(vals[2], abs=1e-12)


def lp_correlated_equilibrium(game, objective):
    """A CE maximizing ``objective . phi`` by linear programming."""
    T = [naive_tensor(game, i) for i in range(game.n_users)]
    allp = profiles(game)
    rows = []
    for i in range(game.n_users):
        for k in range(game.sizes[i]):
            for j in range(game.sizes[i]):
                if j == k:
                    continue
                row = np.zeros(len(allp))
                for c, prof in enumerate(allp):
                    if prof[i] == k:
                        row[c] = T[i][prof[:i] + (j,) + prof[i + 1:]] - T[i][prof]
                rows.append(row)
    res = linprog(-objective, A_ub=np.array(rows), b_ub=np.zeros(len(rows)),
                  A_eq=np.ones((1, len(allp))), b_eq=[1.0], bounds=(0, None), method="highs")
    assert res.status == 0
    x = np.clip(res.x, 0, None)
    x /= x.sum()
    return {p: float(v) for p, v in zip(allp, x) if v > 1e-12}


@pytest.mark.parametrize("cross,budget", [((0.3, 0.6), 5.0), ((0.5, 0.8), 7.5), ((0.2, 0.9), 10.0)])
def test_lp_correlated_equilibria_are_coarse(cross, budget):
    g = toy_game(cross=cross, budget=budget)
    rng = np.random.default_rng(0)
    for _ in range(5):
        phi = lp_correlated_equilibrium(g, rng.standard_normal(int(np.prod(g.sizes))))
        dist = OutcomeDistribution.sparse(phi, g.sizes)
        assert is_epsilon_ce(dist, g, 1e-9).passed
        assert is_epsilon_cce(dist, g, 1e-9).passed


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), support=st.integers(1, 10))
def test_cce_violation_bounded_by_positive_swap_gains(seed, support):
    # the unconditional deviation to j is the sum over k of the swaps k -> j
    g = toy_game()
    o = Oracle(g)
    dist = OutcomeDistribution.sparse(random_sparse(np.random.default_rng(seed), g.sizes, support), g.sizes)
    ce = is_epsilon_ce(dist, g, 0.0, o).max_violation
    cce = is_epsilon_cce(dist, g, 0.0, o).max_violation
    assert cce <= (g.sizes[0] - 1) * max(ce, 0.0) + 1e-12


def test_check_result_unpacks_and_reports(tmp_path):
    g = toy_game()
    res = is_epsilon_ce(OutcomeDistribution.point_mass((0, 0), g.sizes), g, 0.05)
    passed, viol, witness = res
    assert passed is False and viol > 0.05 and witness[0] is not None
    path = tmp_path / "report.csv"
    write_report([res], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "check,epsilon,max_violation,witness_user,witness_action,witness_deviation,pass"
    assert lines[1].startswith("ce,0.05,") and lines[1].endswith(",0")


# ---------------------------------------------------------------- Pareto / Nash bargaining

def test_pareto_on_sixteen_profiles():
    g = example1_game(5, 2)
    assert g.sizes == (4, 4)
    T = [naive_tensor(g, i) for i in range(2)]
    W = T[0] + T[1]
    k, w = brute_force_pareto(g, [1.0, 1.0])
    assert w == pytest.approx(W.max(), abs=1e-12)
    assert W[k] == pytest.approx(W.max(), abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.1, 5.0), b=st.floats(0.1, 5.0), c=st.floats(0.1, 10.0))
def test_pareto_alpha_scaling_invariance(a, b, c):
    g = toy_game(cross=(0.5, 0.8), budget=7.5)
    o = Oracle(g)
    k1, w1 = brute_force_pareto(g, [a, b], o)
    k2, w2 = brute_force_pareto(g, [c * a, c * b], o)
    assert w2 == pytest.approx(c * w1, rel=1e-9)
    u2 = o.utility(k2)
    assert a * u2[0] + b * u2[1] == pytest.approx(w1, rel=1e-9)


@pytest.mark.parametrize("alphas", [(1.0, 1.0), (1.0, 3.0), (2.5, 0.4)])
def test_pareto_point_is_not_dominated(alphas):
    g = toy_game(cross=(0.5, 0.8), budget=7.5)
    k, _ = brute_force_pareto(g, alphas)
    u = naive_utility(g, k)
    for other in profiles(g):
        v = naive_utility(g, other)
        assert not (np.all(v >= u - 1e-12) and np.any(v > u + 1e-12))


def test_single_user_pareto_is_best_action():
    g = toy_game(n_users=1)
    k, w = brute_force_pareto(g, [1.0])
    assert w == pytest.approx(max(naive_utility(g, (a,))[0] for a in range(g.sizes[0])))


def test_nash_product_value():
    assert nash_product([0.5, 0.75], [0.25, 0.5]) == pytest.approx(0.0625)
    assert nash_product([0.5, 0.2], [0.25, 0.5]) == 0.0


def test_nb_with_zero_disagreement_maximizes_product():
    g = toy_game(cross=(0.5, 0.8), budget=7.5)
    P = naive_tensor(g, 0) * naive_tensor(g, 1)
    k, val = brute_force_nb(g, [0.0, 0.0])
    assert val == pytest.approx(P.max(), abs=1e-12)
    assert P[k] == pytest.approx(P.max(), abs=1e-12)


def test_nb_differs_from_utilitarian_argmax():
    # equal sum rates, but the bargaining point splits them evenly
    g = toy_game(cross=(0.5, 0.8), budget=7.5)
    kp, wp = brute_force_pareto(g, [1.0, 1.0])
    kn, pn = brute_force_nb(g, [0.0, 0.0])
    assert kp != kn
    up, un = naive_utility(g, kp), naive_utility(g, kn)
    assert up.tolist() == [0.5, 0.75] and un.tolist() == [0.625, 0.625]
    assert pn == pytest.approx(0.390625) and np.prod(up) == pytest.approx(0.375)


def test_nb_unreachable_disagreement_returns_it():
    g = toy_game()
    k, val = brute_force_nb(g, [1.0, 1.0], disagreement=(3, 2))
    assert (k, val) == ((3, 2), 0.0)


@pytest.mark.parametrize("d", [(0.1, 0.1), (0.3, 0.5), (0.6, 0.2)])
def test_nb_point_dominates_disagreement(d):
    g = toy_game(cross=(0.5, 0.8), budget=7.5)
    k, val = brute_force_nb(g, d)
    if val > 0:
        assert np.all(naive_utility(g, k) > np.asarray(d))


def test_rate_weighted_pareto_scales_by_rate():
    g = toy_game(rate=0.75)
    k1, w1 = brute_force_pareto(g, [1, 1])
    k2, w2 = brute_force_pareto(g, [1, 1], rate_weighted=True)
    assert k1 == k2 and w2 == pytest.approx(0.75 * w1)
