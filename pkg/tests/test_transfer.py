import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zerotemp.graph import build_context_graph
from zerotemp.instances import bernoulli2, countable_linear, golden3, period2
from zerotemp.potential import WordTooShort, make_potential, walters_modulus
from zerotemp.shift import enumerate_words, full_shift
from zerotemp.transfer import (NoConvergence, NotMixing, RpfSolution, apply_ruelle,
                               cylinder_log_measure, equilibrium_diagnostics, gibbs_chain,
                               gibbs_sandwich_gap, gurevich_pressure_periodic,
                               integral_identity_defect, rpf_solve, v_beta_variation)

from conftest import instances


def dense_log_lambda(graph, beta):
    """Oracle: log of the Perron root of the explicit weighted matrix."""
    mat = np.zeros((graph.n, graph.n))
    mat[graph.src, graph.dst] = np.exp(beta * graph.weight)
    return math.log(max(abs(np.linalg.eigvals(mat))))


def solve_with_chain(shift, pot, beta, **kw):
    rpf = rpf_solve(shift, pot, beta, **kw)
    return rpf, gibbs_chain(rpf)


def test_ruelle_bernoulli_beta1():
    s, f = bernoulli2()
    out = apply_ruelle(s, f, 1.0, np.zeros(2))
    assert np.allclose(out, math.log1p(math.exp(-1.0)), atol=1e-15)


def test_ruelle_beta0_counts_in_degree():
    s, f = golden3()
    out = apply_ruelle(s, f, 0.0, np.zeros(3))
    assert np.allclose(out, np.log([3, 3, 2]))


def test_ruelle_golden_direct_summation():
    s, f = golden3()
    out = apply_ruelle(s, f, 2.0, np.zeros(3))
    for d in range(3):
        direct = sum(math.exp(2.0 * f.values[(c, d)]) for c in range(3) if s.allows(c, d))
        assert out[d] == pytest.approx(math.log(direct), abs=1e-14)


@pytest.mark.parametrize("beta", [0.5, 1.0, 8.0, 64.0, 512.0])
def test_rpf_bernoulli_closed_form(beta):
    s, f = bernoulli2()
    rpf = rpf_solve(s, f, beta)
    q = math.exp(-beta)
    assert rpf.log_lambda == pytest.approx(math.log1p(q), abs=1e-14)
    assert np.all(np.abs(rpf.log_h) <= 1e-12)
    assert rpf.nu == pytest.approx([1 / (1 + q), q / (1 + q)], rel=1e-12)


@pytest.mark.parametrize("n", [3, 5, 10])
@pytest.mark.parametrize("beta", [2.0, 8.0])
def test_rpf_countable_geometric_series(n, beta):
    s, f = countable_linear(n)
    rpf = rpf_solve(s, f, beta)
    exact = math.log(-math.expm1(-beta * n)) - math.log(-math.expm1(-beta))
    assert rpf.log_lambda == pytest.approx(exact, abs=1e-12)


def test_rpf_beta0_topological_entropy():
    s, f = bernoulli2()
    assert rpf_solve(s, f, 0.0).log_lambda == pytest.approx(math.log(2), abs=1e-15)


def test_rpf_rejects_non_mixing():
    s = period2()
    f = make_potential(s, 1, {(0,): 0.0, (1,): -1.0})
    with pytest.raises(NotMixing):
        rpf_solve(s, f, 1.0)


def test_power_matches_dense_at_moderate_beta():
    s, f = golden3()
    for beta in (0.5, 1.0, 4.0):
        dense = rpf_solve(s, f, beta, backend="dense")
        power = rpf_solve(s, f, beta, backend="power")
        assert power.log_lambda == pytest.approx(dense.log_lambda, abs=1e-12)
        assert np.allclose(power.log_h, dense.log_h, atol=1e-10)


def test_power_reports_stall():
    s, f = golden3()
    with pytest.raises(NoConvergence):
        rpf_solve(s, f, 16.0, backend="power", max_iter=200)


def test_rpf_dict_roundtrip():
    s, f = golden3()
    rpf = rpf_solve(s, f, 4.0)
    back = RpfSolution.from_dict(rpf.to_dict())
    assert back.log_lambda == rpf.log_lambda
    assert np.array_equal(back.log_h, rpf.log_h)


def test_gurevich_bernoulli_identity():
    s, f = bernoulli2()
    for beta in (1.0, 8.0):
        for n, val in gurevich_pressure_periodic(s, f, beta, 0, 64):
            assert abs(val - (1 - 1 / n) * math.log1p(math.exp(-beta))) <= 1e-12


def test_gurevich_beta0_counts():
    s, f = bernoulli2()
    vals = dict(gurevich_pressure_periodic(s, f, 0.0, 0, 4))
    assert vals[4] == pytest.approx(0.75 * math.log(2), abs=1e-15)


def test_gurevich_independent_of_symbol():
    s, f = golden3()
    beta, n = 2.0, 64
    log_lam = rpf_solve(s, f, beta).log_lambda
    bound = (abs(log_lam) + f.max_abs * f.range) / n
    ends = [gurevich_pressure_periodic(s, f, beta, a, n)[-1][1] for a in range(3)]
    assert all(abs(v - log_lam) <= bound for v in ends)
    assert max(ends) - min(ends) <= 2 * bound


@pytest.mark.parametrize("beta", [1.0, 8.0, 64.0])
def test_bernoulli_cylinders(beta):
    s, f = bernoulli2()
    _, chain = solve_with_chain(s, f, beta)
    p1 = -math.log1p(math.exp(beta))
    assert cylinder_log_measure(chain, (1,)) == pytest.approx(p1, abs=1e-12)
    assert cylinder_log_measure(chain, (1, 1)) == pytest.approx(2 * p1, abs=1e-12)


def test_cylinders_normalized_and_empty():
    s, f = golden3()
    _, chain = solve_with_chain(s, f, 4.0)
    total = math.fsum(math.exp(cylinder_log_measure(chain, (i,))) for i in range(3))
    assert abs(total - 1) <= 1e-12
    assert cylinder_log_measure(chain, (2, 2)) == -math.inf


def test_bernoulli_diagnostics_closed_form():
    s, f = bernoulli2()
    beta = 3.0
    rpf, chain = solve_with_chain(s, f, beta)
    d = equilibrium_diagnostics(rpf, chain)
    q = math.exp(-beta) / (1 + math.exp(-beta))
    assert d["integral_f"] == pytest.approx(-q, abs=1e-14)
    assert d["entropy"] == pytest.approx(math.log1p(math.exp(-beta)) + beta * q, abs=1e-14)
    rpf0, chain0 = solve_with_chain(s, f, 0.0)
    assert equilibrium_diagnostics(rpf0, chain0)["entropy"] == pytest.approx(math.log(2), abs=1e-14)


def test_golden_entropy_decreases():
    s, f = golden3()
    ent = [equilibrium_diagnostics(*solve_with_chain(s, f, b))["entropy"] for b in (8.0, 16.0)]
    assert ent[0] > ent[1]


def test_sandwich_gap():
    s, f = bernoulli2()
    words = [w for n in range(1, 6) for w in enumerate_words(s, n)]
    for beta in (4.0, 64.0):
        assert gibbs_sandwich_gap(*solve_with_chain(s, f, beta), words) <= 1e-12
    s, g = golden3()
    words = [w for n in range(1, 7) for w in enumerate_words(s, n)]
    gaps = [gibbs_sandwich_gap(*solve_with_chain(s, g, b), words) for b in (4.0, 32.0, 512.0)]
    assert all(math.isfinite(x) for x in gaps)
    assert max(gaps) <= gaps[0] + 0.1
    assert math.isfinite(gibbs_sandwich_gap(*solve_with_chain(s, g, 8.0), [(2,)]))


def test_integral_identity():
    s, f = bernoulli2()
    rpf, chain = solve_with_chain(s, f, 4.0)
    assert integral_identity_defect(rpf, chain, (0, 1)) <= 1e-12
    s, g = golden3()
    rpf, chain = solve_with_chain(s, g, 16.0)
    assert max(integral_identity_defect(rpf, chain, w) for w in enumerate_words(s, 3)) <= 1e-10
    with pytest.raises(WordTooShort):
        integral_identity_defect(rpf, chain, (0,))


@settings(max_examples=25, deadline=None)
@given(instances(max_symbols=5, max_range=2), st.floats(0.1, 6.0))
def test_rpf_matches_eigen_oracle(inst, beta):
    rpf = rpf_solve(inst.shift, inst.potential, beta, graph=inst.graph)
    assert rpf.log_lambda == pytest.approx(dense_log_lambda(inst.graph, beta), abs=1e-10)
    assert rpf.residual <= 1e-12
    assert abs(math.fsum(rpf.nu * np.exp(rpf.log_h)) - 1) <= 1e-12
    assert np.all(rpf.nu >= 0) and np.all(np.isfinite(rpf.log_h))


@settings(max_examples=20, deadline=None)
@given(instances(max_symbols=4, max_range=2), st.sampled_from([1.0, 8.0, 64.0]))
def test_mu_shift_invariant(inst, beta):
    rpf = rpf_solve(inst.shift, inst.potential, beta, graph=inst.graph)
    chain = gibbs_chain(rpf)
    n = inst.shift.alphabet_size
    for length in range(1, 4):
        for w in enumerate_words(inst.shift, length):
            mw = math.exp(cylinder_log_measure(chain, w))
            left = math.fsum(math.exp(cylinder_log_measure(chain, (i,) + w)) for i in range(n))
            right = math.fsum(math.exp(cylinder_log_measure(chain, w + (j,))) for j in range(n))
            assert abs(left - mw) <= 1e-12 and abs(right - mw) <= 1e-12


@settings(max_examples=15, deadline=None)
@given(instances(max_symbols=4, max_range=3))
def test_h_variation_bounded_by_walters(inst):
    m = inst.graph.context_len
    for beta in (4.0, 32.0, 256.0):
        rpf = rpf_solve(inst.shift, inst.potential, beta, graph=inst.graph)
        for j in range(1, m + 1):
            assert v_beta_variation(rpf, j) <= walters_modulus(inst.potential, j) + 1e-9


def test_h_exponent_shipped():
    for make in (bernoulli2, golden3):
        s, f = make()
        sup = [float(np.max(np.abs(rpf_solve(s, f, b).v_beta))) for b in (4.0, 512.0)]
        assert sup[1] <= sup[0] + 0.1


@settings(max_examples=15, deadline=None)
@given(instances(max_symbols=4, max_range=2))
def test_h_exponent_bounded(inst):
    # lambda h(d) >= exp(beta f) h(c) along every edge and max v >= 0 >= min v,
    # so sup |v_beta| <= (n - 1) (max f - min f + log(max in-degree) / beta)
    g = inst.graph
    spread = float(g.weight.max() - g.weight.min())
    indeg = max(len(e) for e in g.in_edges)
    for beta in (1.0, 4.0, 64.0, 512.0):
        v = rpf_solve(inst.shift, inst.potential, beta, graph=g).v_beta
        assert np.max(np.abs(v)) <= (g.n - 1) * (spread + math.log(indeg) / beta) + 1e-12


@settings(max_examples=15, deadline=None)
@given(instances(max_symbols=4, max_range=2))
def test_entropy_and_mean_monotone(inst):
    prev = None
    for beta in (2.0, 4.0, 8.0, 16.0):
        rpf = rpf_solve(inst.shift, inst.potential, beta, graph=inst.graph)
        d = equilibrium_diagnostics(rpf, gibbs_chain(rpf))
        assert d["entropy"] >= -1e-12
        if prev is not None:
            assert d["entropy"] <= prev["entropy"] + 1e-12
            assert d["integral_f"] >= prev["integral_f"] - 1e-12
        prev = d
