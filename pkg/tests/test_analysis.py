import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwdual import analysis
from gwdual.analysis import (
    DegenerateLaw, EnumerationOverflow, WindowTooSmall, brute_force_dual_pmf, choose_window,
    dual_marginal_pgf, dual_marginal_pmf, mc_dual_marginals, qhat_recursion,
    truncation_probability,
)
from gwdual.laws import GwLawTable, LinearFractionalParams


def tuple_enumeration(probs, X, W):
    """Joint law of v(1..X) over every offspring tuple on W ranks.

    Deliberately naive: full product over the support, V read off the
    definition. Returns (joint dict, undetermined mass).
    """
    support = [(k, p) for k, p in enumerate(probs) if p > 0]
    joint, lost = {}, 0.0
    for combo in itertools.product(support, repeat=W):
        prob = float(np.prod([p for _, p in combo]))
        cum = np.concatenate([[0], np.cumsum([k for k, _ in combo])])
        if cum[-1] < X:
            lost += prob
            continue
        V = [int(np.argmax(cum >= x)) for x in range(X + 1)]
        vec = tuple(np.diff(V).tolist())
        joint[vec] = joint.get(vec, 0.0) + prob
    return joint, lost


def qhat_fractions(probs, X):
    P = [Fraction(p).limit_denominator(10**6) for p in probs]
    q = [None, Fraction(1)]
    for x in range(2, X + 1):
        q.append(sum(P[k] * q[x - k] for k in range(1, min(len(P) - 1, x - 1) + 1)) / (1 - P[0]))
    return [float(v) for v in q[1:]]


# frozen from qhat_fractions and tuple_enumeration
QHAT_FROZEN = {
    (0.2, 0.5, 0.3): [1.0, 0.625, 0.765625, 0.712890625],
    (0.5, 0.5): [1.0, 1.0, 1.0, 1.0],
}


@pytest.mark.parametrize("probs", list(QHAT_FROZEN))
def test_qhat_frozen_values(probs):
    assert qhat_recursion(probs, 4).to_list() == pytest.approx(QHAT_FROZEN[probs], abs=1e-15)
    assert qhat_fractions(probs, 4) == pytest.approx(QHAT_FROZEN[probs], abs=1e-15)


def test_qhat_geometric_tail():
    geo = GwLawTable([0.5, 0.25], tail_ratio=0.5)  # P_k = 0.5**(k+1)
    assert qhat_recursion(geo, 6).to_list() == pytest.approx([1, 0.5, 0.5, 0.5, 0.5, 0.5],
                                                             abs=1e-15)


@given(st.floats(0.05, 0.95), st.floats(0.05, 1.0))
def test_qhat_tail_matches_truncated_table(r, scale):
    # the analytic tail update against a long explicit table
    pk = scale * (1 - r) ** 2 / 2
    p0 = 1 - pk - pk * r / (1 - r)
    geo = GwLawTable([p0, pk], tail_ratio=r) if p0 >= 0 else None
    if geo is None:
        return
    n = 600
    long = np.array([p0, pk] + [pk * r**j for j in range(1, n)])
    long = long / long.sum()
    explicit = qhat_recursion(GwLawTable(long), 8).to_list()
    assert qhat_recursion(geo, 8).to_list() == pytest.approx(explicit, abs=1e-12)


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6))
def test_qhat_bounds(weights):
    probs = np.array(weights) / np.sum(weights)
    probs[-1] = 1 - probs[:-1].sum()
    q = qhat_recursion(probs, 10).to_list()
    assert q[0] == 1.0
    assert all(0 < v <= 1 + 1e-12 for v in q)


@pytest.mark.parametrize("p,q", [(0.5, 0.8), (0.3, 1.0), (0.9, 0.2)])
def test_qhat_lf_is_constant_p(p, q):
    vals = qhat_recursion(LinearFractionalParams(p, q), 8).to_list()
    assert vals[0] == 1
    assert vals[1:] == pytest.approx([p] * 7, abs=1e-12)


def test_degenerate_and_precondition_errors():
    with pytest.raises(DegenerateLaw):
        qhat_recursion([1.0], 3)
    with pytest.raises(ValueError):
        mc_dual_marginals([0.5, 0.5], 2, samples=9_999)
    with pytest.raises(EnumerationOverflow):
        brute_force_dual_pmf([0.2, 0.3, 0.3, 0.2], 6, 30, max_states=1000)
    with pytest.raises(WindowTooSmall):
        mc_dual_marginals([0.9, 0.1], 3, samples=10_000, window=5)


@pytest.mark.parametrize("probs,X,W", [
    ((0.5, 0.5), 2, 4),
    ((0.2, 0.5, 0.3), 3, 6),
    ((0.0, 0.3, 0.7), 3, 3),
    ((0.3, 0.0, 0.7), 3, 5),
    ((0.1, 0.2, 0.3, 0.4), 3, 5),
])
def test_enumeration_oracle_matches_naive_enumeration(probs, X, W):
    naive, lost = tuple_enumeration(probs, X, W)
    pmf = brute_force_dual_pmf(probs, X, W)
    assert pmf.total_mass == pytest.approx(1.0, abs=1e-12)
    assert pmf.undetermined_mass == pytest.approx(lost, abs=1e-12)
    assert set(naive) == set(pmf.joint)
    for vec, p in naive.items():
        assert pmf.joint[vec] == pytest.approx(p, abs=1e-14)


def test_oracle_small_example_mass():
    pmf = brute_force_dual_pmf([0.5, 0.5], 2, 4)
    assert pmf.determined_mass >= 1 - 1e-6 or pmf.undetermined_mass == pytest.approx(
        truncation_probability([0.5, 0.5], 4, 2), abs=1e-15)


def test_marginal_law_frozen_p0_02():
    # the conditional law of a positive v(x) is (1 - P_0) P_0**(k-1)
    probs = (0.2, 0.5, 0.3)
    pmf = brute_force_dual_pmf(probs, 1, choose_window(probs, 1, 1e-14))
    m = pmf.marginal(1)
    assert m[1] == pytest.approx(0.8, abs=1e-12)
    assert m[2] == pytest.approx(0.16, abs=1e-12)
    assert m[3] == pytest.approx(0.032, abs=1e-12)
    assert dual_marginal_pmf(probs, 1, 2) == pytest.approx(0.16, abs=1e-15)


def test_marginal_closed_forms_against_oracle():
    probs = (0.25, 0.25, 0.3, 0.2)
    X = 4
    W = choose_window(probs, X, 1e-13)
    pmf = brute_force_dual_pmf(probs, X, W)
    assert pmf.undetermined_mass < 1e-12
    qhat = qhat_recursion(probs, X)
    for x in range(1, X + 1):
        marg = pmf.marginal(x)
        for k in range(0, 12):
            assert marg.get(k, 0.0) == pytest.approx(dual_marginal_pmf(probs, x, k, qhat),
                                                     abs=1e-10)
        s = 0.6
        lhs = sum(p * s**k for k, p in marg.items())
        assert lhs == pytest.approx(dual_marginal_pgf(probs, x, s, qhat), abs=1e-10)


def test_joint_values_p0_zero():
    p1, p2 = 0.3, 0.7
    pmf = brute_force_dual_pmf((0.0, p1, p2), 3, 3)
    assert pmf.undetermined_mass == 0.0
    assert pmf.prob(lambda v: v[0] == 1) == pytest.approx(1.0)
    assert pmf.prob(lambda v: v[1] == 0 and v[2] == 1) == pytest.approx(p2)
    assert pmf.prob(lambda v: v[1] == 1 and v[2] == 0) == pytest.approx(p1 * p2)
    assert pmf.prob(lambda v: v[1] == 1 and v[2] == 1) == pytest.approx(p1**2)
    # the event {v(1) = 0} is empty
    assert pmf.prob(lambda v: v[0] == 0) == 0.0


def test_truncation_probability_and_window():
    assert truncation_probability([0.5, 0.5], 1, 2) == pytest.approx(1.0)
    assert truncation_probability([0.5, 0.5], 2, 2) == pytest.approx(0.75)
    w = choose_window([0.5, 0.5], 3, 1e-6)
    assert truncation_probability([0.5, 0.5], w, 3) <= 1e-6
    assert truncation_probability([0.5, 0.5], w - 1, 3) > 1e-6 or w == 3


def test_mc_marginals_against_oracle():
    probs = (0.3, 0.4, 0.3)
    sample = mc_dual_marginals(probs, 3, samples=40_000, seed=3)
    pmf = brute_force_dual_pmf(probs, 3, choose_window(probs, 3, 1e-12))
    n = sample.n
    for x in range(1, 4):
        marg = pmf.marginal(x)
        emp = sample.pmf(x, kmax=6)
        for k in range(5):
            p = marg.get(k, 0.0)
            se = np.sqrt(p * (1 - p) / n)
            assert abs(emp[k] - p) <= 4 * se + 1e-12
    assert sample.discarded <= 0.01 * sample.requested


def test_mc_sample_is_deterministic_across_threads():
    a = mc_dual_marginals((0.3, 0.4, 0.3), 3, samples=20_000, seed=1, threads=1)
    b = mc_dual_marginals((0.3, 0.4, 0.3), 3, samples=20_000, seed=1, threads=4)
    np.testing.assert_array_equal(a.v, b.v)


def test_lf_dual_q_one_gives_unit_v1():
    sample = mc_dual_marginals(LinearFractionalParams(0.3, 1.0), 2, samples=10_000, seed=0)
    assert np.all(sample.column(1) == 1)


def test_report_to_dict_shape():
    rep = analysis.dual_law_check((0.3, 0.4, 0.3), max_rank=3, samples=20_000, seed=2)
    d = rep.to_dict()
    assert d["pass"] is rep.passed
    for t in d["tests"]:
        assert {"claim", "statistic", "dof", "p_value", "pass"} <= set(t)
    assert d["qhat"] == pytest.approx(qhat_recursion((0.3, 0.4, 0.3), 3).to_list())
