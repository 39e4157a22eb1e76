"""Chi-square machinery for the statistical checks.

Bins with expected count below ``MIN_EXPECTED`` are merged into their
neighbours; degenerate tests (a single bin) carry zero degrees of freedom
and pass iff the observations fall where the law puts all of its mass.
"""

from dataclasses import dataclass, asdict

import numpy as np
from scipy import stats

MIN_EXPECTED = 5.0


@dataclass
class TestResult:
    claim: str
    statistic: float
    dof: int
    p_value: float
    passed: bool
    threshold: float = None
    informational: bool = False
    note: str = None

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return {k: v for k, v in d.items() if v is not None}


def merge_bins(observed, expected, min_expected=MIN_EXPECTED):
    """Merge adjacent bins from the right until every expected count is large enough.

    Arrays are ordered by value; the last bin is treated as a catch-all.
    """
    obs = [float(v) for v in observed]
    exp = [float(v) for v in expected]
    # sweep from the top, folding small bins down
    i = len(exp) - 1
    while i > 0:
        if exp[i] < min_expected:
            e, o = exp.pop(i), obs.pop(i)
            exp[i - 1] += e
            obs[i - 1] += o
        i -= 1
    # a small first bin folds upwards
    while len(exp) > 1 and exp[0] < min_expected:
        e0, o0 = exp.pop(0), obs.pop(0)
        exp[0] += e0
        obs[0] += o0
    return np.array(obs), np.array(exp)


def gof_test(claim, samples, pmf, alpha, support_max=None):
    """Chi-square goodness of fit of integer ``samples`` to ``pmf(k)``.

    The top bin collects ``k >= support_max`` (default: one past the
    largest observation) and receives the complementary probability, so
    observed and expected totals always agree.
    """
    samples = np.asarray(samples, dtype=np.int64)
    n = samples.size
    if support_max is None:
        support_max = int(samples.max()) + 1 if n else 1
    ks = np.arange(support_max)
    probs = np.array([pmf(int(k)) for k in ks], dtype=float)
    probs = np.append(probs, max(0.0, 1.0 - probs.sum()))
    counts = np.bincount(np.minimum(samples, support_max), minlength=support_max + 1)
    obs, exp = merge_bins(counts, probs * n)
    if len(exp) == 1:
        # the law is concentrated on a single bin after merging: require
        # that no observation falls where the law has no mass
        impossible = sum(counts[k] for k in ks if probs[k] == 0) + (
            counts[-1] if probs[-1] == 0 else 0)
        ok = impossible == 0
        return TestResult(claim, 0.0, 0, 1.0 if ok else 0.0, bool(ok), alpha)
    stat, p = stats.chisquare(obs, exp)
    return TestResult(claim, float(stat), len(exp) - 1, float(p), bool(p >= alpha), alpha)


def independence_test(claim, a, b, alpha, min_expected=MIN_EXPECTED):
    """Chi-square test of independence for paired integer samples.

    The largest categories of either variable are pooled until every
    expected cell count reaches ``min_expected``.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n = a.size
    va = np.unique(a)
    vb = np.unique(b)
    # categories are "value k" for k below a cap plus ">= cap"
    cap_a, cap_b = len(va), len(vb)
    while True:
        ca = np.minimum(np.searchsorted(va, a), cap_a - 1)
        cb = np.minimum(np.searchsorted(vb, b), cap_b - 1)
        table = np.zeros((cap_a, cap_b))
        np.add.at(table, (ca, cb), 1)
        expected = np.outer(table.sum(1), table.sum(0)) / n
        if cap_a < 2 or cap_b < 2 or expected.min() >= min_expected:
            break
        # pool on the variable whose smallest marginal is rarer
        ma, mb = table.sum(1).min(), table.sum(0).min()
        if (ma <= mb and cap_a > 1) or cap_b <= 1:
            cap_a -= 1
        else:
            cap_b -= 1
    if cap_a < 2 or cap_b < 2:
        return TestResult(claim, 0.0, 0, 1.0, True, alpha,
                          note="a variable is degenerate after pooling")
    stat, p, dof, _ = stats.chi2_contingency(table, correction=False)
    return TestResult(claim, float(stat), int(dof), float(p), bool(p >= alpha), alpha)


def proportion_test(claim, hits, n, prob, n_se=4.0):
    """``|hits/n - prob| <= n_se * SE`` with the binomial SE at ``prob``.

    A zero SE (``prob`` in {0, 1}) demands exact agreement.
    """
    est = hits / n
    se = np.sqrt(prob * (1 - prob) / n)
    z = abs(est - prob) / se if se > 0 else (0.0 if est == prob else np.inf)
    return TestResult(claim, float(z), 0, float(2 * stats.norm.sf(z)) if np.isfinite(z) else 0.0,
                      bool(z <= n_se), None, note=f"estimate={est:.6g}, expected={prob:.6g}")
