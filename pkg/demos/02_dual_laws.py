"""Laws of the dual offspring numbers.

For a GW table the dual offspring ``v(x)`` have explicit marginals; for a
linear fractional law the dual is again GW with an eternal first rank.
This script compares the closed forms with exact enumeration and with
Monte Carlo, and shows a table for which independence fails.

    python demos/02_dual_laws.py
"""

import numpy as np

from gwdual import analysis

PROBS = (0.2, 0.5, 0.3)


def closed_form_vs_enumeration():
    qhat = analysis.qhat_recursion(PROBS, 4)
    print("table P =", PROBS)
    print("qhat(1..4) =", [round(v, 6) for v in qhat.to_list()])
    window = analysis.choose_window(PROBS, 3, target=1e-13)
    exact = analysis.brute_force_dual_pmf(PROBS, 3, window)
    print(f"enumeration on {window} ranks, undetermined mass {exact.undetermined_mass:.1e}")
    for x in (1, 2, 3):
        marg = exact.marginal(x)
        gap = max(abs(p - analysis.dual_marginal_pmf(PROBS, x, k, qhat)) for k, p in marg.items())
        head = {k: round(p, 5) for k, p in list(marg.items())[:4]}
        print(f"  v({x}): {head} ...  max gap to closed form {gap:.1e}")


def monte_carlo():
    sample = analysis.mc_dual_marginals(PROBS, 4, samples=50_000, seed=3)
    print(f"\nMonte Carlo, {sample.n} rows on width {sample.window}:")
    qhat = analysis.qhat_recursion(PROBS, 4)
    for x in range(1, 5):
        print(f"  P(v({x}) > 0): {sample.positive_fraction(x):.4f}  vs qhat {qhat[x]:.4f}")


def reports():
    for p, q in [(0.5, 0.8), (0.9, 0.2)]:
        rep = analysis.theorem2_check(p, q, samples=50_000, seed=1)
        print(f"\nLF(p={p}, q={q}) dual: {'PASS' if rep.passed else 'FAIL'}")
        for t in rep.tests:
            print(f"  {t.claim:45s} p-value {t.p_value:.3f}")
    rep = analysis.dual_law_check((0.0, 0.5, 0.5), samples=50_000, seed=1)
    ind = [t for t in rep.tests if "independent" in t.claim]
    print("\nP = (0, 0.5, 0.5): dual offspring are dependent")
    for t in ind:
        print(f"  {t.claim:45s} p-value {t.p_value:.2e}")
    sub = analysis.birthdeath_subcases_check(0.3, 0.0, 0.7, samples=50_000, seed=2)
    print(f"\nbirth-death table (0.3, 0, 0.7): {sub.claim}: {'PASS' if sub.passed else 'FAIL'}")


if __name__ == "__main__":
    np.set_printoptions(precision=5)
    closed_form_vs_enumeration()
    monte_carlo()
    reports()
