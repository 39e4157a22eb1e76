import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwdual.embedding import (
    InvalidRates, PiecewiseConstant, RateSchedule, SimOverflow, chaining_error,
    embedded_lf_grid, kendall_params, mc_comparison, simulate_bd, simulate_bd_counts,
)
from gwdual.laws import LinearFractionalLaw, ve_pgf_compose

C = RateSchedule.constant


def test_kendall_closed_forms():
    k = kendall_params(C(1.0, 0.0), 0.0, 1.0)
    assert k.q == pytest.approx(1.0, abs=1e-12) and k.p == pytest.approx(np.exp(-1), abs=1e-12)
    for mu, t in [(0.7, 2.5), (2.0, 0.3)]:
        k = kendall_params(C(0.0, mu), 0.0, t)
        assert abs(k.q - np.exp(-mu * t)) < 1e-10 and abs(k.p - 1) < 1e-10
    for mu, t0, t in [(0.7, 0.0, 2.5), (1.3, 1.0, 4.0)]:
        k = kendall_params(C(mu, mu), t0, t)
        assert k.rho == 0.0
        assert abs(k.q - 1 / (1 + mu * (t - t0))) < 1e-10 and abs(k.p - k.q) < 1e-12


def test_general_constant_rates_closed_form():
    # exact integral for constant lambda != mu
    lam, mu, t = 1.7, 0.6, 1.3
    rho = (mu - lam) * t
    q = 1 / (1 + mu * np.expm1(rho) / (mu - lam))
    k = kendall_params(C(lam, mu), 0.0, t)
    assert k.rho == pytest.approx(rho, abs=1e-15)
    assert abs(k.q - q) < 1e-12 and abs(k.p - np.exp(rho) * q) < 1e-12


SCHEDULES = [
    RateSchedule.parse("0:1,0.5:2,1.5:0.3", "0:0.5,1:1.2"),
    RateSchedule.parse("0:0.2,0.25:3", "0:2,0.75:0.1,1.7:1"),
    C(0.8, 0.8),
]


@pytest.mark.parametrize("rates", SCHEDULES)
def test_invariants_and_quadrature_convergence(rates):
    a = kendall_params(rates, 0.0, 2.0, panels=2**12)
    b = kendall_params(rates, 0.0, 2.0, panels=2**13)
    assert abs(a.q - b.q) < 1e-10
    assert 0 < a.q <= 1 and 0 < a.p <= 1
    assert abs(a.p - np.exp(a.rho) * a.q) < 1e-12


def test_piecewise_schedule_against_exact_integral():
    rates = SCHEDULES[0]
    # piecewise exact: int exp(rho_lo + s (u - lo)) mu du = mu e^rho_lo (e^{s L} - 1)/s
    t = 2.0
    rho, inner = 0.0, 0.0
    for lo, hi, lam, mu in rates.pieces(0.0, t):
        s = mu - lam
        L = hi - lo
        inner += mu * np.exp(rho) * (np.expm1(s * L) / s if s else L)
        rho += s * L
    k = kendall_params(rates, 0.0, t)
    assert abs(k.q - 1 / (1 + inner)) < 1e-10


@pytest.mark.parametrize("rates", SCHEDULES)
def test_chaining(rates):
    assert chaining_error(rates, 0, 2) < 1e-9
    assert chaining_error(rates, 1, 3) < 1e-9


def test_embedded_grid():
    e = embedded_lf_grid(C(1.0, 0.0), 0, 4)
    assert e.q == pytest.approx((1.0,) * 4) and e.p == pytest.approx((np.exp(-1),) * 4)
    e = embedded_lf_grid(SCHEDULES[0], -1, 3)
    assert e.t_end == 3
    law = e.law()
    assert isinstance(law, LinearFractionalLaw)
    # generation t drives [t, t + 1]
    k = kendall_params(SCHEDULES[0], 1.0, 2.0)
    assert law.cell(1, 1).q == pytest.approx(k.q) and law.cell(1, 1).p == pytest.approx(k.p)
    whole = kendall_params(SCHEDULES[0], -1.0, 3.0).law()
    for s in (0.0, 0.4, 0.9):
        assert ve_pgf_compose(law, -1, 3, s) == pytest.approx(whole.pgf(s), abs=1e-9)


def test_rate_validation():
    with pytest.raises(InvalidRates):
        PiecewiseConstant([0, 1], [1, -0.5])
    with pytest.raises(InvalidRates):
        PiecewiseConstant([1, 0], [1, 1])
    with pytest.raises(InvalidRates):
        RateSchedule.parse("0:1,x", "1")
    with pytest.raises(ValueError):
        kendall_params(C(1, 1), 2.0, 1.0)
    r = RateSchedule.parse("0:1,2:3", "0.5")
    assert float(r.birth(-5)) == 1 and float(r.birth(2)) == 3 and float(r.death(9)) == 0.5


def test_simulate_absorbing_and_log():
    assert simulate_bd(C(1, 1), 0, 5, 0, seed=1).final == 0
    path = simulate_bd(SCHEDULES[0], 0, 2, 3, seed=5, replicate=7)
    n = 3
    for time, kind, size in path.events:
        assert 0 <= time < 2
        n += kind
        assert size == n
    assert n == path.final


def test_scalar_and_vector_simulators_agree():
    counts = simulate_bd_counts(SCHEDULES[1], 0.0, 2.0, 2, seed=9, samples=300, chunk=64)
    scalar = [simulate_bd(SCHEDULES[1], 0.0, 2.0, 2, seed=9, replicate=r).final
              for r in range(300)]
    assert counts.tolist() == scalar
    again = simulate_bd_counts(SCHEDULES[1], 0.0, 2.0, 2, seed=9, samples=300, threads=4)
    assert again.tolist() == scalar


def test_simulation_overflow():
    with pytest.raises(SimOverflow):
        simulate_bd(C(5.0, 0.0), 0, 5, 1, seed=0, cap=50)


N = 100_000


def test_pure_death_survival_four_se():
    mu, t = 0.7, 1.5
    z = simulate_bd_counts(C(0.0, mu), 0, t, 1, seed=4, samples=N)
    p = np.exp(-mu * t)
    assert abs((z == 1).mean() - p) < 4 * np.sqrt(p * (1 - p) / N)
    assert z.max() <= 1


def test_yule_geometric_four_se():
    z = simulate_bd_counts(C(1.0, 0.0), 0, 1, 1, seed=6, samples=N)
    e = np.exp(-1)
    for k in range(1, 8):
        p = e * (1 - e) ** (k - 1)
        assert abs((z == k).mean() - p) < 4 * np.sqrt(p * (1 - p) / N)


def test_mc_comparison_report():
    rep = mc_comparison(SCHEDULES[0], 0.0, 1.0, samples=N, seed=3)
    assert rep["pass"] and rep["rows"][0]["k"] == 0 and len(rep["rows"]) > 3
