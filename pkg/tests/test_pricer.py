import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from powerswap.models import (
    DeliveryPeriod,
    HestonParams,
    OptionSpec,
    Samuelson,
    TradingSeasonal,
    UniformWeight,
)
from powerswap.pricer import (
    PriceResult,
    PricingError,
    TruncationError,
    black76_oracle,
    exercise_prob,
    price_fourier,
    price_fourier_many,
    price_mc,
    _finalize_prob,
)
from powerswap.simulate import GridSpec, Measure
from powerswap.averaging import swap_vol_factor

from _reference import lognormal_call_put

DP = DeliveryPeriod(0.75, 5.0 / 6.0)
UNI = UniformWeight()
SAM = Samuelson(3.5)
T = 0.5


def _params(**over):
    base = dict(kappa=3.0, theta=0.6, sigma_vv=0.4, rho=-0.3, nu0=0.6, f0=30.0, r=0.01)
    base.update(over)
    return HestonParams(**base)


# ---------------------------------------------------------------------------
# lognormal oracle


def test_black76_against_reference():
    for f, k, tv, df in [
        (30.0, 30.0, 0.04, 0.99),
        (30.0, 24.0, 0.09, 1.0),
        (30.0, 36.0, 0.02, 0.95),
        (100.0, 1.0, 1.0, 1.0),
    ]:
        call, put = black76_oracle(f, k, tv, df)
        ref_call, ref_put = lognormal_call_put(f, k, tv, df)
        assert call == pytest.approx(ref_call, rel=1e-13)
        assert put == pytest.approx(ref_put, rel=1e-13)


def test_black76_at_the_money_symmetric_form():
    # f = k collapses to df * f * (2 N(sd/2) - 1)
    call, put = black76_oracle(30.0, 30.0, 0.04, 1.0)
    assert call == pytest.approx(30.0 * (2.0 * norm.cdf(0.1) - 1.0), rel=1e-13)
    assert call == put


def test_black76_zero_variance_is_intrinsic():
    assert black76_oracle(30.0, 24.0, 0.0, 0.9) == (0.9 * 6.0, 0.0)
    assert black76_oracle(24.0, 30.0, 0.0, 0.9) == (0.0, 0.9 * 6.0)
    assert black76_oracle(30.0, 30.0, 0.0, 0.9) == (0.0, 0.0)


def test_black76_parity():
    call, put = black76_oracle(31.0, 28.0, 0.05, 0.97)
    assert call - put == pytest.approx(0.97 * 3.0, rel=1e-14)


# ---------------------------------------------------------------------------
# Fourier pricing


def test_fourier_parity_and_monotonicity():
    p = _params()
    strikes = np.linspace(22.0, 38.0, 9)
    results = price_fourier_many(p, SAM, UNI, DP, strikes=strikes, exercise=T)
    df = np.exp(-0.01 * T)
    calls = np.array([r.call for r in results])
    for k, r in zip(strikes, results):
        assert r.call - r.put == pytest.approx(df * (30.0 - k), abs=1e-10)
        assert 0.0 <= r.q1 <= 1.0
        assert 0.0 <= r.q2 <= 1.0
        assert r.method == "fourier"
        assert r.stderr is None
    assert (np.diff(calls) < 0).all()


def test_fourier_many_matches_single_calls():
    p = _params()
    many = price_fourier_many(p, SAM, UNI, DP, strikes=[24.0, 30.0], exercise=T)
    for k, r in zip([24.0, 30.0], many):
        single = price_fourier(p, SAM, UNI, DP, OptionSpec(strike=k, exercise=T))
        assert r.call == single.call
        assert r.put == single.put


def test_fourier_deep_strikes():
    p = _params()
    itm = price_fourier(p, SAM, UNI, DP, OptionSpec(strike=30e-6, exercise=T))
    otm = price_fourier(p, SAM, UNI, DP, OptionSpec(strike=30e6, exercise=T))
    assert itm.q1 == pytest.approx(1.0, abs=1e-4)
    assert itm.q2 == pytest.approx(1.0, abs=1e-4)
    assert otm.q1 == pytest.approx(0.0, abs=1e-4)
    assert otm.q2 == pytest.approx(0.0, abs=1e-4)
    df = np.exp(-0.01 * T)
    assert itm.call == pytest.approx(df * (30.0 - 30e-6), rel=1e-9)
    assert otm.call == pytest.approx(0.0, abs=1e-8)


def test_degenerate_heston_matches_lognormal():
    """No vol-of-vol, no correlation: integrated variance is deterministic."""
    p = _params(sigma_vv=0.0, rho=0.0, nu0=0.4)
    nu_t = lambda u: 0.6 + (0.4 - 0.6) * np.exp(-3.0 * u)
    total_var, err = quad(
        lambda u: swap_vol_factor(SAM, UNI, DP, u) ** 2 * nu_t(u), 0.0, T,
        epsabs=1e-13, epsrel=1e-13,
    )
    assert err < 1e-12
    df = np.exp(-0.01 * T)
    for k in (24.0, 30.0, 36.0):
        res = price_fourier(p, SAM, UNI, DP, OptionSpec(strike=k, exercise=T))
        ref_call, ref_put = lognormal_call_put(30.0, k, total_var, df)
        assert res.call == pytest.approx(ref_call, abs=1e-7)
        assert res.put == pytest.approx(ref_put, abs=1e-7)


def test_exercise_prob_module_function():
    p = _params()
    res = price_fourier(p, SAM, UNI, DP, OptionSpec(strike=30.0, exercise=T))
    q1 = exercise_prob(p, SAM, UNI, DP, k=1, strike=30.0, exercise=T)
    q2 = exercise_prob(p, SAM, UNI, DP, k=2, strike=30.0, exercise=T)
    assert q1 == pytest.approx(res.q1, abs=1e-14)
    assert q2 == pytest.approx(res.q2, abs=1e-14)
    with pytest.raises(ValueError):
        exercise_prob(p, SAM, UNI, DP, k=3, strike=30.0, exercise=T)


def test_fourier_diagnostics_and_truncation():
    p = _params()
    res = price_fourier(p, SAM, UNI, DP, OptionSpec(strike=30.0, exercise=T))
    assert res.diagnostics["panels_k1"] >= 1
    assert res.diagnostics["phi_used_k1"] <= 400.0
    assert res.diagnostics["novikov_ok"] is True
    # an absurdly small cap cannot fit the envelope criterion
    with pytest.raises(TruncationError) as exc_info:
        price_fourier(p, SAM, UNI, DP, OptionSpec(strike=30.0, exercise=T), phi_max=4.0)
    assert exc_info.value.envelope > 1e-12
    assert np.isfinite(exc_info.value.partial)


def test_finalize_prob_clamp():
    diags = {}
    assert _finalize_prob(1.0 + 5e-7, 1, diags) == 1.0
    assert diags.get("clamped_q1")
    assert _finalize_prob(-5e-7, 2, {}) == 0.0
    assert _finalize_prob(0.5, 1, {}) == 0.5
    with pytest.raises(PricingError):
        _finalize_prob(1.0 + 5e-6, 1, {})
    with pytest.raises(PricingError):
        _finalize_prob(-5e-6, 2, {})


def test_price_result_frozen():
    res = price_fourier(_params(), SAM, UNI, DP, OptionSpec(strike=30.0, exercise=T))
    assert isinstance(res, PriceResult)
    with pytest.raises(AttributeError):
        res.call = 0.0


def test_fourier_at_later_valuation_time():
    p = _params()
    res = price_fourier(p, SAM, UNI, DP, OptionSpec(strike=30.0, exercise=T), t=0.25)
    assert res.call > 0.0
    df = np.exp(-0.01 * (T - 0.25))
    assert res.call - res.put == pytest.approx(df * (30.0 - 30.0), abs=1e-10)
    with pytest.raises(ValueError):
        price_fourier(p, SAM, UNI, DP, OptionSpec(strike=30.0, exercise=T), t=0.6)


# ---------------------------------------------------------------------------
# Monte-Carlo pricing


def test_mc_deterministic_and_documented():
    p = _params()
    g = GridSpec(t0=0.0, t_end=T, n_steps=100, n_paths=4000, seed=12)
    a = price_mc(p, SAM, UNI, DP, OptionSpec(strike=30.0, exercise=T), g, workers=1)
    b = price_mc(p, SAM, UNI, DP, OptionSpec(strike=30.0, exercise=T), g, workers=3)
    assert a.call == b.call and a.put == b.put and a.stderr == b.stderr
    assert a.method == "mc"
    assert a.diagnostics["n_paths"] == 4000
    assert a.diagnostics["seed"] == 12
    assert a.diagnostics["measure"] == "Q_tilde"
    assert a.stderr is not None and a.stderr > 0


def test_mc_zero_strike_recovers_discounted_forward():
    p = _params()
    g = GridSpec(t0=0.0, t_end=T, n_steps=200, n_paths=30_000, seed=5)
    res = price_mc(p, SAM, UNI, DP, OptionSpec(strike=1e-9, exercise=T), g, workers=2)
    df = np.exp(-0.01 * T)
    assert abs(res.call - df * 30.0) < 3.0 * res.stderr
    assert res.q2 == 1.0


def test_mc_grid_must_end_at_exercise():
    p = _params()
    g = GridSpec(t0=0.0, t_end=0.4, n_steps=100, n_paths=100, seed=1)
    with pytest.raises(ValueError):
        price_mc(p, SAM, UNI, DP, OptionSpec(strike=30.0, exercise=T), g)


def test_mc_measure_invariance_for_flat_profile():
    ts = TradingSeasonal(0.6, 0.7, 0.2)
    p = _params(theta=ts.theta)
    g = GridSpec(t0=0.0, t_end=T, n_steps=100, n_paths=3000, seed=8)
    q = price_mc(p, ts, UNI, DP, OptionSpec(strike=30.0, exercise=T), g, measure=Measure.Q)
    qt = price_mc(p, ts, UNI, DP, OptionSpec(strike=30.0, exercise=T), g, measure=Measure.Q_TILDE)
    assert q.call == qt.call
    assert q.put == qt.put
    assert q.q1 == qt.q1 and q.q2 == qt.q2


def test_mc_parity_is_exact_per_sample():
    from powerswap.simulate import simulate_terminal

    p = _params()
    g = GridSpec(t0=0.0, t_end=T, n_steps=100, n_paths=20_000, seed=33)
    res = price_mc(p, SAM, UNI, DP, OptionSpec(strike=27.0, exercise=T), g, workers=2)
    term = simulate_terminal(p, SAM, UNI, DP, g, workers=2)
    df = np.exp(-0.01 * T)
    # (F-K)+ - (K-F)+ = F - K holds path by path, so the sample parity is
    # exact up to round-off regardless of the number of paths
    assert res.call - res.put == pytest.approx(df * (term.f.mean() - 27.0), abs=1e-10)
