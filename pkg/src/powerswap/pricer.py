"""Option prices on electricity swaps: Fourier inversion, Monte-Carlo, Black-76.

The call price is e^{-r(T-t)} (e^x (1 - Q1) - K (1 - Q2)) where 1 - Q_k are
exercise probabilities recovered from the characteristic functions by

    1 - Q_k = 1/2 + (1/pi) Integral_0^inf Re(e^{-i phi ln K} Q_hat_k / (i phi)) dphi.

The integral is evaluated on fixed-width panels with 32-point Gauss-Legendre
nodes; the characteristic-function values per panel do not depend on the
strike, so one pricing context reuses them across strikes.  Puts follow from
put-call parity.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .charfn import PHI_MAX_DEFAULT, RiccatiCoefficients, char_fn, solve_riccati
from .conditions import ConditionWarning, check_novikov
from .models import (
    DeliveryPeriod,
    HestonParams,
    OptionSpec,
    VolStructure,
    WeightFunction,
)
from .simulate import GridSpec, Measure, simulate_terminal

__all__ = ["PriceResult", "PricingError", "TruncationError", "exercise_prob",
           "price_fourier", "price_fourier_many", "price_mc", "black76_oracle"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_PANEL_WIDTH = 2.0
_ENVELOPE_TOL = 1e-12
_PROB_SLACK = 1e-6


class PricingError(RuntimeError):
    """A pricing invariant failed beyond numerical slack."""


class TruncationError(PricingError):
    """The Fourier integrand had not decayed below tolerance by phi_max."""

    def __init__(self, message: str, partial: float, envelope: float):
        super().__init__(f"{message} (partial value {partial:.10g}, "
                         f"last envelope {envelope:.3e})")
        self.partial = partial
        self.envelope = envelope


@dataclass(frozen=True)
class PriceResult:
    call: float
    put: float
    q1: float
    q2: float
    method: str
    stderr: float | None = None
    diagnostics: dict = field(default_factory=dict)


class _FourierContext:
    """Caches per-panel characteristic-function values for one (t, T, state)."""

    def __init__(self, p, vol, w, dp, exercise, t, x, nu, phi_max, ode_tol):
        if not t < exercise:
            raise ValueError(f"valuation time {t} must precede exercise {exercise}")
        if not exercise < dp.tau1:
            raise ValueError(
                f"exercise {exercise} must precede the delivery start {dp.tau1}")
        if nu < 0:
            raise ValueError(f"nu must be non-negative, got {nu}")
        self.t, self.T = float(t), float(exercise)
        self.x, self.nu = float(x), float(nu)
        self.phi_max = float(phi_max)
        self.ode_tol = float(ode_tol)
        self._rc = {k: RiccatiCoefficients.for_model(p, vol, w, dp, k) for k in (1, 2)}
        self._panels: dict[int, list] = {1: [], 2: []}

    def _panel(self, k: int, j: int):
        panels = self._panels[k]
        while len(panels) <= j:
            lo = len(panels) * _PANEL_WIDTH
            hi = lo + _PANEL_WIDTH
            if hi > self.phi_max * (1.0 + 1e-12):
                return None
            nodes = 0.5 * (lo + hi) + 0.5 * _PANEL_WIDTH * _GL_NODES
            sol = solve_riccati(self._rc[k], self.t, self.T, nodes,
                                abs_tol=self.ode_tol, phi_max=self.phi_max)
            qhat = char_fn(sol, self.x, self.nu)
            envelope = float(np.max(np.abs(qhat) / nodes))
            panels.append((nodes, qhat, envelope, sol.n_steps))
        return panels[j]

    def exercise_prob(self, k: int, strike: float,
                      diagnostics: dict | None = None) -> float:
        """1 - Q_k for the given strike, with adaptive truncation."""
        log_k = np.log(strike)
        half = 0.5 * _PANEL_WIDTH
        total = 0.0
        below = 0
        j = 0
        envelope = np.inf
        while True:
            panel = self._panel(k, j)
            if panel is None:
                raise TruncationError(
                    f"integrand envelope still {envelope:.3e} at phi_max="
                    f"{self.phi_max}", partial=0.5 + total / np.pi,
                    envelope=envelope)
            nodes, qhat, envelope, _ = panel
            integrand = np.real(np.exp(-1j * nodes * log_k) * qhat / (1j * nodes))
            total += half * float(np.dot(_GL_WEIGHTS, integrand))
            j += 1
            if envelope < _ENVELOPE_TOL:
                below += 1
                if below >= 2:
                    break
            else:
                below = 0
        raw = 0.5 + total / np.pi
        if diagnostics is not None:
            diagnostics[f"panels_k{k}"] = j
            diagnostics[f"phi_used_k{k}"] = j * _PANEL_WIDTH
        return _finalize_prob(raw, k, diagnostics)


def _finalize_prob(raw: float, k: int, diagnostics: dict | None) -> float:
    if raw < -_PROB_SLACK or raw > 1.0 + _PROB_SLACK:
        raise PricingError(
            f"exercise probability for k={k} is {raw}, outside [0, 1] beyond "
            f"slack {_PROB_SLACK}")
    clipped = min(max(raw, 0.0), 1.0)
    if clipped != raw and diagnostics is not None:
        diagnostics[f"clamped_q{k}"] = raw
    return clipped


def _resolve_state(p: HestonParams, x, nu) -> tuple[float, float]:
    x = np.log(p.f0) if x is None else float(x)
    nu = p.nu0 if nu is None else float(nu)
    return x, nu


def exercise_prob(p: HestonParams, vol: VolStructure, w: WeightFunction,
                  dp: DeliveryPeriod, k: int, strike: float, exercise: float,
                  t: float = 0.0, x: float | None = None, nu: float | None = None,
                  phi_max: float = PHI_MAX_DEFAULT, ode_tol: float = 1e-10) -> float:
    """Probability 1 - Q_k of finishing in the money, via Fourier inversion.

    k=1 is the exercise probability under the spot (swap-price-weighted)
    measure, k=2 under the swap martingale measure.
    """
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    if not strike > 0:
        raise ValueError(f"strike must be > 0, got {strike}")
    x, nu = _resolve_state(p, x, nu)
    ctx = _FourierContext(p, vol, w, dp, exercise, t, x, nu, phi_max, ode_tol)
    return ctx.exercise_prob(k, strike)


def _assemble(p: HestonParams, ctx: _FourierContext, strike: float,
              diagnostics: dict) -> PriceResult:
    q1 = ctx.exercise_prob(1, strike, diagnostics)
    q2 = ctx.exercise_prob(2, strike, diagnostics)
    df = np.exp(-p.r * (ctx.T - ctx.t))
    fwd = np.exp(ctx.x)
    call = df * (fwd * q1 - strike * q2)
    if call < 0.0:
        if call < -1e-10 * max(1.0, strike):
            raise PricingError(f"negative call price {call}")
        diagnostics["clamped_call"] = call
        call = 0.0
    put = call - df * (fwd - strike)
    if put < 0.0:
        if put < -1e-10 * max(1.0, strike):
            raise PricingError(f"negative put price {put}")
        diagnostics["clamped_put"] = put
        put = 0.0
        call = df * (fwd - strike)
    return PriceResult(call=float(call), put=float(put), q1=q1, q2=q2,
                       method="fourier", stderr=None, diagnostics=diagnostics)


def _consult_novikov(p, vol, dp, diagnostics):
    nov = check_novikov(p, vol, dp)
    diagnostics["novikov_ok"] = nov.ok
    if not nov.ok:
        warnings.warn(
            f"Novikov condition fails ({nov.lhs:.6g} <= {nov.rhs:.6g}); "
            "the measure change is not guaranteed", ConditionWarning, stacklevel=3)


def price_fourier(p: HestonParams, vol: VolStructure, w: WeightFunction,
                  dp: DeliveryPeriod, opt: OptionSpec, t: float = 0.0,
                  x: float | None = None, nu: float | None = None,
                  phi_max: float = PHI_MAX_DEFAULT,
                  ode_tol: float = 1e-10) -> PriceResult:
    """Semi-analytic call/put price at state (t, x, nu); defaults to (0, ln f0, nu0).

    The put is filled from put-call parity, so parity holds by construction.
    """
    diagnostics: dict = {}
    _consult_novikov(p, vol, dp, diagnostics)
    x, nu = _resolve_state(p, x, nu)
    ctx = _FourierContext(p, vol, w, dp, opt.exercise, t, x, nu, phi_max, ode_tol)
    return _assemble(p, ctx, opt.strike, diagnostics)


def price_fourier_many(p: HestonParams, vol: VolStructure, w: WeightFunction,
                       dp: DeliveryPeriod, strikes, exercise: float,
                       t: float = 0.0, x: float | None = None,
                       nu: float | None = None, phi_max: float = PHI_MAX_DEFAULT,
                       ode_tol: float = 1e-10) -> list[PriceResult]:
    """Fourier prices for several strikes sharing one characteristic-function cache."""
    diagnostics_base: dict = {}
    _consult_novikov(p, vol, dp, diagnostics_base)
    x, nu = _resolve_state(p, x, nu)
    ctx = _FourierContext(p, vol, w, dp, exercise, t, x, nu, phi_max, ode_tol)
    out = []
    for strike in strikes:
        spec = OptionSpec(strike=float(strike), exercise=float(exercise))
        out.append(_assemble(p, ctx, spec.strike, dict(diagnostics_base)))
    return out


def price_mc(p: HestonParams, vol: VolStructure, w: WeightFunction,
             dp: DeliveryPeriod, opt: OptionSpec, g: GridSpec,
             measure: Measure = Measure.Q_TILDE, workers: int = 1) -> PriceResult:
    """Monte-Carlo price from terminal swap values; put priced on the same paths."""
    if g.t_end != opt.exercise:
        raise ValueError(
            f"grid must end at the exercise time {opt.exercise}, got {g.t_end}")
    term = simulate_terminal(p, vol, w, dp, g, measure=measure, workers=workers)
    f = term.f
    df = np.exp(-p.r * (g.t_end - g.t0))
    call_pay = np.maximum(f - opt.strike, 0.0)
    put_pay = np.maximum(opt.strike - f, 0.0)
    n = g.n_paths
    call = df * float(call_pay.mean())
    put = df * float(put_pay.mean())
    stderr = df * float(call_pay.std(ddof=1)) / np.sqrt(n) if n > 1 else 0.0
    put_stderr = df * float(put_pay.std(ddof=1)) / np.sqrt(n) if n > 1 else 0.0
    in_money = f >= opt.strike
    q2 = float(in_money.mean())
    q1 = float(f[in_money].sum() / f.sum()) if f.sum() > 0 else 0.0
    diagnostics = {"n_paths": n, "n_steps": g.n_steps, "seed": g.seed,
                   "measure": measure.value, "put_stderr": put_stderr}
    return PriceResult(call=call, put=put, q1=q1, q2=q2, method="mc",
                       stderr=stderr, diagnostics=diagnostics)


def black76_oracle(f: float, k: float, total_var: float,
                   df: float = 1.0) -> tuple[float, float]:
    """Lognormal call/put on a forward with total variance total_var.

    Validation oracle for the degenerate deterministic-variance case.  At
    total_var = 0 the price is the discounted intrinsic value; f = k with zero
    variance returns call = put = 0 (measure-zero boundary tie-break).
    """
    if not (f > 0 and k > 0):
        raise ValueError(f"f and k must be > 0, got f={f}, k={k}")
    if total_var < 0:
        raise ValueError(f"total_var must be >= 0, got {total_var}")
    if not 0 < df <= 1:
        raise ValueError(f"df must lie in (0, 1], got {df}")
    if total_var == 0.0:
        call = df * max(f - k, 0.0)
        put = df * max(k - f, 0.0)
        return call, put
    sd = np.sqrt(total_var)
    d_plus = (np.log(f / k) + 0.5 * total_var) / sd
    d_minus = d_plus - sd
    call = df * (f * norm.cdf(d_plus) - k * norm.cdf(d_minus))
    put = call - df * (f - k)
    return float(call), float(put)
