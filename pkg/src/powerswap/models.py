"""Parameter containers, volatility structures, delivery periods and weights.

The instantaneous futures volatility is separable, sigma(t, u) = s(t, u) * sqrt(nu(t)),
where u is the delivery time, s is a deterministic factor selected by a
``VolStructure`` variant, and nu follows the square-root process
d nu = kappa (theta(t) - nu) dt + sigma_vv sqrt(nu) dW.  Swaps deliver over a
period (tau1, tau2] and average the underlying futures with a normalized
weight density.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .quadrature import adaptive_gauss_legendre

__all__ = [
    "HestonParams",
    "DeliveryPeriod",
    "OptionSpec",
    "UniformWeight",
    "ExponentialWeight",
    "CustomWeight",
    "WeightFunction",
    "TradingSeasonal",
    "Samuelson",
    "DeliverySeasonal",
    "GeneralSeparable",
    "VolStructure",
    "eval_s",
    "weight_hat",
    "weight_density",
    "as_time_function",
    "variant_tag",
    "theta_min_on_grid",
]

TWO_PI = 2.0 * np.pi


def as_time_function(value: float | Callable) -> Callable:
    """Wrap a constant or a scalar callable into a vectorized function of time.

    The returned function accepts a float or an ndarray and returns the same
    shape.  Scalar-only callables are looped over transparently.
    """
    if callable(value):
        def fn(t):
            t_arr = np.asarray(t, dtype=float)
            if t_arr.ndim == 0:
                return float(value(float(t_arr)))
            try:
                out = np.asarray(value(t_arr), dtype=float)
                if out.shape == t_arr.shape:
                    return out
            except (TypeError, ValueError):
                pass
            return np.array([float(value(float(v))) for v in t_arr])
        return fn
    v = float(value)

    def const(t):
        t_arr = np.asarray(t, dtype=float)
        if t_arr.ndim == 0:
            return v
        return np.full(t_arr.shape, v)
    return const


@dataclass(frozen=True)
class HestonParams:
    """CIR variance and market parameters.

    theta may be a positive constant or a callable of trading time; positivity
    of a callable theta is grid-checked by the modules that consume it.
    """
    kappa: float
    theta: float | Callable[[float], float]
    sigma_vv: float
    rho: float
    nu0: float
    f0: float
    r: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if not callable(self.theta) and not float(self.theta) > 0:
            raise ValueError(f"theta must be > 0, got {self.theta}")
        if not self.sigma_vv >= 0:
            raise ValueError(f"sigma_vv must be >= 0, got {self.sigma_vv}")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho}")
        if not self.nu0 > 0:
            raise ValueError(f"nu0 must be > 0, got {self.nu0}")
        if not self.f0 > 0:
            raise ValueError(f"f0 must be > 0, got {self.f0}")
        if not self.r >= 0:
            raise ValueError(f"r must be >= 0, got {self.r}")

    def theta_fn(self) -> Callable:
        return as_time_function(self.theta)


@dataclass(frozen=True)
class DeliveryPeriod:
    """Delivery period (tau1, tau2], in year fractions."""
    tau1: float
    tau2: float

    def __post_init__(self):
        if not 0 < self.tau1 < self.tau2:
            raise ValueError(
                f"delivery period requires 0 < tau1 < tau2, got ({self.tau1}, {self.tau2})")

    @property
    def delta(self) -> float:
        return self.tau2 - self.tau1


@dataclass(frozen=True)
class OptionSpec:
    """European option on the swap: strike K and exercise time T (T < tau1)."""
    strike: float
    exercise: float

    def __post_init__(self):
        if not self.strike > 0:
            raise ValueError(f"strike must be > 0, got {self.strike}")
        if not self.exercise > 0:
            raise ValueError(f"exercise time must be > 0, got {self.exercise}")


# ---------------------------------------------------------------------------
# weight functions on the delivery period


@dataclass(frozen=True)
class UniformWeight:
    """Constant weight: density 1/(tau2 - tau1)."""


@dataclass(frozen=True)
class ExponentialWeight:
    """Unnormalized weight w_hat(u) = exp(-rate * u); rate 0 reduces to uniform."""
    rate: float = 0.0


@dataclass(frozen=True)
class CustomWeight:
    """Positive user weight w_hat(u), normalized over the delivery period.

    ``knots`` lists points where w_hat is not smooth (table breakpoints);
    integration routines split panels there so piecewise-polynomial weights
    integrate exactly.
    """
    w_hat: Callable[[np.ndarray], np.ndarray]
    knots: tuple[float, ...] | None = None

    @classmethod
    def from_table(cls, u_grid, values) -> "CustomWeight":
        """Build a weight by linear interpolation of tabulated values."""
        u_grid = np.asarray(u_grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if u_grid.ndim != 1 or u_grid.shape != values.shape or u_grid.size < 2:
            raise ValueError("weight table needs matching 1-d u_grid and values with >= 2 points")
        if np.any(np.diff(u_grid) <= 0):
            raise ValueError("weight table u_grid must be strictly increasing")
        if np.any(values <= 0):
            raise ValueError("weight table values must be positive")

        def interp(u):
            u = np.asarray(u, dtype=float)
            if np.any(u < u_grid[0]) or np.any(u > u_grid[-1]):
                raise ValueError("weight table does not cover the requested u")
            return np.interp(u, u_grid, values)

        return cls(interp, knots=tuple(float(v) for v in u_grid))


WeightFunction = Union[UniformWeight, ExponentialWeight, CustomWeight]


def weight_hat(w: WeightFunction, u) -> np.ndarray | float:
    """Unnormalized weight w_hat evaluated at u (scalar or array)."""
    u_arr = np.asarray(u, dtype=float)
    if isinstance(w, UniformWeight):
        vals = np.ones(u_arr.shape)
    elif isinstance(w, ExponentialWeight):
        vals = np.exp(-w.rate * u_arr)
    elif isinstance(w, CustomWeight):
        try:
            vals = np.asarray(w.w_hat(u_arr), dtype=float)
            if vals.shape != u_arr.shape:
                raise TypeError
        except (TypeError, ValueError):
            vals = np.array([float(w.w_hat(float(v))) for v in np.atleast_1d(u_arr)])
            vals = vals.reshape(u_arr.shape)
        if np.any(vals <= 0):
            raise ValueError("custom weight must be positive on the delivery period")
    else:
        raise TypeError(f"unsupported weight function {type(w).__name__}")
    if u_arr.ndim == 0:
        return float(vals)
    return vals


def integrate_over_delivery(fn, w: WeightFunction, dp: DeliveryPeriod,
                            abs_tol: float = 1e-10) -> float:
    """Integrate ``fn`` over the delivery period, splitting at weight knots.

    A tabulated weight has kinks at its breakpoints; placing panel edges on
    them keeps each panel smooth (for linear tables, exactly polynomial).
    """
    inner: list[float] = []
    if isinstance(w, CustomWeight) and w.knots is not None:
        inner = [k for k in w.knots if dp.tau1 < k < dp.tau2]
    pts = [dp.tau1, *inner, dp.tau2]
    budget = abs_tol / (len(pts) - 1)
    return float(sum(
        adaptive_gauss_legendre(fn, lo, hi, abs_tol=budget)
        for lo, hi in zip(pts[:-1], pts[1:])
    ))


def weight_normalizer(w: WeightFunction, dp: DeliveryPeriod) -> float:
    """Integral of w_hat over the delivery period."""
    if isinstance(w, UniformWeight):
        return dp.delta
    if isinstance(w, ExponentialWeight):
        if w.rate == 0.0:
            return dp.delta
        # expm1 keeps the difference of the two exponentials from
        # cancelling when rate * delta is tiny
        return float(np.exp(-w.rate * dp.tau1) * (-np.expm1(-w.rate * dp.delta)) / w.rate)
    return integrate_over_delivery(lambda v: weight_hat(w, v), w, dp)


def weight_density(w: WeightFunction, dp: DeliveryPeriod, u) -> np.ndarray | float:
    """Normalized weight density w(u) = w_hat(u) / integral of w_hat.

    u must lie in the delivery period; the left endpoint tau1 is accepted as
    the continuous extension of the density.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < dp.tau1) or np.any(u_arr > dp.tau2):
        raise ValueError(
            f"u must lie in the delivery period [{dp.tau1}, {dp.tau2}]")
    vals = np.asarray(weight_hat(w, u_arr), dtype=float) / weight_normalizer(w, dp)
    if u_arr.ndim == 0:
        return float(vals)
    return vals


# ---------------------------------------------------------------------------
# volatility structures


@dataclass(frozen=True)
class TradingSeasonal:
    """Seasonality in trading time only: s(t, u) = 1, theta(t) sinusoidal.

    theta(t) = alpha * exp(beta * sin(2 pi (t + gamma))); the minimum level
    alpha * exp(-beta) is available analytically for the Feller check.
    """
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")

    def theta(self, t):
        t = np.asarray(t, dtype=float)
        out = self.alpha * np.exp(self.beta * np.sin(TWO_PI * (t + self.gamma)))
        return float(out) if out.ndim == 0 else out

    @property
    def theta_min(self) -> float:
        return float(self.alpha * np.exp(-self.beta))


@dataclass(frozen=True)
class Samuelson:
    """Term-structure decay: s(t, u) = exp(-lam * (u - t))."""
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")


@dataclass(frozen=True)
class DeliverySeasonal:
    """Seasonality in delivery time: s(u) = a + b * cos(2 pi (u + c))."""
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not self.a > self.b > 0:
            raise ValueError(
                f"delivery seasonality requires a > b > 0, got a={self.a}, b={self.b}")
        if not 0.0 <= self.c < 1.0:
            raise ValueError(f"c must lie in [0, 1), got {self.c}")


@dataclass(frozen=True)
class GeneralSeparable:
    """User-supplied bounded factor s(t, u) with declared bound 0 < s <= bound_r."""
    s: Callable[[float, np.ndarray], np.ndarray]
    bound_r: float

    def __post_init__(self):
        if not callable(self.s):
            raise ValueError("s must be callable as s(t, u)")
        if not self.bound_r > 0:
            raise ValueError(f"bound_r must be > 0, got {self.bound_r}")

    @classmethod
    def from_table(cls, t_grid, u_grid, values, bound_r: float) -> "GeneralSeparable":
        """Bilinear interpolation of tabulated s values on a (t, u) grid."""
        from scipy.interpolate import RegularGridInterpolator

        t_grid = np.asarray(t_grid, dtype=float)
        u_grid = np.asarray(u_grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.shape != (t_grid.size, u_grid.size):
            raise ValueError("values must have shape (len(t_grid), len(u_grid))")
        interp = RegularGridInterpolator((t_grid, u_grid), values, method="linear",
                                         bounds_error=True)

        def s_fn(t, u):
            u = np.asarray(u, dtype=float)
            pts = np.column_stack([np.full(u.reshape(-1).shape, float(t)), u.reshape(-1)])
            return interp(pts).reshape(u.shape)

        return cls(s_fn, bound_r)


VolStructure = Union[TradingSeasonal, Samuelson, DeliverySeasonal, GeneralSeparable]

_TAGS = {
    TradingSeasonal: "trading_seasonal",
    Samuelson: "samuelson",
    DeliverySeasonal: "delivery_seasonal",
    GeneralSeparable: "general_separable",
}


def variant_tag(vol: VolStructure) -> str:
    try:
        return _TAGS[type(vol)]
    except KeyError:
        raise TypeError(f"unsupported volatility structure {type(vol).__name__}") from None


def _general_values(vol: GeneralSeparable, t: float, u_arr: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(vol.s(t, u_arr), dtype=float)
        if vals.shape != u_arr.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(vol.s(t, float(v))) for v in np.atleast_1d(u_arr)])
        vals = vals.reshape(u_arr.shape)
    if np.any(vals <= 0):
        raise ValueError("general separable factor must satisfy s(t, u) > 0")
    if np.any(vals > vol.bound_r * (1.0 + 1e-12)):
        raise ValueError(
            f"general separable factor exceeds its declared bound {vol.bound_r}")
    return vals


def eval_s(vol: VolStructure, t: float, u) -> np.ndarray | float:
    """Deterministic volatility factor s(t, u); requires t <= u.

    u may be a scalar or an array of delivery times.
    """
    t = float(t)
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < t):
        raise ValueError("eval_s requires t <= u")
    if isinstance(vol, TradingSeasonal):
        vals = np.ones(u_arr.shape)
    elif isinstance(vol, Samuelson):
        vals = np.exp(-vol.lam * (u_arr - t))
    elif isinstance(vol, DeliverySeasonal):
        vals = vol.a + vol.b * np.cos(TWO_PI * (u_arr + vol.c))
    elif isinstance(vol, GeneralSeparable):
        vals = _general_values(vol, t, u_arr)
    else:
        raise TypeError(f"unsupported volatility structure {type(vol).__name__}")
    if u_arr.ndim == 0:
        return float(vals)
    return vals


def theta_min_on_grid(theta: float | Callable, horizon: float,
                      resolution: float = 1e-4) -> float:
    """Minimum of theta over [0, horizon] on a uniform grid."""
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    n = max(2, int(np.ceil(horizon / resolution)) + 1)
    ts = np.linspace(0.0, horizon, n)
    vals = np.asarray(as_time_function(theta)(ts), dtype=float)
    return float(vals.min())
