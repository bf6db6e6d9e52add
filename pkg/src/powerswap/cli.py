"""Command-line interface: config ingestion and machine-readable output.

Subcommands
-----------
check       Feller / Novikov condition report for the configured model
decompose   (t, S, xi) curves for the configured model over a time grid
simulate    Monte-Carlo paths as CSV, or a running summary with --summary
price       European swap option price (Fourier, MC, or both)
validate    Fourier-vs-MC cross-check over a small strike ladder
table3      regression of the delivery-averaging factors against stored values

Configuration is a JSON object with sections ``model``, ``heston``,
``delivery``, ``weight``, ``option``, ``grid`` and ``output``.  Every
section is optional; omitted fields fall back to the standard simulation
setup (swap delivering on [0.75, 5/6], Samuelson decay 3.5, strike 30,
exercise 0.5, one hundred thousand paths at two thousand steps per year).
Unknown fields and out-of-range values are rejected with the offending
dotted path in the message, e.g. ``heston.rho``.

``delivery.tau1`` and ``delivery.tau2`` accept fraction strings such as
``"5/6"`` so that one-sixth-of-a-year boundaries survive JSON without
decimal truncation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .averaging import d1_d2, decompose, samuelson_variance
from .conditions import full_report
from .models import (
    CustomWeight,
    DeliveryPeriod,
    DeliverySeasonal,
    ExponentialWeight,
    HestonParams,
    OptionSpec,
    Samuelson,
    TradingSeasonal,
    UniformWeight,
    variant_tag,
)
from .pricer import price_fourier, price_fourier_many, price_mc
from .simulate import GridSpec, Measure, simulate_paths, simulate_summary

STEPS_PER_YEAR = 2000.0
WORKERS_ENV = "POWERSWAP_WORKERS"

# Reference values for the one-month averaging factors: rows are the decay
# rate lam, columns are (d1, variance of the decay factor, d2).
_TABLE3_EXPECTED = {
    1.5: (0.9400, 0.0012, 0.0006),
    3.5: (0.8674, 0.0053, 0.0031),
    5.5: (0.8022, 0.0112, 0.0070),
}

_HESTON_DEFAULTS = {
    "kappa": 3.0,
    "theta": 0.6,
    "sigma_vv": 0.4,
    "rho": -0.3,
    "nu0": 0.6,
    "f0": 30.0,
    "r": 0.01,
}


class ConfigError(ValueError):
    """Raised on unknown fields or out-of-range values; carries the path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _require_number(field: str, value: Any) -> float:
    # bool is an int subclass; reject it explicitly so `true` is not 1.0
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(field, "must be finite")
    return v


def _require_int(field: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field, f"expected an integer, got {value!r}")
    return value


def _parse_tau(field: str, value: Any) -> float:
    """Delivery boundary: a number, or a fraction string like "5/6"."""
    if isinstance(value, str):
        try:
            return float(Fraction(value))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(field, f"not a valid fraction: {value!r}") from None
    return _require_number(field, value)


def _check_keys(section: str, given: dict, allowed: tuple[str, ...]) -> None:
    for key in given:
        if key not in allowed:
            raise ConfigError(f"{section}.{key}", "unknown field")


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(name, f"expected an object, got {value!r}")
    return value


@dataclass(frozen=True)
class GridSettings:
    """Grid section with per-subcommand defaults left unresolved.

    ``t_end`` and ``n_steps`` stay None when the config omits them: price
    and simulate default the horizon to the option exercise, decompose to
    the start of delivery, and the step count follows the horizon at
    STEPS_PER_YEAR either way.
    """

    t0: float
    t_end: float | None
    n_steps: int | None
    n_paths: int
    seed: int

    def resolve(self, t_end_default: float) -> GridSpec:
        t_end = self.t_end if self.t_end is not None else t_end_default
        n_steps = self.n_steps
        if n_steps is None:
            n_steps = max(1, round((t_end - self.t0) * STEPS_PER_YEAR))
        return GridSpec(
            t0=self.t0,
            t_end=t_end,
            n_steps=n_steps,
            n_paths=self.n_paths,
            seed=self.seed,
        )


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration plus its normalized JSON form."""

    params: HestonParams
    vol: Any
    weight: Any
    delivery: DeliveryPeriod
    option: OptionSpec
    grid: GridSettings
    out_format: str | None
    out_path: str | None
    normalized: dict

    def to_json(self) -> str:
        return json.dumps(self.normalized, indent=2) + "\n"


def _parse_model(raw: dict) -> tuple[Any, dict]:
    sec = _section(raw, "model")
    variant = sec.get("variant", "samuelson")
    if not isinstance(variant, str):
        raise ConfigError("model.variant", f"expected a string, got {variant!r}")
    if variant == "samuelson":
        _check_keys("model", sec, ("variant", "lam"))
        lam = _require_number("model.lam", sec.get("lam", 3.5))
        if lam <= 0:
            raise ConfigError("model.lam", "must be positive")
        return Samuelson(lam), {"variant": "samuelson", "lam": lam}
    if variant == "trading_seasonal":
        _check_keys("model", sec, ("variant", "alpha", "beta", "gamma"))
        alpha = _require_number("model.alpha", sec.get("alpha", 0.6))
        beta = _require_number("model.beta", sec.get("beta", 0.7))
        gamma = _require_number("model.gamma", sec.get("gamma", 0.2))
        if alpha <= 0:
            raise ConfigError("model.alpha", "must be positive")
        if beta <= 0:
            raise ConfigError("model.beta", "must be positive")
        vol = TradingSeasonal(alpha=alpha, beta=beta, gamma=gamma)
        return vol, {"variant": "trading_seasonal", "alpha": alpha, "beta": beta, "gamma": gamma}
    if variant == "delivery_seasonal":
        _check_keys("model", sec, ("variant", "a", "b", "c"))
        a = _require_number("model.a", sec.get("a", 1.0))
        b = _require_number("model.b", sec.get("b", 0.4))
        c = _require_number("model.c", sec.get("c", 0.0))
        if not a > b > 0:
            raise ConfigError("model.a", "requires a > b > 0")
        if not 0.0 <= c < 1.0:
            raise ConfigError("model.c", "must lie in [0, 1)")
        return DeliverySeasonal(a=a, b=b, c=c), {"variant": "delivery_seasonal", "a": a, "b": b, "c": c}
    if variant == "general_separable":
        raise ConfigError(
            "model.variant",
            "general_separable needs a callable shape and is only available "
            "through the library API",
        )
    raise ConfigError(
        "model.variant",
        f"unknown variant {variant!r}; expected samuelson, trading_seasonal "
        "or delivery_seasonal",
    )


def _parse_heston(raw: dict, vol: Any) -> tuple[HestonParams, dict]:
    sec = _section(raw, "heston")
    _check_keys("heston", sec, ("kappa", "theta", "sigma_vv", "rho", "nu0", "f0", "r"))
    seasonal_theta = isinstance(vol, TradingSeasonal)
    if seasonal_theta and "theta" in sec:
        raise ConfigError(
            "heston.theta",
            "set by the trading_seasonal variant; remove it from the heston section",
        )
    values = {}
    for key, default in _HESTON_DEFAULTS.items():
        if key == "theta" and seasonal_theta:
            continue
        values[key] = _require_number(f"heston.{key}", sec.get(key, default))
    for key, cond, msg in (
        ("kappa", values["kappa"] > 0, "must be positive"),
        ("sigma_vv", values["sigma_vv"] >= 0, "must be non-negative"),
        ("rho", -1.0 < values["rho"] < 1.0, "must lie in (-1, 1)"),
        ("nu0", values["nu0"] > 0, "must be positive"),
        ("f0", values["f0"] > 0, "must be positive"),
        ("r", values["r"] >= 0, "must be non-negative"),
    ):
        if not cond:
            raise ConfigError(f"heston.{key}", msg)
    if not seasonal_theta and values["theta"] <= 0:
        raise ConfigError("heston.theta", "must be positive")
    theta = vol.theta if seasonal_theta else values["theta"]
    params = HestonParams(
        kappa=values["kappa"],
        theta=theta,
        sigma_vv=values["sigma_vv"],
        rho=values["rho"],
        nu0=values["nu0"],
        f0=values["f0"],
        r=values["r"],
    )
    return params, dict(values)


def _parse_delivery(raw: dict) -> tuple[DeliveryPeriod, dict]:
    sec = _section(raw, "delivery")
    _check_keys("delivery", sec, ("tau1", "tau2"))
    tau1_raw = sec.get("tau1", 0.75)
    tau2_raw = sec.get("tau2", "5/6")
    tau1 = _parse_tau("delivery.tau1", tau1_raw)
    tau2 = _parse_tau("delivery.tau2", tau2_raw)
    if tau1 < 0:
        raise ConfigError("delivery.tau1", "must be non-negative")
    if tau2 <= tau1:
        raise ConfigError("delivery.tau2", "must exceed tau1")
    return DeliveryPeriod(tau1=tau1, tau2=tau2), {"tau1": tau1_raw, "tau2": tau2_raw}


def _parse_weight(raw: dict) -> tuple[Any, dict]:
    sec = _section(raw, "weight")
    variant = sec.get("variant", "uniform")
    if not isinstance(variant, str):
        raise ConfigError("weight.variant", f"expected a string, got {variant!r}")
    if variant == "uniform":
        _check_keys("weight", sec, ("variant",))
        return UniformWeight(), {"variant": "uniform"}
    if variant == "exponential":
        _check_keys("weight", sec, ("variant", "rate"))
        rate = _require_number("weight.rate", sec.get("rate", 0.0))
        return ExponentialWeight(rate=rate), {"variant": "exponential", "rate": rate}
    if variant == "custom":
        _check_keys("weight", sec, ("variant", "u_grid", "values"))
        for key in ("u_grid", "values"):
            if key not in sec:
                raise ConfigError(f"weight.{key}", "required for the custom variant")
            if not isinstance(sec[key], list):
                raise ConfigError(f"weight.{key}", "expected a list of numbers")
        u_grid = [_require_number(f"weight.u_grid[{i}]", v) for i, v in enumerate(sec["u_grid"])]
        values = [_require_number(f"weight.values[{i}]", v) for i, v in enumerate(sec["values"])]
        try:
            w = CustomWeight.from_table(u_grid, values)
        except ValueError as exc:
            raise ConfigError("weight", str(exc)) from None
        return w, {"variant": "custom", "u_grid": u_grid, "values": values}
    raise ConfigError(
        "weight.variant",
        f"unknown variant {variant!r}; expected uniform, exponential or custom",
    )


def _parse_option(raw: dict, dp: DeliveryPeriod) -> tuple[OptionSpec, dict]:
    sec = _section(raw, "option")
    _check_keys("option", sec, ("strike", "exercise"))
    strike = _require_number("option.strike", sec.get("strike", 30.0))
    exercise = _require_number("option.exercise", sec.get("exercise", 0.5))
    if strike <= 0:
        raise ConfigError("option.strike", "must be positive")
    if exercise <= 0:
        raise ConfigError("option.exercise", "must be positive")
    if exercise > dp.tau1:
        raise ConfigError("option.exercise", "must not exceed delivery.tau1")
    return OptionSpec(strike=strike, exercise=exercise), {"strike": strike, "exercise": exercise}


def _parse_grid(raw: dict) -> tuple[GridSettings, dict]:
    sec = _section(raw, "grid")
    _check_keys("grid", sec, ("t0", "t_end", "n_steps", "n_paths", "seed"))
    t0 = _require_number("grid.t0", sec.get("t0", 0.0))
    if t0 < 0:
        raise ConfigError("grid.t0", "must be non-negative")
    t_end = None
    if "t_end" in sec:
        t_end = _require_number("grid.t_end", sec["t_end"])
        if t_end <= t0:
            raise ConfigError("grid.t_end", "must exceed t0")
    n_steps = None
    if "n_steps" in sec:
        n_steps = _require_int("grid.n_steps", sec["n_steps"])
        if n_steps < 1:
            raise ConfigError("grid.n_steps", "must be at least 1")
    n_paths = _require_int("grid.n_paths", sec.get("n_paths", 100_000))
    if n_paths < 1:
        raise ConfigError("grid.n_paths", "must be at least 1")
    seed = _require_int("grid.seed", sec.get("seed", 42))
    if not 0 <= seed < 2**64:
        raise ConfigError("grid.seed", "must fit in an unsigned 64-bit integer")
    settings = GridSettings(t0=t0, t_end=t_end, n_steps=n_steps, n_paths=n_paths, seed=seed)
    normalized = {"t0": t0, "n_paths": n_paths, "seed": seed}
    if t_end is not None:
        normalized["t_end"] = t_end
    if n_steps is not None:
        normalized["n_steps"] = n_steps
    return settings, normalized


def _parse_output(raw: dict) -> tuple[str | None, str | None, dict]:
    sec = _section(raw, "output")
    _check_keys("output", sec, ("format", "path"))
    fmt = sec.get("format")
    if fmt is not None and fmt not in ("csv", "json"):
        raise ConfigError("output.format", f"expected csv or json, got {fmt!r}")
    path = sec.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path", f"expected a string, got {path!r}")
    normalized = {}
    if fmt is not None:
        normalized["format"] = fmt
    if path is not None:
        normalized["path"] = path
    return fmt, path, normalized


def load_config(source: Any = None) -> RunConfig:
    """Build a RunConfig from a dict, a JSON file path, or nothing.

    Raises ConfigError (a ValueError) for unknown sections or fields,
    type mismatches and out-of-range values, always naming the dotted
    field path.  Loading the normalized form back produces an identical
    configuration, which is what makes runs reproducible byte for byte.
    """
    if source is None:
        raw = {}
    elif isinstance(source, dict):
        raw = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError("<config>", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("<config>", "top level must be a JSON object")
    known = ("model", "heston", "delivery", "weight", "option", "grid", "output")
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown section")

    vol, model_norm = _parse_model(raw)
    params, heston_norm = _parse_heston(raw, vol)
    dp, delivery_norm = _parse_delivery(raw)
    weight, weight_norm = _parse_weight(raw)
    option, option_norm = _parse_option(raw, dp)
    grid, grid_norm = _parse_grid(raw)
    fmt, path, output_norm = _parse_output(raw)

    normalized = {
        "model": model_norm,
        "heston": heston_norm,
        "delivery": delivery_norm,
        "weight": weight_norm,
        "option": option_norm,
        "grid": grid_norm,
    }
    if output_norm:
        normalized["output"] = output_norm
    return RunConfig(
        params=params,
        vol=vol,
        weight=weight,
        delivery=dp,
        option=option,
        grid=grid,
        out_format=fmt,
        out_path=path,
        normalized=normalized,
    )


# ---------------------------------------------------------------------------
# output plumbing


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _render_csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_g17(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _render_json(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _novikov_lhs_json(value: float) -> Any:
    # strict JSON has no Infinity literal; the unconditional case (no
    # size restriction at all) is spelled out instead
    return "unconditional" if math.isinf(value) else value


# ---------------------------------------------------------------------------
# subcommands


def _cmd_check(cfg: RunConfig, args: argparse.Namespace) -> int:
    report = full_report(cfg.params, cfg.vol, cfg.delivery)
    fmt = args.format or cfg.out_format or "json"
    if fmt == "json":
        payload = {
            "model": report.model_tag,
            "feller": {"ok": report.feller_ok, "lhs": report.feller_lhs, "rhs": report.feller_rhs},
            "novikov": {
                "ok": report.novikov_ok,
                "lhs": _novikov_lhs_json(report.novikov_lhs),
                "rhs": report.novikov_rhs,
            },
            "notes": list(report.notes),
        }
        text = _render_json(payload)
    else:
        lhs = "unconditional" if math.isinf(report.novikov_lhs) else report.novikov_lhs
        text = _render_csv(
            ["model", "feller_ok", "feller_lhs", "feller_rhs", "novikov_ok", "novikov_lhs", "novikov_rhs"],
            [[report.model_tag, report.feller_ok, report.feller_lhs, report.feller_rhs,
              report.novikov_ok, lhs, report.novikov_rhs]],
        )
    _emit(text, args.out or cfg.out_path)
    # a failed condition is a finding, not an error: the report is the artifact
    return 0


def _cmd_decompose(cfg: RunConfig, args: argparse.Namespace) -> int:
    dec = decompose(cfg.vol, cfg.weight, cfg.delivery)
    t0 = cfg.grid.t0
    t_end = cfg.grid.t_end if cfg.grid.t_end is not None else cfg.delivery.tau1
    n = cfg.grid.n_steps if cfg.grid.n_steps is not None else 200
    times = np.linspace(t0, t_end, n + 1)
    big_s = np.asarray(dec.big_s(times), dtype=float)
    xi = np.asarray(dec.xi(times), dtype=float)
    fmt = args.format or cfg.out_format or "csv"
    if fmt == "csv":
        rows = [[float(t), float(s), float(x)] for t, s, x in zip(times, big_s, xi)]
        text = _render_csv(["t", "big_s", "xi"], rows)
    else:
        text = _render_json(
            {
                "model": variant_tag(cfg.vol),
                "t": list(map(float, times)),
                "big_s": list(map(float, big_s)),
                "xi": list(map(float, xi)),
            }
        )
    _emit(text, args.out or cfg.out_path)
    return 0


def _cmd_simulate(cfg: RunConfig, args: argparse.Namespace) -> int:
    g = cfg.grid.resolve(t_end_default=cfg.option.exercise)
    workers = _resolve_workers(args)
    fmt = args.format or cfg.out_format or "csv"
    if args.summary:
        stats = simulate_summary(cfg.params, cfg.vol, cfg.weight, cfg.delivery, g, workers=workers)
        if fmt == "csv":
            rows = [
                [float(t), float(m), float(se), float(nu)]
                for t, m, se, nu in zip(stats.times, stats.mean_f, stats.stderr_f, stats.mean_nu)
            ]
            text = _render_csv(["t", "mean_F", "stderr_F", "mean_nu"], rows)
        else:
            text = _render_json(
                {
                    "t": list(map(float, stats.times)),
                    "mean_F": list(map(float, stats.mean_f)),
                    "stderr_F": list(map(float, stats.stderr_f)),
                    "mean_nu": list(map(float, stats.mean_nu)),
                }
            )
    else:
        paths = simulate_paths(cfg.params, cfg.vol, cfg.weight, cfg.delivery, g, workers=workers)
        f = paths.f_paths
        if fmt == "csv":
            rows = []
            for i in range(g.n_paths):
                for j, t in enumerate(paths.times):
                    rows.append([i, float(t), float(paths.x_paths[i, j]), float(paths.nu_paths[i, j]), float(f[i, j])])
            text = _render_csv(["path_id", "t", "X", "nu", "F"], rows)
        else:
            text = _render_json(
                {
                    "t": list(map(float, paths.times)),
                    "X": [list(map(float, row)) for row in paths.x_paths],
                    "nu": [list(map(float, row)) for row in paths.nu_paths],
                    "F": [list(map(float, row)) for row in f],
                }
            )
    _emit(text, args.out or cfg.out_path)
    return 0


def _result_payload(res) -> dict:
    return {
        "call": res.call,
        "put": res.put,
        "q1": res.q1,
        "q2": res.q2,
        "method": res.method,
        "stderr": res.stderr,
        "diagnostics": res.diagnostics,
    }


def _cmd_price(cfg: RunConfig, args: argparse.Namespace) -> int:
    method = args.method
    results = {}
    if method in ("fourier", "both"):
        results["fourier"] = price_fourier(cfg.params, cfg.vol, cfg.weight, cfg.delivery, cfg.option)
    if method in ("mc", "both"):
        g = cfg.grid.resolve(t_end_default=cfg.option.exercise)
        results["mc"] = price_mc(
            cfg.params, cfg.vol, cfg.weight, cfg.delivery, cfg.option, g,
            workers=_resolve_workers(args),
        )
    fmt = args.format or cfg.out_format or "json"
    if fmt == "json":
        if method == "both":
            payload = {name: _result_payload(res) for name, res in results.items()}
        else:
            payload = _result_payload(results[method])
        text = _render_json(payload)
    else:
        rows = [
            [res.method, res.call, res.put, res.q1, res.q2, "" if res.stderr is None else res.stderr]
            for res in results.values()
        ]
        text = _render_csv(["method", "call", "put", "q1", "q2", "stderr"], rows)
    _emit(text, args.out or cfg.out_path)
    return 0


def _cmd_validate(cfg: RunConfig, args: argparse.Namespace) -> int:
    k0 = cfg.option.strike
    strikes = [0.8 * k0, k0, 1.2 * k0]
    exercise = cfg.option.exercise
    fouriers = price_fourier_many(
        cfg.params, cfg.vol, cfg.weight, cfg.delivery, strikes=strikes, exercise=exercise
    )
    g = cfg.grid.resolve(t_end_default=exercise)
    workers = _resolve_workers(args)
    rows = []
    all_ok = True
    for k, fr in zip(strikes, fouriers):
        mc = price_mc(
            cfg.params, cfg.vol, cfg.weight, cfg.delivery,
            OptionSpec(strike=k, exercise=exercise), g, workers=workers,
        )
        z = float((fr.call - mc.call) / mc.stderr)
        ok = bool(abs(z) <= 3.0)
        all_ok = all_ok and ok
        rows.append(
            {
                "strike": float(k),
                "fourier_call": float(fr.call),
                "mc_call": float(mc.call),
                "mc_stderr": float(mc.stderr),
                "z": z,
                "ok": ok,
            }
        )
    fmt = args.format or cfg.out_format or "csv"
    if fmt == "csv":
        text = _render_csv(
            ["strike", "fourier_call", "mc_call", "mc_stderr", "z", "ok"],
            [[r["strike"], r["fourier_call"], r["mc_call"], r["mc_stderr"], r["z"], r["ok"]] for r in rows],
        )
    else:
        text = _render_json(
            {
                "model": variant_tag(cfg.vol),
                "n_paths": g.n_paths,
                "n_steps": g.n_steps,
                "seed": g.seed,
                "ok": all_ok,
                "rows": rows,
            }
        )
    _emit(text, args.out or cfg.out_path)
    return 0 if all_ok else 2


def _cmd_table3(cfg: RunConfig, args: argparse.Namespace) -> int:
    # the averaging factors depend on the window length only; one month here
    dp = DeliveryPeriod(tau1=0.75, tau2=0.75 + 1.0 / 12.0)
    rows = []
    all_ok = True
    for lam, (e_d1, e_var, e_d2) in _TABLE3_EXPECTED.items():
        d1, d2 = d1_d2(lam, dp.delta)
        var = samuelson_variance(lam, dp)
        for name, computed, expected in (("d1", d1, e_d1), ("variance", var, e_var), ("d2", d2, e_d2)):
            computed = float(computed)
            ok = bool(round(computed, 4) == expected)
            all_ok = all_ok and ok
            rows.append({"lam": lam, "quantity": name, "computed": computed, "expected": expected, "ok": ok})
    fmt = args.format or cfg.out_format or "csv"
    if fmt == "csv":
        text = _render_csv(
            ["lam", "quantity", "computed", "expected", "ok"],
            [[r["lam"], r["quantity"], r["computed"], r["expected"], r["ok"]] for r in rows],
        )
    else:
        text = _render_json({"ok": all_ok, "rows": rows})
    _emit(text, args.out or cfg.out_path)
    return 0 if all_ok else 2


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _resolve_workers(args: argparse.Namespace) -> int:
    if args.workers is not None:
        workers = args.workers
    else:
        env = os.environ.get(WORKERS_ENV)
        if env is None:
            workers = 1
        else:
            try:
                workers = int(env)
            except ValueError:
                raise ConfigError(WORKERS_ENV, f"expected an integer, got {env!r}") from None
    if workers < 1:
        raise ConfigError("workers", "must be at least 1")
    return workers


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="path to a JSON configuration file")
    sp.add_argument("--seed", type=int, help="override grid.seed")
    sp.add_argument("--paths", type=int, help="override grid.n_paths")
    sp.add_argument("--steps", type=int, help="override grid.n_steps")
    sp.add_argument("--out", help="write the artifact to a file instead of stdout")
    sp.add_argument("--format", choices=("csv", "json"), help="artifact format")
    sp.add_argument("--workers", type=int, help=f"worker threads (default ${WORKERS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powerswap",
        description="Electricity swap and swap-option pricing under stochastic volatility.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name, help_text in (
        ("check", "report the Feller and Novikov conditions"),
        ("decompose", "emit the (t, S, xi) volatility decomposition"),
        ("simulate", "run the Monte-Carlo engine and emit paths or a summary"),
        ("price", "price the configured option"),
        ("validate", "cross-check Fourier prices against Monte-Carlo"),
        ("table3", "recompute the stored averaging-factor regression values"),
    ):
        sp = sub.add_parser(name, help=help_text)
        _add_common(sp)
        if name == "simulate":
            sp.add_argument("--summary", action="store_true", help="emit per-time summary statistics")
        if name == "price":
            sp.add_argument("--method", choices=("fourier", "mc", "both"), default="fourier")
    return parser


_DISPATCH: dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "check": _cmd_check,
    "decompose": _cmd_decompose,
    "simulate": _cmd_simulate,
    "price": _cmd_price,
    "validate": _cmd_validate,
    "table3": _cmd_table3,
}


def _load_with_overrides(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        raw: dict = {}
    else:
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError("<config>", f"invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("<config>", "top level must be a JSON object")
        raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    if args.seed is not None:
        raw.setdefault("grid", {})["seed"] = args.seed
    if args.paths is not None:
        raw.setdefault("grid", {})["n_paths"] = args.paths
    if args.steps is not None:
        raw.setdefault("grid", {})["n_steps"] = args.steps
    return load_config(raw)


def _emit_error(code: int, exc: BaseException) -> None:
    body = {"error": {"code": code, "type": type(exc).__name__, "message": str(exc)}}
    sys.stderr.write(json.dumps(body) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_with_overrides(args)
        return _DISPATCH[args.cmd](cfg, args)
    except ValueError as exc:  # ConfigError included: bad input, not a numerical fault
        _emit_error(1, exc)
        return 1
    except (RuntimeError, ArithmeticError) as exc:
        _emit_error(2, exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
