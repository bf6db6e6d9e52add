"""Cross-check Fourier prices against Monte-Carlo on a strike ladder.

Prices European calls on the swap with both engines and reports the
discrepancy in Monte-Carlo standard errors.  With the default budget the
z-scores should stay well inside +-3.
"""

import argparse
import time

import numpy as np

from powerswap import (
    DeliveryPeriod,
    DeliverySeasonal,
    GridSpec,
    HestonParams,
    OptionSpec,
    Samuelson,
    TradingSeasonal,
    UniformWeight,
    price_fourier_many,
    price_mc,
)

DP = DeliveryPeriod(tau1=0.75, tau2=5.0 / 6.0)
EXERCISE = 0.5

VOLS = {
    "trading_seasonal": TradingSeasonal(alpha=0.6, beta=0.7, gamma=0.2),
    "samuelson": Samuelson(lam=3.5),
    "delivery_seasonal": DeliverySeasonal(a=1.0, b=0.4, c=0.0),
}


def heston_for(name):
    theta = VOLS[name].theta if name == "trading_seasonal" else 0.6
    return HestonParams(kappa=3.0, theta=theta, sigma_vv=0.4, rho=-0.3,
                        nu0=0.6, f0=30.0, r=0.01)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="samuelson", choices=sorted(VOLS))
    ap.add_argument("--paths", type=int, default=200_000)
    ap.add_argument("--steps", type=int, default=1500)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=2)
    args = ap.parse_args()

    vol = VOLS[args.model]
    p = heston_for(args.model)
    w = UniformWeight()
    strikes = p.f0 * np.array([0.8, 0.9, 1.0, 1.1, 1.2])
    g = GridSpec(t0=0.0, t_end=EXERCISE, n_steps=args.steps,
                 n_paths=args.paths, seed=args.seed)

    t0 = time.perf_counter()
    fourier = price_fourier_many(p, vol, w, DP, strikes, EXERCISE)
    t_four = time.perf_counter() - t0

    print(f"model={args.model}  paths={args.paths}  steps={args.steps}  "
          f"seed={args.seed}")
    print(f"{'strike':>8} {'fourier':>12} {'mc':>12} {'stderr':>10} {'z':>7}")
    t0 = time.perf_counter()
    worst = 0.0
    for strike, res in zip(strikes, fourier):
        opt = OptionSpec(strike=float(strike), exercise=EXERCISE)
        mc = price_mc(p, vol, w, DP, opt, g, workers=args.workers)
        z = (res.call - mc.call) / mc.stderr
        worst = max(worst, abs(z))
        print(f"{strike:8.2f} {res.call:12.6f} {mc.call:12.6f} "
              f"{mc.stderr:10.6f} {z:7.2f}")
    t_mc = time.perf_counter() - t0
    print(f"fourier {t_four:.2f}s, mc {t_mc:.2f}s, max |z| = {worst:.2f}")


if __name__ == "__main__":
    main()
