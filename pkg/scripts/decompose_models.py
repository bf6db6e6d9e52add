"""Print the averaged-volatility decomposition for the three stock variants.

For each futures-volatility structure the swap volatility splits into a
deterministic factor S(t) times sqrt(nu_t), and the delivery-risk drift
carries a second factor xi(t).  This script tabulates both curves on a
one-month delivery period and reproduces the uniform-weight Samuelson
factor table for a few decay rates.
"""

import numpy as np

from powerswap import (
    DeliveryPeriod,
    DeliverySeasonal,
    Samuelson,
    TradingSeasonal,
    UniformWeight,
    d1_d2,
    decompose,
    variance_factor,
)

DP = DeliveryPeriod(tau1=0.75, tau2=5.0 / 6.0)
W = UniformWeight()

VARIANTS = [
    ("trading_seasonal", TradingSeasonal(alpha=0.6, beta=0.7, gamma=0.2)),
    ("samuelson", Samuelson(lam=3.5)),
    ("delivery_seasonal", DeliverySeasonal(a=1.0, b=0.4, c=0.0)),
]


def factor_table():
    print("Samuelson factors, one-month uniform delivery window")
    print(f"{'lambda':>8} {'d1':>10} {'d2':>10} {'2*d1*d2':>10}")
    for lam in (1.5, 3.5, 5.5):
        d1, d2 = d1_d2(lam, DP.delta)
        print(f"{lam:8.1f} {d1:10.4f} {d2:10.4f} {2.0 * d1 * d2:10.4f}")
    print()


def curves(name, vol):
    dec = decompose(vol, W, DP)
    ts = np.linspace(0.0, DP.tau1, 7)
    print(f"{name}: S(t), xi(t), Var[s(t,U)] on [0, tau1]")
    print(f"{'t':>8} {'S':>14} {'xi':>14} {'var':>14}")
    for t in ts:
        var = variance_factor(vol, W, DP, float(t))
        print(f"{t:8.3f} {dec.big_s(t):14.8f} {dec.xi(t):14.8f} {var:14.3e}")
    print()


def main():
    factor_table()
    for name, vol in VARIANTS:
        curves(name, vol)


if __name__ == "__main__":
    main()
