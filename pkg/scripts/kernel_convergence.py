#!/usr/bin/env python3
"""Refinement study behind the identity-check thresholds.

Measures, across grid doublings:
  * integration-by-parts pairing discrepancy (3 random smooth pairs),
  * composition sup error for probes with u(0) != 0,
  * endpoint error of the t^2 power rule.

The first two decay like h with constants ~2.5 and ~3.1, which is where
the 2.5*h and 8*h thresholds in kernel_verify come from (the composition
constant is taken with a 2.5x envelope).  The power-rule error decays
like h^2 and anchors the convergence-order row.
"""

import argparse

import numpy as np

from fracvar.frac_kernel import (
    FracOrder,
    Grid,
    GridFunction,
    caputo_left,
    euler_gamma,
    rl_left_integral,
    rl_right_integral,
)


def smooth(rng, grid, offset):
    t = grid.nodes
    u = np.zeros_like(t)
    up = np.zeros_like(t)
    for j in range(1, 6):
        a, b = rng.standard_normal(2) / (j * j)
        w = j * np.pi / grid.T
        u += a * np.sin(w * t) + b * np.cos(w * t)
        up += a * w * np.cos(w * t) - b * w * np.sin(w * t)
    if offset:
        u = u + rng.standard_normal()
    s = np.max(np.abs(u))
    return u / s, up / s


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512, 1024, 2048])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'n':>6} {'h':>10} {'ibp':>12} {'ibp/h':>8} "
          f"{'comp':>12} {'comp/h':>8} {'t^2 rule':>12} {'rate':>6}")
    prev_rule = None
    for n in args.sizes:
        g = Grid(T=1.0, n=n)
        h = g.T / n
        w = np.full(n + 1, h)
        w[0] = w[-1] = h / 2
        rng = np.random.default_rng(args.seed)

        ibp = 0.0
        for _ in range(3):
            f, _ = smooth(rng, g, offset=True)
            q, _ = smooth(rng, g, offset=True)
            for gam in (0.3, 0.5, 0.9):
                o = FracOrder(gam)
                lhs = np.sum(w * rl_left_integral(GridFunction(g, f), o).values * q)
                rhs = np.sum(w * f * rl_right_integral(GridFunction(g, q), o).values)
                ibp = max(ibp, abs(lhs - rhs))

        comp = 0.0
        for _ in range(2):
            u, up = smooth(rng, g, offset=True)
            for gam in (0.6, 0.75, 0.9):
                cap = caputo_left(GridFunction(g, up), FracOrder.derivative(gam))
                rec = rl_left_integral(cap, FracOrder(gam))
                comp = max(comp, float(np.max(np.abs(rec.values - (u - u[0])))))

        out = rl_left_integral(GridFunction(g, g.nodes**2), FracOrder(0.5))
        exact = euler_gamma(3.0) / euler_gamma(3.5) * g.nodes**2.5
        rule = abs(out.values[-1] - exact[-1])
        rate = np.log2(prev_rule / rule) if prev_rule else float("nan")
        prev_rule = rule

        print(f"{n:>6} {h:>10.3e} {ibp:>12.3e} {ibp / h:>8.2f} "
              f"{comp:>12.3e} {comp / h:>8.2f} {rule:>12.3e} {rate:>6.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
