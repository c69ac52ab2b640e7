"""Fitted sign constant c in dT^(l+1) = c * B, with B = Pf (l = 0) or the boundary transgression.

The transgression formula asserts c = -1 for every l. Prints, per family, the fitted c
and the residuals under both signs.
"""

import argparse
import math

from gbverify.suites import SuiteConfig, angle_family
from gbverify.transgression import ConnectionChart, NormalizedFamily, verify_transgression_derivative


def row(label, rep):
    d = rep.details
    print(f"{label:<16} c = {d['sign_constant']:+.8f}   resid(-) = {rep.lhs:.3e}   resid(+) = {d['residual_if_sign_flipped']:.3e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--families", type=int, default=5)
    parser.add_argument("--skip-l2", action="store_true", help="skip the slower finite-difference l = 2 case")
    args = parser.parse_args()
    cfg = SuiteConfig(seed=args.seed)
    print("l = 0, rank 2, exact")
    for i in range(args.families):
        rng = cfg.rng(20, i)
        row(f"  pair{i}", verify_transgression_derivative(ConnectionChart.random(rng, 2, 2), angle_family(rng, 2), 7))
    print("l = 1, rank 2, exact")
    for i in range(args.families):
        rng = cfg.rng(21, i)
        family = angle_family(rng, 2, param_dim=1, winding=2 * math.pi)
        row(f"  interval{i}", verify_transgression_derivative(ConnectionChart.random(rng, 2, 2), family, 7))
    if not args.skip_l2:
        print("l = 2, rank 4, finite differences")
        rng = cfg.rng(22)
        chart = ConnectionChart.random(rng, 2, 4, degree=1)
        family = NormalizedFamily.random(rng, 4, 2, param_dim=2)
        row("  square", verify_transgression_derivative(chart, family, 5, 16, mode="fd", allow_experimental=True))


if __name__ == "__main__":
    main()
