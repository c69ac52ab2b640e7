"""Monte Carlo volume of ideal hyperbolic 4-simplices against the outer-angle formula, by sample count."""

import argparse

import numpy as np

from gbverify.spaceforms import ideal_4simplex_volume_check, perturbed_ideal_4simplex, regular_ideal_4simplex


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--perturbed", type=int, default=2)
    parser.add_argument("--max-exponent", type=int, default=7)
    args = parser.parse_args()
    rng = np.random.Generator(np.random.Philox(args.seed))
    cases = [("regular", regular_ideal_4simplex())] + [(f"perturbed{i}", perturbed_ideal_4simplex(rng)) for i in range(args.perturbed)]
    for name, poly in cases:
        print(name)
        for e in range(4, args.max_exponent + 1):
            rep = ideal_4simplex_volume_check(poly, args.seed, 10**e)
            print(f"  10^{e}: mc = {rep.lhs:.6f} +- {rep.abs_error:.2e} (3 sigma)  formula = {rep.rhs:.6f}  rel gap = {abs(rep.lhs - rep.rhs) / abs(rep.rhs):.2e}")


if __name__ == "__main__":
    main()
