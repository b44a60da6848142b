#!/usr/bin/env python3
"""Grid scan of the interferometer analysis; writes CSV to stdout.

Columns: gamma, epsilon, tau, p_extract, kmax, delta_theta, improvement
(relative to the undamped unsqueezed input at the same working point).
"""

import argparse
import math
import sys

from rotacov import InterferometerSpec, extraction_probability, phase_uncertainty


def parse_grid(text):
    return [float(x) for x in text.split(",") if x.strip()]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gammas", default="0.5,1,2", type=parse_grid)
    ap.add_argument("--epsilons", default="0.05,0.1,0.2", type=parse_grid)
    ap.add_argument("--taus", default="0.1,0.2,0.3", type=parse_grid)
    ap.add_argument("--theta", type=float, default=math.pi / 4)
    args = ap.parse_args(argv)

    print("gamma,epsilon,tau,p_extract,kmax,delta_theta,improvement")
    for gamma in args.gammas:
        baseline = phase_uncertainty(InterferometerSpec(gamma, 0.0, 0.0, args.theta))
        for eps in args.epsilons:
            for tau in args.taus:
                spec = InterferometerSpec(gamma, eps, tau, args.theta)
                p = extraction_probability(spec)
                damped = InterferometerSpec(spec.damped_gamma, 0.0, tau, args.theta)
                dtheta = phase_uncertainty(damped)
                print(f"{gamma:g},{eps:g},{tau:g},{float(p):.10g},{p.kmax},"
                      f"{dtheta:.10g},{dtheta / baseline:.10g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
