#!/usr/bin/env python3
"""Reproduce the worked transformation benchmarks and print a JSON summary.

Covers the three-irrep benchmark state (probability 1/3 onto the half-spin
target, best fidelity ~0.93) and the top coherent state |3/2,3/2> mapped
toward |2,2> (fidelity sqrt(4/5), output 4/5 |2,2><2,2| + 1/5 |2,1><2,1|).
"""

import json
import math
import time

import numpy as np

from rotacov import (
    BlockDensity,
    HalfInt,
    SpinKet,
    channel_output,
    deterministic_feasible,
    max_fidelity,
    max_fidelity_pure_target,
    max_prob,
)


def main():
    s6 = 1 / math.sqrt(6)
    psi = SpinKet({("0", "0"): s6, ("1", "0"): s6, ("3/2", "3/2"): 2 * s6})
    phi = SpinKet.basis("1/2", "-1/2")
    top32 = SpinKet.basis("3/2", "3/2")
    top2 = SpinKet.basis(2, 2)

    t0 = time.perf_counter()
    summary = {}

    det = deterministic_feasible(psi, phi)
    summary["benchmark_deterministic"] = det.feasible

    prob = max_prob(psi, phi)
    summary["benchmark_max_prob"] = prob.p
    summary["benchmark_sigma_trace"] = prob.sigma.trace()

    fid = max_fidelity(psi, phi)
    summary["benchmark_max_fidelity"] = fid.fidelity

    pure = max_fidelity_pure_target(top32, top2)
    summary["spin_raise_fidelity"] = pure.fidelity
    summary["spin_raise_fidelity_exact"] = math.sqrt(0.8)
    out = channel_output(BlockDensity.from_ket(top32), pure.channel)
    summary["spin_raise_output_diag"] = [
        round(x, 6) for x in np.diag(out.blocks[HalfInt.of(2)]).real]

    stretched = max_prob(top32, SpinKet.basis(1, 1))
    summary["stretched_lowering_prob"] = stretched.p

    summary["elapsed_s"] = round(time.perf_counter() - t0, 2)
    print(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
