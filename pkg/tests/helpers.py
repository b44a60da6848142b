"""Shared random generators for channel and density tests."""

import math

import numpy as np

from rotacov import BlockDensity, HalfInt, KrausBlocks, build_kraus_index, rep_matrix_eval

H = HalfInt.of


def random_density(rng, irreps):
    blocks = {}
    for j in irreps:
        d = H(j).twice + 1
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        blocks[H(j)] = a @ a.conj().T
    rho = BlockDensity(blocks)
    return rho.scaled(1.0 / rho.trace())


def random_channel(rng, j_in_max, j_out_max):
    """Random PSD blocks, rescaled by a positive congruence so every input
    irrep satisfies the trace-preservation sum exactly."""
    index = build_kraus_index(j_in_max, j_out_max)
    mats = {}
    for J, pairs in index:
        n = len(pairs)
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        mats[J] = a @ a.conj().T
    kb = KrausBlocks.from_index(index, mats)
    totals = {j: 0.0 for j in kb.input_irreps()}
    for J, prs in kb.pairs.items():
        for a, (jp, j) in enumerate(prs):
            totals[j] += kb.mats[J][a, a].real
    for J, prs in kb.pairs.items():
        d = np.array([math.sqrt((j.twice + 1) / totals[j]) for (jp, j) in prs])
        kb.mats[J] = kb.mats[J] * np.outer(d, d)
    return kb


def rotate_density(rho, u, v):
    return BlockDensity({j: rep_matrix_eval(j, u, v) @ b @ rep_matrix_eval(j, u, v).conj().T
                         for j, b in rho.blocks.items()})
