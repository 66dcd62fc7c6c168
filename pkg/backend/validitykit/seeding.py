"""
Random streams.

Every random draw in the toolkit comes from ``stream(seed, *keys)``: a PCG64
generator keyed by a SeedSequence over the root seed and a tuple of stream
keys. Normal variates use numpy's Ziggurat sampler.

Stream keys in use:
    (replicate_seed, 0)   scenario sample of one replicate
    (seed, 1, b)          GAP uniform-box reference draw b
    (seed, 2, b)          GAP principal-axis-box reference draw b
"""
import numpy as np

SAMPLE_STREAM = 0
GAP_UNIFORM_STREAM = 1
GAP_PCA_STREAM = 2


def stream(seed, *keys):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def replicate_seed(root_seed, replicate):
    return int(root_seed) + int(replicate)
