"""Deterministic seed derivation and per-source random streams.

Every source of randomness (traffic plan, per-flow arrivals, per-UE channel
walk, network init, exploration noise, replay sampling) gets its own
generator derived from a seed plus a stream key.  Policy decisions therefore
cannot perturb the exogenous randomness of an episode, which is what makes
episode manifests replayable across schedulers.
"""

import numpy as np

MASK64 = (1 << 64) - 1

# stream domains (first key component after the seed)
STREAM_TRAFFIC = 1
STREAM_CQI = 2
STREAM_ARRIVALS = 3
STREAM_NN_INIT = 4
STREAM_NOISE = 5
STREAM_REPLAY = 6

# episode-seed domains: the test dataset and the training run draw episode
# seeds from disjoint families
DOMAIN_TEST_EPISODES = 10
DOMAIN_TRAIN_EPISODES = 11


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix_seed(*parts: int) -> int:
    """Order-sensitive 64-bit mix of integer parts (SplitMix64 chain)."""
    x = 0x243F6A8885A308D3
    for p in parts:
        x = _splitmix64(x ^ (int(p) & MASK64))
    return x


def stream(*parts: int) -> np.random.Generator:
    """Independent generator for the stream identified by the key parts."""
    return np.random.Generator(np.random.PCG64(mix_seed(*parts)))
