"""Portable seeded random source for lattice jitter.

The state is initialised with one round of SplitMix64 on the seed and then
advanced with xorshift64* (shifts 12, 25, 27; multiplier
0x2545F4914F6CDD1D).  A uniform double in [0, 1) takes the top 53 bits of
each output.  The algorithm is fixed so any implementation reproduces the
same initial states bit for bit.
"""

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed):
        self.state = splitmix64(int(seed) & _MASK) or 0x9E3779B97F4A7C15

    def next_u64(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK

    def uniform(self):
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def uniforms(self, n):
        return np.array([self.uniform() for _ in range(n)], dtype=np.float64)
