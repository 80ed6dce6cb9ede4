"""Deterministic random streams shared by every SME component.

The generator is xoshiro256++ (Blackman & Vigna), a 256-bit xorshift-family
generator with a 64-bit output function.  Streams are addressed by a small
integer label so that independent concerns (kernel weights, policy weights,
initial states, ...) never share draws: the 256-bit state is expanded with
SplitMix64 from the key ``master_seed XOR stream_id * GOLDEN``.

All arithmetic is plain Python integers masked to 64 bits, so the sequence is
identical on every platform.  Uniform doubles take the top 53 bits of an
output word scaled by 2^-53; Gaussians come from the Box-Muller transform.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15  # SplitMix64 increment, odd
_LEAP = 0xD1342543DE82EF95  # substream offset multiplier, odd
_INV_2_53 = 1.0 / (1 << 53)

# Fixed stream labels.  Everything downstream of one master seed is addressed
# through these; changing the map silently changes every generated artifact.
STREAM_KERNEL_WEIGHTS = 0
STREAM_KERNEL_BIAS = 1
STREAM_POLICY = 2
STREAM_INIT_STATES = 3
STREAM_EVAL = 4
STREAM_NOISE_POLICY = 5
STREAM_ALPHA = 6


def _mix64(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective avalanche."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _expand_key(key: int) -> tuple[int, int, int, int]:
    """Expand a 64-bit key into a 256-bit xoshiro state via SplitMix64."""
    words = []
    z = key & _MASK64
    for _ in range(4):
        z = (z + _GOLDEN) & _MASK64
        words.append(_mix64(z))
    if not any(words):  # all-zero state is the one forbidden xoshiro state
        words[0] = _GOLDEN
    return tuple(words)


class RandomStream:
    """A single-owner xoshiro256++ stream.

    Instances are cheap; derive one per concern instead of sharing.  Streams
    may be handed between threads but must never be drawn from concurrently.
    """

    __slots__ = ("stream_id", "_key", "_s0", "_s1", "_s2", "_s3")

    def __init__(self, key: int, stream_id: int = 0):
        self.stream_id = stream_id
        self._key = key & _MASK64
        self._s0, self._s1, self._s2, self._s3 = _expand_key(self._key)

    @property
    def key(self) -> int:
        return self._key

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        t = (s0 + s3) & _MASK64
        out = (((t << 23) & _MASK64 | (t >> 41)) + s0) & _MASK64
        x = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= x
        s3 = (s3 << 45) & _MASK64 | (s3 >> 19)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return out

    def uniform(self) -> float:
        """One double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles in [0, 1) as a float64 array."""
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            t = (s0 + s3) & _MASK64
            r = (((t << 23) & _MASK64 | (t >> 41)) + s0) & _MASK64
            x = (s1 << 17) & _MASK64
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= x
            s3 = (s3 << 45) & _MASK64 | (s3 >> 19)
            out[i] = (r >> 11) * _INV_2_53
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return out

    def gaussians(self, n: int) -> np.ndarray:
        """n standard normals; draws ceil(n/2) Box-Muller pairs in order."""
        pairs = (n + 1) // 2
        out = np.empty(2 * pairs, dtype=np.float64)
        for i in range(pairs):
            z0, z1 = gaussian_pair(self)
            out[2 * i] = z0
            out[2 * i + 1] = z1
        return out[:n]

    def child(self, index: int) -> "RandomStream":
        """Derive an indexed substream (per-episode, per-category, ...).

        The child key mixes the parent key with the index, so the same
        (parent, index) pair always names the same stream regardless of how
        much the parent has been consumed.
        """
        if index < 0:
            raise ValueError("substream index must be nonnegative")
        key = _mix64((self._key + ((index + 1) * _LEAP & _MASK64)) & _MASK64)
        return RandomStream(key, self.stream_id)


def derive_stream(master_seed: int, stream_id: int) -> RandomStream:
    """The stream addressed by (master_seed, stream_id); see STREAM_* labels."""
    key = (master_seed ^ ((stream_id * _GOLDEN) & _MASK64)) & _MASK64
    return RandomStream(key, stream_id)


def gaussian_pair(stream: RandomStream) -> tuple[float, float]:
    """Two standard normals via Box-Muller.

    u1 is mapped to (0, 1] so the log never sees zero; u2 stays in [0, 1).
    """
    u1 = 1.0 - stream.uniform()
    u2 = stream.uniform()
    radius = math.sqrt(-2.0 * math.log(u1))
    angle = 2.0 * math.pi * u2
    return radius * math.cos(angle), radius * math.sin(angle)
