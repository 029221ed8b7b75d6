"""Counter-based random streams.

Every draw is a pure function of ``(master_seed, tag, replica, i, j, k)``:
the coordinates are absorbed one at a time through the SplitMix64
finalizer, and the k-th draw of a stream is ``mix(key + (k+1)*GOLDEN)``.
Nothing is stateful, so results do not depend on evaluation order or on
how replicas are split across threads.

Uniforms take the top 53 bits of a hashed word, giving values on [0, 1).
Normals use Box-Muller on draws k=0 and k=1 of the stream.
"""

from dataclasses import dataclass

import numpy as np

from ._jit import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * np.pi

# stream tags
TAG_EVAL = 0
TAG_TYPE = 1
TAG_DELEGATE = 2
TAG_MINVAR = 3
TAG_CELL = 4


def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _u64(x):
    # Negative coordinates wrap modulo 2**64, same as the jitted path.
    if isinstance(x, (int, np.integer)):
        return np.uint64(int(x) % 2**64)
    return np.asarray(x, dtype=np.int64).astype(np.uint64)


def as_int64(seed: int) -> int:
    """Fold any integer seed into the signed 64-bit range (mod 2**64)."""
    seed = int(seed) % 2**64
    return seed - 2**64 if seed >= 2**63 else seed


def stream_key(seed, tag, replica, i, j):
    """Vectorized stream key; arguments broadcast against each other."""
    with np.errstate(over="ignore"):
        h = _mix(_u64(seed) ^ GOLDEN)
        h = _mix(h ^ _u64(tag))
        h = _mix(h ^ _u64(replica))
        h = _mix(h ^ _u64(i))
        h = _mix(h ^ _u64(j))
    return h


def _draw_bits(key, k):
    with np.errstate(over="ignore"):
        return _mix(key + np.uint64(k + 1) * GOLDEN)


def uniform(seed, tag, replica, i, j, k=0):
    """Uniform draw(s) on [0, 1)."""
    bits = _draw_bits(stream_key(seed, tag, replica, i, j), k)
    return (bits >> _S11).astype(np.float64) * _INV53


def normal(seed, tag, replica, i, j):
    """Standard normal draw(s) via Box-Muller."""
    key = stream_key(seed, tag, replica, i, j)
    u1 = 1.0 - (_draw_bits(key, 0) >> _S11).astype(np.float64) * _INV53
    u2 = (_draw_bits(key, 1) >> _S11).astype(np.float64) * _INV53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for sweep cell ``index``; used for per-cell streams."""
    return as_int64(int(stream_key(seed, TAG_CELL, index, 0, 0)))


@dataclass(frozen=True)
class RandomSource:
    """Master seed plus helpers that address streams by coordinates."""

    master_seed: int

    def uniform(self, tag, replica, i, j=0, k=0):
        return uniform(self.master_seed, tag, replica, i, j, k)

    def normal(self, tag, replica, i, j=0):
        return normal(self.master_seed, tag, replica, i, j)


# -- scalar versions for the jitted kernels ---------------------------------


@njit(nogil=True, cache=True)
def mix_scalar(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(nogil=True, cache=True)
def key_scalar(seed, tag, replica, i, j):
    h = mix_scalar(np.uint64(seed) ^ GOLDEN)
    h = mix_scalar(h ^ np.uint64(tag))
    h = mix_scalar(h ^ np.uint64(replica))
    h = mix_scalar(h ^ np.uint64(i))
    return mix_scalar(h ^ np.uint64(j))


@njit(nogil=True, cache=True)
def uniform_scalar(key, k):
    bits = mix_scalar(np.uint64(key) + np.uint64(k + 1) * GOLDEN)
    return np.float64(bits >> _S11) * _INV53


@njit(nogil=True, cache=True)
def normal_scalar(key):
    u1 = 1.0 - uniform_scalar(key, 0)
    u2 = uniform_scalar(key, 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)
