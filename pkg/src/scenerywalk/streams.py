"""Counter-based random streams.

Every random draw in this package is a pure function of
(master seed, replica index, stream role, counter).  That buys three things:

* replicas can run in any order, on any number of threads, and still
  produce byte-identical results;
* quenched disorder (scenery values, layer orientations) can be looked up
  by site index without storing the whole environment;
* the hot loops can recompute the exact same variates inside compiled
  kernels without sharing generator state with Python.

The mixer is the splitmix64 finalizer applied twice with the stream key
xored in between (an Even-Mansour style keyed permutation).  Output words
pass basic equidistribution checks and, more importantly for us, every
consumer treats one word as one draw, so there is no hidden state to
misalign between the Python reference paths and the compiled kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15  # 2^64 / golden ratio, the splitmix64 increment
U01_SCALE = 2.0 ** -53

# Stream roles.  A role isolates one source of randomness inside a replica
# so adding draws to one consumer never shifts another consumer's stream.
ROLE_WALK = 1      # walk / move-type increments, counter = step index
ROLE_SCENERY = 2   # scenery values, counter = site index (2*site for pairs)
ROLE_ENV = 3       # layer orientations, counter = line index
ROLE_AUX = 4       # anything else (stable draws, direct-grid cells, ...)


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit word (Python ints, masked)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def keyed_word(key: int, counter: int) -> int:
    """One 64-bit output word of the keyed counter stream."""
    c = (counter & MASK64) * GOLDEN & MASK64
    return mix64(mix64(c) ^ (key & MASK64))


def keyed_u01(key: int, counter: int) -> float:
    """Uniform in [0, 1) with 53 random bits."""
    return (keyed_word(key, counter) >> 11) * U01_SCALE


def keyed_u01_open(key: int, counter: int) -> float:
    """Uniform in (0, 1]; safe as a log() argument."""
    return ((keyed_word(key, counter) >> 11) + 1) * U01_SCALE


def keyed_words_vec(key: int, counters: np.ndarray) -> np.ndarray:
    """Vectorized keyed_word over an int array of counters."""
    c = counters.astype(np.uint64) * np.uint64(GOLDEN)
    z = c
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    z = z ^ np.uint64(key & MASK64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def keyed_u01_vec(key: int, counters: np.ndarray) -> np.ndarray:
    return (keyed_words_vec(key, counters) >> np.uint64(11)).astype(np.float64) * U01_SCALE


def keyed_u01_open_vec(key: int, counters: np.ndarray) -> np.ndarray:
    w = (keyed_words_vec(key, counters) >> np.uint64(11)).astype(np.float64)
    return (w + 1.0) * U01_SCALE


def stream_key(master_seed: int, replica: int, role: int) -> int:
    """Derive the 64-bit key of one (replica, role) substream."""
    k = mix64((master_seed & MASK64) ^ 0xD6E8FEB86659FD93)
    k = mix64(k ^ ((replica & MASK64) * GOLDEN & MASK64))
    return mix64(k ^ ((role & MASK64) * GOLDEN & MASK64))


@dataclass
class Stream:
    """Sequential view of one keyed substream (counter auto-increments)."""

    key: int
    counter: int = 0

    def word(self) -> int:
        v = keyed_word(self.key, self.counter)
        self.counter += 1
        return v

    def u01(self) -> float:
        return (self.word() >> 11) * U01_SCALE

    def u01_open(self) -> float:
        return ((self.word() >> 11) + 1) * U01_SCALE

    def u01_block(self, n: int) -> np.ndarray:
        out = keyed_u01_vec(self.key, np.arange(self.counter, self.counter + n, dtype=np.uint64))
        self.counter += n
        return out


@dataclass(frozen=True)
class ReplicaStreams:
    """The substream keys one replica is allowed to draw from."""

    walk_key: int
    scenery_key: int
    env_key: int
    aux_key: int

    @classmethod
    def for_replica(cls, master_seed: int, replica: int, shared_env_with: int | None = None):
        """Keys for one replica.

        `shared_env_with` pins the environment key to another replica index
        (normally 0) so a whole ensemble sees one frozen disorder sample.
        """
        env_replica = replica if shared_env_with is None else shared_env_with
        return cls(
            walk_key=stream_key(master_seed, replica, ROLE_WALK),
            scenery_key=stream_key(master_seed, replica, ROLE_SCENERY),
            env_key=stream_key(master_seed, env_replica, ROLE_ENV),
            aux_key=stream_key(master_seed, replica, ROLE_AUX),
        )

    def walk_stream(self) -> Stream:
        return Stream(self.walk_key)

    def aux_stream(self) -> Stream:
        return Stream(self.aux_key)
