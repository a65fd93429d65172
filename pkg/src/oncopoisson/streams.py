"""Reproducible, splittable random streams for the simulator.

Each stream is a counter-based Philox4x64-10 generator keyed directly by
``(master_seed, stream_index)``, so any substream can be opened in O(1)
without touching the others.  Given the same key the produced bit sequence
is identical on every platform and every run; distinct stream indices give
statistically independent streams by construction of the Philox bijection.

The compiled sampling kernel implements the same generator natively and is
verified bit-for-bit against this module.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = ["RandomStream"]

_U64 = 2**64


class RandomStream:
    """A single uniform stream identified by (master_seed, stream_index).

    The identity is immutable; drawing from the stream advances an internal
    cursor.  Operations that consume randomness (sampling, then marking)
    should share one instance so their draws come from disjoint portions of
    the same sequence.
    """

    __slots__ = ("_master_seed", "_stream_index", "_generator")

    def __init__(self, master_seed: int, stream_index: int = 0):
        if not isinstance(master_seed, (int, np.integer)):
            raise DomainError(f"master_seed must be an integer, got {master_seed!r}")
        if not isinstance(stream_index, (int, np.integer)):
            raise DomainError(f"stream_index must be an integer, got {stream_index!r}")
        master_seed = int(master_seed)
        stream_index = int(stream_index)
        if not (-(2**63) <= master_seed < _U64):
            raise DomainError(f"master_seed must fit in 64 bits, got {master_seed}")
        if not (0 <= stream_index < _U64):
            raise DomainError(
                f"stream_index must be a nonnegative 64-bit integer, got {stream_index}"
            )
        self._master_seed = master_seed
        self._stream_index = stream_index
        self._generator: np.random.Generator | None = None

    @property
    def master_seed(self) -> int:
        return self._master_seed

    @property
    def stream_index(self) -> int:
        return self._stream_index

    def philox_key(self) -> tuple[int, int]:
        """The two 64-bit Philox key words (seed masked to two's complement)."""
        return (self._master_seed % _U64, self._stream_index)

    def generator(self) -> np.random.Generator:
        """The stateful numpy Generator backing this stream (created lazily)."""
        if self._generator is None:
            key = np.array(self.philox_key(), dtype=np.uint64)
            self._generator = np.random.Generator(np.random.Philox(key=key))
        return self._generator

    def uniform(self) -> float:
        """Next double in [0, 1)."""
        return float(self.generator().random())

    def positive_uniform(self) -> float:
        """Next double in (0, 1); redraws the (2^-53-probability) exact zero."""
        u = self.uniform()
        while u == 0.0:
            u = self.uniform()
        return u

    def fresh(self) -> "RandomStream":
        """A new stream with the same identity, rewound to the beginning."""
        return RandomStream(self._master_seed, self._stream_index)

    def __repr__(self) -> str:
        return f"RandomStream(master_seed={self._master_seed}, stream_index={self._stream_index})"
