"""Per-replica random streams.

Replica ``k`` of a run with master seed ``m`` always gets the same Philox
stream, whatever order (or thread) it is generated in.
"""

import numpy as np

__all__ = ["seed_stream"]

_MASK64 = (1 << 64) - 1


def seed_stream(master: int, replica: int) -> np.random.Generator:
    if replica < 0:
        raise ValueError("replica index must be non-negative")
    ss = np.random.SeedSequence(int(master) & _MASK64, spawn_key=(int(replica),))
    return np.random.Generator(np.random.Philox(ss))
