"""Counter-based random streams.

Every stream is a Philox generator whose 128-bit key packs ``(seed, index)``,
so stream ``index`` is the same no matter how work is split across workers.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int) -> np.random.Generator:
    key = ((int(seed) & _MASK64) << 64) | (int(index) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))
