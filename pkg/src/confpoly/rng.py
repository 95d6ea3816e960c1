"""Counter-based random streams keyed by ``(seed, stream_id)``.

Every sampler draws chunk ``k`` from stream ``k``, so the output of a run is
a function of the seed alone and does not depend on how chunks are spread
over workers.
"""

import numpy as np


def stream(seed: int, stream_id: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), int(stream_id)])
    return np.random.Generator(np.random.Philox(ss))
