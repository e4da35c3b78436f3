# Generate a mixed-membership graph, embed it two ways, compare cost and error.
import time

import numpy as np

from predsub import (
    ase,
    frob_distance,
    generate_mmsb,
    predsub_estimate,
    relative_frob_error,
    sample_adjacency,
    subsample_size,
)
from predsub.lowrank import LowRankP

N = 4000
D = 4
RHO = 0.1
SEED = 7


def main():
    model = generate_mmsb(N, D, RHO, seed=SEED)
    graph = sample_adjacency(model, seed=SEED + 1)
    print(f"graph: n={graph.n}  edges={graph.num_edges}")

    start = time.perf_counter()
    full = ase(graph, D)
    full_seconds = time.perf_counter() - start
    full_err = relative_frob_error(LowRankP.from_embedding(full), model)
    print(f"full ASE        err={full_err:.4f}  ({full_seconds:.2f}s)")

    for a in (2.0, 2.5):
        m = subsample_size(N, a)
        start = time.perf_counter()
        result = predsub_estimate(graph, m, D, seed=SEED + 2)
        seconds = time.perf_counter() - start
        err = relative_frob_error(LowRankP.from_embedding(result.embedding), model)
        print(f"predsub m={m:4d}  err={err:.4f}  ({seconds:.2f}s)")

    # the two estimates target the same P, so they should be close to each other too
    gap = frob_distance(LowRankP.from_embedding(full),
                        LowRankP.from_embedding(result.embedding))
    denom = np.sqrt(N * N * RHO * RHO)
    print(f"relative gap between the two estimates: {gap / denom:.4f}")


if __name__ == "__main__":
    main()
