"""Vectorized Bernoulli sampling over heterogeneous probability arrays.

Drawing one uniform per cell is the textbook approach but costs O(cells) RNG
calls; the graphs here are sparse (success probabilities are O(rho)), so we use
two-stage thinning instead: a geometric skip chain marks candidate cells with
probability pmax = max(p), then each candidate survives with probability
p/pmax. The unconditional success probability per cell is exactly p, cells stay
independent, and the work drops to O(pmax * cells).

Everything is deterministic given the Generator state: the number and order of
draws depend only on the probability array and pmax.
"""

import numpy as np


def make_generator(seed):
    """PCG64 generator from an int seed or a SeedSequence.

    Seeds are mandatory throughout: passing None raises instead of silently
    drawing OS entropy, so every run is reproducible by construction.
    """
    if seed is None:
        raise ValueError("seed is required; results must be reproducible")
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(entropy=int(seed))
    return np.random.Generator(np.random.PCG64(seed))


def child_seed(seed, *key):
    """Named child SeedSequence: same (seed, key) always maps to the same stream.

    Children are keyed by position rather than drawn from shared state, so
    adding or reordering unrelated draws elsewhere cannot shift them.
    """
    if seed is None:
        raise ValueError("seed is required; results must be reproducible")
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            entropy=seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key)
        )
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key))


def bernoulli_positions(rng, probs, pmax=None):
    """Indices i with an independent Bernoulli(probs[i]) success, in increasing order.

    probs: 1-d float array with values in [0, 1].
    pmax: optional upper bound on probs (saves a scan when the caller knows it).
    """
    n = probs.size
    if n == 0:
        return np.empty(0, dtype=np.int64)
    if pmax is None:
        pmax = float(probs.max())
    if pmax <= 0.0:
        return np.empty(0, dtype=np.int64)
    if pmax >= 1.0:
        # Degenerate skip distribution; test every cell directly.
        u = rng.random(n)
        return np.nonzero(u < probs)[0].astype(np.int64)

    candidates = _skip_chain(rng, n, pmax)
    if candidates.size == 0:
        return candidates
    u = rng.random(candidates.size)
    keep = u * pmax < probs[candidates]
    return candidates[keep]


def _skip_chain(rng, n, pmax):
    """Candidate positions in [0, n) via geometric gaps with parameter pmax."""
    out = []
    last = -1
    expect = n * pmax
    while True:
        remaining = expect - (last + 1) * pmax
        batch = int(remaining + 6.0 * np.sqrt(max(remaining, 1.0))) + 16
        gaps = rng.geometric(pmax, size=batch)
        pos = last + np.cumsum(gaps)
        inside = pos < n
        if inside.all():
            out.append(pos)
            last = int(pos[-1])
            # Chain has not yet crossed the end of the array; keep drawing.
            continue
        out.append(pos[inside])
        break
    if not out:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(out).astype(np.int64, copy=False)
