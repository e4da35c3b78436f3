"""Parametric-bootstrap two-sample tests for paired networks.

Both tests ask whether two graphs on the same node set share an edge
probability matrix: estimate each matrix, measure a distance T0, then
calibrate it against B distances computed from pairs of synthetic graphs drawn
from the pooled estimate. Only the entries the estimator actually reads are
ever resampled, so a bootstrap replicate costs about as much as one estimate.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from ._sampling import bernoulli_positions, child_seed, make_generator
from .estimate import _blocks, _stacked_estimate
from .exceptions import RankDeficientError
from .graph import uniform_subsample
from .lowrank import LowRankP, entry_block, frob_distance, norms, two_inf_distance
from .spectral import DENSE_CUTOFF, TOL, ZERO_TOL, ase

_STATISTICS = ("frobenius", "two_to_infinity")
# Above this many resampled cells the pooled probabilities are recomputed per
# replicate instead of cached (the cache costs 8 bytes per cell).
_CACHE_CELLS = 2**27


@dataclass
class TestReport:
    """Outcome of one bootstrap test.

    ``boot`` holds the B bootstrap statistics in replicate order, and
    p_value = #{b : boot[b] > T0} / B exactly, so it is always an integer
    multiple of 1/B. ``normalizers`` carries the theorem-normalized ratios for
    diagnostic use.
    """

    statistic_kind: str
    t0: float
    boot: np.ndarray
    p_value: float
    normalizers: dict
    subsample: object
    timings: dict

    @property
    def b(self):
        return int(self.boot.size)


def bootstrap_pvalue(t0, boots):
    """Empirical strict-tail p-value: the fraction of bootstrap values above T0.

    No +1 smoothing; an observed statistic above every bootstrap value gets
    exactly 0.
    """
    boots = np.asarray(boots, dtype=np.float64)
    if boots.size == 0:
        raise ValueError("boots must be nonempty")
    return float((boots > t0).sum()) / boots.size


def _ratio(t, denom):
    if denom <= 0.0:
        return 0.0 if t == 0.0 else float("inf")
    return t / denom


def theorem_normalizers(p1, p2, n, m):
    """Normalized test statistics for the known consistency regimes.

    The universal constants in the theory are unspecified, so these ratios are
    diagnostics rather than decision rules: under the null each stays bounded
    as (n, m) grow, and under a detectable alternative it diverges.
    """
    t_f = frob_distance(p1, p2)
    t_2i = two_inf_distance(p1, p2)
    n1, n2 = norms(p1), norms(p2)
    r_f = n1.factor_frobenius + n2.factor_frobenius
    r_2i = n1.factor_two_to_infinity + n2.factor_two_to_infinity
    logn = np.log(n) if n > 1 else 0.0
    logm = np.log(m) if m > 1 else 0.0
    return {
        "T_frobenius": t_f,
        "T_two_inf": t_2i,
        "R_F": r_f,
        "R_two_inf": r_2i,
        "ratio_frobenius": _ratio(t_f, r_f * np.sqrt(n / m)),
        "ratio_two_inf": _ratio(t_2i, r_2i * np.sqrt(n * logn / m)),
        "ratio_subgraph": _ratio(t_2i, r_2i * np.sqrt(logm)),
        "n": int(n),
        "m": int(m),
    }


def _statistic(kind, p1, p2):
    if kind == "frobenius":
        return frob_distance(p1, p2)
    return two_inf_distance(p1, p2)


def _check_test_args(a1, a2, m, d, b, statistic_kind):
    if statistic_kind not in _STATISTICS:
        raise ValueError(f"statistic_kind must be one of {_STATISTICS}, got {statistic_kind!r}")
    n1, n2 = a1.n, a2.n
    if n1 != n2:
        raise ValueError(f"graphs must share a node set, got n={n1} and n={n2}")
    if not 1 <= d <= m <= n1:
        raise ValueError(f"need 1 <= d <= m <= n, got d={d}, m={m}, n={n1}")
    if b < 1:
        raise ValueError("B must be at least 1")
    return n1


class _BlockSampler:
    """Bernoulli resampler over exactly the blocks the estimator reads.

    Probabilities come from the pooled estimate (P1 + P2) / 2 with entries
    clamped to [0, 1]; the average is taken entrywise so the sampler is
    symmetric in its two inputs. The square m x m part is drawn once per
    unordered pair and mirrored (symmetric, hollow); the (n - m) x m cross part
    is drawn independently. Row/column order is the stacked [S; complement]
    layout of the estimates themselves.
    """

    def __init__(self, p1, p2, m, n):
        self.m, self.n = m, n
        self.iu = np.triu_indices(m, 1)
        self._p1, self._p2 = p1, p2
        cells = self.iu[0].size + (n - m) * m
        self.cached = cells <= _CACHE_CELLS
        if self.cached:
            self.probs_sq = self._square_probs()
            self.probs_cross = self._cross_probs(m, n)

    def _pooled_block(self, rows, cols):
        block = 0.5 * entry_block(self._p1, rows, cols) + 0.5 * entry_block(self._p2, rows, cols)
        return np.clip(block, 0.0, 1.0, out=block)

    def _square_probs(self):
        ids = np.arange(self.m)
        return self._pooled_block(ids, ids)[self.iu]

    def _cross_probs(self, m, n):
        cols = np.arange(m)
        out = np.empty((n - m) * m, dtype=np.float64)
        for r0 in range(m, n, 512):
            r1 = min(r0 + 512, n)
            out[(r0 - m) * m : (r1 - m) * m] = self._pooled_block(np.arange(r0, r1), cols).ravel()
        return out

    def draw(self, rng):
        """One (square, cross) adjacency pair; square is symmetric hollow CSR."""
        m, n = self.m, self.n
        if self.cached:
            sq_hits = bernoulli_positions(rng, self.probs_sq)
            cr_hits = bernoulli_positions(rng, self.probs_cross) if n > m else None
        else:
            sq_hits = bernoulli_positions(rng, self._square_probs())
            cr_hits = self._draw_cross_lazy(rng) if n > m else None
        ii, jj = self.iu[0][sq_hits], self.iu[1][sq_hits]
        square = sparse.coo_array(
            (np.ones(2 * ii.size), (np.concatenate([ii, jj]), np.concatenate([jj, ii]))),
            shape=(m, m),
        ).tocsr()
        if cr_hits is None:
            cross = sparse.csr_array((0, m))
        else:
            cross = sparse.coo_array(
                (np.ones(cr_hits.size), (cr_hits // m, cr_hits % m)), shape=(n - m, m)
            ).tocsr()
        return square, cross

    def _draw_cross_lazy(self, rng):
        m, n = self.m, self.n
        cols = np.arange(m)
        hits = []
        for r0 in range(m, n, 512):
            r1 = min(r0 + 512, n)
            probs = self._pooled_block(np.arange(r0, r1), cols).ravel()
            hits.append((r0 - m) * m + bernoulli_positions(rng, probs))
        return np.concatenate(hits) if hits else np.empty(0, dtype=np.int64)


def _run_replicates(count, threads, fn):
    if threads <= 1:
        return np.array([fn(b) for b in range(count)], dtype=np.float64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array(list(pool.map(fn, range(count))), dtype=np.float64)


def _eig_opts(tol, max_iter, dense_cutoff, zero_tol):
    return {"tol": tol, "max_iter": max_iter, "dense_cutoff": dense_cutoff, "zero_tol": zero_tol}


def predsub_test(a1, a2, m, d, b=200, statistic_kind="frobenius", seed=None, threads=1,
                 tol=TOL, max_iter=None, dense_cutoff=DENSE_CUTOFF, zero_tol=ZERO_TOL):
    """Two-sample test with subsampled estimation of both full matrices.

    One subsample S of size m is shared by everything: the two observed
    estimates, and every bootstrap re-estimate. Each of the b replicates draws
    a fresh pair of graphs from the pooled estimate (square-on-S and cross
    blocks only) and re-runs the estimator with the same S. Deterministic for
    a given seed, independent of ``threads``.
    """
    n = _check_test_args(a1, a2, m, d, b, statistic_kind)
    opts = _eig_opts(tol, max_iter, dense_cutoff, zero_tol)
    t_start = time.perf_counter()
    index = uniform_subsample(n, m, child_seed(seed, 0))
    t_sub = time.perf_counter()

    estimates = []
    for j, a in ((1, a1), (2, a2)):
        try:
            x, p, _ = _stacked_estimate(*_blocks(a, index), d, **opts)
        except RankDeficientError as err:
            raise RankDeficientError(f"estimate for graph {j}: {err}") from err
        estimates.append(LowRankP(x, p, d - p))
    p1, p2 = estimates
    t0 = _statistic(statistic_kind, p1, p2)
    sampler = _BlockSampler(p1, p2, m, n)
    t_est = time.perf_counter()

    def replicate(bi):
        pair = []
        for j in (1, 2):
            rng = make_generator(child_seed(seed, 1, j, bi))
            square, cross = sampler.draw(rng)
            try:
                x, p, _ = _stacked_estimate(square, cross, d, **opts)
            except RankDeficientError as err:
                raise RankDeficientError(
                    f"bootstrap replicate {bi} (copy {j}): {err}"
                ) from err
            pair.append(LowRankP(x, p, d - p))
        return _statistic(statistic_kind, pair[0], pair[1])

    boots = _run_replicates(b, threads, replicate)
    t_boot = time.perf_counter()

    return TestReport(
        statistic_kind=statistic_kind,
        t0=float(t0),
        boot=boots,
        p_value=bootstrap_pvalue(t0, boots),
        normalizers=theorem_normalizers(p1, p2, n, m),
        subsample=index,
        timings={
            "subsample": t_sub - t_start,
            "estimate": t_est - t_sub,
            "bootstrap": t_boot - t_est,
            "total": t_boot - t_start,
        },
    )


def puresub_test(a1, a2, m, d, b=200, statistic_kind="frobenius", seed=None, threads=1,
                 tol=TOL, max_iter=None, dense_cutoff=DENSE_CUTOFF, zero_tol=ZERO_TOL):
    """Two-sample test restricted to one induced subgraph.

    Like predsub_test but both estimates are plain rank-d embeddings of the
    m x m induced subgraphs, the statistic compares those m x m matrices, and
    bootstrap replicates resample only symmetric hollow m x m blocks.
    """
    n = _check_test_args(a1, a2, m, d, b, statistic_kind)
    opts = _eig_opts(tol, max_iter, dense_cutoff, zero_tol)
    t_start = time.perf_counter()
    index = uniform_subsample(n, m, child_seed(seed, 0))
    t_sub = time.perf_counter()

    estimates = []
    for j, a in ((1, a1), (2, a2)):
        try:
            emb = ase(a.subgraph(index.indices), d, **opts)
        except RankDeficientError as err:
            raise RankDeficientError(f"estimate for graph {j}: {err}") from err
        estimates.append(LowRankP.from_embedding(emb))
    p1, p2 = estimates
    t0 = _statistic(statistic_kind, p1, p2)
    sampler = _BlockSampler(p1, p2, m, m)
    t_est = time.perf_counter()

    def replicate(bi):
        pair = []
        for j in (1, 2):
            rng = make_generator(child_seed(seed, 1, j, bi))
            square, _ = sampler.draw(rng)
            try:
                emb = ase(square, d, **opts)
            except RankDeficientError as err:
                raise RankDeficientError(
                    f"bootstrap replicate {bi} (copy {j}): {err}"
                ) from err
            pair.append(LowRankP.from_embedding(emb))
        return _statistic(statistic_kind, pair[0], pair[1])

    boots = _run_replicates(b, threads, replicate)
    t_boot = time.perf_counter()

    return TestReport(
        statistic_kind=statistic_kind,
        t0=float(t0),
        boot=boots,
        p_value=bootstrap_pvalue(t0, boots),
        normalizers=theorem_normalizers(p1, p2, m, m),
        subsample=index,
        timings={
            "subsample": t_sub - t_start,
            "estimate": t_est - t_sub,
            "bootstrap": t_boot - t_est,
            "total": t_boot - t_start,
        },
    )
