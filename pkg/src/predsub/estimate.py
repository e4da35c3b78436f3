"""Estimation with predictive subsampling.

Embed a random induced subgraph, then extend to the remaining nodes by linear
interpolation through their edges into the subsample. Costs O(m^2 d + n m d)
instead of the O(n^2 d) of a full-graph embedding.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from ._sampling import child_seed
from .exceptions import RankDeficientError
from .graph import ProbabilityModel, SparseGraph, extract_blocks, uniform_subsample
from .spectral import DENSE_CUTOFF, TOL, ZERO_TOL, Embedding, ase


@dataclass
class PredSubResult:
    """Full-graph embedding assembled from a subsample.

    ``embedding`` is over all n nodes in original node order; rows at indices
    in ``subsample`` equal the subgraph ASE rows. ``isolated_count`` is the
    number of out-of-sample nodes with no edges into the subsample; their
    latent rows are zero.
    """

    embedding: Embedding
    subsample: object
    p_hat: int
    isolated_count: int
    timings: dict

    @property
    def q_hat(self):
        return self.embedding.d - self.p_hat


def subsample_size(n, a):
    """The polylogarithmic subsample size m = ceil((ln n)^(1+a)), capped at n."""
    if n < 2:
        raise ValueError("need n >= 2")
    return int(min(n, np.ceil(np.log(n) ** (1.0 + a))))


def _scaling_matrix(x_s):
    """C with X_out = A_cross @ C, i.e. C = X_S (X_S^T X_S)^{-1} I_{p,q}.

    When the embedding carries its eigenvalues the Gram is exactly |D| and the
    inverse is diagonal; otherwise the d x d Gram system is solved, raising
    RankDeficientError when it is numerically singular.
    """
    if x_s.values is not None:
        return x_s.X * (x_s.signs / np.abs(x_s.values))
    gram = x_s.X.T @ x_s.X
    w = np.linalg.eigvalsh(gram)
    scale = float(np.abs(w).max(initial=0.0))
    if scale == 0.0 or w.min() <= 1e-12 * scale:
        raise RankDeficientError("subsample embedding has a singular Gram matrix")
    return np.linalg.solve(gram, x_s.X.T).T * x_s.signs


def out_of_sample_rows(cross_block, x_s):
    """Latent rows for nodes outside S from their edge rows into S.

    Each output row is row_i(cross_block) @ X_S (X_S^T X_S)^{-1} I_{p,q}; rows
    are independent, so any row subset is computable on its own.
    """
    if cross_block.shape[1] != x_s.n:
        raise ValueError(
            f"cross block has {cross_block.shape[1]} columns but the embedding covers {x_s.n} nodes"
        )
    rows = cross_block @ _scaling_matrix(x_s)
    return np.asarray(rows)


def _node_count(source):
    n = getattr(source, "n", None)
    if isinstance(n, int):
        return n
    return source.shape[0]


def _blocks(source, index):
    """(square part on S, cross part S^c x S) for a graph, model, or raw matrix."""
    if isinstance(source, SparseGraph):
        square, cross = extract_blocks(source, index)
        return square.a, cross
    if isinstance(source, ProbabilityModel):
        return source.operator(index.indices), source.block_map(index.complement, index.indices)
    if sparse.issparse(source):
        return _blocks(SparseGraph(sparse.csr_array(source), validate=False), index)
    arr = np.asarray(source)
    return arr[np.ix_(index.indices, index.indices)], arr[np.ix_(index.complement, index.indices)]


def _count_isolated(cross, rows):
    if sparse.issparse(cross):
        return int((np.diff(cross.indptr) == 0).sum())
    return int((rows == 0.0).all(axis=1).sum())


def _stacked_estimate(square, cross, d, tol=TOL, max_iter=None, dense_cutoff=DENSE_CUTOFF,
                      zero_tol=ZERO_TOL):
    """Core of the algorithm in stacked [S; S^c] row order: (X, p, subgraph embedding)."""
    emb_s = ase(square, d, tol=tol, max_iter=max_iter, dense_cutoff=dense_cutoff, zero_tol=zero_tol)
    rows = out_of_sample_rows(cross, emb_s)
    return np.vstack([emb_s.X, rows]), emb_s.p, emb_s


def predsub_estimate(source, m, d, seed=None, subsample=None, tol=TOL, max_iter=None,
                     dense_cutoff=DENSE_CUTOFF, zero_tol=ZERO_TOL):
    """Subsampled spectral embedding of a graph (or of an exact model, for
    noiseless checks).

    Draws S of size m (uniform without replacement, keyed by ``seed``) unless
    ``subsample`` supplies one, embeds the induced square part at rank d, and
    interpolates all out-of-sample rows. The result is in original node order.
    """
    n = _node_count(source)
    if not 1 <= d <= m <= n:
        raise ValueError(f"need 1 <= d <= m <= n, got d={d}, m={m}, n={n}")

    t_start = time.perf_counter()
    if subsample is None:
        subsample = uniform_subsample(n, m, child_seed(seed, 0))
    else:
        if subsample.n != n:
            raise ValueError(f"subsample is over {subsample.n} nodes but input has {n}")
        if subsample.m != m:
            raise ValueError(f"subsample has {subsample.m} nodes but m={m} was requested")
    square, cross = _blocks(source, subsample)
    t_sample = time.perf_counter()

    emb_s = ase(square, d, tol=tol, max_iter=max_iter, dense_cutoff=dense_cutoff, zero_tol=zero_tol)
    t_eig = time.perf_counter()

    rows = out_of_sample_rows(cross, emb_s)
    isolated = _count_isolated(cross, rows)
    t_oos = time.perf_counter()

    x_full = subsample.assemble(np.vstack([emb_s.X, rows]))
    embedding = Embedding(X=x_full, p=emb_s.p, q=emb_s.q)
    t_end = time.perf_counter()

    timings = {
        "sample": t_sample - t_start,
        "eig": t_eig - t_sample,
        "out_of_sample": t_oos - t_eig,
        "assemble": t_end - t_oos,
        "total": t_end - t_start,
    }
    return PredSubResult(
        embedding=embedding,
        subsample=subsample,
        p_hat=emb_s.p,
        isolated_count=isolated,
        timings=timings,
    )
