"""Algebra on factorized probability-matrix estimates.

A LowRankP holds P = X I_{p,q} X^T without ever materializing the n x n
matrix. Distances, norms, pooling, and Bernoulli resampling all run on r x r
Gram matrices or row blocks, so costs stay O(n r^2) or O(cells sampled).
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sparse

from ._sampling import bernoulli_positions, make_generator

_CHUNK = 256


@dataclass
class LowRankP:
    """Symmetric low-rank matrix P = X I_{p,q} X^T in factored form.

    Columns of X are grouped positive-signature first. Entries are raw signed
    values; nothing here clamps to [0, 1] except Bernoulli sampling.
    """

    X: np.ndarray
    p: int
    q: int

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if self.p < 0 or self.q < 0 or self.p + self.q != self.X.shape[1]:
            raise ValueError("signature (p, q) must be nonnegative and sum to the column count")

    @classmethod
    def from_embedding(cls, emb):
        return cls(emb.X, emb.p, emb.q)

    @classmethod
    def from_model(cls, model):
        """Exact factorization of a ProbabilityModel's entry matrix."""
        f = model.factor()
        return cls(f.X, f.p, f.q)

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, 0)), 0, 0)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def r(self):
        return self.X.shape[1]

    @property
    def signs(self):
        return np.concatenate([np.ones(self.p), -np.ones(self.q)])


class Norms(NamedTuple):
    frobenius: float
    two_to_infinity: float
    factor_frobenius: float
    factor_two_to_infinity: float


def _check_same_n(p1, p2):
    if p1.n != p2.n:
        raise ValueError(f"size mismatch: {p1.n} vs {p2.n}")


def _inner(p1, p2):
    """Frobenius inner product <P1, P2> from the r1 x r2 cross-Gram matrix."""
    c = p1.X.T @ p2.X
    return float(((p1.signs[:, None] * p2.signs[None, :]) * c * c).sum())


def _identical(p1, p2):
    # BLAS uses different kernels for X^T X and X1^T X2, so the Gram identities
    # only cancel to ~sqrt(eps * ||P||^2) for equal inputs; bitwise-equal
    # factors are recognized up front to make that cancellation exact.
    return (
        p1.p == p2.p
        and p1.q == p2.q
        and p1.X.shape == p2.X.shape
        and np.array_equal(p1.X, p2.X)
    )


def _row_norms_sq(p):
    """Squared Euclidean norm of every row of the represented matrix."""
    g = p.X.T @ p.X
    h = (p.signs[:, None] * p.signs[None, :]) * g
    return np.einsum("ij,jk,ik->i", p.X, h, p.X)


def _stack(p1, p2, scale, flip2):
    """Factor representing scale^2 * (P1 + P2), or of (P1 - P2) when flip2.

    Column order groups positive-signature columns (P1's then P2's) ahead of
    negative ones, preserving the LowRankP layout.
    """
    x1, x2 = p1.X * scale, p2.X * scale
    a_pos, a_neg = x1[:, : p1.p], x1[:, p1.p :]
    b_pos, b_neg = x2[:, : p2.p], x2[:, p2.p :]
    if flip2:
        # Negating P2 swaps the roles of its signature blocks.
        b_pos, b_neg = b_neg, b_pos
    x = np.hstack([a_pos, b_pos, a_neg, b_neg])
    return LowRankP(x, a_pos.shape[1] + b_pos.shape[1], a_neg.shape[1] + b_neg.shape[1])


def entry(p, i, j):
    """The raw signed value P[i, j]; exact symmetry entry(i,j) == entry(j,i)."""
    n = p.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"indices ({i}, {j}) out of range for n={n}")
    return float((p.X[i] * p.signs) @ p.X[j])


def entry_block(p, rows, cols):
    """Dense block P[rows][:, cols]; either argument may be None for all rows/cols."""
    xr = p.X if rows is None else p.X[rows]
    xc = p.X if cols is None else p.X[cols]
    return (xr * p.signs) @ xc.T


def frob_distance(p1, p2):
    """||P1 - P2||_F via Gram identities; exact 0 for identical factors."""
    _check_same_n(p1, p2)
    if _identical(p1, p2):
        return 0.0
    sq = _inner(p1, p1) + _inner(p2, p2) - 2.0 * _inner(p1, p2)
    return float(np.sqrt(max(sq, 0.0)))


def two_inf_distance(p1, p2):
    """max_i ||row_i(P1) - row_i(P2)||_2, computed row-by-row from Grams."""
    _check_same_n(p1, p2)
    if _identical(p1, p2):
        return 0.0
    diff = _stack(p1, p2, 1.0, flip2=True)
    sq = _row_norms_sq(diff)
    return float(np.sqrt(max(float(sq.max(initial=0.0)), 0.0)))


def norms(p):
    """Frobenius and two-to-infinity norms of P, plus the same norms of the factor X."""
    fro = float(np.sqrt(max(_inner(p, p), 0.0)))
    two_inf = float(np.sqrt(max(float(_row_norms_sq(p).max(initial=0.0)), 0.0)))
    xfro = float(np.linalg.norm(p.X))
    xrows = np.linalg.norm(p.X, axis=1) if p.r else np.zeros(p.n)
    xtwo = float(xrows.max(initial=0.0))
    return Norms(fro, two_inf, xfro, xtwo)


def pooled_average(p1, p2):
    """(P1 + P2) / 2 as a rank <= r1 + r2 factorization; entries exact means."""
    _check_same_n(p1, p2)
    return _stack(p1, p2, np.sqrt(0.5), flip2=False)


def relative_frob_error(p_hat, truth):
    """||P_hat - P||_F / ||P||_F against a ProbabilityModel, via its exact factor.

    The Gram identity cancels catastrophically when the estimate is nearly
    exact (the float64 floor is ~sqrt(eps) relative error), so this one-shot
    path accumulates in extended precision to keep tiny errors honest.
    """
    t = LowRankP.from_model(truth)
    _check_same_n(p_hat, t)

    def inner_ld(a, b):
        c = a.X.astype(np.longdouble).T @ b.X.astype(np.longdouble)
        return ((a.signs[:, None] * b.signs[None, :]) * c * c).sum()

    f_tt = inner_ld(t, t)
    if f_tt <= 0.0:
        raise ValueError("truth has zero Frobenius norm")
    if _identical(p_hat, t):
        return 0.0
    sq = inner_ld(p_hat, p_hat) + f_tt - 2.0 * inner_ld(p_hat, t)
    return float(np.sqrt(max(sq, 0.0) / f_tt))


def sample_bernoulli_block(p, rows, cols, seed=None, chunk=_CHUNK):
    """Bernoulli draws from clamp(P[rows, cols], 0, 1) as a sparse CSR block.

    Cells whose row and column refer to the same node are left empty. Where the
    row and column id sets overlap, each unordered node pair is drawn once and
    mirrored, so the overlapping square sub-block comes out symmetric and
    hollow. Deterministic for a given seed.
    """
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    n = p.n
    for name, ids in (("rows", rows), ("cols", cols)):
        if ids.size and (ids.min() < 0 or ids.max() >= n):
            raise IndexError(f"{name} outside [0, {n})")
        if np.unique(ids).size != ids.size:
            raise ValueError(f"{name} must be distinct")
    rng = make_generator(seed)

    # Node id -> position in rows / in cols (-1 when absent), for mirroring.
    row_pos = np.full(n, -1, dtype=np.int64)
    row_pos[rows] = np.arange(rows.size)
    in_cols = np.zeros(n, dtype=bool)
    in_cols[cols] = True

    out_r, out_c = [], []
    col_in_rows = row_pos[cols] >= 0
    for r0 in range(0, rows.size, chunk):
        r1 = min(r0 + chunk, rows.size)
        rid = rows[r0:r1]
        probs = np.clip(entry_block(p, rid, cols), 0.0, 1.0)
        # Hollow: no draw when the cell refers to one node twice.
        same = rid[:, None] == cols[None, :]
        # Overlapping square sub-block: draw only the node-id upper triangle.
        dup = (in_cols[rid])[:, None] & col_in_rows[None, :] & (rid[:, None] > cols[None, :])
        probs[same | dup] = 0.0
        hits = bernoulli_positions(rng, probs.ravel())
        out_r.append(r0 + hits // cols.size)
        out_c.append(hits % cols.size)

    rr = np.concatenate(out_r) if out_r else np.empty(0, dtype=np.int64)
    cc = np.concatenate(out_c) if out_c else np.empty(0, dtype=np.int64)

    # Mirror draws inside the overlapping square sub-block.
    ids_r, ids_c = rows[rr], cols[cc]
    both = in_cols[ids_r] & (row_pos[ids_c] >= 0)
    add_r = row_pos[ids_c[both]]
    add_c_ids = ids_r[both]
    col_pos = np.full(n, -1, dtype=np.int64)
    col_pos[cols] = np.arange(cols.size)
    add_c = col_pos[add_c_ids]
    rr = np.concatenate([rr, add_r])
    cc = np.concatenate([cc, add_c])

    data = np.ones(rr.size, dtype=np.float64)
    coo = sparse.coo_array((data, (rr, cc)), shape=(rows.size, cols.size))
    return coo.tocsr()
