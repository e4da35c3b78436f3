"""Graph containers, low-rank probability models, and subsampling utilities.

Everything here is deterministic given an integer seed: generators are PCG64
streams keyed by explicit seeds, and no function touches numpy's global RNG.
"""

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import LinearOperator

from ._sampling import bernoulli_positions, make_generator
from .exceptions import EdgeListFormatError

# Row-chunk size used when streaming over probability blocks.
_CHUNK = 256


def _select_columns(r, cols, width):
    """Restrict a CSR matrix to ``cols`` (sorted), renumbered 0..len(cols)-1.

    Linear in nnz, unlike generic fancy indexing. ``width`` is the column count
    of ``r``.
    """
    cols = np.asarray(cols)
    if cols.size > 1 and not (np.diff(cols) > 0).all():
        raise ValueError("cols must be strictly increasing")
    lookup = np.full(width, -1, dtype=np.int64)
    lookup[cols] = np.arange(cols.size)
    new_idx = lookup[r.indices]
    keep = new_idx >= 0
    csum = np.concatenate([[0], np.cumsum(keep)])
    indptr = csum[r.indptr]
    return sparse.csr_array(
        (r.data[keep], new_idx[keep], indptr), shape=(r.shape[0], cols.size)
    )


class SparseGraph:
    """Simple undirected graph held as a symmetric, hollow, binary CSR matrix."""

    def __init__(self, a, validate=True):
        if not sparse.issparse(a):
            raise TypeError("SparseGraph wraps a scipy sparse matrix")
        a = sparse.csr_array(a).astype(np.float64)
        if validate:
            if a.shape[0] != a.shape[1]:
                raise ValueError(f"adjacency matrix must be square, got {a.shape}")
            if a.nnz and not (a.data == 1.0).all():
                raise ValueError("adjacency entries must all be 1")
            if a.diagonal().any():
                raise ValueError("adjacency matrix must have an empty diagonal")
            if (a != a.T).nnz != 0:
                raise ValueError("adjacency matrix must be symmetric")
        self.a = a

    @classmethod
    def from_edges(cls, n, rows, cols):
        """Graph on n nodes from endpoint arrays; dedups, symmetrizes, drops self-loops."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have equal length")
        if rows.size:
            if min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= n:
                raise ValueError(f"edge endpoints must lie in [0, {n})")
        lo = np.minimum(rows, cols)
        hi = np.maximum(rows, cols)
        off = lo != hi
        pairs = np.unique(np.stack([lo[off], hi[off]], axis=1), axis=0)
        return cls._from_upper_pairs(n, pairs[:, 0], pairs[:, 1])

    @classmethod
    def from_dense(cls, arr):
        arr = np.asarray(arr)
        return cls(sparse.csr_array(arr))

    @classmethod
    def _from_upper_pairs(cls, n, ii, jj):
        # Trusted path: (ii, jj) are unique pairs with ii < jj.
        data = np.ones(2 * ii.size, dtype=np.float64)
        coo = sparse.coo_array(
            (data, (np.concatenate([ii, jj]), np.concatenate([jj, ii]))), shape=(n, n)
        )
        return cls(coo.tocsr(), validate=False)

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def num_edges(self):
        return self.a.nnz // 2

    def degrees(self):
        return np.diff(self.a.indptr)

    def edges(self):
        """Edge endpoint arrays (i, j) with i < j, lexicographically sorted."""
        coo = sparse.coo_array(sparse.triu(self.a, k=1))
        ii, jj = coo.coords
        order = np.lexsort((jj, ii))
        return ii[order].astype(np.int64), jj[order].astype(np.int64)

    def subgraph(self, ids):
        """Induced subgraph on the given (strictly increasing) node ids."""
        ids = np.asarray(ids)
        r = self.a[ids]
        return SparseGraph(_select_columns(r, ids, self.n), validate=False)

    def to_dense(self):
        return self.a.toarray()

    def same_edges(self, other):
        return self.a.shape == other.a.shape and (self.a != other.a).nnz == 0

    def __repr__(self):
        return f"SparseGraph(n={self.n}, edges={self.num_edges})"


class SubsampleIndex:
    """A sorted subset S of node indices together with the ambient size n.

    The stacked order [S; complement] is how block computations lay out rows;
    ``assemble`` undoes that layout.
    """

    def __init__(self, indices, n):
        indices = np.asarray(indices)
        if indices.ndim != 1 or not np.issubdtype(indices.dtype, np.integer):
            raise ValueError("indices must be a 1-d integer array")
        indices = np.sort(indices.astype(np.int64))
        if indices.size == 0:
            raise ValueError("subsample must contain at least one node")
        if indices.size > 1 and not (np.diff(indices) > 0).all():
            raise ValueError("indices must be distinct")
        if indices[0] < 0 or indices[-1] >= n:
            raise ValueError(f"indices must lie in [0, {n})")
        self.indices = indices
        self.n = int(n)
        self._complement = None

    @property
    def m(self):
        return self.indices.size

    @property
    def complement(self):
        if self._complement is None:
            self._complement = np.setdiff1d(
                np.arange(self.n, dtype=np.int64), self.indices, assume_unique=True
            )
        return self._complement

    @property
    def permutation(self):
        """Original node id of each row in the stacked [S; complement] order."""
        return np.concatenate([self.indices, self.complement])

    def mask(self):
        out = np.zeros(self.n, dtype=bool)
        out[self.indices] = True
        return out

    def assemble(self, stacked):
        """Reorder rows from the stacked [S; complement] layout to node order."""
        stacked = np.asarray(stacked)
        if stacked.shape[0] != self.n:
            raise ValueError(f"expected {self.n} rows, got {stacked.shape[0]}")
        out = np.empty_like(stacked)
        out[self.permutation] = stacked
        return out

    def __repr__(self):
        return f"SubsampleIndex(m={self.m}, n={self.n})"


class FactorBlock:
    """A rectangular block of a low-rank matrix, stored in factored form.

    Supports only right multiplication by dense matrices, which is all the
    spectral code needs; the block itself is never materialized.
    """

    def __init__(self, left, core, right):
        self.left = left
        self.core = core
        self.right = right
        self.shape = (left.shape[0], right.shape[0])

    def __matmul__(self, other):
        return self.left @ (self.core @ (self.right.T @ other))


class ProbabilityModel:
    """Edge-probability model P = rho * Pi B Pi^T.

    ``memberships`` (n x d) has nonnegative rows summing to one, ``mixing``
    (d x d) is symmetric, and ``rho`` in (0, 1] scales the whole matrix. All
    entries of P must land in [0, 1]; the constructor verifies this.
    """

    def __init__(self, memberships, mixing, rho):
        memberships = np.ascontiguousarray(memberships, dtype=np.float64)
        mixing = np.ascontiguousarray(mixing, dtype=np.float64)
        if memberships.ndim != 2:
            raise ValueError("memberships must be an (n, d) matrix")
        n, d = memberships.shape
        if mixing.shape != (d, d):
            raise ValueError(f"mixing must be ({d}, {d}) to match memberships")
        if not np.isfinite(memberships).all() or not np.isfinite(mixing).all():
            raise ValueError("model arrays must be finite")
        if memberships.size and memberships.min() < -1e-12:
            raise ValueError("membership weights must be nonnegative")
        if n and np.abs(memberships.sum(axis=1) - 1.0).max() > 1e-9:
            raise ValueError("membership rows must sum to 1")
        bscale = max(1.0, float(np.abs(mixing).max(initial=0.0)))
        if np.abs(mixing - mixing.T).max(initial=0.0) > 1e-12 * bscale:
            raise ValueError("mixing matrix must be symmetric")
        if not 0.0 < rho <= 1.0:
            raise ValueError(f"rho must lie in (0, 1], got {rho}")
        self.memberships = memberships
        self.mixing = mixing
        self.rho = float(rho)
        self._check_entry_range()

    def _check_entry_range(self):
        # Entries are convex combinations of mixing entries scaled by rho, so a
        # bound on the mixing range usually settles it without a full scan.
        if self.d == 0 or self.n == 0:
            return
        bmin = self.rho * float(self.mixing.min())
        bmax = self.rho * float(self.mixing.max())
        if bmin >= -1e-12 and bmax <= 1.0 + 1e-12:
            return
        lo, hi = np.inf, -np.inf
        for start in range(0, self.n, 128):
            block = self.entries_block(np.arange(start, min(start + 128, self.n)), None)
            lo = min(lo, float(block.min()))
            hi = max(hi, float(block.max()))
        if lo < -1e-12 or hi > 1.0 + 1e-12:
            raise ValueError(
                f"model entries span [{lo:.6g}, {hi:.6g}], outside [0, 1]"
            )

    @property
    def n(self):
        return self.memberships.shape[0]

    @property
    def d(self):
        return self.memberships.shape[1]

    def entries_block(self, rows, cols):
        """Dense block P[rows][:, cols]; either argument may be None for all."""
        pi_r = self.memberships if rows is None else self.memberships[rows]
        pi_c = self.memberships if cols is None else self.memberships[cols]
        return (pi_r @ (self.rho * self.mixing)) @ pi_c.T

    def entry_matrix(self):
        """Full dense P; intended for small n only."""
        return self.entries_block(None, None)

    def restrict(self, ids):
        """The model induced on a subset of nodes."""
        return ProbabilityModel(self.memberships[np.asarray(ids)], self.mixing, self.rho)

    def operator(self, ids=None):
        """P (or its principal submatrix on ids) as a matrix-free linear operator."""
        pi = self.memberships if ids is None else self.memberships[np.asarray(ids)]
        core = self.rho * self.mixing
        k = pi.shape[0]

        def apply(x):
            return pi @ (core @ (pi.T @ x))

        return LinearOperator(
            shape=(k, k), matvec=apply, matmat=apply, rmatvec=apply, dtype=np.float64
        )

    def block_map(self, rows, cols):
        """P[rows][:, cols] in factored form (see FactorBlock)."""
        return FactorBlock(
            self.memberships[np.asarray(rows)],
            self.rho * self.mixing,
            self.memberships[np.asarray(cols)],
        )

    def factor(self):
        """An exact latent-position factorization P = X I_{p,q} X^T.

        Built from the eigendecomposition of the mixing matrix, so it costs
        O(n d^2). Columns whose mixing eigenvalue is numerically zero are
        dropped; the result has one column per nonzero eigenvalue.
        """
        from .spectral import Embedding

        w, v = np.linalg.eigh(self.mixing)
        vals = self.rho * w
        scale = float(np.abs(vals).max(initial=0.0))
        keep = np.flatnonzero(np.abs(vals) > 1e-14 * scale) if scale else np.array([], dtype=int)
        pos = keep[vals[keep] > 0]
        neg = keep[vals[keep] < 0]
        pos = pos[np.argsort(-vals[pos], kind="stable")]
        neg = neg[np.argsort(vals[neg], kind="stable")]
        cols = np.concatenate([pos, neg]).astype(np.intp)
        x = self.memberships @ (v[:, cols] * np.sqrt(np.abs(vals[cols])))
        return Embedding(X=x, p=int(pos.size), q=int(neg.size))

    def __repr__(self):
        return f"ProbabilityModel(n={self.n}, d={self.d}, rho={self.rho})"


def generate_mmsb(n, d, rho, alpha=0.5, seed=None, p=None):
    """Mixed-membership blockmodel: B has U(0,1) diagonal and 0.5 off-diagonal,
    memberships are iid Dirichlet(alpha) rows, and P = rho * Pi B Pi^T.

    When ``p`` is given, the mixing matrix is redrawn until it has exactly p
    positive eigenvalues (so the model's signature is (p, d - p)). Since the
    diagonal is positive, p = 0 is unattainable and raises after 1000 tries.
    """
    if d < 1 or n < 1:
        raise ValueError("need n >= 1 and d >= 1")
    if p is not None and not 0 <= p <= d:
        raise ValueError(f"p must lie in [0, {d}]")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    rng = make_generator(seed)
    mixing = None
    for _ in range(1000):
        b = np.full((d, d), 0.5)
        np.fill_diagonal(b, rng.uniform(0.0, 1.0, size=d))
        if p is None or int((np.linalg.eigvalsh(b) > 0).sum()) == p:
            mixing = b
            break
    if mixing is None:
        raise ValueError(f"no mixing matrix with {p} positive eigenvalues found in 1000 draws")
    memberships = rng.dirichlet(np.full(d, float(alpha)), size=n)
    return ProbabilityModel(memberships, mixing, rho)


def perturbed_model(model, eps):
    """The model with eps added to every mixing entry, shifting each P entry by
    exactly rho * eps. Raises if the shift pushes any entry above 1."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    try:
        return ProbabilityModel(model.memberships, model.mixing + eps, model.rho)
    except ValueError as err:
        raise ValueError(f"perturbation eps={eps} leaves the model invalid: {err}") from err


def sample_adjacency(model, seed=None, chunk=_CHUNK):
    """One adjacency matrix A ~ Bernoulli(P), symmetric with an empty diagonal.

    Cells above the diagonal are sampled independently in row chunks and
    mirrored. Work scales with n^2 * max(P) rather than n^2: candidate cells
    are proposed by a geometric skip chain at rate max(P) and thinned to the
    exact per-cell probabilities.
    """
    rng = make_generator(seed)
    n = model.n
    rows_acc, cols_acc = [], []
    for r0 in range(0, n, chunk):
        r1 = min(r0 + chunk, n)
        c0 = r0 + 1
        if c0 >= n:
            break
        k, w = r1 - r0, n - c0
        probs = model.entries_block(np.arange(r0, r1), np.arange(c0, n))
        # Blank the corner cells at or below the diagonal (local col b < row a).
        cw = min(k - 1, w)
        if cw > 0:
            probs[:, :cw][np.arange(k)[:, None] > np.arange(cw)[None, :]] = 0.0
        np.clip(probs, 0.0, 1.0, out=probs)
        flat = probs.ravel()
        pos = bernoulli_positions(rng, flat)
        rows_acc.append((r0 + pos // w).astype(np.int32))
        cols_acc.append((c0 + pos % w).astype(np.int32))
    if rows_acc:
        ii = np.concatenate(rows_acc)
        jj = np.concatenate(cols_acc)
    else:
        ii = jj = np.empty(0, dtype=np.int32)
    return SparseGraph._from_upper_pairs(n, ii, jj)


def load_edge_list(path, one_based=False):
    """Read a whitespace-separated edge list into a SparseGraph.

    Lines starting with '#' are comments. An optional header line ``n=<count>``
    (before any edge) fixes the node count; otherwise it is max index + 1.
    Duplicate edges and self-loops are dropped. Malformed lines raise
    EdgeListFormatError with the offending line number.
    """
    rows, cols = [], []
    header_n = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("n="):
                if header_n is not None:
                    raise EdgeListFormatError("duplicate n= header", path, lineno)
                if rows:
                    raise EdgeListFormatError("n= header must precede all edges", path, lineno)
                try:
                    header_n = int(line[2:])
                except ValueError:
                    raise EdgeListFormatError(f"bad node count {line[2:]!r}", path, lineno) from None
                if header_n < 0:
                    raise EdgeListFormatError("node count must be nonnegative", path, lineno)
                continue
            parts = line.split()
            if len(parts) != 2:
                raise EdgeListFormatError(
                    f"expected two integers, found {len(parts)} fields", path, lineno
                )
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListFormatError(
                    f"expected two integers, found {parts[0]!r} {parts[1]!r}", path, lineno
                ) from None
            if one_based:
                i -= 1
                j -= 1
            if i < 0 or j < 0:
                low = "1" if one_based else "0"
                raise EdgeListFormatError(f"node index below {low}", path, lineno)
            if header_n is not None and (i >= header_n or j >= header_n):
                raise EdgeListFormatError(
                    f"node index {max(i, j)} exceeds n={header_n}", path, lineno
                )
            rows.append(i)
            cols.append(j)
    if header_n is None:
        header_n = (max(max(rows), max(cols)) + 1) if rows else 0
    return SparseGraph.from_edges(header_n, rows, cols)


def save_edge_list(graph, path):
    """Write a graph as an ``n=`` header plus one 'i j' line per edge (i < j)."""
    ii, jj = graph.edges()
    with open(path, "w") as fh:
        fh.write(f"n={graph.n}\n")
        for i, j in zip(ii.tolist(), jj.tolist()):
            fh.write(f"{i} {j}\n")


def degree_filter(graph, min_degree):
    """Drop nodes of degree < min_degree (single pass, not iterated to a core).

    Returns the filtered graph and an old-to-new index map with -1 for dropped
    nodes.
    """
    deg = graph.degrees()
    keep = np.flatnonzero(deg >= min_degree)
    mapping = np.full(graph.n, -1, dtype=np.int64)
    mapping[keep] = np.arange(keep.size)
    return graph.subgraph(keep), mapping


def uniform_subsample(n, m, seed=None):
    """m node indices drawn uniformly without replacement from range(n)."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = make_generator(seed)
    return SubsampleIndex(rng.choice(n, size=m, replace=False), n)


def extract_blocks(graph, index):
    """The induced subgraph A[S, S] and the cross block A[S^c, S].

    The square part comes back as a SparseGraph, the rectangular cross block as
    a plain CSR array with rows in complement order and columns in S order.
    Both are carved out of the m-row strip A[S, :] (the cross part through
    symmetry), so the cost is linear in the strip's edge count rather than the
    whole matrix's.
    """
    if index.n != graph.n:
        raise ValueError(f"index is over {index.n} nodes but graph has {graph.n}")
    strip = graph.a[index.indices]
    square = SparseGraph(_select_columns(strip, index.indices, graph.n), validate=False)
    cross = sparse.csr_array(_select_columns(strip, index.complement, graph.n).T)
    return square, cross
