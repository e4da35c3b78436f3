"""Truncated symmetric eigendecomposition and adjacency spectral embedding.

The spectra here are indefinite: probability matrices of the form X I_{p,q} X^T
have both positive and negative eigenvalues, so "top d" always means largest in
modulus, and the embedding keeps track of how many of those are positive.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .exceptions import ConvergenceError, RankDeficientError

# Below this size a dense decomposition is faster and far less fussy than ARPACK.
DENSE_CUTOFF = 512
# Relative threshold (vs max |eigenvalue|) under which the spectrum is treated as rank-deficient.
ZERO_TOL = 1e-10
# Default residual tolerance for the iterative solver.
TOL = 1e-10


def canonical_order(values):
    """Indices ordering eigenvalues by descending modulus.

    Ties in modulus prefer the positive eigenvalue, then the earlier index, so
    repeated decompositions of the same matrix agree exactly.
    """
    values = np.asarray(values)
    idx = np.arange(values.size)
    # lexsort uses the last key as primary.
    return np.lexsort((idx, -np.sign(values), -np.abs(values)))


def _fix_signs(vectors):
    """Scale each column so its largest-magnitude entry is positive (ties: lowest index)."""
    if vectors.size == 0:
        return vectors
    lead = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0.0] = 1.0
    return vectors * signs


@dataclass
class SpectralPair:
    """Eigenvalues (canonically ordered) and matching orthonormal eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.values.ndim != 1:
            raise ValueError("values must be 1-d and vectors 2-d")
        if self.vectors.shape[1] != self.values.size:
            raise ValueError("one eigenvector column per eigenvalue required")
        gram = self.vectors.T @ self.vectors
        if not np.allclose(gram, np.eye(self.values.size), atol=1e-8):
            raise ValueError("eigenvector columns are not orthonormal within 1e-8")

    @property
    def d(self):
        return self.values.size


@dataclass
class Embedding:
    """Latent-position matrix with signature bookkeeping.

    Columns are ordered positive-eigenvalue block first, then negative block,
    each block by descending modulus of the originating eigenvalue. ``values``
    holds those eigenvalues when the embedding came from a decomposition.
    """

    X: np.ndarray
    p: int
    q: int
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if self.p < 0 or self.q < 0 or self.p + self.q != self.X.shape[1]:
            raise ValueError("signature (p, q) must be nonnegative and sum to the column count")
        if self.values is not None:
            self.values = np.asarray(self.values, dtype=np.float64)
            if self.values.shape != (self.X.shape[1],):
                raise ValueError("values must match the column count")
            if (self.values[: self.p] <= 0).any() or (self.values[self.p :] >= 0).any():
                raise ValueError("values must be positive in the p-block and negative in the q-block")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @property
    def signs(self):
        """Diagonal of I_{p,q} as a vector."""
        return np.concatenate([np.ones(self.p), -np.ones(self.q)])


def _as_operator(x):
    # SparseGraph carries its CSR matrix in .a; everything else is used directly.
    return getattr(x, "a", x)


def _densify(a, n):
    if isinstance(a, np.ndarray):
        return a
    if sparse.issparse(a):
        return a.toarray()
    # Generic linear operator: apply to the identity.
    return np.asarray(a @ np.eye(n))


def truncated_eigs(op, d, tol=TOL, max_iter=None, dense_cutoff=DENSE_CUTOFF):
    """The d eigenpairs of a symmetric operator largest in modulus.

    Symmetry is the caller's obligation. Dense decomposition below
    ``dense_cutoff``; ARPACK above it, with a deterministic starting vector so
    repeated runs agree bit-for-bit. Residuals are checked against
    tol * max|eigenvalue| and a ConvergenceError is raised if unmet.
    """
    a = _as_operator(op)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"operator must be square, got shape {a.shape}")
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    if max_iter is None:
        max_iter = 50 * d

    if n <= dense_cutoff or d >= n:
        dense = _densify(a, n)
        w, v = np.linalg.eigh(dense)
        order = canonical_order(w)[:d]
        values, vectors = w[order], v[:, order]
    else:
        values, vectors = _arpack(a, n, d, tol, max_iter)
        order = canonical_order(values)
        values, vectors = values[order], vectors[:, order]

    vectors = _fix_signs(vectors)
    _check_residual(a, values, vectors, tol)
    return SpectralPair(values=values, vectors=vectors)


def _arpack(a, n, d, tol, max_iter):
    # Fixed starting vector: determinism without depending on global RNG state.
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=(n, d))))
    v0 = rng.standard_normal(n)
    try:
        return spla.eigsh(a, k=d, which="LM", tol=tol, maxiter=max_iter, v0=v0)
    except spla.ArpackNoConvergence as err:
        raise ConvergenceError(
            f"eigensolver did not converge to {d} eigenpairs within {max_iter} restarts"
        ) from err


def _check_residual(a, values, vectors, tol):
    scale = float(np.abs(values).max(initial=0.0))
    resid = a @ vectors - vectors * values
    worst = float(np.linalg.norm(resid, axis=0).max(initial=0.0))
    if worst > max(tol * scale, 1e3 * np.finfo(np.float64).tiny):
        raise ConvergenceError(
            f"eigenpair residual {worst:.3e} exceeds tolerance {tol:.1e} * {scale:.3e}"
        )


def split_signature(pairs, zero_tol=ZERO_TOL):
    """Count positive eigenvalues and reorder as (positive block, negative block).

    Each block is sorted by descending modulus. Raises RankDeficientError when
    any eigenvalue is within zero_tol (relative to the largest modulus) of zero:
    downstream scaling divides by these.
    """
    values = pairs.values
    scale = float(np.abs(values).max(initial=0.0))
    if scale == 0.0 or (np.abs(values) <= zero_tol * scale).any():
        small = int((np.abs(values) <= zero_tol * scale).sum()) if scale else values.size
        raise RankDeficientError(
            f"{small} of {values.size} eigenvalues are within {zero_tol:.0e} (relative) of zero"
        )
    pos = np.flatnonzero(values > 0)
    neg = np.flatnonzero(values < 0)
    pos = pos[np.argsort(-values[pos], kind="stable")]
    neg = neg[np.argsort(values[neg], kind="stable")]
    order = np.concatenate([pos, neg]).astype(np.intp)
    reordered = SpectralPair(values=values[order], vectors=pairs.vectors[:, order])
    return int(pos.size), reordered


def ase(op, d, tol=TOL, max_iter=None, dense_cutoff=DENSE_CUTOFF, zero_tol=ZERO_TOL):
    """Adjacency spectral embedding X = U |D|^{1/2} with signature (p, q)."""
    pairs = truncated_eigs(op, d, tol=tol, max_iter=max_iter, dense_cutoff=dense_cutoff)
    p, pairs = split_signature(pairs, zero_tol=zero_tol)
    x = pairs.vectors * np.sqrt(np.abs(pairs.values))
    return Embedding(X=x, p=p, q=d - p, values=pairs.values.copy())


def align_orthogonal(x_hat, x_ref):
    """Orthogonal W minimizing ||X_hat W - X_ref||_F, plus the achieved residual.

    Accepts Embedding objects or plain matrices of equal shape.
    """
    a = np.asarray(getattr(x_hat, "X", x_hat), dtype=np.float64)
    b = np.asarray(getattr(x_ref, "X", x_ref), dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    u, _, vt = np.linalg.svd(a.T @ b)
    w = u @ vt
    residual = float(np.linalg.norm(a @ w - b))
    return w, residual
