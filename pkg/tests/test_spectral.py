"""Truncated indefinite eigendecompositions, embeddings, and alignment."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predsub import (
    RankDeficientError,
    SparseGraph,
    align_orthogonal,
    ase,
    generate_mmsb,
    sample_adjacency,
    split_signature,
    truncated_eigs,
)

from reference import dense_embedding, dense_reconstruction, entrywise


def random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return (a + a.T) / 2


# ---------------------------------------------------------------------------
# truncated_eigs


def test_identity_matrix():
    pairs = truncated_eigs(np.eye(6), 2)
    np.testing.assert_allclose(pairs.values, [1.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(pairs.vectors.T @ pairs.vectors, np.eye(2), atol=1e-10)


def test_diagonal_matrix_ordering():
    # ordering is by modulus, descending; ties put the positive value first
    pairs = truncated_eigs(np.diag([3.0, -2.0, 1.0, -3.0]), 3)
    np.testing.assert_allclose(pairs.values, [3.0, -3.0, -2.0], atol=1e-12)


def test_dense_oracle_agreement(rng):
    a = random_symmetric(rng, 80)
    pairs = truncated_eigs(a, 5)
    vals, vecs = np.linalg.eigh(a)
    keep = np.argsort(-np.abs(vals))[:5]
    np.testing.assert_allclose(
        np.sort(pairs.values), np.sort(vals[keep]), atol=1e-10
    )
    # reconstruction of the dominant invariant subspace matches
    recon = (pairs.vectors * pairs.values) @ pairs.vectors.T
    oracle = (vecs[:, keep] * vals[keep]) @ vecs[:, keep].T
    np.testing.assert_allclose(recon, oracle, atol=1e-8)


def test_sparse_path_matches_dense_path():
    # n above the dense cutoff exercises the iterative solver
    model = generate_mmsb(700, 3, 0.3, seed=31)
    g = sample_adjacency(model, seed=32)
    sparse_pairs = truncated_eigs(g, 3)
    dense_pairs = truncated_eigs(g.to_dense(), 3, dense_cutoff=10**9)
    np.testing.assert_allclose(sparse_pairs.values, dense_pairs.values, atol=1e-8)
    np.testing.assert_allclose(sparse_pairs.vectors, dense_pairs.vectors, atol=1e-6)


def test_truncated_eigs_deterministic():
    model = generate_mmsb(640, 3, 0.3, seed=33)
    g = sample_adjacency(model, seed=34)
    p1 = truncated_eigs(g, 3)
    p2 = truncated_eigs(g, 3)
    assert np.array_equal(p1.values, p2.values)
    assert np.array_equal(p1.vectors, p2.vectors)


def test_sign_convention():
    pairs = truncated_eigs(np.diag([2.0, 1.0]), 2)
    # each eigenvector's largest-magnitude entry is positive
    idx = np.abs(pairs.vectors).argmax(axis=0)
    assert (pairs.vectors[idx, np.arange(2)] > 0).all()


def test_best_rank_d_residual(rng):
    # discarded energy identity: ||A - A_d||_F^2 equals the sum of squared
    # dropped eigenvalues
    a = random_symmetric(rng, 60)
    d = 4
    pairs = truncated_eigs(a, d)
    recon = (pairs.vectors * pairs.values) @ pairs.vectors.T
    vals = np.linalg.eigvalsh(a)
    dropped = np.sort(np.abs(vals))[:-d]
    np.testing.assert_allclose(
        np.linalg.norm(a - recon, "fro") ** 2, (dropped**2).sum(), rtol=1e-10
    )


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 5))
def test_reconstruction_energy_property(seed, d):
    a = random_symmetric(np.random.default_rng(seed), 24)
    pairs = truncated_eigs(a, d)
    recon = (pairs.vectors * pairs.values) @ pairs.vectors.T
    dropped = np.sort(np.abs(np.linalg.eigvalsh(a)))[:-d]
    np.testing.assert_allclose(
        np.linalg.norm(a - recon, "fro") ** 2, (dropped**2).sum(),
        rtol=1e-9, atol=1e-12,
    )


# ---------------------------------------------------------------------------
# split_signature / ase


def test_split_signature_counts_and_order():
    pairs = truncated_eigs(np.diag([3.0, -2.0, 1.0, -0.5]), 4)
    p, ordered = split_signature(pairs)
    assert p == 2
    assert (ordered.values[:2] > 0).all() and (ordered.values[2:] < 0).all()


def test_split_signature_rejects_near_zero():
    x = np.outer(np.ones(5), np.ones(5))  # rank one
    pairs = truncated_eigs(x, 2)
    with pytest.raises(RankDeficientError):
        split_signature(pairs)


def test_ase_rank_one_constant_matrix():
    # P = 0.9 * ones: single eigenvalue 0.9 n with flat eigenvector, so every
    # embedding entry is exactly sqrt(0.9)
    p = np.full((50, 50), 0.9)
    emb = ase(p, 1)
    assert emb.p == 1 and emb.q == 0
    np.testing.assert_allclose(emb.X, np.sqrt(0.9), atol=1e-12)


def test_ase_two_node_indefinite():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    emb = ase(a, 2)
    assert (emb.p, emb.q) == (1, 1)
    recon = (emb.X * emb.signs) @ emb.X.T
    np.testing.assert_allclose(recon, a, atol=1e-12)


def test_ase_recovers_exact_p(indefinite_model):
    p_dense = indefinite_model.entry_matrix()
    emb = ase(p_dense, 3)
    assert (emb.p, emb.q) == (2, 1)
    np.testing.assert_allclose(
        (emb.X * emb.signs) @ emb.X.T, p_dense, atol=1e-10
    )


def test_ase_on_graph_matches_dense_oracle(small_model):
    g = sample_adjacency(small_model, seed=35)
    emb = ase(g, 3)
    oracle = dense_reconstruction(g.to_dense(), 3)
    np.testing.assert_allclose((emb.X * emb.signs) @ emb.X.T, oracle, atol=1e-8)


def test_ase_rejects_rank_deficient():
    with pytest.raises(RankDeficientError):
        ase(np.full((30, 30), 0.5), 3)


def test_embedding_validation():
    from predsub import Embedding

    x = np.ones((4, 2))
    Embedding(X=x, p=1, q=1, values=np.array([2.0, -1.0]))
    with pytest.raises(ValueError):
        Embedding(X=x, p=1, q=1, values=np.array([-2.0, 1.0]))
    with pytest.raises(ValueError):
        Embedding(X=x, p=2, q=1)


# ---------------------------------------------------------------------------
# alignment


def test_align_identity():
    x = np.random.default_rng(1).normal(size=(30, 3))
    w, resid = align_orthogonal(x, x)
    np.testing.assert_allclose(w, np.eye(3), atol=1e-10)
    assert resid < 1e-10


def test_align_recovers_rotation(rng):
    x = rng.normal(size=(40, 3))
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    w, resid = align_orthogonal(x @ q, x)
    np.testing.assert_allclose((x @ q) @ w, x, atol=1e-9)
    assert resid < 1e-9
    # the fitted map is orthogonal
    np.testing.assert_allclose(w.T @ w, np.eye(3), atol=1e-10)


def test_align_is_the_minimizer(rng):
    x_hat = rng.normal(size=(25, 3))
    x_ref = rng.normal(size=(25, 3))
    w, resid = align_orthogonal(x_hat, x_ref)
    np.testing.assert_allclose(resid, np.linalg.norm(x_hat @ w - x_ref, "fro"))
    for trial in range(25):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        assert resid <= np.linalg.norm(x_hat @ q - x_ref, "fro") + 1e-12


def test_dense_embedding_oracle_self_check(rng):
    # the reference helper must reproduce its input at full rank
    a = random_symmetric(rng, 12)
    x, signs = dense_embedding(a, 12)
    np.testing.assert_allclose(entrywise(x, signs), a, atol=1e-9)
