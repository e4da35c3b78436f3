"""Bootstrap two-sample tests and theorem-scale normalizers."""

import numpy as np
import pytest

from predsub import (
    LowRankP,
    RankDeficientError,
    SparseGraph,
    bootstrap_pvalue,
    generate_mmsb,
    perturbed_model,
    predsub_test,
    puresub_test,
    sample_adjacency,
    theorem_normalizers,
)


@pytest.fixture(scope="module")
def graph_pair():
    """Two independent draws from one model (null is true)."""
    model = generate_mmsb(260, 3, 0.5, seed=60, p=2)
    g1 = sample_adjacency(model, seed=61)
    g2 = sample_adjacency(model, seed=62)
    return model, g1, g2


# ---------------------------------------------------------------------------
# p-value arithmetic


def test_bootstrap_pvalue_all_above():
    assert bootstrap_pvalue(0.5, np.array([1.0, 2.0, 3.0, 4.0])) == 1.0


def test_bootstrap_pvalue_none_above():
    assert bootstrap_pvalue(9.0, np.array([1.0, 2.0, 3.0, 4.0])) == 0.0


def test_bootstrap_pvalue_strict_inequality():
    # ties do not count as exceedances
    assert bootstrap_pvalue(2.0, np.array([1.0, 2.0, 2.0, 3.0])) == 0.25


def test_bootstrap_pvalue_median():
    boots = np.arange(20, dtype=float)  # 0..19
    assert bootstrap_pvalue(9.5, boots) == 0.5


def test_bootstrap_pvalue_empty_errors():
    with pytest.raises(ValueError):
        bootstrap_pvalue(1.0, np.array([]))


def test_pvalues_are_multiples_of_one_over_b(graph_pair):
    _, g1, g2 = graph_pair
    for b in (7, 20):
        report = predsub_test(g1, g2, 80, 3, b=b, seed=63)
        assert report.p_value * b == round(report.p_value * b)
        assert 0.0 <= report.p_value <= 1.0
        assert report.boot.shape == (b,)


# ---------------------------------------------------------------------------
# identical inputs


def test_identical_graphs_p_exactly_one(graph_pair):
    _, g1, _ = graph_pair
    report = predsub_test(g1, g1, 80, 3, b=25, seed=64)
    assert report.t0 == 0.0
    assert report.p_value == 1.0


def test_identical_graphs_puresub(graph_pair):
    _, g1, _ = graph_pair
    report = puresub_test(g1, g1, 80, 3, b=25, seed=65)
    assert report.t0 == 0.0
    assert report.p_value == 1.0


def test_identical_graphs_two_inf_statistic(graph_pair):
    _, g1, _ = graph_pair
    report = predsub_test(g1, g1, 80, 3, b=10, seed=66, statistic_kind="two_to_infinity")
    assert report.t0 == 0.0
    assert report.p_value == 1.0


# ---------------------------------------------------------------------------
# determinism


def test_reports_reproducible(graph_pair):
    _, g1, g2 = graph_pair
    r1 = predsub_test(g1, g2, 80, 3, b=12, seed=67)
    r2 = predsub_test(g1, g2, 80, 3, b=12, seed=67)
    assert r1.t0 == r2.t0
    assert np.array_equal(r1.boot, r2.boot)
    assert r1.p_value == r2.p_value


def test_thread_count_does_not_change_numbers(graph_pair):
    _, g1, g2 = graph_pair
    r1 = predsub_test(g1, g2, 80, 3, b=12, seed=68, threads=1)
    r2 = predsub_test(g1, g2, 80, 3, b=12, seed=68, threads=3)
    assert r1.t0 == r2.t0
    assert np.array_equal(r1.boot, r2.boot)


def test_swap_symmetry(graph_pair):
    _, g1, g2 = graph_pair
    r12 = predsub_test(g1, g2, 80, 3, b=12, seed=69)
    r21 = predsub_test(g2, g1, 80, 3, b=12, seed=69)
    assert r12.t0 == pytest.approx(r21.t0, rel=1e-12)
    # pooled bootstrap probabilities are symmetric by construction, so the
    # resampled statistics agree bitwise
    assert np.array_equal(r12.boot, r21.boot)
    assert r12.p_value == r21.p_value


def test_bootstrap_prefix_property(graph_pair):
    # replicate b's seed does not depend on B, so a longer run extends a
    # shorter one
    _, g1, g2 = graph_pair
    short = predsub_test(g1, g2, 80, 3, b=6, seed=70)
    long = predsub_test(g1, g2, 80, 3, b=14, seed=70)
    assert np.array_equal(short.boot, long.boot[:6])


def test_subsample_shared_between_graphs(graph_pair):
    _, g1, g2 = graph_pair
    report = predsub_test(g1, g2, 80, 3, b=5, seed=71)
    assert report.subsample.m == 80
    # same seed -> same subsample as the estimation helper would draw
    again = predsub_test(g1, g2, 80, 3, b=5, seed=71)
    assert np.array_equal(report.subsample.indices, again.subsample.indices)


# ---------------------------------------------------------------------------
# statistical behavior (coarse, small scale)


def test_null_pvalue_not_degenerate(graph_pair):
    _, g1, g2 = graph_pair
    report = predsub_test(g1, g2, 100, 3, b=40, seed=72)
    assert report.p_value > 0.0  # same model: should not look like a difference


def test_alternative_detected():
    model = generate_mmsb(300, 3, 0.5, seed=73, p=2)
    shifted = perturbed_model(model, 0.5)
    g1 = sample_adjacency(model, seed=74)
    g2 = sample_adjacency(shifted, seed=75)
    report = predsub_test(g1, g2, 120, 3, b=40, seed=76)
    assert report.p_value == 0.0  # gross perturbation: every resample below T0


def test_statistic_kinds_differ(graph_pair):
    _, g1, g2 = graph_pair
    fro = predsub_test(g1, g2, 80, 3, b=5, seed=77, statistic_kind="frobenius")
    two = predsub_test(g1, g2, 80, 3, b=5, seed=77, statistic_kind="two_to_infinity")
    assert fro.statistic_kind == "frobenius"
    assert two.statistic_kind == "two_to_infinity"
    assert fro.t0 != two.t0


def test_unknown_statistic_rejected(graph_pair):
    _, g1, g2 = graph_pair
    with pytest.raises(ValueError):
        predsub_test(g1, g2, 80, 3, b=5, seed=78, statistic_kind="spectral")


def test_rank_deficient_reported_with_context():
    empty = SparseGraph.from_edges(60, np.array([], dtype=int), np.array([], dtype=int))
    with pytest.raises(RankDeficientError, match="graph 1"):
        predsub_test(empty, empty, 20, 3, b=4, seed=79)


# ---------------------------------------------------------------------------
# theorem normalizers


def test_normalizers_zero_for_identical():
    x = np.random.default_rng(3).random(size=(50, 2))
    est = LowRankP(x, 2, 0)
    out = theorem_normalizers(est, est, 200, 50)
    assert out["T_frobenius"] == 0.0
    assert out["T_two_inf"] == 0.0
    assert out["ratio_frobenius"] == 0.0
    assert out["ratio_two_inf"] == 0.0
    assert out["ratio_subgraph"] == 0.0
    assert out["R_F"] > 0 and out["R_two_inf"] > 0


def test_normalizer_values_against_hand_formula():
    rng = np.random.default_rng(4)
    x1, x2 = rng.random((30, 2)), rng.random((30, 2))
    p1, p2 = LowRankP(x1, 2, 0), LowRankP(x2, 2, 0)
    out = theorem_normalizers(p1, p2, n=900, m=30)
    r_f = np.linalg.norm(x1, "fro") + np.linalg.norm(x2, "fro")
    assert out["R_F"] == pytest.approx(r_f, rel=1e-12)
    r_2i = np.linalg.norm(x1, axis=1).max() + np.linalg.norm(x2, axis=1).max()
    assert out["R_two_inf"] == pytest.approx(r_2i, rel=1e-12)
    t_f = np.linalg.norm((x1 @ x1.T) - (x2 @ x2.T), "fro")
    expected = t_f / (r_f * np.sqrt(900 / 30))
    assert out["ratio_frobenius"] == pytest.approx(expected, rel=1e-9)


def test_normalized_ratios_bounded_under_null():
    # the theorem-scale ratios should be O(1) under H0; a generous cap of 10
    # catches normalizer mistakes (wrong power of n/m blows this up fast)
    ratios = []
    for trial in range(5):
        model = generate_mmsb(400, 3, 0.5, seed=80 + trial, p=2)
        g1 = sample_adjacency(model, seed=90 + trial)
        g2 = sample_adjacency(model, seed=95 + trial)
        report = predsub_test(g1, g2, 120, 3, b=2, seed=99 + trial)
        ratios.append(report.normalizers["ratio_frobenius"])
    assert max(ratios) < 10.0
    assert np.median(ratios) < 10.0


def test_alternative_statistic_exceeds_null_statistics():
    t_null = []
    model = generate_mmsb(400, 3, 0.5, seed=110, p=2)
    for trial in range(5):
        g1 = sample_adjacency(model, seed=120 + trial)
        g2 = sample_adjacency(model, seed=130 + trial)
        t_null.append(predsub_test(g1, g2, 120, 3, b=2, seed=140 + trial).t0)
    shifted = perturbed_model(model, 0.4)
    g1 = sample_adjacency(model, seed=150)
    g2 = sample_adjacency(shifted, seed=151)
    t_alt = predsub_test(g1, g2, 120, 3, b=2, seed=152).t0
    assert t_alt > max(t_null)
