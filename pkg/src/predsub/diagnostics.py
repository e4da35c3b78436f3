"""Numerical checks of the regime conditions behind the subsampled estimator.

These diagnostics measure, on concrete models, the quantities the theory says
should stay bounded or shrink: eigenvector coherence, spectral conditioning,
eigenvalue scaling under node sampling, and empirical error-rate curves.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from ._sampling import child_seed, make_generator
from .estimate import predsub_estimate, subsample_size
from .graph import sample_adjacency
from .lowrank import LowRankP, relative_frob_error
from .spectral import align_orthogonal, ase


@dataclass
class DiagnosticsReport:
    """Named scalar results, (x, y) curves, pass/fail flags, and descriptions.

    Every curve stores equal-length x and y arrays; scalar values are finite.
    ``notes`` says in words what each key measures.
    """

    values: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, (x, y) in self.curves.items():
            x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
            if x.shape != y.shape:
                raise ValueError(f"curve {key!r} has mismatched x and y lengths")
            self.curves[key] = (x, y)
        for key, v in self.values.items():
            if not np.isfinite(v):
                raise ValueError(f"value {key!r} is not finite")

    @property
    def all_pass(self):
        return all(self.flags.values())


def coherence(u):
    """sqrt(n) times the largest row norm of an orthonormal matrix.

    Equals 1 for perfectly spread columns (e.g. a constant column) and sqrt(n)
    for columns concentrated on single coordinates. For the models handled
    here this stays bounded by a constant as n grows.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError("u must be a 2-d matrix")
    n, d = u.shape
    if not np.allclose(u.T @ u, np.eye(d), atol=1e-8):
        raise ValueError("columns must be orthonormal within 1e-8")
    return float(np.sqrt(n) * np.linalg.norm(u, axis=1).max())


def condition_number(values):
    """max |eigenvalue| / min |eigenvalue| of a nonzero spectrum."""
    values = np.abs(np.asarray(values, dtype=np.float64))
    if values.size == 0:
        raise ValueError("need at least one eigenvalue")
    if values.min() == 0.0:
        raise ValueError("condition number undefined: zero eigenvalue present")
    return float(values.max() / values.min())


def _exact_singular_values(model, ids=None):
    """All d singular values of P (or its principal submatrix), computed
    exactly from a QR factorization of the membership block in O(k d^2)."""
    pi = model.memberships if ids is None else model.memberships[ids]
    d = model.d
    if pi.shape[0] == 0:
        return np.zeros(d)
    r = np.linalg.qr(pi, mode="r")
    core = r @ (model.rho * model.mixing) @ r.T
    sigma = np.sort(np.abs(np.linalg.eigvalsh(core)))[::-1]
    if sigma.size < d:
        # Fewer rows than d: the submatrix has rank at most its row count.
        sigma = np.concatenate([sigma, np.zeros(d - sigma.size)])
    return sigma


def eigen_scaling_check(truth, m, trials=100, seed=None, tolerance=None,
                        min_fraction=0.95):
    """How well (n/m) * sigma_i(P_S) tracks sigma_i(P) under node sampling.

    Each trial keeps every node independently with probability m/n, compares
    the top-d singular values, and reports per-trial deviations normalized by
    n * rho. With m large enough relative to log(n) the deviation concentrates
    below any fixed epsilon. Passing ``tolerance`` adds a pass/fail flag that
    requires at least ``min_fraction`` of trials to land within it.
    """
    n, d = truth.n, truth.d
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    sigma_full = _exact_singular_values(truth)
    scale = n * truth.rho
    devs = np.empty(trials)
    for t in range(trials):
        rng = make_generator(child_seed(seed, t))
        ids = np.flatnonzero(rng.random(n) < m / n)
        sigma_sub = _exact_singular_values(truth, ids)
        devs[t] = np.abs(sigma_full - (n / m) * sigma_sub).max() / scale
    values = {
        "max_deviation": float(devs.max()),
        "mean_deviation": float(devs.mean()),
        "median_deviation": float(np.median(devs)),
        "m": float(m),
        "n": float(n),
        "trials": float(trials),
    }
    flags = {}
    if tolerance is not None:
        fraction = float((devs <= tolerance).mean())
        values["fraction_within_tolerance"] = fraction
        flags["deviation_within_tolerance"] = bool(fraction >= min_fraction)
    return DiagnosticsReport(
        values=values,
        curves={"deviations": (np.arange(trials, dtype=float), devs)},
        flags=flags,
        notes={
            "deviations": "per-trial max_i |sigma_i(P) - (n/m) sigma_i(P_S)| / (n rho), "
            "independent node inclusion at rate m/n",
        },
    )


def _aligned_two_inf(emb, x_ref, rows=None):
    """Two-to-infinity error after Procrustes alignment computed on ``rows``.

    The rotation is fitted on the given row subset (all rows when None) and
    applied globally; returns (error on the subset, error on all rows).
    """
    if rows is None:
        w, _ = align_orthogonal(emb.X, x_ref)
    else:
        w, _ = align_orthogonal(emb.X[rows], x_ref[rows])
    diff = emb.X @ w - x_ref
    per_row = np.linalg.norm(diff, axis=1)
    sub = per_row[rows] if rows is not None else per_row
    return float(sub.max(initial=0.0)), float(per_row.max(initial=0.0))


def error_curve(model, d, a_grid=None, reps=10, seed=None, m_grid=None,
                include_baseline=True, noiseless=False):
    """Estimation error and wall time as the subsample grows.

    The grid is either exponents ``a_grid`` (m = ceil((ln n)^(1+a))) or
    explicit sizes ``m_grid``. Each rep samples one graph (shared across the
    whole grid and the full-embedding baseline) and records the relative
    Frobenius error of the estimated matrix plus aligned two-to-infinity
    errors of the latent positions against the exact factorization.
    In noiseless mode the model itself feeds the estimator and errors collapse
    to numerical precision.
    """
    n = model.n
    if m_grid is None:
        if a_grid is None or len(a_grid) == 0:
            raise ValueError("need a nonempty a_grid or m_grid")
        a_vals = np.asarray(list(a_grid), dtype=np.float64)
        m_vals = np.array([subsample_size(n, a) for a in a_vals], dtype=np.int64)
    else:
        m_vals = np.asarray(list(m_grid), dtype=np.int64)
        a_vals = np.log(m_vals) / np.log(np.log(n)) - 1.0
    if (m_vals < d).any() or (m_vals > n).any():
        raise ValueError(f"subsample sizes {m_vals.tolist()} must lie in [d, n]")

    ref = model.factor()
    if ref.d != d:
        raise ValueError(f"model rank {ref.d} does not match requested d={d}")
    x_ref = ref.X

    shape = (len(m_vals), reps)
    rel_frob = np.empty(shape)
    two_inf_sub = np.empty(shape)
    two_inf_glob = np.empty(shape)
    seconds = np.empty(shape)
    base_rel, base_two_inf, base_seconds = [], [], []

    for rep in range(reps):
        source = model if noiseless else sample_adjacency(model, child_seed(seed, 0, rep))
        for k, m in enumerate(m_vals):
            res = predsub_estimate(source, int(m), d, seed=child_seed(seed, 1, k, rep))
            rel_frob[k, rep] = relative_frob_error(
                LowRankP.from_embedding(res.embedding), model
            )
            sub_err, glob_err = _aligned_two_inf(
                res.embedding, x_ref, rows=res.subsample.indices
            )
            two_inf_sub[k, rep] = sub_err
            two_inf_glob[k, rep] = glob_err
            seconds[k, rep] = res.timings["total"]
        if include_baseline:
            t0 = time.perf_counter()
            emb = ase(model.operator() if noiseless else source, d)
            base_seconds.append(time.perf_counter() - t0)
            base_rel.append(relative_frob_error(LowRankP.from_embedding(emb), model))
            base_two_inf.append(_aligned_two_inf(emb, x_ref)[1])

    mf = m_vals.astype(np.float64)
    mean_sub = two_inf_sub.mean(axis=1)
    slope_sub = _loglog_slope(mf, mean_sub)
    slope_frob = _loglog_slope(mf, rel_frob.mean(axis=1))

    values = {
        "n": float(n),
        "d": float(d),
        "reps": float(reps),
        "slope_two_inf_subsample": slope_sub,
        "slope_relative_frobenius": slope_frob,
    }
    if include_baseline:
        values["baseline_relative_frobenius_mean"] = float(np.mean(base_rel))
        values["baseline_two_inf_mean"] = float(np.mean(base_two_inf))
        values["baseline_seconds_mean"] = float(np.mean(base_seconds))

    means = rel_frob.mean(axis=1)
    non_increasing = bool(np.all(means[1:] <= means[:-1] * 1.05))

    return DiagnosticsReport(
        values=values,
        curves={
            "relative_frobenius_mean": (mf, means),
            "relative_frobenius_sd": (mf, rel_frob.std(axis=1)),
            "two_inf_subsample_mean": (mf, mean_sub),
            "two_inf_global_mean": (mf, two_inf_glob.mean(axis=1)),
            "seconds_mean": (mf, seconds.mean(axis=1)),
            "a_of_m": (mf, a_vals),
        },
        flags={"error_non_increasing_in_m": non_increasing},
        notes={
            "relative_frobenius_mean": "mean ||Phat - P||_F / ||P||_F over reps",
            "two_inf_subsample_mean": "mean max in-sample row error after Procrustes fit on S",
            "two_inf_global_mean": "mean max row error over all nodes, same rotation",
            "slope_two_inf_subsample": "least-squares slope of log error vs log m",
            "error_non_increasing_in_m": "mean relative error non-increasing in m (5% slack)",
        },
    )


def _loglog_slope(x, y):
    y = np.maximum(np.asarray(y, dtype=np.float64), 1e-300)
    if len(x) < 2:
        return 0.0
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def assumption_report(model, m):
    """Checks that a model and subsample size sit in the regime the guarantees
    assume: full rank, entries of order rho, bounded conditioning, polylog m,
    and average subgraph degree growing at least like log m."""
    n, d = model.n, model.d
    w = np.linalg.eigvalsh(model.mixing)
    scale = float(np.abs(w).max(initial=0.0))
    rank = int((np.abs(w) > 1e-12 * scale).sum()) if scale else 0

    ids = np.unique(np.linspace(0, n - 1, min(n, 512)).astype(np.int64))
    block = model.entries_block(ids, ids)
    min_entry, max_entry = float(block.min()), float(block.max())

    sigma = _exact_singular_values(model)
    kappa = float(sigma[0] / sigma[rank - 1]) if rank else float("inf")

    logn = np.log(n) if n > 1 else 1.0
    logm = np.log(m) if m > 1 else 1.0
    implied_a = float(np.log(m) / np.log(logn) - 1.0) if n > np.e else 0.0
    degree_rate = m * model.rho

    flags = {
        "full_rank": bool(rank == d),
        "entries_positive": bool(min_entry > 0.0),
        "entries_at_most_rho": bool(max_entry <= model.rho + 1e-12),
        "condition_bounded": bool(np.isfinite(kappa) and kappa <= 1e3),
        "m_polylog": bool(m >= logn**2),
        "subgraph_degree_rate": bool(degree_rate >= logm),
    }
    values = {
        "n": float(n),
        "d": float(d),
        "m": float(m),
        "rank": float(rank),
        "min_entry": min_entry,
        "max_entry": max_entry,
        "min_entry_over_rho": min_entry / model.rho,
        "max_entry_over_rho": max_entry / model.rho,
        "implied_a": implied_a,
        "m_rho": float(degree_rate),
        "log_m": float(logm),
    }
    if np.isfinite(kappa):
        values["condition_number"] = kappa
    notes = {
        "full_rank": "mixing matrix has d nonzero eigenvalues",
        "entries_positive": "sampled entry grid stays strictly positive",
        "entries_at_most_rho": "entries bounded by the sparsity scale rho",
        "condition_bounded": "sigma_1(P)/sigma_d(P) below 1e3",
        "m_polylog": "m at least (ln n)^2, i.e. implied exponent a >= 1",
        "subgraph_degree_rate": "m * rho >= ln m, so subgraph degrees grow with m",
    }
    return DiagnosticsReport(values=values, flags=flags, notes=notes)
