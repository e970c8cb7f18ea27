"""Clustering evaluation (adjusted Rand index), paired Wilcoxon signed-rank
testing, and the shared-subsample benchmark harness."""

import math
import time
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import backend
from .errors import DegenerateDataError, InputError
from .gmm import as_matrix
from .search import run_search


def adjusted_rand_index(u, v):
    """Chance-corrected pair-counting agreement between two labelings.

    1.0 for identical partitions (up to relabeling); expectation 0 against
    random assignment. The degenerate case where the maximum equals the
    expectation (both partitions trivial and identical) returns 1.0.
    """
    u = np.asarray(u).reshape(-1)
    v = np.asarray(v).reshape(-1)
    if u.shape != v.shape:
        raise InputError(f"label vectors differ in length: {u.shape[0]} vs {v.shape[0]}")
    n = u.shape[0]
    if n < 2:
        raise InputError("need at least 2 samples")
    _, ui = np.unique(u, return_inverse=True)
    _, vi = np.unique(v, return_inverse=True)
    r = int(ui.max()) + 1
    c = int(vi.max()) + 1
    table = np.zeros((r, c))
    np.add.at(table, (ui, vi), 1.0)

    def comb2(m):
        return m * (m - 1.0) / 2.0

    sum_ij = comb2(table).sum()
    sum_a = comb2(table.sum(axis=1)).sum()
    sum_b = comb2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / comb2(n)
    maximum = 0.5 * (sum_a + sum_b)
    if maximum == expected:
        return 1.0
    return float((sum_ij - expected) / (maximum - expected))


def _rank_abs(values):
    """Average ranks of |values| plus the tie-group sizes."""
    a = np.abs(values)
    order = np.argsort(a, kind="stable")
    ranks = np.empty(a.shape[0])
    ties = []
    i = 0
    while i < a.shape[0]:
        j = i
        while j + 1 < a.shape[0] and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        ties.append(j - i + 1)
        i = j + 1
    return ranks, np.asarray(ties, dtype=np.float64)


def wilcoxon_signed_rank(a, b, mode="normal"):
    """Two-sided paired signed-rank test; returns (statistic, p_value).

    Zero differences are dropped and tied ranks averaged. The statistic is
    min(W+, W-). `mode="normal"` uses the tie-corrected normal
    approximation without continuity correction; `mode="exact"` enumerates
    all sign assignments (n <= 15 after dropping zeros).
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise InputError("paired vectors must have equal length")
    if a.shape[0] < 2:
        raise InputError("need at least 2 pairs")
    if mode not in ("normal", "exact"):
        raise InputError(f"unknown mode {mode!r}")
    diff = a - b
    diff = diff[diff != 0.0]
    n = diff.shape[0]
    if n == 0:
        raise DegenerateDataError("all paired differences are zero")
    ranks, ties = _rank_abs(diff)
    w_plus = float(ranks[diff > 0].sum())
    w_minus = float(ranks[diff < 0].sum())
    stat = min(w_plus, w_minus)

    if mode == "normal":
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - (ties**3 - ties).sum() / 48.0
        z = (stat - mean) / math.sqrt(var)
        p = min(1.0, 2.0 * 0.5 * math.erfc(-z / math.sqrt(2.0)))
        return stat, p

    if n > 15:
        raise InputError("exact mode enumerates 2^n sign patterns; use n <= 15")
    total = float(ranks.sum())
    lo = min(w_plus, total - w_plus)
    hi = max(w_plus, total - w_plus)
    count = 0
    for mask in range(1 << n):
        s = 0.0
        for i in range(n):
            if mask >> i & 1:
                s += ranks[i]
        if s <= lo or s >= hi:
            count += 1
    return stat, min(1.0, count / float(1 << n))


@dataclass
class BenchmarkRecord:
    config: str
    rep: int
    status: str  # "ok" | "failed"
    ari: float | None
    seconds: float


@dataclass
class PairedTest:
    config_a: str
    config_b: str
    metric: str  # "ari" | "seconds"
    statistic: float | None
    p_value: float | None
    note: str | None = None


@dataclass
class BenchmarkReport:
    """Per-subsample scores plus pairwise tests; every configuration sees the
    identical subsample index sets, which is what makes the pairing valid."""

    records: list
    tests: list
    meta: dict = field(default_factory=dict)


def subsample_benchmark(data, truth, configs, reps=10, frac=0.8, seed=0,
                        names=None, threads=1):
    """Run every config on shared random subsamples and compare them.

    Draws `reps` subsets of round(frac * n) rows without replacement, runs
    every config on every subset, records the labeling's agreement with
    `truth` restricted to the subset and the wall-clock seconds of the
    search call alone, then runs pairwise signed-rank tests per metric.
    Individual fit failures are recorded, not fatal.
    """
    x = as_matrix(data)
    truth = np.asarray(truth).reshape(-1)
    n = x.shape[0]
    if truth.shape[0] != n:
        raise InputError("truth labels must match the data length")
    if not 0.0 < frac <= 1.0:
        raise InputError("frac must be in (0, 1]")
    if reps < 2:
        raise InputError("reps must be >= 2")
    if names is None:
        names = [f"config{i}" for i in range(len(configs))]
    if len(names) != len(configs):
        raise InputError("names must match configs")

    m = int(round(frac * n))
    subsets = []
    for rep in range(reps):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, rep)))
        subsets.append(np.sort(rng.choice(n, size=m, replace=False)))

    records = []
    scores = {}
    times = {}
    for name, config in zip(names, configs):
        ari_vec, sec_vec = [], []
        for rep, idx in enumerate(subsets):
            t0 = time.perf_counter()
            try:
                result = run_search(x[idx], config, threads=threads)
                seconds = time.perf_counter() - t0
                ari = adjusted_rand_index(result.best.fit.labels, truth[idx])
                records.append(BenchmarkRecord(name, rep, "ok", ari, seconds))
                ari_vec.append(ari)
                sec_vec.append(seconds)
            except Exception as exc:  # a failed cell is a data point, not an abort
                seconds = time.perf_counter() - t0
                records.append(BenchmarkRecord(name, rep, f"failed: {exc}", None, seconds))
                ari_vec.append(None)
                sec_vec.append(None)
        scores[name] = ari_vec
        times[name] = sec_vec

    tests = []
    for (na, nb) in combinations(names, 2):
        for metric, store in (("ari", scores), ("seconds", times)):
            va, vb = store[na], store[nb]
            pairs = [(p, q) for p, q in zip(va, vb) if p is not None and q is not None]
            if len(pairs) < 2:
                tests.append(PairedTest(na, nb, metric, None, None, "too few paired results"))
                continue
            pa = np.array([p for p, _ in pairs])
            pb = np.array([q for _, q in pairs])
            try:
                stat, p = wilcoxon_signed_rank(pa, pb)
                tests.append(PairedTest(na, nb, metric, stat, p))
            except DegenerateDataError:
                tests.append(PairedTest(na, nb, metric, None, None, "all paired differences zero"))

    meta = {
        "reps": reps,
        "frac": frac,
        "seed": seed,
        "threads": threads,
        "backend": backend.BACKEND,
        "subsample_size": m,
    }
    return BenchmarkReport(records, tests, meta)
