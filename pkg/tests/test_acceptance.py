"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to watch them stream).

Two criteria are known to fail and are kept faithful rather than loosened;
the analysis lives in the project notes. In short: demanding an adjusted
Rand index of exactly 1.0 against the generating labels (criterion 1), or a
two-component selection rate of 15/20 on the elongated-pair data
(criterion 2), exceeds what those generators statistically permit - a
measurable fraction of realizations has samples whose generating label no
decision rule can recover, and scikit-learn's reference mixture BIC ranks
the same alternative models ahead on the same realizations.
"""

import os
import subprocess
import sys
import time
from itertools import combinations, product

import numpy as np

from gmmsearch import (
    REG_LADDER,
    EmSettings,
    SearchConfig,
    SyntheticSpec,
    adjusted_rand_index,
    cut_at_depth,
    em_fit,
    estimate_gaussian_parameters,
    fit_dendrogram,
    generate,
    gaussian_cluster,
    increase_reg,
    leaf_count,
    log_likelihood,
    param_count,
    run_search,
    tree_depth,
    wilcoxon_signed_rank,
)
from gmmsearch.errors import EmFailure, InitFailure
from gmmsearch.gmm import CONSTRAINTS


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


class TestCriterion1SyntheticRecovery:
    def test_three_component_recovery(self):
        hits = 0
        rows = []
        for seed in range(10):
            x, truth = generate(SyntheticSpec("three_component", seed=seed))
            t0 = time.perf_counter()
            result = run_search(x, SearchConfig(seed=seed))
            elapsed = time.perf_counter() - t0
            ari = adjusted_rand_index(result.best.fit.labels, truth)
            ok = result.best.k == 3 and result.best.constraint == "spherical" and ari == 1.0
            hits += ok
            rows.append((seed, result.best.k, result.best.constraint, round(ari, 3), round(elapsed, 1)))
            assert elapsed < 60.0, f"seed {seed} took {elapsed:.1f}s"
        detail = f"(k=3, spherical, ARI=1.0) in {hits}/10 seeded runs, need >= 9; {rows}"
        assert report("synthetic-recovery", hits >= 9, detail)


class TestCriterion2DoubleCigar:
    def test_two_cluster_recovery(self):
        ks, aris = [], []
        for seed in range(20):
            x, truth = generate(SyntheticSpec("double_cigar", seed=seed))
            result = run_search(x, SearchConfig(kmin=2, kmax=5, seed=seed))
            ks.append(result.best.k)
            aris.append(adjusted_rand_index(result.best.fit.labels, truth))
        k2 = sum(1 for k in ks if k == 2)
        med = float(np.median(aris))
        ok = k2 >= 15 and med >= 0.9
        detail = f"k=2 in {k2}/20 (need >= 15), median ARI {med:.3f} (need >= 0.9); k values {ks}"
        assert report("double-cigar", ok, detail)


class TestCriterion3Hierarchy:
    def test_recursive_three_scale_recovery(self):
        d1_perfect = d2_perfect = 0
        leaf_aris, leaf_counts = [], []
        for seed in range(10):
            x, truth = generate(SyntheticSpec("hierarchy", seed=seed))
            root = fit_dendrogram(x, SearchConfig(kmax=2, seed=seed))
            d1_perfect += adjusted_rand_index(cut_at_depth(root, 1), truth[:, 0]) == 1.0
            d2_perfect += adjusted_rand_index(cut_at_depth(root, 2), truth[:, 1]) == 1.0
            leaves = cut_at_depth(root, tree_depth(root))
            leaf_aris.append(adjusted_rand_index(leaves, truth[:, 2]))
            leaf_counts.append(leaf_count(root))
        med_ari = float(np.median(leaf_aris))
        med_leaves = float(np.median(leaf_counts))
        ok = (
            d1_perfect == 10
            and d2_perfect == 10
            and med_ari >= 0.8
            and 8 <= med_leaves <= 12
        )
        detail = (
            f"depth-1 perfect {d1_perfect}/10, depth-2 perfect {d2_perfect}/10, "
            f"median leaf ARI {med_ari:.3f} (need >= 0.8), median leaves {med_leaves} (need in [8, 12])"
        )
        assert report("hierarchy-recovery", ok, detail)


class TestCriterion4RegularizationLadder:
    def test_exact_ladder_and_guard(self):
        ladder_ok = REG_LADDER == (0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0)
        walk = [0.0]
        while walk[-1] <= 1.0:
            nxt = increase_reg(walk[-1])
            if nxt <= 1.0:
                walk.append(nxt)
            else:
                beyond = nxt
                break
        transitions_ok = tuple(walk) == REG_LADDER and beyond == 10.0 and not beyond <= 1.0
        assert report(
            "reg-ladder-values", ladder_ok and transitions_ok,
            f"ladder {REG_LADDER}, value beyond guard {beyond}",
        )

    def test_duplicate_mass_needs_regularization(self):
        rng = np.random.default_rng(0)
        x = np.vstack([np.tile([2.0, -1.0], (30, 1)), rng.normal(5.0, 1.0, size=(25, 2))])
        labels = np.array([0] * 30 + [1] * 25)
        failed_at_zero = False
        try:
            init = estimate_gaussian_parameters(x, labels, "full", 0.0).to_model()
            em_fit(x, 2, "full", EmSettings(), init)
        except (EmFailure, InitFailure):
            failed_at_zero = True
        cand = gaussian_cluster(x, 2, "full", init=labels)
        ok = failed_at_zero and cand.status == "converged" and cand.reg_covar in REG_LADDER[1:]
        assert report(
            "reg-ladder-duplicates", ok,
            f"unregularized attempt failed: {failed_at_zero}, converged at reg {cand.reg_covar}",
        )

    def test_no_singleton_in_100_random_selections(self):
        rng = np.random.default_rng(2024)
        violations = 0
        runs = 0
        for trial in range(100):
            n = int(rng.integers(12, 60))
            d = int(rng.integers(1, 4))
            centers = rng.normal(scale=4.0, size=(int(rng.integers(1, 4)), d))
            x = centers[rng.integers(0, len(centers), n)] + rng.normal(
                scale=rng.uniform(0.2, 1.5), size=(n, d)
            )
            config = SearchConfig(
                kmin=2,
                kmax=int(rng.integers(2, 5)),
                affinities=("l2", "none"),
                linkages=("ward", "single"),
                constraints=tuple(rng.choice(CONSTRAINTS, size=2, replace=False)),
                seed=trial,
            )
            try:
                result = run_search(x, config)
            except Exception:
                continue
            runs += 1
            sizes = np.bincount(result.best.fit.labels, minlength=result.best.k)
            if np.any(sizes == 1):
                violations += 1
            assert result.best.reg_covar in REG_LADDER
        assert report(
            "reg-ladder-no-singletons", violations == 0 and runs >= 90,
            f"{violations} singleton selections in {runs} completed randomized searches",
        )


class TestCriterion5RuntimeScaling:
    def test_loglog_slope(self):
        times = {}
        for n in (10**3, 10**4, 10**5):
            x, _ = generate(SyntheticSpec("three_component", n=n, seed=0))
            config = SearchConfig(kmin=2, kmax=3, seed=0)
            t0 = time.perf_counter()
            run_search(x, config)
            times[n] = time.perf_counter() - t0
        slope = float(
            np.polyfit(np.log(list(times)), np.log(list(times.values())), 1)[0]
        )
        detail = f"slope {slope:.3f} (need <= 1.2) over times {[round(t, 2) for t in times.values()]}"
        assert report("runtime-scaling", slope <= 1.2, detail)


def pair_agreement_ari(u, v):
    n = len(u)
    both = same_u = same_v = 0
    for i, j in combinations(range(n), 2):
        su, sv = u[i] == u[j], v[i] == v[j]
        same_u += su
        same_v += sv
        both += su and sv
    total = n * (n - 1) / 2
    expected = same_u * same_v / total
    maximum = 0.5 * (same_u + same_v)
    if maximum == expected:
        return 1.0
    return (both - expected) / (maximum - expected)


def all_partitions(n):
    def rec(prefix, maxlab):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for lab in range(maxlab + 2):
            yield from rec(prefix + [lab], max(maxlab, lab))

    yield from rec([0], 0)


class TestCriterion6OracleSuites:
    def test_ari_exhaustive_pair_oracle(self):
        worst = 0.0
        for n in range(2, 7):
            parts = list(all_partitions(n))
            for u, v in product(parts, parts):
                worst = max(worst, abs(adjusted_rand_index(u, v) - pair_agreement_ari(u, v)))
        assert report("oracle-ari-exhaustive", worst <= 1e-12, f"max |diff| {worst:.2e} for all n <= 6")

    def test_param_count_enumeration(self):
        def free_entries(k, d, constraint):
            total = (k - 1) + k * d
            if constraint == "full":
                total += k * sum(1 for i in range(d) for _ in range(i, d))
            elif constraint == "tied":
                total += sum(1 for i in range(d) for _ in range(i, d))
            elif constraint == "diag":
                total += k * d
            else:
                total += k
            return total

        mismatches = [
            (k, d, c)
            for k in range(1, 6)
            for d in range(1, 6)
            for c in CONSTRAINTS
            if param_count(k, d, c) != free_entries(k, d, c)
        ]
        assert report(
            "oracle-param-count", not mismatches,
            f"{len(mismatches)} mismatches over k,d <= 5 x 4 constraints",
        )

    def test_em_monotone_on_100_random_fits(self):
        rng = np.random.default_rng(77)
        worst_drop = 0.0
        final_gap = 0.0
        for trial in range(100):
            n = int(rng.integers(20, 80))
            d = int(rng.integers(1, 4))
            k = int(rng.integers(1, 4))
            constraint = CONSTRAINTS[trial % 4]
            x = rng.normal(scale=rng.uniform(0.5, 3.0), size=(n, d))
            if k == 1:
                fit = em_fit(x, 1, constraint)
            else:
                labels = rng.integers(0, k, size=n)
                labels[:k] = np.arange(k)
                try:
                    init = estimate_gaussian_parameters(x, labels, constraint, 0.0).to_model()
                    fit = em_fit(x, k, constraint, EmSettings(), init)
                except (EmFailure, InitFailure):
                    continue
            hist = fit.ll_history
            for a, b in zip(hist, hist[1:]):
                worst_drop = max(worst_drop, a - b)
            final_gap = max(final_gap, abs(fit.log_likelihood - log_likelihood(x, fit.model)))
        ok = worst_drop <= 1e-8 and final_gap <= 1e-9
        assert report(
            "oracle-em-monotone", ok,
            f"worst per-iteration drop {worst_drop:.2e} (allow 1e-8), "
            f"worst final-recompute gap {final_gap:.2e}",
        )

    def test_wilcoxon_normal_approximation_reference_value(self):
        b = np.arange(10, dtype=float)
        a = b + np.linspace(0.5, 5.0, 10)
        stat, p = wilcoxon_signed_rank(a, b)
        ok = stat == 0.0 and abs(p - 0.005) <= 0.001
        assert report("oracle-wilcoxon-normal", ok, f"W={stat}, p={p:.6f} (need 0.005 +/- 0.001)")

    def test_wilcoxon_exact_vs_enumeration(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=8)
        b = rng.normal(size=8)
        _, p = wilcoxon_signed_rank(a, b, mode="exact")
        diffs = a - b
        ranks_order = np.argsort(np.abs(diffs), kind="stable")
        ranks = np.empty(8)
        ranks[ranks_order] = np.arange(1, 9)
        w_plus = ranks[diffs > 0].sum()
        total = ranks.sum()
        lo, hi = min(w_plus, total - w_plus), max(w_plus, total - w_plus)
        count = sum(
            1
            for signs in product((0, 1), repeat=8)
            if (s := sum(r for bit, r in zip(signs, ranks) if bit)) <= lo or s >= hi
        )
        expected = count / 2**8
        ok = abs(p - expected) <= 1e-12
        assert report("oracle-wilcoxon-exact", ok, f"exact p {p:.6f} vs 2^8 enumeration {expected:.6f}")


class TestCriterion7Determinism:
    def test_cli_byte_identical_across_seeded_reruns_and_threads(self, tmp_path):
        cli = [sys.executable, "-m", "gmmsearch.cli"]
        synth = subprocess.run(
            cli + ["synth", "--kind", "three_component", "--seed", "5", "--out",
                   str(tmp_path / "d.csv")],
            capture_output=True, text=True, timeout=600,
        )
        assert synth.returncode == 0, synth.stderr
        outputs = {}
        max_threads = str(os.cpu_count() or 8)
        for run, extra in (("a", []), ("b", []), ("max", ["--threads", max_threads])):
            out = tmp_path / run
            r = subprocess.run(
                cli + ["fit", str(tmp_path / "d.csv"), "--seed", "5", "--out-dir", str(out)] + extra,
                capture_output=True, text=True, timeout=600,
            )
            assert r.returncode == 0, r.stderr
            outputs[run] = {
                f: (out / f).read_bytes() for f in ("labels.csv", "model.json", "grid.csv")
            }
        ok = outputs["a"] == outputs["b"] == outputs["max"]
        assert report("determinism", ok, "fit outputs byte-identical across reruns and max threads")
