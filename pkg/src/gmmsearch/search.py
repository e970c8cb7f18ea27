"""Grid search over (initialization, covariance constraint, component count)
with criterion-based selection and a singleton-avoiding regularization
ladder.

Each grid cell fits one candidate: EM starts unregularized and, whenever it
diverges or the hard labeling contains a cluster of exactly one point, the
diagonal loading is raised through the fixed ladder {0, 1e-6, ..., 1} before
the cell is declared failed. The winner is the converged candidate with the
largest BIC/AIC; ties prefer fewer components, then the simpler constraint,
then the earlier initialization method in canonical order.
"""

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import init_methods
from .errors import EmFailure, InitFailure, InputError, SearchFailure
from .gmm import (
    CONSTRAINTS,
    CRITERIA,
    EmSettings,
    FitResult,
    as_matrix,
    criterion_value,
    em_fit,
)
from .init_methods import (
    AFFINITIES,
    LINKAGES,
    InitMethod,
    enumerate_init_methods,
)

REG_LADDER = (0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0)


def increase_reg(reg):
    """Next rung of the regularization ladder: 0 becomes 1e-6, anything else
    is multiplied by 10 (snapped to the canonical decade values)."""
    if reg == 0.0:
        return 1e-6
    for i, v in enumerate(REG_LADDER):
        if reg == v:
            return REG_LADDER[i + 1] if i + 1 < len(REG_LADDER) else reg * 10.0
    return reg * 10.0


@dataclass(frozen=True)
class SearchConfig:
    """Every knob of the grid search. Defaults give the full 11-method,
    4-constraint grid over k in [2, 20] selected by BIC."""

    kmin: int = 2
    kmax: int = 20
    affinities: tuple = AFFINITIES
    linkages: tuple = LINKAGES
    constraints: tuple = CONSTRAINTS
    criterion: str = "bic"
    subset_cap: int = 2000
    kmeans_reps: int = 1
    em: EmSettings = field(default_factory=EmSettings)
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.kmin <= self.kmax:
            raise InputError("need 1 <= kmin <= kmax")
        if self.criterion not in CRITERIA:
            raise InputError(f"unknown criterion {self.criterion!r}")
        if self.subset_cap < 1:
            raise InputError("subset_cap must be >= 1")
        if self.kmeans_reps < 1:
            raise InputError("kmeans_reps must be >= 1")
        for a in self.affinities:
            if a not in AFFINITIES:
                raise InputError(f"unknown affinity {a!r}")
        for l in self.linkages:
            if l not in LINKAGES:
                raise InputError(f"unknown linkage {l!r}")
        for c in self.constraints:
            if c not in CONSTRAINTS:
                raise InputError(f"unknown constraint {c!r}")
        if not self.methods:
            raise InputError("the affinity/linkage sets allow no initialization method")
        if not self.constraints:
            raise InputError("at least one covariance constraint is required")

    @property
    def methods(self):
        return enumerate_init_methods(self.affinities, self.linkages)

    @property
    def ordered_constraints(self):
        return tuple(c for c in CONSTRAINTS if c in self.constraints)


@dataclass
class CandidateResult:
    """Outcome of one grid cell."""

    method: InitMethod
    constraint: str
    k: int
    status: str  # "converged" | "failed"
    criterion_value: float | None = None
    reg_covar: float | None = None
    fit: FitResult | None = None
    reason: str | None = None

    @property
    def converged(self):
        return self.status == "converged"


@dataclass
class SearchResult:
    best: CandidateResult
    grid: list
    config: SearchConfig
    n: int
    d: int


def _singleton(labels, k):
    return bool(np.any(np.bincount(labels, minlength=k) == 1))


def gaussian_cluster(data, k, constraint, init=None, em=None, criterion="bic",
                     seed=None, kmeans_reps=1, method=None):
    """Fit one candidate through the regularization ladder.

    `init` is a hard labeling; when omitted, k-means provides one (k = 1
    needs none). All failure modes land in the returned status instead of
    raising.
    """
    x = as_matrix(data)
    n = x.shape[0]
    em = em or EmSettings()
    if k > n:
        raise InputError(f"need at least k={k} samples, got {n}")
    labels = init
    if labels is None and k > 1:
        labels = init_methods.kmeans_init(x, k, reps=kmeans_reps, seed=seed)
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)

    reg = 0.0
    last_reason = "did not run"
    while reg <= 1.0:
        try:
            settings = dataclasses.replace(em, reg_covar=reg)
            if labels is None:
                init_model = None
            else:
                params = init_methods.estimate_gaussian_parameters(x, labels, constraint, reg)
                if params.weights.shape[0] != k:
                    raise InitFailure(
                        f"initial labeling has {params.weights.shape[0]} clusters, expected {k}"
                    )
                init_model = params.to_model()
            fit = em_fit(x, k, constraint, settings, init_model)
            if _singleton(fit.labels, k):
                raise EmFailure("hard labeling contains a singleton cluster")
            value = criterion_value(fit, n, criterion)
            return CandidateResult(method, constraint, k, "converged", value, reg, fit)
        except (EmFailure, InitFailure) as exc:
            last_reason = str(exc)
            reg = increase_reg(reg)
    return CandidateResult(
        method, constraint, k, "failed",
        reason=f"regularization ladder exhausted: {last_reason}",
    )


def _child_seed(master, *path):
    ss = np.random.SeedSequence(master, spawn_key=tuple(path))
    return ss


def _prepare_inits(x, config):
    """Hard labelings per (method, k), shared by all constraints of a cell.

    Agglomerative methods run on a capped random subset whose merge tree is
    built once and cut at every k; the subset labeling is then spread to all
    rows by nearest cluster mean. The k-means route runs per k on the full
    data. k = 1 needs no initializer anywhere.
    """
    n = x.shape[0]
    inits = {}
    ks = range(config.kmin, config.kmax + 1)
    for mi, method in enumerate(config.methods):
        if method.affinity == "none":
            for k in ks:
                if k == 1:
                    inits[(method, k)] = np.zeros(n, dtype=np.int64)
                elif k > n:
                    inits[(method, k)] = InitFailure(f"k={k} exceeds the {n} samples")
                else:
                    seed = _child_seed(config.seed, 1, k)
                    inits[(method, k)] = init_methods.kmeans_init(
                        x, k, reps=config.kmeans_reps, seed=seed
                    )
            continue
        sub_idx = init_methods.subset_indices(n, config.subset_cap, _child_seed(config.seed, 0, mi))
        x_sub = x[sub_idx]
        try:
            merges = init_methods.build_merge_tree(x_sub, method)
        except InitFailure as exc:
            for k in ks:
                inits[(method, k)] = exc if k != 1 else np.zeros(n, dtype=np.int64)
            continue
        m = x_sub.shape[0]
        for k in ks:
            if k == 1:
                inits[(method, k)] = np.zeros(n, dtype=np.int64)
            elif k > m:
                inits[(method, k)] = InitFailure(
                    f"k={k} exceeds the {m} rows available to agglomeration"
                )
            else:
                sub_labels = init_methods.cut_merge_tree(merges, m, k)
                inits[(method, k)] = init_methods.extend_labels(x, sub_idx, sub_labels)
    return inits


def run_search(data, config=None, threads=1):
    """Evaluate the whole (k, method, constraint) grid and pick the winner.

    Cells are independent; with threads > 1 they are evaluated in a thread
    pool and merged back in canonical order, so parallelism never changes
    the outcome. Raises SearchFailure when no cell converges.
    """
    config = config or SearchConfig()
    x = as_matrix(data)
    n = x.shape[0]
    if n < 2:
        raise InputError("need at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise InputError("data contains non-finite values")

    inits = _prepare_inits(x, config)
    cells = [
        (k, method, constraint)
        for k in range(config.kmin, config.kmax + 1)
        for method in config.methods
        for constraint in config.ordered_constraints
    ]

    def evaluate(cell):
        k, method, constraint = cell
        init = inits[(method, k)]
        if isinstance(init, InitFailure):
            return CandidateResult(method, constraint, k, "failed", reason=str(init))
        if k > n:
            return CandidateResult(
                method, constraint, k, "failed", reason=f"k={k} exceeds the {n} samples"
            )
        return gaussian_cluster(
            x, k, constraint, init=None if k == 1 else init, em=config.em,
            criterion=config.criterion, method=method,
        )

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            grid = list(pool.map(evaluate, cells))
    else:
        grid = [evaluate(cell) for cell in cells]

    best = None
    best_rank = None
    for cand in grid:
        if not cand.converged:
            continue
        rank = (
            -cand.criterion_value,
            cand.k,
            CONSTRAINTS.index(cand.constraint),
            config.methods.index(cand.method),
        )
        if best is None or rank < best_rank:
            best, best_rank = cand, rank
    if best is None:
        reasons = "; ".join(
            f"{c.method}/{c.constraint}/k={c.k}: {c.reason}" for c in grid[:8]
        )
        more = "" if len(grid) <= 8 else f" (+{len(grid) - 8} more)"
        raise SearchFailure(f"every grid cell failed: {reasons}{more}")
    return SearchResult(best, grid, config, n, x.shape[1])
