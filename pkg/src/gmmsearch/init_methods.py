"""Initial hard clusterings (agglomerative or k-means) and their conversion
into starting parameters for the EM M-step."""

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import EmFailure, InitFailure, InputError
from .gmm import GmmModel, as_matrix, check_constraint

AFFINITIES = ("l2", "l1", "cosine", "none")
LINKAGES = ("ward", "complete", "average", "single")

_LINKAGE_CODE = {
    "single": backend.LINKAGE_SINGLE,
    "complete": backend.LINKAGE_COMPLETE,
    "average": backend.LINKAGE_AVERAGE,
    "ward": backend.LINKAGE_WARD,
}


@dataclass(frozen=True, order=True)
class InitMethod:
    """One initialization route: an (affinity, linkage) agglomeration, or
    plain k-means when affinity is 'none' (linkage must then be None)."""

    affinity: str
    linkage: str | None

    def __post_init__(self):
        if self.affinity not in AFFINITIES:
            raise InputError(f"unknown affinity {self.affinity!r}; choose from {AFFINITIES}")
        if self.affinity == "none":
            if self.linkage is not None:
                raise InputError("the k-means route takes no linkage")
        else:
            if self.linkage not in LINKAGES:
                raise InputError(f"unknown linkage {self.linkage!r}; choose from {LINKAGES}")
            if self.linkage == "ward" and self.affinity != "l2":
                raise InputError("ward linkage is only compatible with l2 affinity")

    def __str__(self):
        return self.affinity if self.linkage is None else f"{self.affinity}-{self.linkage}"


def enumerate_init_methods(affinities=AFFINITIES, linkages=LINKAGES):
    """All valid methods in canonical order: l2 linkages first, then l1,
    then cosine, then the k-means route. The full set has 11 members."""
    methods = []
    for aff in ("l2", "l1", "cosine"):
        if aff not in affinities:
            continue
        for link in ("ward", "complete", "average", "single"):
            if link not in linkages:
                continue
            if link == "ward" and aff != "l2":
                continue
            methods.append(InitMethod(aff, link))
    if "none" in affinities:
        methods.append(InitMethod("none", None))
    return tuple(methods)


@dataclass
class InitParams:
    """Per-cluster weight, mean and precision estimated from a hard labeling.
    Covariances (constraint-shaped, regularized) are kept alongside since EM
    starts from them directly."""

    weights: np.ndarray
    means: np.ndarray
    precisions: np.ndarray
    covariances: np.ndarray
    constraint: str
    reg_covar: float

    def to_model(self):
        return GmmModel(self.weights, self.means, self.covariances, self.constraint, self.reg_covar)


def subset_indices(n, cap, seed):
    """Sorted row indices of a uniform without-replacement subsample of size
    cap; the identity when n <= cap (the cap is strict)."""
    if cap < 1:
        raise InputError("cap must be >= 1")
    if n <= cap:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=cap, replace=False))


def subset_data(data, cap=2000, seed=None):
    """Return data unchanged if it has at most cap rows, else a uniform
    random subset of exactly cap rows in original row order."""
    x = as_matrix(data)
    if x.shape[0] <= cap:
        return x
    return x[subset_indices(x.shape[0], cap, seed)]


def _distance_matrix(x, method):
    if method.affinity == "l2":
        if method.linkage == "ward":
            return backend.sq_l2_dists(x)
        return np.sqrt(backend.sq_l2_dists(x))
    if method.affinity == "l1":
        return backend.l1_dists(x)
    norms = np.einsum("ij,ij->i", x, x)
    if np.any(norms == 0.0):
        raise InitFailure("cosine affinity is undefined for zero rows")
    return backend.cosine_dists(x)


def build_merge_tree(data, method):
    """Full bottom-up merge sequence for an agglomerative method.

    Returns an (n-1, 2) array of merges; each row (a, b) merges the cluster
    whose smallest member row is b into the one whose smallest member row
    is a (a < b). Equal merge costs resolve to the smallest (a, b) pair.
    """
    x = as_matrix(data)
    if method.affinity == "none":
        raise InputError("the k-means route has no merge tree")
    return backend.linkage_merges(_distance_matrix(x, method), _LINKAGE_CODE[method.linkage])


def cut_merge_tree(merges, n, k):
    """Partition labels after applying the first n-k merges. Clusters are
    numbered by their smallest member row index."""
    if not 1 <= k <= n:
        raise InputError(f"k must be in [1, {n}], got {k}")
    parent = np.arange(n)
    for a, b in merges[: n - k]:
        parent[b] = a
    roots = np.empty(n, dtype=np.int64)
    for i in range(n):
        r = i
        while parent[r] != r:
            r = parent[r]
        # path compression
        j = i
        while parent[j] != r:
            parent[j], j = r, parent[j]
        roots[i] = r
    _, labels = np.unique(roots, return_inverse=True)
    return labels.astype(np.int64)


def agglomerate(data, k, method):
    """Bottom-up agglomeration of data into k clusters under the given
    affinity/linkage. Deterministic; no randomness is involved."""
    x = as_matrix(data)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"k must be in [1, {n}], got {k}")
    return cut_merge_tree(build_merge_tree(x, method), n, k)


def _kmeans_pp(x, k, rng):
    """Squared-distance-weighted seeding; falls back to the lowest unchosen
    index when every remaining distance is zero (duplicate-only data)."""
    n, d = x.shape
    centers = np.empty((k, d))
    chosen = np.zeros(n, dtype=bool)
    first = int(rng.integers(n))
    centers[0] = x[first]
    chosen[first] = True
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(np.argmin(chosen))
        centers[j] = x[idx]
        chosen[idx] = True
        np.minimum(d2, ((x - centers[j]) ** 2).sum(axis=1), out=d2)
    return centers


def kmeans_init(data, k, reps=1, seed=None, max_iter=300, tol=1e-4):
    """Best-of-reps k-means labeling (k-means++ seeding then Lloyd).

    Each repetition draws from a child seed of `seed`, so the result is a
    deterministic function of (data, k, reps, seed). The labeling with the
    lowest within-cluster sum of squares wins; ties keep the earlier rep.
    """
    x = as_matrix(data)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"k must be in [1, {n}], got {k}")
    if reps < 1:
        raise InputError("reps must be >= 1")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    best_labels = None
    best_inertia = np.inf
    for rep in range(reps):
        rng = np.random.default_rng(np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (rep,)))
        centers = _kmeans_pp(x, k, rng)
        labels, inertia, _ = backend.lloyd(x, centers, max_iter, tol)
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def estimate_gaussian_parameters(data, labels, constraint, reg_covar=0.0):
    """Constraint-shaped MLE weights/means/covariances of a hard labeling,
    with reg_covar added to every covariance diagonal, plus the matching
    precisions. Raises InitFailure when a covariance is not invertible at
    this reg_covar."""
    x = as_matrix(data)
    check_constraint(constraint)
    n, d = x.shape
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise InputError("labels length must match the number of rows")
    if labels.min() < 0:
        raise InputError("labels must be nonnegative")
    k = int(labels.max()) + 1
    counts = np.bincount(labels, minlength=k)
    if np.any(counts == 0):
        raise InputError("every label in [0, max] must reference a non-empty cluster")

    weights = counts / n
    means = np.zeros((k, d))
    np.add.at(means, labels, x)
    means /= counts[:, None]

    if constraint == "full":
        cov = np.empty((k, d, d))
        for c in range(k):
            diff = x[labels == c] - means[c]
            cov[c] = diff.T @ diff / counts[c]
            cov[c][np.arange(d), np.arange(d)] += reg_covar
    elif constraint == "tied":
        cov = np.zeros((d, d))
        for c in range(k):
            diff = x[labels == c] - means[c]
            cov += diff.T @ diff
        cov /= n
        cov[np.arange(d), np.arange(d)] += reg_covar
    elif constraint == "diag":
        sq = np.zeros((k, d))
        np.add.at(sq, labels, x * x)
        cov = sq / counts[:, None] - means**2 + reg_covar
    else:
        sq = np.zeros((k, d))
        np.add.at(sq, labels, x * x)
        cov = (sq / counts[:, None] - means**2 + reg_covar).mean(axis=1)

    try:
        precisions = _invert(cov, constraint)
    except EmFailure as exc:
        raise InitFailure(f"initial covariance not invertible at reg_covar={reg_covar:g}") from exc
    return InitParams(weights, means, precisions, cov, constraint, reg_covar)


def _invert(cov, constraint):
    if constraint == "full":
        out = np.empty_like(cov)
        for c in range(cov.shape[0]):
            chol = _chol(cov[c])
            inv = np.linalg.inv(chol)
            out[c] = inv.T @ inv
        return out
    if constraint == "tied":
        chol = _chol(cov)
        inv = np.linalg.inv(chol)
        return inv.T @ inv
    if not np.all(cov > 0.0) or not np.all(np.isfinite(cov)):
        raise EmFailure("non-positive variance")
    return 1.0 / cov


def _chol(mat):
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise EmFailure("covariance factorization failed") from exc


def extend_labels(data, subset_idx, subset_labels):
    """Spread a subset labeling to all rows: subset rows keep their label,
    the rest take the nearest subset-cluster mean (squared L2, ties to the
    lowest cluster index)."""
    x = as_matrix(data)
    k = int(subset_labels.max()) + 1
    counts = np.bincount(subset_labels, minlength=k)
    means = np.zeros((k, x.shape[1]))
    np.add.at(means, subset_labels, x[subset_idx])
    means /= counts[:, None]
    xsq = np.einsum("ij,ij->i", x, x)
    d2 = xsq[:, None] - 2.0 * (x @ means.T) + np.einsum("ij,ij->i", means, means)[None, :]
    labels = np.argmin(d2, axis=1).astype(np.int64)
    labels[subset_idx] = subset_labels
    return labels
