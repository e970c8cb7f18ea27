"""Pure-numpy implementations of the hot kernels.

`_kernels_numba.py` provides jitted twins with identical signatures;
`backend.py` picks one set at import time. Everything here is
deterministic: ties in argmin/argmax resolve to the lowest index.
"""

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))

LINKAGE_SINGLE = 0
LINKAGE_COMPLETE = 1
LINKAGE_AVERAGE = 2
LINKAGE_WARD = 3


def sq_l2_dists(x):
    """Dense matrix of squared Euclidean distances."""
    sq = np.einsum("ij,ij->i", x, x)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def l1_dists(x):
    """Dense matrix of L1 (cityblock) distances."""
    n, dim = x.shape
    out = np.zeros((n, n))
    for j in range(dim):
        out += np.abs(x[:, j, None] - x[None, :, j])
    return out


def cosine_dists(x):
    """Dense matrix of cosine distances 1 - cos(x_i, x_j); rows must be nonzero."""
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    u = x / norms[:, None]
    d = 1.0 - u @ u.T
    np.clip(d, 0.0, None, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _rescan_row(dist, alive, nn_dist, nn_idx, i, n):
    # nearest active neighbour with index > i; ties pick the smallest index
    js = np.nonzero(alive[i + 1 :])[0]
    if js.size == 0:
        nn_dist[i] = np.inf
        nn_idx[i] = n
        return
    js = js + i + 1
    vals = dist[i, js]
    pos = int(np.argmin(vals))
    nn_dist[i] = vals[pos]
    nn_idx[i] = js[pos]


def linkage_merges(dist, linkage):
    """Agglomerate a full distance matrix down to one cluster.

    `dist` is consumed. Returns an (n-1, 2) int64 array of merges; each row
    (a, b) has a < b, where a slot id is the smallest original row index in
    the cluster and slot a absorbs slot b. Equal merge costs resolve to the
    lexicographically smallest (a, b). Lance-Williams updates keep the whole
    pass O(n^2) in the typical case; for ward the input must hold squared
    Euclidean distances.
    """
    n = dist.shape[0]
    merges = np.empty((n - 1, 2), dtype=np.int64)
    if n == 1:
        return merges
    np.fill_diagonal(dist, np.inf)
    alive = np.ones(n, dtype=bool)
    size = np.ones(n)
    nn_dist = np.empty(n)
    nn_idx = np.empty(n, dtype=np.int64)
    for i in range(n):
        _rescan_row(dist, alive, nn_dist, nn_idx, i, n)

    idx_all = np.arange(n)
    for step in range(n - 1):
        a = int(np.argmin(nn_dist))
        b = int(nn_idx[a])
        merges[step, 0] = a
        merges[step, 1] = b

        others = idx_all[alive]
        others = others[(others != a) & (others != b)]
        if others.size:
            dah = dist[a, others]
            dbh = dist[b, others]
            if linkage == LINKAGE_SINGLE:
                new = np.minimum(dah, dbh)
            elif linkage == LINKAGE_COMPLETE:
                new = np.maximum(dah, dbh)
            elif linkage == LINKAGE_AVERAGE:
                new = (size[a] * dah + size[b] * dbh) / (size[a] + size[b])
            else:
                sh = size[others]
                new = ((size[a] + sh) * dah + (size[b] + sh) * dbh - sh * dist[a, b]) / (
                    size[a] + size[b] + sh
                )
            dist[a, others] = new
            dist[others, a] = new

        size[a] += size[b]
        alive[b] = False
        dist[b, :] = np.inf
        dist[:, b] = np.inf
        nn_dist[b] = np.inf
        nn_idx[b] = n

        stale = alive & ((nn_idx == a) | (nn_idx == b))
        stale[a] = True
        fresh = alive & ~stale & (idx_all < a)
        fi = idx_all[fresh]
        if fi.size:
            da = dist[fi, a]
            better = (da < nn_dist[fi]) | ((da == nn_dist[fi]) & (a < nn_idx[fi]))
            upd = fi[better]
            nn_dist[upd] = dist[upd, a]
            nn_idx[upd] = a
        for i in idx_all[stale]:
            _rescan_row(dist, alive, nn_dist, nn_idx, int(i), n)
    return merges


def _assign(x, x_sq, centers):
    d2 = x_sq[:, None] - 2.0 * (x @ centers.T) + np.einsum("ij,ij->i", centers, centers)[None, :]
    np.maximum(d2, 0.0, out=d2)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(x.shape[0]), labels]


def lloyd(x, centers, max_iter, tol):
    """Lloyd iterations from the given centers.

    Runs until the relative inertia improvement drops below `tol` or
    `max_iter` passes. Empty clusters steal the point currently farthest
    from its center. Returns (labels, inertia, centers) consistent with
    each other.
    """
    n, dim = x.shape
    k = centers.shape[0]
    centers = centers.copy()
    x_sq = np.einsum("ij,ij->i", x, x)
    prev = np.inf
    labels = np.zeros(n, dtype=np.int64)
    inertia = 0.0
    exhausted = True
    for it in range(max_iter):
        labels, mind2 = _assign(x, x_sq, centers)
        counts = np.bincount(labels, minlength=k)
        for c in np.nonzero(counts == 0)[0]:
            p = int(np.argmax(mind2))
            counts[labels[p]] -= 1
            labels[p] = c
            counts[c] = 1
            mind2[p] = 0.0
        inertia = float(mind2.sum())
        if it > 0 and prev - inertia <= tol * prev:
            exhausted = False
            break
        prev = inertia
        centers = np.zeros((k, dim))
        np.add.at(centers, labels, x)
        centers /= counts[:, None]
    if exhausted:
        labels, mind2 = _assign(x, x_sq, centers)
        counts = np.bincount(labels, minlength=k)
        for c in np.nonzero(counts == 0)[0]:
            p = int(np.argmax(mind2))
            counts[labels[p]] -= 1
            labels[p] = c
            counts[c] = 1
            mind2[p] = 0.0
        inertia = float(mind2.sum())
    return labels, inertia, centers


def log_prob_full(x, means, prec_chol, log_det):
    """Per-component Gaussian log-densities, one (d, d) precision factor each."""
    n, dim = x.shape
    k = means.shape[0]
    out = np.empty((n, k))
    for c in range(k):
        y = (x - means[c]) @ prec_chol[c]
        out[:, c] = log_det[c] - 0.5 * (dim * LOG_2PI + np.einsum("ij,ij->i", y, y))
    return out


def log_prob_tied(x, means, prec_chol, log_det):
    """Per-component Gaussian log-densities with one shared precision factor."""
    n, dim = x.shape
    k = means.shape[0]
    out = np.empty((n, k))
    xp = x @ prec_chol
    mp = means @ prec_chol
    for c in range(k):
        y = xp - mp[c]
        out[:, c] = log_det - 0.5 * (dim * LOG_2PI + np.einsum("ij,ij->i", y, y))
    return out


def log_prob_diag(x, means, prec_sqrt, log_det):
    """Per-component Gaussian log-densities for diagonal precisions (k, d)."""
    dim = x.shape[1]
    p2 = prec_sqrt * prec_sqrt
    maha = (
        (x * x) @ p2.T
        - 2.0 * (x @ (means * p2).T)
        + np.einsum("ij,ij->i", means * prec_sqrt, means * prec_sqrt)[None, :]
    )
    return log_det[None, :] - 0.5 * (dim * LOG_2PI + maha)


def scatter_full(x, resp, means, nk):
    """Responsibility-weighted covariance of each component, normalized by nk."""
    k, dim = means.shape
    out = np.empty((k, dim, dim))
    for c in range(k):
        diff = x - means[c]
        out[c] = ((resp[:, c][:, None] * diff).T @ diff) / nk[c]
    return out
