"""Numba-jitted twins of the kernels in `_kernels_numpy.py`.

Same signatures and tie-breaking rules, loop-based bodies. fastmath stays
off so the arithmetic keeps IEEE semantics.
"""

import numpy as np
from numba import njit

LOG_2PI = float(np.log(2.0 * np.pi))

LINKAGE_SINGLE = 0
LINKAGE_COMPLETE = 1
LINKAGE_AVERAGE = 2
LINKAGE_WARD = 3


@njit(cache=True, nogil=True)
def sq_l2_dists(x):
    n, dim = x.shape
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for m in range(dim):
                diff = x[i, m] - x[j, m]
                acc += diff * diff
            out[i, j] = acc
            out[j, i] = acc
    return out


@njit(cache=True, nogil=True)
def l1_dists(x):
    n, dim = x.shape
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for m in range(dim):
                acc += abs(x[i, m] - x[j, m])
            out[i, j] = acc
            out[j, i] = acc
    return out


@njit(cache=True, nogil=True)
def cosine_dists(x):
    n, dim = x.shape
    norms = np.empty(n)
    for i in range(n):
        acc = 0.0
        for m in range(dim):
            acc += x[i, m] * x[i, m]
        norms[i] = np.sqrt(acc)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for m in range(dim):
                acc += x[i, m] * x[j, m]
            d = 1.0 - acc / (norms[i] * norms[j])
            if d < 0.0:
                d = 0.0
            out[i, j] = d
            out[j, i] = d
    return out


@njit(cache=True, nogil=True)
def _rescan_row(dist, alive, nn_dist, nn_idx, i, n):
    best = np.inf
    best_j = n
    for j in range(i + 1, n):
        if alive[j] and dist[i, j] < best:
            best = dist[i, j]
            best_j = j
    nn_dist[i] = best
    nn_idx[i] = best_j


@njit(cache=True, nogil=True)
def linkage_merges(dist, linkage):
    n = dist.shape[0]
    merges = np.empty((n - 1, 2), dtype=np.int64)
    if n == 1:
        return merges
    for i in range(n):
        dist[i, i] = np.inf
    alive = np.ones(n, dtype=np.bool_)
    size = np.ones(n)
    nn_dist = np.empty(n)
    nn_idx = np.empty(n, dtype=np.int64)
    for i in range(n):
        _rescan_row(dist, alive, nn_dist, nn_idx, i, n)

    for step in range(n - 1):
        a = 0
        best = np.inf
        for i in range(n):
            if nn_dist[i] < best:
                best = nn_dist[i]
                a = i
        b = int(nn_idx[a])
        merges[step, 0] = a
        merges[step, 1] = b

        dab = dist[a, b]
        sa = size[a]
        sb = size[b]
        for h in range(n):
            if not alive[h] or h == a or h == b:
                continue
            dah = dist[a, h]
            dbh = dist[b, h]
            if linkage == LINKAGE_SINGLE:
                new = dah if dah < dbh else dbh
            elif linkage == LINKAGE_COMPLETE:
                new = dah if dah > dbh else dbh
            elif linkage == LINKAGE_AVERAGE:
                new = (sa * dah + sb * dbh) / (sa + sb)
            else:
                sh = size[h]
                new = ((sa + sh) * dah + (sb + sh) * dbh - sh * dab) / (sa + sb + sh)
            dist[a, h] = new
            dist[h, a] = new

        size[a] = sa + sb
        alive[b] = False
        for h in range(n):
            dist[b, h] = np.inf
            dist[h, b] = np.inf
        nn_dist[b] = np.inf
        nn_idx[b] = n

        for i in range(n):
            if not alive[i]:
                continue
            if i == a or nn_idx[i] == a or nn_idx[i] == b:
                _rescan_row(dist, alive, nn_dist, nn_idx, i, n)
            elif i < a:
                da = dist[i, a]
                if da < nn_dist[i] or (da == nn_dist[i] and a < nn_idx[i]):
                    nn_dist[i] = da
                    nn_idx[i] = a
    return merges


@njit(cache=True, nogil=True)
def _assign(x, centers, labels, mind2):
    n, dim = x.shape
    k = centers.shape[0]
    for i in range(n):
        best = np.inf
        best_c = 0
        for c in range(k):
            acc = 0.0
            for m in range(dim):
                diff = x[i, m] - centers[c, m]
                acc += diff * diff
            if acc < best:
                best = acc
                best_c = c
        labels[i] = best_c
        mind2[i] = best


@njit(cache=True, nogil=True)
def lloyd(x, centers, max_iter, tol):
    n, dim = x.shape
    k = centers.shape[0]
    centers = centers.copy()
    labels = np.zeros(n, dtype=np.int64)
    mind2 = np.empty(n)
    counts = np.zeros(k, dtype=np.int64)
    prev = np.inf
    inertia = 0.0
    exhausted = True
    for it in range(max_iter):
        _assign(x, centers, labels, mind2)
        counts[:] = 0
        for i in range(n):
            counts[labels[i]] += 1
        for c in range(k):
            if counts[c] == 0:
                p = 0
                best = -1.0
                for i in range(n):
                    if mind2[i] > best:
                        best = mind2[i]
                        p = i
                counts[labels[p]] -= 1
                labels[p] = c
                counts[c] = 1
                mind2[p] = 0.0
        inertia = 0.0
        for i in range(n):
            inertia += mind2[i]
        if it > 0 and prev - inertia <= tol * prev:
            exhausted = False
            break
        prev = inertia
        centers[:, :] = 0.0
        for i in range(n):
            c = labels[i]
            for m in range(dim):
                centers[c, m] += x[i, m]
        for c in range(k):
            for m in range(dim):
                centers[c, m] /= counts[c]
    if exhausted:
        _assign(x, centers, labels, mind2)
        counts[:] = 0
        for i in range(n):
            counts[labels[i]] += 1
        for c in range(k):
            if counts[c] == 0:
                p = 0
                best = -1.0
                for i in range(n):
                    if mind2[i] > best:
                        best = mind2[i]
                        p = i
                counts[labels[p]] -= 1
                labels[p] = c
                counts[c] = 1
                mind2[p] = 0.0
        inertia = 0.0
        for i in range(n):
            inertia += mind2[i]
    return labels, inertia, centers


@njit(cache=True, nogil=True)
def log_prob_full(x, means, prec_chol, log_det):
    n, dim = x.shape
    k = means.shape[0]
    out = np.empty((n, k))
    base = -0.5 * dim * LOG_2PI
    for c in range(k):
        for i in range(n):
            maha = 0.0
            for j in range(dim):
                acc = 0.0
                for m in range(dim):
                    acc += (x[i, m] - means[c, m]) * prec_chol[c, m, j]
                maha += acc * acc
            out[i, c] = log_det[c] + base - 0.5 * maha
    return out


@njit(cache=True, nogil=True)
def log_prob_tied(x, means, prec_chol, log_det):
    n, dim = x.shape
    k = means.shape[0]
    out = np.empty((n, k))
    base = -0.5 * dim * LOG_2PI
    for c in range(k):
        for i in range(n):
            maha = 0.0
            for j in range(dim):
                acc = 0.0
                for m in range(dim):
                    acc += (x[i, m] - means[c, m]) * prec_chol[m, j]
                maha += acc * acc
            out[i, c] = log_det + base - 0.5 * maha
    return out


@njit(cache=True, nogil=True)
def log_prob_diag(x, means, prec_sqrt, log_det):
    n, dim = x.shape
    k = means.shape[0]
    out = np.empty((n, k))
    base = -0.5 * dim * LOG_2PI
    for c in range(k):
        for i in range(n):
            maha = 0.0
            for m in range(dim):
                y = (x[i, m] - means[c, m]) * prec_sqrt[c, m]
                maha += y * y
            out[i, c] = log_det[c] + base - 0.5 * maha
    return out


@njit(cache=True, nogil=True)
def scatter_full(x, resp, means, nk):
    n, dim = x.shape
    k = means.shape[0]
    out = np.zeros((k, dim, dim))
    for c in range(k):
        for i in range(n):
            r = resp[i, c]
            for a in range(dim):
                da = x[i, a] - means[c, a]
                for b2 in range(a, dim):
                    out[c, a, b2] += r * da * (x[i, b2] - means[c, b2])
        for a in range(dim):
            for b2 in range(a, dim):
                v = out[c, a, b2] / nk[c]
                out[c, a, b2] = v
                out[c, b2, a] = v
    return out
