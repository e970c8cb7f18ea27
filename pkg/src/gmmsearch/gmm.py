"""Gaussian mixture representation, EM fitting and information criteria.

Covariance storage depends on the constraint:

    full      (k, d, d)  one symmetric matrix per component
    tied      (d, d)     one matrix shared by all components
    diag      (k, d)     per-component variance vectors
    spherical (k,)       per-component scalar variances

``reg_covar`` is the amount already added to every covariance diagonal;
adding a multiple of the identity leaves eigenvectors unchanged, so the
regularization is rotationally invariant.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import EmFailure, InputError, NumericError

# canonical complexity order, simplest first
CONSTRAINTS = ("spherical", "diag", "tied", "full")

CRITERIA = ("bic", "aic")


def as_matrix(data):
    """Coerce to a C-contiguous float64 (n, d) matrix."""
    x = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise InputError(f"expected a 2-d sample matrix, got shape {x.shape}")
    return x


def check_constraint(constraint):
    if constraint not in CONSTRAINTS:
        raise InputError(f"unknown covariance constraint {constraint!r}; choose from {CONSTRAINTS}")
    return constraint


@dataclass(frozen=True)
class EmSettings:
    """EM iteration knobs: cap, tolerance on mean per-sample log-likelihood change,
    and the diagonal loading applied in every M-step."""

    max_iter: int = 100
    tol: float = 1e-3
    reg_covar: float = 0.0

    def __post_init__(self):
        if self.max_iter < 1:
            raise InputError("max_iter must be >= 1")
        if not self.tol > 0.0:
            raise InputError("tol must be > 0")
        if self.reg_covar < 0.0:
            raise InputError("reg_covar must be >= 0")


@dataclass
class GmmModel:
    """A fitted (or hand-built) Gaussian mixture."""

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    constraint: str
    reg_covar: float = 0.0

    def __post_init__(self):
        check_constraint(self.constraint)
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        self.means = np.ascontiguousarray(np.asarray(self.means, dtype=np.float64))
        self.covariances = np.ascontiguousarray(np.asarray(self.covariances, dtype=np.float64))
        if self.means.ndim != 2:
            raise InputError("means must be a (k, d) array")
        k, d = self.means.shape
        if self.weights.shape != (k,):
            raise InputError("weights length must match the component count")
        if self.weights.min() < 0.0 or abs(self.weights.sum() - 1.0) > 1e-9:
            raise InputError("weights must be nonnegative and sum to 1 within 1e-9")
        expected = {
            "full": (k, d, d),
            "tied": (d, d),
            "diag": (k, d),
            "spherical": (k,),
        }[self.constraint]
        if self.covariances.shape != expected:
            raise InputError(
                f"covariance shape {self.covariances.shape} does not match "
                f"constraint {self.constraint!r} (expected {expected})"
            )

    @property
    def k(self):
        return self.means.shape[0]

    @property
    def d(self):
        return self.means.shape[1]


@dataclass
class FitResult:
    """Outcome of one EM run; `ll_history` holds the log-likelihood at the
    start of every iteration plus the final value."""

    model: GmmModel
    labels: np.ndarray
    log_likelihood: float
    n_iter: int
    converged: bool
    ll_history: list


def param_count(k, d, constraint):
    """Number of free parameters of a k-component mixture in d dimensions."""
    if k < 1 or d < 1:
        raise InputError("k and d must be >= 1")
    check_constraint(constraint)
    cov = {
        "full": k * d * (d + 1) // 2,
        "tied": d * (d + 1) // 2,
        "diag": k * d,
        "spherical": k,
    }[constraint]
    return (k - 1) + k * d + cov


def criterion_value(fit, n, criterion):
    """Model-selection score, larger is better.

    bic = 2 ln L - p ln n, aic = 2 ln L - 2 p.
    """
    if criterion not in CRITERIA:
        raise InputError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")
    if n < 1:
        raise InputError("n must be >= 1")
    ll = fit.log_likelihood
    if not np.isfinite(ll):
        raise NumericError("log-likelihood is not finite")
    p = param_count(fit.model.k, fit.model.d, fit.model.constraint)
    if criterion == "bic":
        return 2.0 * ll - p * np.log(n)
    return 2.0 * ll - 2.0 * p


def _precision_factors(covariances, constraint):
    """Cholesky-based precision representation used by the log-density kernels.

    Returns (kind, means-compatible factor array, log-determinant term).
    Raises EmFailure when a covariance is not positive definite.
    """
    if constraint == "full":
        k, d, _ = covariances.shape
        prec = np.empty((k, d, d))
        log_det = np.empty(k)
        for c in range(k):
            try:
                chol = np.linalg.cholesky(covariances[c])
            except np.linalg.LinAlgError as exc:
                raise EmFailure("covariance factorization failed") from exc
            prec[c] = np.linalg.inv(chol).T
            log_det[c] = -np.log(np.diag(chol)).sum()
        return "full", prec, log_det
    if constraint == "tied":
        try:
            chol = np.linalg.cholesky(covariances)
        except np.linalg.LinAlgError as exc:
            raise EmFailure("covariance factorization failed") from exc
        prec = np.linalg.inv(chol).T
        return "tied", prec, float(-np.log(np.diag(chol)).sum())
    # diag (spherical variances arrive here broadcast to (k, d))
    if not np.all(covariances > 0.0) or not np.all(np.isfinite(covariances)):
        raise EmFailure("non-positive variance")
    prec_sqrt = np.ascontiguousarray(1.0 / np.sqrt(covariances))
    return "diag", prec_sqrt, np.log(prec_sqrt).sum(axis=1)


def _log_prob(x, means, covariances, constraint):
    """Per-component log-densities, shape (n, k)."""
    if constraint == "spherical":
        covariances = np.repeat(np.asarray(covariances)[:, None], x.shape[1], axis=1)
        constraint = "diag"
    kind, factor, log_det = _precision_factors(covariances, constraint)
    if kind == "full":
        return backend.log_prob_full(x, means, factor, log_det)
    if kind == "tied":
        return backend.log_prob_tied(x, means, factor, log_det)
    return backend.log_prob_diag(x, means, factor, log_det)


def _log_weighted_prob(x, weights, means, covariances, constraint):
    lp = _log_prob(x, means, covariances, constraint)
    with np.errstate(divide="ignore"):
        lp += np.log(weights)[None, :]
    return lp


def _logsumexp_rows(a):
    m = np.max(a, axis=1)
    shift = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.exp(a - shift[:, None]).sum(axis=1)) + shift
    return out


def log_likelihood(data, model):
    """Total data log-likelihood sum_i ln f(x_i), log-sum-exp stabilized."""
    x = as_matrix(data)
    if x.shape[1] != model.d:
        raise InputError(f"data has {x.shape[1]} columns, model expects {model.d}")
    lp = _log_weighted_prob(x, model.weights, model.means, model.covariances, model.constraint)
    return float(_logsumexp_rows(lp).sum())


def predict_labels(data, model):
    """Hard assignment by posterior responsibility; ties go to the lowest index."""
    x = as_matrix(data)
    if x.shape[1] != model.d:
        raise InputError(f"data has {x.shape[1]} columns, model expects {model.d}")
    lp = _log_weighted_prob(x, model.weights, model.means, model.covariances, model.constraint)
    return np.argmax(lp, axis=1)


def _m_step(x, resp, constraint, reg_covar):
    """Weighted-MLE parameter update with diagonal loading."""
    n, d = x.shape
    nk = resp.sum(axis=0) + 10.0 * np.finfo(np.float64).eps
    weights = nk / nk.sum()
    means = (resp.T @ x) / nk[:, None]
    if constraint == "full":
        cov = backend.scatter_full(x, resp, means, nk)
        cov[:, np.arange(d), np.arange(d)] += reg_covar
    elif constraint == "tied":
        cov = (x.T @ x - (nk[:, None] * means).T @ means) / nk.sum()
        cov[np.arange(d), np.arange(d)] += reg_covar
    elif constraint == "diag":
        cov = (resp.T @ (x * x)) / nk[:, None] - means**2 + reg_covar
    else:
        var = (resp.T @ (x * x)) / nk[:, None] - means**2 + reg_covar
        cov = var.mean(axis=1)
    return weights, means, cov


def em_fit(data, k, constraint, settings=EmSettings(), init=None):
    """Fit a k-component mixture by EM from the supplied initial parameters.

    `init` must satisfy the model invariants for (k, d); it may be omitted
    only for k = 1, which fits in closed form. Raises EmFailure when the
    likelihood turns non-finite or a covariance stops being positive
    definite at the current reg_covar.
    """
    x = as_matrix(data)
    n, d = x.shape
    check_constraint(constraint)
    if k < 1:
        raise InputError("k must be >= 1")
    if n < k:
        raise InputError(f"need at least k={k} samples, got {n}")
    if init is not None:
        if init.k != k or init.d != d or init.constraint != constraint:
            raise InputError("init parameters do not match (k, d, constraint)")
        weights = init.weights.copy()
        means = init.means.copy()
        cov = init.covariances.copy()
    elif k == 1:
        weights, means, cov = _m_step(x, np.ones((n, 1)), constraint, settings.reg_covar)
    else:
        raise InputError("an initialization is required for k > 1")

    history = []
    prev = None
    converged = False
    n_iter = 0
    log_resp = None
    for it in range(settings.max_iter):
        lp = _log_weighted_prob(x, weights, means, cov, constraint)
        log_norm = _logsumexp_rows(lp)
        ll = float(log_norm.sum())
        if not np.isfinite(ll):
            raise EmFailure("log-likelihood is not finite")
        history.append(ll)
        log_resp = lp - log_norm[:, None]
        if prev is not None and abs(ll / n - prev) < settings.tol:
            converged = True
            n_iter = it
            break
        prev = ll / n
        weights, means, cov = _m_step(x, np.exp(log_resp), constraint, settings.reg_covar)
        n_iter = it + 1
    if not converged:
        lp = _log_weighted_prob(x, weights, means, cov, constraint)
        log_norm = _logsumexp_rows(lp)
        ll = float(log_norm.sum())
        if not np.isfinite(ll):
            raise EmFailure("log-likelihood is not finite")
        history.append(ll)
        log_resp = lp - log_norm[:, None]

    labels = np.argmax(log_resp, axis=1)
    model = GmmModel(weights, means, cov, constraint, settings.reg_covar)
    return FitResult(model, labels, history[-1], n_iter, converged, history)
