"""Seeded synthetic datasets used by the test and benchmark suites.

Sampling uses numpy's Generator (PCG64 stream, ziggurat normals), so every
dataset is a deterministic, bit-reproducible function of its seed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError

KINDS = ("three_component", "double_cigar", "hierarchy")

THREE_COMPONENT_MEANS = np.array(
    [[0.0, 0.0, 0.0], [5.0, 0.0, 0.0], [0.0, 5.0, 0.0]]
)

DOUBLE_CIGAR_MEANS = np.array([[-3.0, 0.0], [3.0, 0.0]])
DOUBLE_CIGAR_VARIANCES = np.array([1.0, 200.0])

# three-scale layout: pairs {-15,-13} {-8,-6} {6,8} {13,15}, sigma 0.5, so the
# 2- and 4-way groupings are widely separated while adjacent leaves overlap a little
HIERARCHY_MEANS = np.array([-15.0, -13.0, -8.0, -6.0, 6.0, 8.0, 13.0, 15.0])
HIERARCHY_SIGMA = 0.5


@dataclass(frozen=True)
class SyntheticSpec:
    """What to generate: `n` is the total count for three_component and the
    per-component count for the other kinds (None picks the default 100)."""

    kind: str
    n: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown synthetic kind {self.kind!r}; choose from {KINDS}")
        if self.n is not None and self.n < 1:
            raise InputError("n must be positive")


def generate(spec):
    """Build (data, truth) for a SyntheticSpec.

    three_component: n (default 100) draws from an equally weighted 3-part
    mixture in 3 dimensions, identity covariances; truth is the component
    of origin. double_cigar: n (default 100) points per component, two
    elongated Gaussians sharing covariance diag(1, 200). hierarchy: n
    (default 100) points per each of 8 one-dimensional components; truth
    has one column per granularity (2, 4 and 8 clusters).
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    if spec.kind == "three_component":
        n = spec.n or 100
        truth = rng.integers(0, 3, size=n)
        x = THREE_COMPONENT_MEANS[truth] + rng.standard_normal((n, 3))
        return x, truth
    if spec.kind == "double_cigar":
        per = spec.n or 100
        truth = np.repeat(np.arange(2), per)
        x = DOUBLE_CIGAR_MEANS[truth] + rng.standard_normal((2 * per, 2)) * np.sqrt(
            DOUBLE_CIGAR_VARIANCES
        )
        return x, truth
    per = spec.n or 100
    fine = np.repeat(np.arange(8), per)
    x = (HIERARCHY_MEANS[fine] + HIERARCHY_SIGMA * rng.standard_normal(8 * per))[:, None]
    truth = np.stack([fine // 4, fine // 2, fine], axis=1)
    return x, truth
