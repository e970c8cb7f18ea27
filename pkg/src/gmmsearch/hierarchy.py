"""Recursive clustering: run the grid search on the data, then on every
discovered cluster, until each branch bottoms out in a leaf. A node becomes
a leaf when the search picks a single component, when it has too few points
to split reliably, or when its search fails outright."""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, SearchFailure
from .gmm import as_matrix
from .search import SearchConfig, run_search

LEAF_SINGLE_COMPONENT = "k1"
LEAF_MIN_SPLIT = "min_split"
LEAF_SEARCH_FAILURE = "search_failure"
LEAF_DEPTH_CAP = "depth_cap"


@dataclass
class DendrogramNode:
    """One node of the cluster tree; `indices` index rows of the root data."""

    indices: np.ndarray
    depth: int
    best: object = None  # CandidateResult of this node's search, if it ran
    children: list = field(default_factory=list)
    leaf_reason: str | None = None

    @property
    def model(self):
        return self.best.fit.model if self.best is not None and self.best.converged else None

    @property
    def is_leaf(self):
        return not self.children

    @property
    def size(self):
        return int(self.indices.shape[0])


def _node_seed(master, path):
    if not path:
        return master
    return int(np.random.SeedSequence(master, spawn_key=(3,) + path).generate_state(1)[0])


def fit_dendrogram(data, config=None, min_split=None, max_depth=None):
    """Grow the cluster tree.

    `config.kmax` is the maximum component count per split; `config.kmin`
    is forced to 1 so a node can elect to stay whole. Nodes smaller than
    `min_split` (default 2 * kmax) are leaves. A failed node search marks
    that node a leaf instead of aborting the tree.
    """
    config = config or SearchConfig(kmax=2)
    if config.kmax < 2:
        raise InputError("need kmax >= 2 to ever split a node")
    config = dataclasses.replace(config, kmin=1)
    if min_split is None:
        min_split = 2 * config.kmax
    x = as_matrix(data)
    n = x.shape[0]

    def build(indices, depth, path):
        node = DendrogramNode(indices, depth)
        # a search needs 2 points, whatever min_split says
        if indices.shape[0] < max(min_split, 2):
            node.leaf_reason = LEAF_MIN_SPLIT
            return node
        if max_depth is not None and depth >= max_depth:
            node.leaf_reason = LEAF_DEPTH_CAP
            return node
        sub_config = dataclasses.replace(config, seed=_node_seed(config.seed, path))
        try:
            result = run_search(x[indices], sub_config)
        except SearchFailure:
            node.leaf_reason = LEAF_SEARCH_FAILURE
            return node
        node.best = result.best
        labels = result.best.fit.labels
        groups = [indices[labels == c] for c in range(result.best.k)]
        groups = [g for g in groups if g.shape[0] > 0]
        if len(groups) < 2:
            node.leaf_reason = LEAF_SINGLE_COMPONENT
            return node
        groups.sort(key=lambda g: int(g[0]))
        node.children = [
            build(g, depth + 1, path + (pos,)) for pos, g in enumerate(groups)
        ]
        return node

    return build(np.arange(n), 0, ())


def cut_at_depth(root, depth):
    """Flat clustering from truncating every branch at `depth`.

    Each surviving node (at exactly `depth`, or a shallower leaf) becomes
    one cluster; clusters are numbered by smallest member index. `depth` at
    or past the tree depth reproduces the leaf clustering.
    """
    if depth < 0:
        raise InputError("depth must be >= 0")
    clusters = []

    def walk(node):
        if node.depth == depth or node.is_leaf:
            clusters.append(node.indices)
            return
        for child in node.children:
            walk(child)

    walk(root)
    clusters.sort(key=lambda g: int(g[0]))
    labels = np.empty(root.indices.shape[0], dtype=np.int64)
    for cid, idx in enumerate(clusters):
        labels[idx] = cid
    return labels


def tree_depth(root):
    """Maximum node depth in the tree."""
    if root.is_leaf:
        return root.depth
    return max(tree_depth(child) for child in root.children)


def leaf_count(root):
    if root.is_leaf:
        return 1
    return sum(leaf_count(child) for child in root.children)
