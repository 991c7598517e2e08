"""Random forest of gini decision trees.

Each tree draws mtry candidate features per node (default sqrt(M)); if none
of the sampled features yields an impurity-reducing split the remaining
features are tried, so a lone unbootstrapped tree of unlimited depth can
always fit tie-free training data exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    frac_ones: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class ForestState:
    trees: list[TreeNode]


def _gini(counts: np.ndarray, total: int) -> float:
    if total == 0:
        return 0.0
    p = counts / total
    return 1.0 - float(np.sum(p * p))


def _best_split_on(x_col: np.ndarray, y: np.ndarray):
    """Best threshold on one feature; returns (gain, threshold) or None."""
    order = np.argsort(x_col, kind="stable")
    xs, ys = x_col[order], y[order].astype(np.float64)
    n = len(ys)
    total_pos = ys.sum()
    parent = _gini(np.array([n - total_pos, total_pos]), n)

    valid = xs[1:] != xs[:-1]
    if not valid.any():
        return None
    left_pos = np.cumsum(ys)[:-1]
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    right_pos = total_pos - left_pos
    gini_l = 1.0 - ((left_pos / nl) ** 2 + ((nl - left_pos) / nl) ** 2)
    gini_r = 1.0 - ((right_pos / nr) ** 2 + ((nr - right_pos) / nr) ** 2)
    gain = parent - (nl * gini_l + nr * gini_r) / n
    gain[~valid] = -np.inf
    i = int(np.argmax(gain))
    if gain[i] <= 1e-12:
        return None
    return float(gain[i]), 0.5 * (xs[i] + xs[i + 1])


def _best_over(x: np.ndarray, y: np.ndarray, features) -> tuple | None:
    chosen = None
    for f in features:
        split = _best_split_on(x[:, f], y)
        if split is not None and (chosen is None or split[0] > chosen[0]):
            chosen = (split[0], int(f), split[1])
    return chosen


def _grow(x: np.ndarray, y: np.ndarray, depth: int, max_depth: int | None,
          mtry: int, rng: np.random.Generator) -> TreeNode:
    node = TreeNode(frac_ones=float(np.mean(y)))
    if len(y) < 2 or node.frac_ones in (0.0, 1.0):
        return node
    if max_depth is not None and depth >= max_depth:
        return node
    feature_order = rng.permutation(x.shape[1])
    # mtry candidate features first; fall back to the rest only if none split
    chosen = _best_over(x, y, feature_order[:mtry])
    if chosen is None:
        chosen = _best_over(x, y, feature_order[mtry:])
    if chosen is None:
        return node
    _, f, threshold = chosen
    mask = x[:, f] <= threshold
    node.feature = f
    node.threshold = threshold
    node.left = _grow(x[mask], y[mask], depth + 1, max_depth, mtry, rng)
    node.right = _grow(x[~mask], y[~mask], depth + 1, max_depth, mtry, rng)
    return node


def _tree_votes(node: TreeNode, x: np.ndarray, out: np.ndarray,
                idx: np.ndarray) -> None:
    if len(idx) == 0:
        return
    if node.is_leaf:
        out[idx] = 1 if node.frac_ones >= 0.5 else 0
        return
    mask = x[idx, node.feature] <= node.threshold
    _tree_votes(node.left, x, out, idx[mask])
    _tree_votes(node.right, x, out, idx[~mask])


def fit(x: np.ndarray, y: np.ndarray, params: dict, seed: int) -> ForestState:
    n_trees = int(params.get("n_trees", 100))
    max_depth = params.get("max_depth")
    max_depth = None if max_depth is None else int(max_depth)
    mtry = int(params.get("mtry", max(1, int(np.sqrt(x.shape[1])))))
    bootstrap = bool(params.get("bootstrap", True))

    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        if bootstrap:
            idx = rng.integers(0, len(y), size=len(y))
            xt, yt = x[idx], y[idx]
        else:
            xt, yt = x, y
        trees.append(_grow(xt, yt, 0, max_depth, mtry, rng))
    return ForestState(trees=trees)


def scores(state: ForestState, x: np.ndarray) -> np.ndarray:
    """Fraction of trees voting class 1."""
    votes = np.zeros(len(x))
    tree_out = np.empty(len(x), dtype=np.int64)
    all_idx = np.arange(len(x))
    for tree in state.trees:
        _tree_votes(tree, x, tree_out, all_idx)
        votes += tree_out
    return votes / len(state.trees)


def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"frac_ones": node.frac_ones}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "frac_ones": node.frac_ones,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d: dict) -> TreeNode:
    node = TreeNode(frac_ones=d["frac_ones"])
    if "feature" in d:
        node.feature = d["feature"]
        node.threshold = d["threshold"]
        node.left = _node_from_dict(d["left"])
        node.right = _node_from_dict(d["right"])
    return node


def to_jsonable(state: ForestState) -> dict:
    return {"trees": [_node_to_dict(t) for t in state.trees]}


def from_jsonable(d: dict) -> ForestState:
    return ForestState(trees=[_node_from_dict(t) for t in d["trees"]])
