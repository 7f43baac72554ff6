"""Gradient-boosted decision trees for binary classification, from scratch.

Second-order boosting with logistic loss: per round, gradients g = p - y and
hessians h = p(1-p) are computed at the current margins, one depth-limited
regression tree is grown by exact greedy split search, and margins advance by
eta times the leaf weights. Split candidates are the midpoints between
consecutive distinct sorted feature values; gain is the usual structure-score
improvement 0.5*[GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam)] - gamma, leaf
weight is -G/(H+lam).

Everything is deterministic: no subsampling, ties broken by lowest feature
index then lowest threshold. The tree grower is a level-wise numba kernel
operating on per-feature presorted arrays with ping-pong partition buffers;
per-node prefix sums are accumulated left to right so results are bitwise
reproducible and testable against a plain-Python oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from numba import njit
from scipy.special import expit, logit

_LEAF = -1


@dataclass(frozen=True)
class TrainConfig:
    rounds: int = 200
    max_depth: int = 3
    eta: float = 0.6
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_child_weight: float = 1.0
    base_score: float = 0.5

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must be in (0, 1]")
        if self.reg_lambda < 0.0 or self.gamma < 0.0 or self.min_child_weight < 0.0:
            raise ValueError("reg_lambda, gamma, min_child_weight must be >= 0")
        if not 0.0 < self.base_score < 1.0:
            raise ValueError("base_score must be in (0, 1)")


@dataclass(frozen=True)
class Tree:
    """Flat node arrays; feature == -1 marks a leaf.

    Internal nodes carry (feature, threshold, left, right, gain); leaves carry
    value. Routing rule: x[feature] <= threshold goes left.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    def apply(self, x):
        """Leaf index for each row of x."""
        x = np.ascontiguousarray(x, dtype=np.float64)
        out = np.empty(x.shape[0], dtype=np.int32)
        _apply_kernel(x, self.feature, self.threshold, self.left, self.right, out)
        return out

    def predict_value(self, x):
        return self.value[self.apply(x)]


@dataclass(frozen=True)
class GbmModel:
    """Ordered trees plus the constant base margin; eta scales every tree."""

    config: TrainConfig
    trees: tuple
    base_margin: float
    n_features: int


def logistic_grad_hess(margin, y):
    """Gradient and hessian of the logistic loss w.r.t. the margin."""
    p = expit(np.asarray(margin, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    return p - y, p * (1.0 - p)


@njit(cache=True)
def _apply_kernel(x, feat, thr, left, right, out):
    n = x.shape[0]
    for i in range(n):
        nd = 0
        while feat[nd] >= 0:
            if x[i, feat[nd]] <= thr[nd]:
                nd = left[nd]
            else:
                nd = right[nd]
        out[i] = nd


@njit(cache=True)
def _grow_kernel(
    xs0, idx0, gh, lam, gam, mcw, max_depth,
    xs_a, idx_a, gh_a,
    xs_b, idx_b, gh_b,
    node_of, go_left,
    feat, thr, left, right, value, gain,
):
    """Level-wise exact-greedy growth; returns the number of nodes written.

    xs0/idx0 hold, per feature, the globally sorted values and record ids.
    gh is the (n, 2) interleaved gradient/hessian table (one cache line per
    record). Buffers a/b hold the working copies and swap roles every level
    as node segments are partitioned.
    """
    n_feat, n = xs0.shape
    max_nodes = feat.shape[0]

    seg_lo = np.empty(max_nodes, np.int64)
    seg_hi = np.empty(max_nodes, np.int64)
    gsum = np.empty(max_nodes, np.float64)
    hsum = np.empty(max_nodes, np.float64)
    bfeat = np.empty(max_nodes, np.int64)
    bpos = np.empty(max_nodes, np.int64)
    bthr = np.empty(max_nodes, np.float64)
    bgain = np.empty(max_nodes, np.float64)
    bgl = np.empty(max_nodes, np.float64)
    bhl = np.empty(max_nodes, np.float64)
    cur = np.empty(max_nodes, np.int64)
    nxt = np.empty(max_nodes, np.int64)

    for f in range(n_feat):
        xs0_f = xs0[f]
        idx0_f = idx0[f]
        xs_f = xs_a[f]
        idx_f = idx_a[f]
        gh_f = gh_a[f]
        for j in range(n):
            rid = idx0_f[j]
            xs_f[j] = xs0_f[j]
            idx_f[j] = rid
            gh_f[j, 0] = gh[rid, 0]
            gh_f[j, 1] = gh[rid, 1]

    gt = 0.0
    ht = 0.0
    for i in range(n):
        gt += gh[i, 0]
        ht += gh[i, 1]
        node_of[i] = 0

    seg_lo[0] = 0
    seg_hi[0] = n
    gsum[0] = gt
    hsum[0] = ht
    cur[0] = 0
    n_cur = 1
    n_nodes = 1
    in_a = True

    for _level in range(max_depth):
        if n_cur == 0:
            break
        last = _level == max_depth - 1
        if in_a:
            xs_c, idx_c, gh_c = xs_a, idx_a, gh_a
            xs_n, idx_n, gh_n = xs_b, idx_b, gh_b
        else:
            xs_c, idx_c, gh_c = xs_b, idx_b, gh_b
            xs_n, idx_n, gh_n = xs_a, idx_a, gh_a

        # scan: best admissible split per active node
        for t in range(n_cur):
            nd = cur[t]
            lo = seg_lo[nd]
            hi = seg_hi[nd]
            g_tot = gsum[nd]
            h_tot = hsum[nd]
            parent_score = g_tot * g_tot / (h_tot + lam)
            best_gain = 0.0
            best_f = -1
            best_p = -1
            best_t = 0.0
            best_gl = 0.0
            best_hl = 0.0
            if hi - lo >= 2:
                for f in range(n_feat):
                    xs_f = xs_c[f]
                    gh_f = gh_c[f]
                    gl = 0.0
                    hl = 0.0
                    for j in range(lo, hi - 1):
                        gl += gh_f[j, 0]
                        hl += gh_f[j, 1]
                        xj = xs_f[j]
                        xn = xs_f[j + 1]
                        if xj == xn:
                            continue
                        hr = h_tot - hl
                        if hl < mcw or hr < mcw:
                            continue
                        mid = 0.5 * (xj + xn)
                        if mid >= xn:
                            continue  # midpoint rounded onto the right value
                        gr = g_tot - gl
                        sg = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent_score) - gam
                        if sg > best_gain:
                            best_gain = sg
                            best_f = f
                            best_p = j
                            best_t = mid
                            best_gl = gl
                            best_hl = hl
            bfeat[nd] = best_f
            bpos[nd] = best_p
            bthr[nd] = best_t
            bgain[nd] = best_gain
            bgl[nd] = best_gl
            bhl[nd] = best_hl

        # apply: finalize leaves, allocate children, partition segments
        n_nxt = 0
        for t in range(n_cur):
            nd = cur[t]
            lo = seg_lo[nd]
            hi = seg_hi[nd]
            bf = bfeat[nd]
            if bf < 0:
                feat[nd] = _LEAF
                left[nd] = _LEAF
                right[nd] = _LEAF
                thr[nd] = 0.0
                gain[nd] = 0.0
                value[nd] = -gsum[nd] / (hsum[nd] + lam)
                continue
            lc = n_nodes
            rc = n_nodes + 1
            n_nodes += 2
            feat[nd] = bf
            thr[nd] = bthr[nd]
            left[nd] = lc
            right[nd] = rc
            gain[nd] = bgain[nd]
            value[nd] = 0.0
            split = bpos[nd]
            seg_lo[lc] = lo
            seg_hi[lc] = split + 1
            seg_lo[rc] = split + 1
            seg_hi[rc] = hi
            gsum[lc] = bgl[nd]
            hsum[lc] = bhl[nd]
            gsum[rc] = gsum[nd] - bgl[nd]
            hsum[rc] = hsum[nd] - bhl[nd]
            idx_bf = idx_c[bf]
            if last:
                # children are leaves; record routing only, skip the partition
                for j in range(lo, hi):
                    node_of[idx_bf[j]] = lc if j <= split else rc
            else:
                for j in range(lo, hi):
                    rid = idx_bf[j]
                    if j <= split:
                        go_left[rid] = 1
                        node_of[rid] = lc
                    else:
                        go_left[rid] = 0
                        node_of[rid] = rc
                for f in range(n_feat):
                    xs_cf = xs_c[f]
                    idx_cf = idx_c[f]
                    gh_cf = gh_c[f]
                    xs_nf = xs_n[f]
                    idx_nf = idx_n[f]
                    gh_nf = gh_n[f]
                    wl = lo
                    wr = split + 1
                    for j in range(lo, hi):
                        rid = idx_cf[j]
                        if go_left[rid] == 1:
                            xs_nf[wl] = xs_cf[j]
                            idx_nf[wl] = rid
                            gh_nf[wl, 0] = gh_cf[j, 0]
                            gh_nf[wl, 1] = gh_cf[j, 1]
                            wl += 1
                        else:
                            xs_nf[wr] = xs_cf[j]
                            idx_nf[wr] = rid
                            gh_nf[wr, 0] = gh_cf[j, 0]
                            gh_nf[wr, 1] = gh_cf[j, 1]
                            wr += 1
            nxt[n_nxt] = lc
            nxt[n_nxt + 1] = rc
            n_nxt += 2

        for t in range(n_nxt):
            cur[t] = nxt[t]
        n_cur = n_nxt
        in_a = not in_a

    # depth limit reached: remaining actives become leaves
    for t in range(n_cur):
        nd = cur[t]
        feat[nd] = _LEAF
        left[nd] = _LEAF
        right[nd] = _LEAF
        thr[nd] = 0.0
        gain[nd] = 0.0
        value[nd] = -gsum[nd] / (hsum[nd] + lam)

    return n_nodes


class _Workspace:
    """Presorted feature arrays and scratch buffers reused across rounds."""

    def __init__(self, x, max_depth):
        x = np.ascontiguousarray(x, dtype=np.float64)
        n, n_feat = x.shape
        order = np.argsort(x, axis=0, kind="stable")
        self.xs0 = np.ascontiguousarray(np.take_along_axis(x, order, axis=0).T)
        self.idx0 = order.T.astype(np.int32)
        shape = (n_feat, n)
        self.xs_a = np.empty(shape)
        self.xs_b = np.empty(shape)
        self.gh_a = np.empty((n_feat, n, 2))
        self.gh_b = np.empty((n_feat, n, 2))
        self.gh = np.empty((n, 2))
        self.idx_a = np.empty(shape, dtype=np.int32)
        self.idx_b = np.empty(shape, dtype=np.int32)
        self.node_of = np.empty(n, dtype=np.int32)
        self.go_left = np.empty(n, dtype=np.uint8)
        self.max_nodes = 2 ** (max_depth + 1) - 1

    def grow(self, g, h, config):
        """Grow one tree on the workspace data; leaves land in self.node_of."""
        m = self.max_nodes
        feat = np.empty(m, dtype=np.int32)
        thr = np.empty(m, dtype=np.float64)
        left = np.empty(m, dtype=np.int32)
        right = np.empty(m, dtype=np.int32)
        value = np.empty(m, dtype=np.float64)
        gain = np.empty(m, dtype=np.float64)
        self.gh[:, 0] = g
        self.gh[:, 1] = h
        n_nodes = _grow_kernel(
            self.xs0, self.idx0, self.gh,
            float(config.reg_lambda), float(config.gamma),
            float(config.min_child_weight), config.max_depth,
            self.xs_a, self.idx_a, self.gh_a,
            self.xs_b, self.idx_b, self.gh_b,
            self.node_of, self.go_left,
            feat, thr, left, right, value, gain,
        )
        tree = Tree(
            feature=feat[:n_nodes].copy(),
            threshold=thr[:n_nodes].copy(),
            left=left[:n_nodes].copy(),
            right=right[:n_nodes].copy(),
            value=value[:n_nodes].copy(),
            gain=gain[:n_nodes].copy(),
        )
        assert np.all(tree.gain[tree.feature >= 0] > 0.0)
        return tree


def build_tree(x, g, h, config):
    """Grow a single tree on (x, g, h) under config; standalone convenience."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape[0] == 0:
        raise ValueError("empty data")
    return _Workspace(x, config.max_depth).grow(g, h, config)


def best_split(x, g, h, config):
    """Best admissible first split of the node holding all given records.

    Returns (feature, threshold, gain) with the 0-based feature index, or
    None when no candidate has positive gain and min_child_weight on both
    sides.
    """
    if np.asarray(x).shape[0] < 2:
        raise ValueError("need at least 2 records")
    tree = build_tree(x, g, h, replace(config, max_depth=1))
    if tree.feature[0] < 0:
        return None
    return int(tree.feature[0]), float(tree.threshold[0]), float(tree.gain[0])


def train(x, y, config, eval_sets=()):
    """Boost `config.rounds` trees; returns (model, accuracy curves).

    eval_sets is a sequence of (x_eval, y_eval); after every round the label
    accuracy (margin > 0 predicts 1) is recorded for each, so curves have
    shape (rounds,) each. Margins are maintained incrementally.
    """
    x_arr = np.ascontiguousarray(x, dtype=np.float64)
    n = x_arr.shape[0]
    if n == 0:
        raise ValueError("empty training set")
    y_arr = np.asarray(y)
    if np.unique(y_arr).size < 2:
        warnings.warn("training set contains a single class")
    yf = y_arr.astype(np.float64)

    ws = _Workspace(x_arr, config.max_depth)
    base = float(logit(config.base_score))
    margin = np.full(n, base)

    evals = []
    for xe, ye in eval_sets:
        # reuse training leaf assignments when the eval set is the training set
        same = xe is x
        xe_arr = x_arr if same else np.ascontiguousarray(xe, dtype=np.float64)
        evals.append((same, xe_arr, np.asarray(ye) == 1, np.full(xe_arr.shape[0], base)))
    curves = [np.empty(config.rounds) for _ in evals]

    trees = []
    for r in range(config.rounds):
        gvec, hvec = logistic_grad_hess(margin, yf)
        tree = ws.grow(gvec, hvec, config)
        trees.append(tree)
        margin += config.eta * tree.value[ws.node_of]
        for e, (same, xe_arr, ye1, emargin) in enumerate(evals):
            emargin += config.eta * (tree.value[ws.node_of] if same else tree.predict_value(xe_arr))
            curves[e][r] = float(np.mean((emargin > 0.0) == ye1))

    model = GbmModel(config=config, trees=tuple(trees), base_margin=base, n_features=x_arr.shape[1])
    return model, curves


def predict_margin(model, x):
    """Raw additive score: base margin plus eta times each tree's value."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    margin = np.full(pts.shape[0], model.base_margin)
    for tree in model.trees:
        margin += model.config.eta * tree.predict_value(pts)
    return float(margin[0]) if single else margin


def predict_label(model, x):
    """1 iff margin > 0 (margin exactly 0 predicts 0)."""
    m = predict_margin(model, x)
    if np.ndim(m) == 0:
        return np.int8(m > 0.0)
    return (m > 0.0).astype(np.int8)


def feature_importance(model):
    """Per-feature total split gain, normalized to sum to 1 (zeros if no splits)."""
    imp = np.zeros(model.n_features)
    for tree in model.trees:
        internal = tree.feature >= 0
        np.add.at(imp, tree.feature[internal], tree.gain[internal])
    total = imp.sum()
    return imp / total if total > 0.0 else imp


def dump_model(model):
    """Readable text dump for debugging; not a stability-guaranteed format."""
    lines = [
        f"gbm trees={len(model.trees)} base_margin={model.base_margin:.17g} "
        f"eta={model.config.eta:.17g}"
    ]
    for t_i, tree in enumerate(model.trees):
        lines.append(f"tree {t_i} nodes={tree.n_nodes}")
        for nd in range(tree.n_nodes):
            if tree.feature[nd] >= 0:
                lines.append(
                    f"  {nd}: [f{tree.feature[nd]} <= {tree.threshold[nd]:.17g}] "
                    f"left={tree.left[nd]} right={tree.right[nd]} gain={tree.gain[nd]:.17g}"
                )
            else:
                lines.append(f"  {nd}: leaf value={tree.value[nd]:.17g}")
    return "\n".join(lines)
