"""Inner loops for the learners, in two flavours.

Every kernel exists as ``<name>_nb`` (written for numba, compiled through
:func:`autotune._accel.njit`) and ``<name>_np`` (plain numpy, vectorised where
the algorithm allows).  Both agree up to floating point rounding (numpy's
vectorised exp/log may differ from libm in the last ulp); the dispatchers at the bottom choose one according to
``AUTOTUNE_DISABLE_NUMBA``.
"""

from __future__ import annotations

import numpy as np

from ._accel import njit, pick

TAU = 1e-12

# ---------------------------------------------------------------------------
# SMO for   min 0.5 a'Qa + p'a   s.t.  y'a = 0,  0 <= a <= C
# with Q[s, t] = y[s] y[t] K[idx[s], idx[t]].
#
# Working set: i is the maximal violator; j is the violating partner with the
# largest second-order decrease b^2 / a, where b is the violation of the pair
# and a = K_ii + K_jj - 2 K_ij (LIBSVM's rule).  Stopping uses the maximal
# violating pair gap, as before.
# ---------------------------------------------------------------------------


def _smo_np(K, idx, y, p, C, tol, max_iter):
    l = idx.shape[0]
    a = np.zeros(l)
    G = p.astype(np.float64).copy()
    n_iter = 0
    while n_iter < max_iter:
        up = ((y > 0) & (a < C)) | ((y < 0) & (a > 0))
        low = ((y > 0) & (a > 0)) | ((y < 0) & (a < C))
        if not up.any() or not low.any():
            break
        minus_yG = -y * G
        i = int(np.argmax(np.where(up, minus_yG, -np.inf)))
        gmax = minus_yG[i]
        if gmax - np.min(np.where(low, minus_yG, np.inf)) < tol:
            break
        Ki = K[idx, idx[i]]
        b = gmax - minus_yG
        quad = K[idx[i], idx[i]] + K[idx, idx] - 2.0 * Ki
        quad = np.where(quad > 0.0, quad, TAU)
        cand = low & (b > 0.0)
        j = int(np.argmin(np.where(cand, -(b * b) / quad, np.inf)))
        Kj = K[idx, idx[j]]
        Qi = y * y[i] * Ki
        Qj = y * y[j] * Kj
        ai_old, aj_old = a[i], a[j]
        ai, aj = _pair_update(ai_old, aj_old, y[i], y[j], G[i], G[j], Qi[i], Qj[j], Qi[j], C)
        a[i], a[j] = ai, aj
        G += Qi * (ai - ai_old) + Qj * (aj - aj_old)
        n_iter += 1
    return a, G, n_iter


def _pair_update_py(ai, aj, yi, yj, Gi, Gj, Qii, Qjj, Qij, C):
    # Two-variable analytic step with box clipping (LIBSVM update rule).
    if yi != yj:
        quad = Qii + Qjj + 2.0 * Qij
        if quad <= 0.0:
            quad = TAU
        delta = (-Gi - Gj) / quad
        diff = ai - aj
        ai += delta
        aj += delta
        if diff > 0.0:
            if aj < 0.0:
                aj = 0.0
                ai = diff
        else:
            if ai < 0.0:
                ai = 0.0
                aj = -diff
        if diff > 0.0:
            if ai > C:
                ai = C
                aj = C - diff
        else:
            if aj > C:
                aj = C
                ai = C + diff
    else:
        quad = Qii + Qjj - 2.0 * Qij
        if quad <= 0.0:
            quad = TAU
        delta = (Gi - Gj) / quad
        s = ai + aj
        ai -= delta
        aj += delta
        if s > C:
            if ai > C:
                ai = C
                aj = s - C
        else:
            if aj < 0.0:
                aj = 0.0
                ai = s
        if s > C:
            if aj > C:
                aj = C
                ai = s - C
        else:
            if ai < 0.0:
                ai = 0.0
                aj = s
    return ai, aj


_pair_update = _pair_update_py
_pair_update_jit = njit(_pair_update_py)


@njit
def _smo_nb(K, idx, y, p, C, tol, max_iter):
    l = idx.shape[0]
    a = np.zeros(l)
    G = p.copy()
    n_iter = 0
    while n_iter < max_iter:
        gmax = -np.inf
        i = -1
        for t in range(l):
            if (y[t] > 0 and a[t] < C) or (y[t] < 0 and a[t] > 0):
                v = -y[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        if i < 0:
            break
        ki = idx[i]
        gmin = np.inf
        best = np.inf
        j = -1
        for t in range(l):
            if (y[t] > 0 and a[t] > 0) or (y[t] < 0 and a[t] < C):
                v = -y[t] * G[t]
                if v < gmin:
                    gmin = v
                b = gmax - v
                if b > 0.0:
                    kt = idx[t]
                    quad = K[ki, ki] + K[kt, kt] - 2.0 * K[ki, kt]
                    if quad <= 0.0:
                        quad = TAU
                    obj = -(b * b) / quad
                    if obj < best:
                        best = obj
                        j = t
        if j < 0 or gmax - gmin < tol:
            break
        ki = idx[i]
        kj = idx[j]
        Qii = K[ki, ki]
        Qjj = K[kj, kj]
        Qij = y[i] * y[j] * K[ki, kj]
        ai_old = a[i]
        aj_old = a[j]
        ai, aj = _pair_update_jit(ai_old, aj_old, y[i], y[j], G[i], G[j], Qii, Qjj, Qij, C)
        a[i] = ai
        a[j] = aj
        dai = ai - ai_old
        daj = aj - aj_old
        for t in range(l):
            G[t] += y[t] * y[i] * K[idx[t], ki] * dai + y[t] * y[j] * K[idx[t], kj] * daj
        n_iter += 1
    return a, G, n_iter


def smo_rho(a, G, y, C):
    """Offset of the decision function from the final gradient."""
    yG = y * G
    at_upper = a >= C
    at_lower = a <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        return float(yG[free].mean())
    ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
    lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    if np.isinf(ub) and np.isinf(lb):
        return 0.0
    if np.isinf(ub):
        return float(lb)
    if np.isinf(lb):
        return float(ub)
    return float(0.5 * (ub + lb))


def smo_violation(a, G, y, C):
    """Largest KKT violation m(a) - M(a); <= tol at convergence."""
    up = ((y > 0) & (a < C)) | ((y < 0) & (a > 0))
    low = ((y > 0) & (a > 0)) | ((y < 0) & (a < C))
    if not up.any() or not low.any():
        return 0.0
    v = -y * G
    return float(v[up].max() - v[low].min())


# ---------------------------------------------------------------------------
# Weighted least-squares regression trees, grown level by level.
#
# Nodes are numbered breadth first.  A split of node k on feature f at
# threshold t sends rows with x_f <= t left.  Candidate thresholds are the
# midpoints between consecutive distinct sorted values; ties in gain keep the
# lowest feature index, then the lowest threshold.  Any impure node with an
# admissible split is split, even when the best gain is zero: the first XOR
# split gains nothing yet a depth-2 tree solves XOR.
# ---------------------------------------------------------------------------

# a node counts as pure when its weighted sum of squares about the mean is
# below this fraction of its raw sum of squares
MIN_REL_IMPURITY = 1e-12
# A leaf whose weighted mean label is within this of zero votes +1; without
# the band, rounding decides the sign of an exactly balanced leaf.
VOTE_TIE = 1e-12


@njit
def _tree_capacity(n, max_depth):
    cap = 1
    for _ in range(max_depth + 1):
        cap *= 2
        if cap > 2 * n + 2:
            break
    cap -= 1
    if cap > 2 * n + 1:
        cap = 2 * n + 1
    return cap


@njit
def _sorted_values(X, order):
    p, n = order.shape
    xs = np.empty((p, n))
    for f in range(p):
        for r in range(n):
            xs[f, r] = X[order[f, r], f]
    return xs


@njit
def _tree_core(X, order, xs, g, w, max_depth, min_node, fw, iw, active, node_of,
               feature, threshold, left, right, value):
    # fw columns: 0 node_w, 1 node_s, 2 node_q, 3 best_gain, 4 best_thr, 5 cw, 6 cs, 7 last
    # iw columns: 0 node_c, 1 best_feat, 2 cc
    n, p = X.shape
    cap = feature.shape[0]
    for k in range(cap):
        feature[k] = -1
        threshold[k] = 0.0
        left[k] = -1
        right[k] = -1
        value[k] = 0.0
        fw[k, 0] = 0.0
        fw[k, 1] = 0.0
        fw[k, 2] = 0.0
        iw[k, 0] = 0
    for i in range(n):
        node_of[i] = 0
        fw[0, 0] += w[i]
        fw[0, 1] += w[i] * g[i]
        fw[0, 2] += w[i] * g[i] * g[i]
        iw[0, 0] += 1
    n_nodes = 1
    level_start = 0
    level_end = 1
    for depth in range(max_depth):
        any_active = False
        for k in range(level_start, level_end):
            active[k] = (iw[k, 0] >= 2 * min_node and fw[k, 0] > 0.0
                         and fw[k, 2] - fw[k, 1] * fw[k, 1] / fw[k, 0] > MIN_REL_IMPURITY * fw[k, 2])
            fw[k, 3] = -np.inf
            iw[k, 1] = -1
            if active[k]:
                any_active = True
        if not any_active:
            break
        for f in range(p):
            for k in range(level_start, level_end):
                fw[k, 5] = 0.0
                fw[k, 6] = 0.0
                iw[k, 2] = 0
            for r in range(n):
                i = order[f, r]
                k = node_of[i]
                if k < level_start or not active[k]:
                    continue
                x = xs[f, r]
                cl = iw[k, 2]
                if cl > 0 and x > fw[k, 7]:
                    cr = iw[k, 0] - cl
                    if cl >= min_node and cr >= min_node:
                        wl = fw[k, 5]
                        wr = fw[k, 0] - wl
                        if wl > 0.0 and wr > 0.0:
                            sl = fw[k, 6]
                            sr = fw[k, 1] - sl
                            gain = sl * sl / wl + sr * sr / wr - fw[k, 1] * fw[k, 1] / fw[k, 0]
                            if gain > fw[k, 3]:
                                fw[k, 3] = gain
                                iw[k, 1] = f
                                thr = 0.5 * (fw[k, 7] + x)
                                if thr >= x:
                                    thr = fw[k, 7]
                                fw[k, 4] = thr
                fw[k, 5] += w[i]
                fw[k, 6] += w[i] * g[i]
                iw[k, 2] = cl + 1
                fw[k, 7] = x
        new_start = n_nodes
        for k in range(level_start, level_end):
            if active[k] and iw[k, 1] >= 0:
                feature[k] = iw[k, 1]
                threshold[k] = fw[k, 4]
                left[k] = n_nodes
                right[k] = n_nodes + 1
                n_nodes += 2
        if n_nodes == new_start:
            break
        for i in range(n):
            k = node_of[i]
            if k >= level_start and feature[k] >= 0:
                if X[i, feature[k]] <= threshold[k]:
                    c = left[k]
                else:
                    c = right[k]
                node_of[i] = c
                fw[c, 0] += w[i]
                fw[c, 1] += w[i] * g[i]
                fw[c, 2] += w[i] * g[i] * g[i]
                iw[c, 0] += 1
        level_start = new_start
        level_end = n_nodes
    for k in range(n_nodes):
        if fw[k, 0] > 0.0:
            value[k] = fw[k, 1] / fw[k, 0]
    return n_nodes


@njit
def _tree_workspace(n, max_depth):
    cap = _tree_capacity(n, max_depth)
    return (np.empty((cap, 8)), np.empty((cap, 3), np.int64), np.zeros(cap, np.bool_),
            np.zeros(n, np.int64), np.empty(cap, np.int64), np.empty(cap), np.empty(cap, np.int64),
            np.empty(cap, np.int64), np.empty(cap))


@njit
def _grow_tree_nb(X, order, g, w, max_depth, min_node):
    n = X.shape[0]
    xs = _sorted_values(X, order)
    fw, iw, active, node_of, feature, threshold, left, right, value = _tree_workspace(n, max_depth)
    m = _tree_core(X, order, xs, g, w, max_depth, min_node, fw, iw, active, node_of,
                   feature, threshold, left, right, value)
    return (feature[:m].copy(), threshold[:m].copy(), left[:m].copy(), right[:m].copy(),
            value[:m].copy(), node_of)


def _seqsum(a):
    # left-to-right accumulation, matching the compiled loops bit for bit
    return float(np.cumsum(a)[-1]) if a.size else 0.0


def _grow_tree_np(X, order, g, w, max_depth, min_node):
    n, p = X.shape
    wg = w * g
    feature, threshold, left, right = [-1], [0.0], [-1], [-1]
    node_rows = [np.arange(n)]
    node_of = np.zeros(n, dtype=np.int64)
    level = [0]
    for _ in range(max_depth):
        next_level = []
        splits = []
        for k in level:
            rows = node_rows[k]
            c = rows.size
            W = _seqsum(w[rows])
            if c < 2 * min_node or W <= 0.0:
                continue
            S = _seqsum(wg[rows])
            Q = _seqsum(wg[rows] * g[rows])
            if not Q - S * S / W > MIN_REL_IMPURITY * Q:
                continue
            in_node = node_of == k
            best = (-np.inf, -1, 0.0)
            for f in range(p):
                o = order[f][in_node[order[f]]]
                xs = X[o, f]
                cw = np.cumsum(w[o])[:-1]
                cs = np.cumsum(wg[o])[:-1]
                cl = np.arange(1, c)
                ok = (xs[1:] > xs[:-1]) & (cl >= min_node) & (c - cl >= min_node)
                wr = W - cw
                ok &= (cw > 0.0) & (wr > 0.0)
                if not ok.any():
                    continue
                with np.errstate(divide="ignore", invalid="ignore"):
                    gain = cs * cs / cw + (S - cs) ** 2 / wr - S * S / W
                gain = np.where(ok, gain, -np.inf)
                r = int(np.argmax(gain))
                if gain[r] > best[0]:
                    thr = 0.5 * (xs[r] + xs[r + 1])
                    if thr >= xs[r + 1]:
                        thr = xs[r]
                    best = (gain[r], f, thr)
            if best[1] >= 0:
                splits.append((k, best[1], best[2]))
        if not splits:
            break
        for k, f, thr in splits:
            rows = node_rows[k]
            go_left = X[rows, f] <= thr
            feature[k], threshold[k] = f, thr
            for child_rows in (rows[go_left], rows[~go_left]):
                cid = len(feature)
                feature.append(-1)
                threshold.append(0.0)
                left.append(-1)
                right.append(-1)
                node_rows.append(child_rows)
                node_of[child_rows] = cid
                next_level.append(cid)
            left[k], right[k] = next_level[-2], next_level[-1]
        level = next_level
    value = np.zeros(len(feature))
    for k, rows in enumerate(node_rows):
        W = _seqsum(w[rows])
        if W > 0.0:
            value[k] = _seqsum(wg[rows]) / W
    return (np.asarray(feature, dtype=np.int64), np.asarray(threshold, dtype=np.float64),
            np.asarray(left, dtype=np.int64), np.asarray(right, dtype=np.int64), value, node_of)


@njit
def _tree_apply_nb(X, feature, threshold, left, right):
    m = X.shape[0]
    out = np.empty(m, np.int64)
    for i in range(m):
        k = 0
        while feature[k] >= 0:
            if X[i, feature[k]] <= threshold[k]:
                k = left[k]
            else:
                k = right[k]
        out[i] = k
    return out


def _tree_apply_np(X, feature, threshold, left, right):
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    while True:
        f = feature[node]
        internal = f >= 0
        if not internal.any():
            return node
        r = rows[internal]
        k = node[internal]
        go_left = X[r, f[internal]] <= threshold[k]
        node[r] = np.where(go_left, left[k], right[k])


@njit
def _ensemble_sum_nb(X, feature, threshold, left, right, value, offsets, weights):
    m = X.shape[0]
    out = np.zeros(m)
    n_trees = offsets.shape[0] - 1
    for t in range(n_trees):
        base = offsets[t]
        wt = weights[t]
        for i in range(m):
            k = 0
            while feature[base + k] >= 0:
                if X[i, feature[base + k]] <= threshold[base + k]:
                    k = left[base + k]
                else:
                    k = right[base + k]
            out[i] += wt * value[base + k]
    return out


def _ensemble_sum_np(X, feature, threshold, left, right, value, offsets, weights):
    out = np.zeros(X.shape[0])
    for t in range(offsets.shape[0] - 1):
        sl = slice(offsets[t], offsets[t + 1])
        leaf = _tree_apply_np(X, feature[sl], threshold[sl], left[sl], right[sl])
        out += weights[t] * value[sl][leaf]
    return out


# ---------------------------------------------------------------------------
# Boosting loops.  Trees are returned concatenated; tree t occupies
# [offsets[t], offsets[t+1]) and its child indices are local to that range.
# ---------------------------------------------------------------------------


def _gbm_loop(grow, X, order, y, n_trees, depth, min_node, shrinkage, classification):
    n = X.shape[0]
    ones = np.ones(n)
    if classification:
        q = min(max(y.mean(), 1e-12), 1.0 - 1e-12)
        f0 = np.log(q / (1.0 - q))
    else:
        f0 = y.mean()
    F = np.full(n, f0)
    parts = []
    losses = np.empty(n_trees + 1)
    losses[0] = _gbm_loss(y, F, classification)
    for t in range(n_trees):
        if classification:
            prob = 1.0 / (1.0 + np.exp(-F))
            resid = y - prob
        else:
            resid = y - F
        feat, thr, lft, rgt, val, node_of = grow(X, order, resid, ones, depth, min_node)
        if classification:
            num = np.bincount(node_of, weights=resid, minlength=feat.size)
            den = np.bincount(node_of, weights=prob * (1.0 - prob), minlength=feat.size)
            val = num / np.maximum(den, 1e-12)
        F += shrinkage * val[node_of]
        losses[t + 1] = _gbm_loss(y, F, classification)
        parts.append((feat, thr, lft, rgt, val))
    return f0, parts, losses


def _gbm_loss(y, F, classification):
    if classification:
        # mean binomial deviance / 2 in logit form
        return float(np.mean(np.logaddexp(0.0, F) - y * F))
    r = y - F
    return float(np.mean(r * r))


def _gbm_np(X, order, y, n_trees, depth, min_node, shrinkage, classification):
    f0, parts, losses = _gbm_loop(_grow_tree_np, X, order, y, n_trees, depth, min_node, shrinkage,
                                  classification)
    return (f0,) + _concat(parts) + (losses,)


def _concat(parts):
    if not parts:
        e_i = np.zeros(0, np.int64)
        return e_i, np.zeros(0), e_i, e_i, np.zeros(0), np.zeros(1, np.int64)
    offsets = np.zeros(len(parts) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([pt[0].size for pt in parts])
    cat = [np.concatenate([pt[i] for pt in parts]) for i in range(5)]
    return cat[0], cat[1], cat[2], cat[3], cat[4], offsets


@njit
def _gbm_nb(X, order, y, n_trees, depth, min_node, shrinkage, classification):
    n = X.shape[0]
    ones = np.ones(n)
    if classification:
        q = min(max(y.mean(), 1e-12), 1.0 - 1e-12)
        f0 = np.log(q / (1.0 - q))
    else:
        f0 = y.mean()
    F = np.full(n, f0)
    losses = np.empty(n_trees + 1)
    losses[0] = _gbm_loss_nb(y, F, classification)
    cap = 16
    feat_all = np.empty(cap, np.int64)
    thr_all = np.empty(cap)
    lft_all = np.empty(cap, np.int64)
    rgt_all = np.empty(cap, np.int64)
    val_all = np.empty(cap)
    offsets = np.zeros(n_trees + 1, np.int64)
    used = 0
    resid = np.empty(n)
    prob = np.empty(n)
    xs = _sorted_values(X, order)
    fw, iw, active, node_of, feat, thr, lft, rgt, val = _tree_workspace(n, depth)
    for t in range(n_trees):
        for i in range(n):
            if classification:
                prob[i] = 1.0 / (1.0 + np.exp(-F[i]))
                resid[i] = y[i] - prob[i]
            else:
                resid[i] = y[i] - F[i]
        m = _tree_core(X, order, xs, resid, ones, depth, min_node, fw, iw, active, node_of,
                       feat, thr, lft, rgt, val)
        if classification:
            num = np.zeros(m)
            den = np.zeros(m)
            for i in range(n):
                num[node_of[i]] += resid[i]
                den[node_of[i]] += prob[i] * (1.0 - prob[i])
            for k in range(m):
                val[k] = num[k] / max(den[k], 1e-12)
        for i in range(n):
            F[i] += shrinkage * val[node_of[i]]
        losses[t + 1] = _gbm_loss_nb(y, F, classification)
        if used + m > cap:
            while used + m > cap:
                cap *= 2
            feat_all = _grow_i(feat_all, cap)
            lft_all = _grow_i(lft_all, cap)
            rgt_all = _grow_i(rgt_all, cap)
            thr_all = _grow_f(thr_all, cap)
            val_all = _grow_f(val_all, cap)
        feat_all[used:used + m] = feat[:m]
        thr_all[used:used + m] = thr[:m]
        lft_all[used:used + m] = lft[:m]
        rgt_all[used:used + m] = rgt[:m]
        val_all[used:used + m] = val[:m]
        used += m
        offsets[t + 1] = used
    return (f0, feat_all[:used].copy(), thr_all[:used].copy(), lft_all[:used].copy(),
            rgt_all[:used].copy(), val_all[:used].copy(), offsets, losses)


@njit
def _gbm_loss_nb(y, F, classification):
    s = 0.0
    n = y.shape[0]
    for i in range(n):
        if classification:
            f = F[i]
            # log(1 + e^f) computed stably
            if f > 0:
                s += f + np.log1p(np.exp(-f)) - y[i] * f
            else:
                s += np.log1p(np.exp(f)) - y[i] * f
        else:
            r = y[i] - F[i]
            s += r * r
    return s / n


@njit
def _grow_i(a, cap):
    out = np.empty(cap, np.int64)
    out[:a.shape[0]] = a
    return out


@njit
def _grow_f(a, cap):
    out = np.empty(cap)
    out[:a.shape[0]] = a
    return out


# Discrete AdaBoost on labels in {-1, +1}.  The weak learner is a weighted
# least-squares tree on the signed labels (equivalent to weighted Gini for two
# classes) whose leaves vote with the sign of their weighted mean.


def _ada_np(X, order, ypm, n_iters, depth, shrinkage):
    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    parts, alphas, errs = [], [], []
    for _ in range(n_iters):
        feat, thr, lft, rgt, val, node_of = _grow_tree_np(X, order, ypm, w, depth, 1)
        vote = np.where(val >= -VOTE_TIE, 1.0, -1.0)
        h = vote[node_of]
        miss = h != ypm
        err = float(w[miss].sum() / w.sum())
        if err >= 0.5:
            break
        alpha = 0.5 * shrinkage * np.log((1.0 - max(err, 1e-10)) / max(err, 1e-10))
        parts.append((feat, thr, lft, rgt, vote))
        alphas.append(alpha)
        errs.append(err)
        if err <= 0.0:
            break
        w = w * np.exp(-alpha * ypm * h)
        w /= w.sum()
    return _concat(parts) + (np.asarray(alphas, dtype=np.float64), np.asarray(errs, dtype=np.float64))


@njit
def _ada_nb(X, order, ypm, n_iters, depth, shrinkage):
    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    cap = 16
    feat_all = np.empty(cap, np.int64)
    thr_all = np.empty(cap)
    lft_all = np.empty(cap, np.int64)
    rgt_all = np.empty(cap, np.int64)
    val_all = np.empty(cap)
    offsets = np.zeros(n_iters + 1, np.int64)
    alphas = np.zeros(n_iters)
    errs = np.zeros(n_iters)
    used = 0
    n_kept = 0
    h = np.empty(n)
    xs = _sorted_values(X, order)
    fw, iw, active, node_of, feat, thr, lft, rgt, val = _tree_workspace(n, depth)
    for _ in range(n_iters):
        m = _tree_core(X, order, xs, ypm, w, depth, 1, fw, iw, active, node_of,
                       feat, thr, lft, rgt, val)
        vote = np.empty(m)
        for k in range(m):
            vote[k] = 1.0 if val[k] >= -VOTE_TIE else -1.0
        miss = 0.0
        tot = 0.0
        for i in range(n):
            h[i] = vote[node_of[i]]
            tot += w[i]
            if h[i] != ypm[i]:
                miss += w[i]
        err = miss / tot
        if err >= 0.5:
            break
        e = max(err, 1e-10)
        alpha = 0.5 * shrinkage * np.log((1.0 - e) / e)
        if used + m > cap:
            while used + m > cap:
                cap *= 2
            feat_all = _grow_i(feat_all, cap)
            lft_all = _grow_i(lft_all, cap)
            rgt_all = _grow_i(rgt_all, cap)
            thr_all = _grow_f(thr_all, cap)
            val_all = _grow_f(val_all, cap)
        feat_all[used:used + m] = feat[:m]
        thr_all[used:used + m] = thr[:m]
        lft_all[used:used + m] = lft[:m]
        rgt_all[used:used + m] = rgt[:m]
        val_all[used:used + m] = vote
        used += m
        alphas[n_kept] = alpha
        errs[n_kept] = err
        n_kept += 1
        offsets[n_kept] = used
        if err <= 0.0:
            break
        s = 0.0
        for i in range(n):
            w[i] *= np.exp(-alpha * ypm[i] * h[i])
            s += w[i]
        for i in range(n):
            w[i] /= s
    return (feat_all[:used].copy(), thr_all[:used].copy(), lft_all[:used].copy(),
            rgt_all[:used].copy(), val_all[:used].copy(), offsets[:n_kept + 1].copy(),
            alphas[:n_kept].copy(), errs[:n_kept].copy())


# ---------------------------------------------------------------------------
# Cyclic coordinate descent for the weighted elastic-net least-squares problem
#   (1/2n) sum_i w_i (z_i - b0 - x_i'b)^2 + lam * (alpha |b|_1 + (1-alpha)/2 |b|^2)
# Columns of X are expected to be standardised.  Returns the objective after
# every full sweep (intercept update included).
# ---------------------------------------------------------------------------


@njit
def _soft_nb(z, g):
    if z > g:
        return z - g
    if z < -g:
        return z + g
    return 0.0


@njit
def _cd_nb(X, z, w, beta, b0, lam, alpha, max_sweeps, tol):
    n, p = X.shape
    beta = beta.copy()
    r = np.empty(n)
    for i in range(n):
        s = b0
        for j in range(p):
            s += X[i, j] * beta[j]
        r[i] = z[i] - s
    v = np.zeros(p)
    for j in range(p):
        s = 0.0
        for i in range(n):
            s += w[i] * X[i, j] * X[i, j]
        v[j] = s / n
    wsum = 0.0
    for i in range(n):
        wsum += w[i]
    l1 = lam * alpha
    l2 = lam * (1.0 - alpha)
    history = np.empty(max_sweeps)
    n_sweeps = 0
    converged = False
    while n_sweeps < max_sweeps:
        dmax = 0.0
        for j in range(p):
            if v[j] == 0.0:
                continue
            s = 0.0
            for i in range(n):
                s += w[i] * X[i, j] * r[i]
            old = beta[j]
            new = _soft_nb(s / n + v[j] * old, l1) / (v[j] + l2)
            d = new - old
            if d != 0.0:
                beta[j] = new
                for i in range(n):
                    r[i] -= X[i, j] * d
                if v[j] * d * d > dmax:
                    dmax = v[j] * d * d
        s = 0.0
        for i in range(n):
            s += w[i] * r[i]
        d0 = s / wsum
        b0 += d0
        for i in range(n):
            r[i] -= d0
        if d0 * d0 * wsum / n > dmax:
            dmax = d0 * d0 * wsum / n
        obj = 0.0
        for i in range(n):
            obj += w[i] * r[i] * r[i]
        obj /= 2.0 * n
        pen = 0.0
        for j in range(p):
            pen += l1 * abs(beta[j]) + 0.5 * l2 * beta[j] * beta[j]
        history[n_sweeps] = obj + pen
        n_sweeps += 1
        if dmax < tol:
            converged = True
            break
    return beta, b0, history[:n_sweeps].copy(), converged


def _cd_np(X, z, w, beta, b0, lam, alpha, max_sweeps, tol):
    n, p = X.shape
    beta = beta.astype(np.float64).copy()
    r = z - b0 - X @ beta
    v = (w[:, None] * X * X).sum(axis=0) / n
    wsum = w.sum()
    l1 = lam * alpha
    l2 = lam * (1.0 - alpha)
    history = []
    converged = False
    while len(history) < max_sweeps:
        dmax = 0.0
        for j in range(p):
            if v[j] == 0.0:
                continue
            xj = X[:, j]
            old = beta[j]
            zj = np.dot(w * xj, r) / n + v[j] * old
            new = np.sign(zj) * max(abs(zj) - l1, 0.0) / (v[j] + l2)
            d = new - old
            if d != 0.0:
                beta[j] = new
                r -= xj * d
                dmax = max(dmax, v[j] * d * d)
        d0 = np.dot(w, r) / wsum
        b0 += d0
        r -= d0
        dmax = max(dmax, d0 * d0 * wsum / n)
        obj = np.dot(w, r * r) / (2.0 * n)
        history.append(obj + l1 * np.abs(beta).sum() + 0.5 * l2 * np.dot(beta, beta))
        if dmax < tol:
            converged = True
            break
    return beta, b0, np.asarray(history), converged


# ---------------------------------------------------------------------------
# Dispatchers
# ---------------------------------------------------------------------------


def smo_solve(K, idx, y, p, C, tol=1e-3, max_iter=None, use_numba=None):
    """Solve the box/equality constrained dual; returns (a, G, n_iter)."""
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    if max_iter is None:
        max_iter = max(10_000_000, 100 * idx.shape[0])
    fn = pick(_smo_nb, _smo_np, use_numba)
    return fn(np.ascontiguousarray(K, dtype=np.float64), idx,
              np.ascontiguousarray(y, dtype=np.float64), np.ascontiguousarray(p, dtype=np.float64),
              float(C), float(tol), int(max_iter))


def sort_order(X):
    """Per-feature stable argsort, shape (p, n)."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))


def grow_tree(X, g, w=None, max_depth=3, min_node=1, order=None, use_numba=None):
    X = np.ascontiguousarray(X, dtype=np.float64)
    g = np.ascontiguousarray(g, dtype=np.float64)
    w = np.ones(X.shape[0]) if w is None else np.ascontiguousarray(w, dtype=np.float64)
    if order is None:
        order = sort_order(X)
    fn = pick(_grow_tree_nb, _grow_tree_np, use_numba)
    return fn(X, order, g, w, int(max_depth), int(min_node))


def tree_apply(X, feature, threshold, left, right, use_numba=None):
    fn = pick(_tree_apply_nb, _tree_apply_np, use_numba)
    return fn(np.ascontiguousarray(X, dtype=np.float64), feature, threshold, left, right)


def ensemble_sum(X, feature, threshold, left, right, value, offsets, weights, use_numba=None):
    fn = pick(_ensemble_sum_nb, _ensemble_sum_np, use_numba)
    return fn(np.ascontiguousarray(X, dtype=np.float64), feature, threshold, left, right, value,
              offsets, np.ascontiguousarray(weights, dtype=np.float64))


def gbm_boost(X, y, n_trees, depth, min_node, shrinkage, classification, use_numba=None):
    """Returns (f0, feature, threshold, left, right, value, offsets, train_losses)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    fn = pick(_gbm_nb, _gbm_np, use_numba)
    return fn(X, sort_order(X), y, int(n_trees), int(depth), int(min_node), float(shrinkage),
              bool(classification))


def ada_boost(X, ypm, n_iters, depth, shrinkage, use_numba=None):
    """Returns (feature, threshold, left, right, vote, offsets, alphas, weighted_errors)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    ypm = np.ascontiguousarray(ypm, dtype=np.float64)
    fn = pick(_ada_nb, _ada_np, use_numba)
    return fn(X, sort_order(X), ypm, int(n_iters), int(depth), float(shrinkage))


def cd_solve(X, z, w, beta, b0, lam, alpha, max_sweeps=100_000, tol=1e-14, use_numba=None):
    """Returns (beta, intercept, objective_per_sweep, converged)."""
    fn = pick(_cd_nb, _cd_np, use_numba)
    return fn(np.ascontiguousarray(X, dtype=np.float64), np.ascontiguousarray(z, dtype=np.float64),
              np.ascontiguousarray(w, dtype=np.float64), np.ascontiguousarray(beta, dtype=np.float64),
              float(b0), float(lam), float(alpha), int(max_sweeps), float(tol))
