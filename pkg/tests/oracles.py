"""Independent reference implementations used as test oracles.

Deliberately primitive: enumerative or step-by-step transliterations kept
separate from the production code paths they check.
"""

from itertools import permutations


def brute_force_assignment_value(matrix, tau):
    """Maximum total IoU over all gated one-to-one assignments.

    Pads to a square weight matrix where gated pairs contribute zero, then
    maximizes over all full permutations; any partial gated matching is the
    feasible subset of some permutation, so the optima coincide.
    """
    n = len(matrix)
    m = len(matrix[0]) if n else 0
    size = max(n, m)
    w = [[0.0] * size for _ in range(size)]
    for i in range(n):
        for j in range(m):
            if matrix[i][j] >= tau:
                w[i][j] = matrix[i][j]
    best = 0.0
    for perm in permutations(range(size)):
        total = sum(w[i][perm[i]] for i in range(size))
        if total > best:
            best = total
    return best


def rescore_oracle_step(cl_j, conf_agg, history, cl_i, conf_i,
                        eps=1e-4, hist_len=3):
    """One fusion update, transliterated step by step from the update rules."""
    switched = False
    if cl_j == cl_i:
        conf_agg = 1.0 - (1.0 - conf_i) * (1.0 - conf_agg)
    else:
        if conf_agg < conf_i:
            cl_j = cl_i
            conf_agg = conf_i
            switched = True
        else:
            conf_agg = 1.0 - (1.0 - conf_agg) / (1.0 - conf_i)
            conf_agg = max(conf_agg, 0.0)
            if conf_agg < conf_i:
                cl_j = cl_i
                conf_agg = conf_i
                switched = True
    if switched:
        history = [conf_i]
    else:
        history = (list(history) + [conf_i])[-hist_len:]
    conf_j = sum(history) / len(history)
    conf_agg = min(conf_agg, 1.0 - eps)
    return cl_j, conf_j, conf_agg, history, switched


def f1_sweep_oracle(dets_by_frame, gts_by_frame, grid, evaluate_fn):
    """Exhaustive grid sweep; later (higher) thresholds win ties."""
    best_thr, best_f1 = None, -1.0
    for thr in grid:
        f1 = evaluate_fn(dets_by_frame, gts_by_frame, thr).mean_f1
        if f1 >= best_f1:
            best_thr, best_f1 = thr, f1
    return best_thr, best_f1
