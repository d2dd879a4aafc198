"""Pure-Python step kernels.

Same contracts as the compiled module `_kernel`; selected at import time by
`_speed` when the extension is unavailable.  Scalar arithmetic uses Python
ints, so these functions are exact even where the compiled kernels would
overflow (callers route big-coefficient workloads here).
"""

from __future__ import annotations

import numpy as np

IMPL = "python"


def walk_stat(off, succ, rot, n, start, horizon, alpha, beta, threshold, rec_ts=None, traj=None):
    """Advance `horizon` rotor steps tracking q_t = sum_v alpha[v] n_t(v) + beta t.

    rot and n are mutated in place.  Returns a dict with the final time and
    position, the violation count against |q| <= threshold, the first
    violating time (or -1), max |q| and its time, and q sampled at the times
    in rec_ts (sorted, optional).
    """
    off_l = off.tolist()
    succ_l = succ.tolist()
    rot_l = rot.tolist()
    n_l = n.tolist()
    alpha_l = [int(a) for a in alpha]
    beta = int(beta)
    threshold = int(threshold)
    rec = rec_ts.tolist() if rec_ts is not None else []
    q_rec = [0] * len(rec)
    traj_limit = len(traj) if traj is not None else 0

    x = int(start)
    q = 0
    viol = 0
    first_viol = -1
    max_abs = 0
    argmax_t = 0
    ri = 0
    for t0 in range(int(horizon)):
        if t0 < traj_limit:
            traj[t0] = x
        base = off_l[x]
        d = off_l[x + 1] - base
        r = rot_l[x] + 1
        if r >= d:
            r = 0
        rot_l[x] = r
        n_l[x] += 1
        q += alpha_l[x] + beta
        x = succ_l[base + r]
        t = t0 + 1
        aq = -q if q < 0 else q
        if aq > max_abs:
            max_abs = aq
            argmax_t = t
        if aq > threshold:
            viol += 1
            if first_viol < 0:
                first_viol = t
        while ri < len(rec) and rec[ri] == t:
            q_rec[ri] = q
            ri += 1
    rot[:] = rot_l
    n[:] = n_l
    return {
        "t": int(horizon),
        "x": x,
        "violations": viol,
        "first_viol_t": first_viol,
        "max_abs_q": max_abs,
        "argmax_t": argmax_t,
        "q_rec": q_rec,
    }


def stack_stat(off, succ, n, start, horizon, alpha, beta, threshold, rec_ts=None, traj=None):
    """Like walk_stat but routed by the stack rule: next successor index is
    the visit count mod the period (no rotor state)."""
    off_l = off.tolist()
    succ_l = succ.tolist()
    n_l = n.tolist()
    alpha_l = [int(a) for a in alpha]
    beta = int(beta)
    threshold = int(threshold)
    rec = rec_ts.tolist() if rec_ts is not None else []
    q_rec = [0] * len(rec)
    traj_limit = len(traj) if traj is not None else 0

    x = int(start)
    q = 0
    viol = 0
    first_viol = -1
    max_abs = 0
    argmax_t = 0
    ri = 0
    for t0 in range(int(horizon)):
        if t0 < traj_limit:
            traj[t0] = x
        base = off_l[x]
        d = off_l[x + 1] - base
        idx = n_l[x] % d
        n_l[x] += 1
        q += alpha_l[x] + beta
        x = succ_l[base + idx]
        t = t0 + 1
        aq = -q if q < 0 else q
        if aq > max_abs:
            max_abs = aq
            argmax_t = t
        if aq > threshold:
            viol += 1
            if first_viol < 0:
                first_viol = t
        while ri < len(rec) and rec[ri] == t:
            q_rec[ri] = q
            ri += 1
    n[:] = n_l
    return {
        "t": int(horizon),
        "x": x,
        "violations": viol,
        "first_viol_t": first_viol,
        "max_abs_q": max_abs,
        "argmax_t": argmax_t,
        "q_rec": q_rec,
    }


def walk_events(off, succ, rot, n, start, mark, target, stop_type, max_steps, ev_type, ev_t):
    """Step until `target` emissions from marked vertices, or the budget ends.

    mark[v] != 0 tags event vertices; each emission from a marked vertex is
    recorded as (mark[v], t-after-emission).  With stop_type == 0 every event
    counts toward `target`, otherwise only events of that type do.
    Returns dict(t, x, events, reason).
    """
    off_l = off.tolist()
    succ_l = succ.tolist()
    rot_l = rot.tolist()
    n_l = n.tolist()
    mark_l = mark.tolist()
    cap = len(ev_type)

    x = int(start)
    t = 0
    k = 0
    counted = 0
    reason = "budget"
    max_steps = int(max_steps)
    target = int(target)
    stop_type = int(stop_type)
    while t < max_steps:
        base = off_l[x]
        d = off_l[x + 1] - base
        r = rot_l[x] + 1
        if r >= d:
            r = 0
        rot_l[x] = r
        n_l[x] += 1
        m = mark_l[x]
        x = succ_l[base + r]
        t += 1
        if m:
            if k < cap:
                ev_type[k] = m
                ev_t[k] = t
            k += 1
            if stop_type == 0 or m == stop_type:
                counted += 1
                if counted >= target:
                    reason = "target"
                    break
    rot[:] = rot_l
    n[:] = n_l
    return {"t": t, "x": x, "events": k, "reason": reason}


# -- Z^2 experiment -----------------------------------------------------------

_DX = (1, 0, -1, 0)
_DY = (0, 1, 0, -1)


def _sector_residue(x, y):
    # floor(1/2 + (2/pi) arg(x-1/2, y-1/2)) mod 4 in integer arithmetic
    X = 2 * x - 1
    Y = 2 * y - 1
    if Y >= X and X + Y > 0:
        return 1  # North
    if X + Y <= 0 and Y > X:
        return 2  # West
    if Y <= X and X + Y < 0:
        return 3  # South
    return 0      # East


def z2_experiment(ax, ay, bx, by, cx, cy, nstar, max_steps, init_mode, init_const,
                  ev_type, ev_t):
    """Rotor walk on Z^2 with targets b,c redirected to a; stops at nstar hits.

    init_mode 0 uses the four-sector initial configuration, 1 a constant
    residue.  Tracks the layer/epoch audits: a new box layer may only be
    entered after an intervening visit to a, and no vertex may be occupied
    more than 4 times between consecutive visits to a.

    Returns dict with the final time, hit counts, audit violation counts,
    the touched bounding box, and the rotor/visit grids (rotor -1 where the
    initial value was never consumed).
    """
    R = 64
    side = 2 * R + 1
    rot = np.full((side, side), -1, dtype=np.int8)
    visits = np.zeros((side, side), dtype=np.int32)
    stamp = np.zeros((side, side), dtype=np.int64)
    cnt = np.zeros((side, side), dtype=np.int32)

    def grow():
        nonlocal R, side, rot, visits, stamp, cnt
        newR = 2 * R
        ns = 2 * newR + 1
        pad = newR - R
        nrot = np.full((ns, ns), -1, dtype=np.int8)
        nvis = np.zeros((ns, ns), dtype=np.int32)
        nstp = np.zeros((ns, ns), dtype=np.int64)
        ncnt = np.zeros((ns, ns), dtype=np.int32)
        nrot[pad : pad + side, pad : pad + side] = rot
        nvis[pad : pad + side, pad : pad + side] = visits
        nstp[pad : pad + side, pad : pad + side] = stamp
        ncnt[pad : pad + side, pad : pad + side] = cnt
        rot, visits, stamp, cnt = nrot, nvis, nstp, ncnt
        R, side = newR, ns

    def layer(x, y):
        return max(x, 1 - x, y, 1 - y)

    x, y = ax, ay
    t = 0
    hits_b = hits_c = 0
    k = 0
    a_is_target = (ax == bx and ay == by) or (ax == cx and ay == cy)
    epoch = 0
    epoch_viol = 0
    first_epoch_viol = -1
    layer_viol = 0
    first_layer_viol = -1
    max_layer = layer(ax, ay)
    epoch_at_layer = 0
    force_a = True  # the start counts as occupying a
    reason = "budget"
    lo_x = hi_x = ax
    lo_y = hi_y = ay

    while True:
        if t >= max_steps:
            break
        while abs(x) > R - 1 or abs(y) > R - 1:
            grow()
        if x < lo_x:
            lo_x = x
        if x > hi_x:
            hi_x = x
        if y < lo_y:
            lo_y = y
        if y > hi_y:
            hi_y = y
        # occupancy bookkeeping at time t
        gi, gj = x + R, y + R
        visits[gi, gj] += 1
        if x == ax and y == ay and (force_a or not a_is_target):
            epoch += 1
        if stamp[gi, gj] != epoch:
            stamp[gi, gj] = epoch
            cnt[gi, gj] = 1
        else:
            cnt[gi, gj] += 1
            if cnt[gi, gj] > 4:
                epoch_viol += 1
                if first_epoch_viol < 0:
                    first_epoch_viol = t
        lay = layer(x, y)
        if lay > max_layer:
            max_layer = lay
            if epoch == epoch_at_layer:
                layer_viol += 1
                if first_layer_viol < 0:
                    first_layer_viol = t
            epoch_at_layer = epoch

        if not force_a and x == bx and y == by:
            hits_b += 1
            t += 1
            x, y = ax, ay
            force_a = True
            if k < len(ev_type):
                ev_type[k] = 1
                ev_t[k] = t
            k += 1
            if hits_b + hits_c >= nstar:
                reason = "target"
                break
            continue
        if not force_a and x == cx and y == cy:
            hits_c += 1
            t += 1
            x, y = ax, ay
            force_a = True
            if k < len(ev_type):
                ev_type[k] = 2
                ev_t[k] = t
            k += 1
            if hits_b + hits_c >= nstar:
                reason = "target"
                break
            continue
        force_a = False
        r = rot[gi, gj]
        if r < 0:
            r = _sector_residue(x, y) if init_mode == 0 else init_const
        r = (r + 1) & 3
        rot[gi, gj] = r
        x += _DX[r]
        y += _DY[r]
        t += 1

    return {
        "t": t,
        "reason": reason,
        "hits_b": hits_b,
        "hits_c": hits_c,
        "events": k,
        "epoch": epoch,
        "max_layer": max_layer,
        "layer_violations": layer_viol,
        "first_layer_viol_t": first_layer_viol,
        "epoch_violations": epoch_viol,
        "first_epoch_viol_t": first_epoch_viol,
        "bbox": (lo_x, hi_x, lo_y, hi_y),
        "rot": rot,
        "visits": visits,
        "origin": R,
        "x": x,
        "y": y,
    }
