# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled step kernels; contract mirrors `_kernel_py` exactly.

Callers guarantee that every tracked quantity fits in 64-bit integers (the
dispatcher computes exact a-priori bounds and falls back to the pure-Python
kernels otherwise).
"""

import numpy as np

from libc.stdint cimport int8_t, int32_t, int64_t

IMPL = "cython"


def walk_stat(off, succ, rot, n, start, horizon, alpha, beta, threshold,
              rec_ts=None, traj=None):
    cdef int32_t[::1] off_v = off
    cdef int32_t[::1] succ_v = succ
    cdef int32_t[::1] rot_v = rot
    cdef int64_t[::1] n_v = n
    cdef int64_t[::1] alpha_v = alpha
    cdef int64_t beta_c = beta
    cdef int64_t thr = threshold
    cdef int64_t[::1] rec_v
    cdef int32_t[::1] traj_v
    cdef bint have_rec = rec_ts is not None
    cdef bint have_traj = traj is not None
    cdef Py_ssize_t nrec = 0, ntraj = 0, ri = 0
    if have_rec:
        rec_v = rec_ts
        nrec = rec_v.shape[0]
    if have_traj:
        traj_v = traj
        ntraj = traj_v.shape[0]
    q_rec = np.zeros(nrec, dtype=np.int64)
    cdef int64_t[::1] qrec_v = q_rec

    cdef int64_t horizon_c = horizon
    cdef int32_t x = start
    cdef int64_t q = 0, t = 0, max_abs = 0, argmax_t = 0, first_viol = -1
    cdef int64_t viol = 0, aq
    cdef int64_t t0
    cdef int32_t base, d, r

    for t0 in range(horizon_c):
        if have_traj and t0 < ntraj:
            traj_v[t0] = x
        base = off_v[x]
        d = off_v[x + 1] - base
        r = rot_v[x] + 1
        if r >= d:
            r = 0
        rot_v[x] = r
        n_v[x] += 1
        q += alpha_v[x] + beta_c
        x = succ_v[base + r]
        t = t0 + 1
        aq = -q if q < 0 else q
        if aq > max_abs:
            max_abs = aq
            argmax_t = t
        if aq > thr:
            viol += 1
            if first_viol < 0:
                first_viol = t
        while have_rec and ri < nrec and rec_v[ri] == t:
            qrec_v[ri] = q
            ri += 1

    return {
        "t": int(horizon_c),
        "x": int(x),
        "violations": int(viol),
        "first_viol_t": int(first_viol),
        "max_abs_q": int(max_abs),
        "argmax_t": int(argmax_t),
        "q_rec": [int(v) for v in q_rec],
    }


def stack_stat(off, succ, n, start, horizon, alpha, beta, threshold,
               rec_ts=None, traj=None):
    cdef int32_t[::1] off_v = off
    cdef int32_t[::1] succ_v = succ
    cdef int64_t[::1] n_v = n
    cdef int64_t[::1] alpha_v = alpha
    cdef int64_t beta_c = beta
    cdef int64_t thr = threshold
    cdef int64_t[::1] rec_v
    cdef int32_t[::1] traj_v
    cdef bint have_rec = rec_ts is not None
    cdef bint have_traj = traj is not None
    cdef Py_ssize_t nrec = 0, ntraj = 0, ri = 0
    if have_rec:
        rec_v = rec_ts
        nrec = rec_v.shape[0]
    if have_traj:
        traj_v = traj
        ntraj = traj_v.shape[0]
    q_rec = np.zeros(nrec, dtype=np.int64)
    cdef int64_t[::1] qrec_v = q_rec

    cdef int64_t horizon_c = horizon
    cdef int32_t x = start
    cdef int64_t q = 0, t = 0, max_abs = 0, argmax_t = 0, first_viol = -1
    cdef int64_t viol = 0, aq
    cdef int64_t t0, idx
    cdef int32_t base, d

    for t0 in range(horizon_c):
        if have_traj and t0 < ntraj:
            traj_v[t0] = x
        base = off_v[x]
        d = off_v[x + 1] - base
        idx = n_v[x] % d
        n_v[x] += 1
        q += alpha_v[x] + beta_c
        x = succ_v[base + idx]
        t = t0 + 1
        aq = -q if q < 0 else q
        if aq > max_abs:
            max_abs = aq
            argmax_t = t
        if aq > thr:
            viol += 1
            if first_viol < 0:
                first_viol = t
        while have_rec and ri < nrec and rec_v[ri] == t:
            qrec_v[ri] = q
            ri += 1

    return {
        "t": int(horizon_c),
        "x": int(x),
        "violations": int(viol),
        "first_viol_t": int(first_viol),
        "max_abs_q": int(max_abs),
        "argmax_t": int(argmax_t),
        "q_rec": [int(v) for v in q_rec],
    }


def walk_events(off, succ, rot, n, start, mark, target, stop_type, max_steps,
                ev_type, ev_t):
    cdef int32_t[::1] off_v = off
    cdef int32_t[::1] succ_v = succ
    cdef int32_t[::1] rot_v = rot
    cdef int64_t[::1] n_v = n
    cdef int8_t[::1] mark_v = mark
    cdef int8_t[::1] evtype_v = ev_type
    cdef int64_t[::1] evt_v = ev_t
    cdef Py_ssize_t cap = evtype_v.shape[0]

    cdef int32_t x = start
    cdef int64_t t = 0, max_steps_c = max_steps
    cdef int64_t target_c = target
    cdef int8_t stop_type_c = stop_type
    cdef Py_ssize_t k = 0
    cdef int64_t counted = 0
    cdef int32_t base, d, r
    cdef int8_t m
    reason = "budget"

    while t < max_steps_c:
        base = off_v[x]
        d = off_v[x + 1] - base
        r = rot_v[x] + 1
        if r >= d:
            r = 0
        rot_v[x] = r
        n_v[x] += 1
        m = mark_v[x]
        x = succ_v[base + r]
        t += 1
        if m:
            if k < cap:
                evtype_v[k] = m
                evt_v[k] = t
            k += 1
            if stop_type_c == 0 or m == stop_type_c:
                counted += 1
                if counted >= target_c:
                    reason = "target"
                    break

    return {"t": int(t), "x": int(x), "events": int(k), "reason": reason}


cdef inline int _sector_residue(long x, long y) noexcept:
    cdef long X = 2 * x - 1
    cdef long Y = 2 * y - 1
    if Y >= X and X + Y > 0:
        return 1
    if X + Y <= 0 and Y > X:
        return 2
    if Y <= X and X + Y < 0:
        return 3
    return 0


def z2_experiment(ax, ay, bx, by, cx, cy, nstar, max_steps, init_mode, init_const,
                  ev_type, ev_t):
    cdef long R = 64
    cdef long side = 2 * R + 1
    rot_a = np.full((side, side), -1, dtype=np.int8)
    vis_a = np.zeros((side, side), dtype=np.int32)
    stp_a = np.zeros((side, side), dtype=np.int64)
    cnt_a = np.zeros((side, side), dtype=np.int32)
    cdef int8_t[:, ::1] rot = rot_a
    cdef int32_t[:, ::1] visits = vis_a
    cdef int64_t[:, ::1] stamp = stp_a
    cdef int32_t[:, ::1] cnt = cnt_a

    cdef int8_t[::1] evtype_v = ev_type
    cdef int64_t[::1] evt_v = ev_t
    cdef Py_ssize_t cap = evtype_v.shape[0]

    cdef long ax_c = ax, ay_c = ay, bx_c = bx, by_c = by, cx_c = cx, cy_c = cy
    cdef int64_t nstar_c = nstar, max_steps_c = max_steps
    cdef int init_mode_c = init_mode
    cdef int init_const_c = init_const

    cdef long x = ax_c, y = ay_c
    cdef int64_t t = 0
    cdef int64_t hits_b = 0, hits_c = 0
    cdef Py_ssize_t k = 0
    cdef bint a_is_target = (ax_c == bx_c and ay_c == by_c) or (ax_c == cx_c and ay_c == cy_c)
    cdef int64_t epoch = 0
    cdef int64_t epoch_viol = 0, layer_viol = 0
    cdef int64_t first_epoch_viol = -1, first_layer_viol = -1
    cdef long max_layer, lay
    cdef int64_t epoch_at_layer = 0
    cdef bint force_a = True
    cdef long lo_x = ax_c, hi_x = ax_c, lo_y = ay_c, hi_y = ay_c
    cdef long gi, gj
    cdef int r
    cdef long DX0 = 1, DX2 = -1, DY1 = 1, DY3 = -1
    reason = "budget"

    max_layer = ax_c if ax_c > 1 - ax_c else 1 - ax_c
    lay = ay_c if ay_c > 1 - ay_c else 1 - ay_c
    if lay > max_layer:
        max_layer = lay

    while True:
        if t >= max_steps_c:
            break
        while (x if x >= 0 else -x) > R - 1 or (y if y >= 0 else -y) > R - 1:
            # regrow: double the radius and re-center the grids
            newR = 2 * R
            ns = 2 * newR + 1
            pad = newR - R
            nrot = np.full((ns, ns), -1, dtype=np.int8)
            nvis = np.zeros((ns, ns), dtype=np.int32)
            nstp = np.zeros((ns, ns), dtype=np.int64)
            ncnt = np.zeros((ns, ns), dtype=np.int32)
            nrot[pad : pad + side, pad : pad + side] = rot_a
            nvis[pad : pad + side, pad : pad + side] = vis_a
            nstp[pad : pad + side, pad : pad + side] = stp_a
            ncnt[pad : pad + side, pad : pad + side] = cnt_a
            rot_a, vis_a, stp_a, cnt_a = nrot, nvis, nstp, ncnt
            rot = rot_a
            visits = vis_a
            stamp = stp_a
            cnt = cnt_a
            R, side = newR, ns
        if x < lo_x:
            lo_x = x
        if x > hi_x:
            hi_x = x
        if y < lo_y:
            lo_y = y
        if y > hi_y:
            hi_y = y
        gi = x + R
        gj = y + R
        visits[gi, gj] += 1
        if x == ax_c and y == ay_c and (force_a or not a_is_target):
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
        lay = x if x > 1 - x else 1 - x
        if y > lay:
            lay = y
        if 1 - y > lay:
            lay = 1 - y
        if lay > max_layer:
            max_layer = lay
            if epoch == epoch_at_layer:
                layer_viol += 1
                if first_layer_viol < 0:
                    first_layer_viol = t
            epoch_at_layer = epoch

        if not force_a and x == bx_c and y == by_c:
            hits_b += 1
            t += 1
            x = ax_c
            y = ay_c
            force_a = True
            if k < cap:
                evtype_v[k] = 1
                evt_v[k] = t
            k += 1
            if hits_b + hits_c >= nstar_c:
                reason = "target"
                break
            continue
        if not force_a and x == cx_c and y == cy_c:
            hits_c += 1
            t += 1
            x = ax_c
            y = ay_c
            force_a = True
            if k < cap:
                evtype_v[k] = 2
                evt_v[k] = t
            k += 1
            if hits_b + hits_c >= nstar_c:
                reason = "target"
                break
            continue
        force_a = False
        r = rot[gi, gj]
        if r < 0:
            r = _sector_residue(x, y) if init_mode_c == 0 else init_const_c
        r = (r + 1) & 3
        rot[gi, gj] = <int8_t> r
        if r == 0:
            x += DX0
        elif r == 1:
            y += DY1
        elif r == 2:
            x += DX2
        else:
            y += DY3
        t += 1

    return {
        "t": int(t),
        "reason": reason,
        "hits_b": int(hits_b),
        "hits_c": int(hits_c),
        "events": int(k),
        "epoch": int(epoch),
        "max_layer": int(max_layer),
        "layer_violations": int(layer_viol),
        "first_layer_viol_t": int(first_layer_viol),
        "epoch_violations": int(epoch_viol),
        "first_epoch_viol_t": int(first_epoch_viol),
        "bbox": (int(lo_x), int(hi_x), int(lo_y), int(hi_y)),
        "rot": rot_a,
        "visits": vis_a,
        "origin": int(R),
        "x": int(x),
        "y": int(y),
    }
