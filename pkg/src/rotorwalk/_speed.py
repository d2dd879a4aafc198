"""Kernel selection: compiled extension when built, pure Python otherwise.

`walk_stat` and `stack_stat` additionally route to the pure-Python kernels
whenever the tracked integer statistic could leave the 64-bit range the
compiled loops assume; the Python kernels use unbounded ints and stay exact.
"""

from __future__ import annotations

try:
    from . import _kernel as _fast  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build environment
    _fast = None
    HAVE_COMPILED = False

from . import _kernel_py as _pure

KERNEL_IMPL = "cython" if HAVE_COMPILED else "python"

_I64_SAFE = (1 << 62) - 1


def stat_fits_int64(alpha, beta, horizon, threshold) -> bool:
    step = max((abs(int(a) + int(beta)) for a in alpha), default=abs(int(beta)))
    return int(horizon) * step <= _I64_SAFE and int(threshold) <= _I64_SAFE


def clamp_threshold(threshold: int) -> int:
    return min(int(threshold), _I64_SAFE)


def walk_stat(off, succ, rot, n, start, horizon, alpha, beta, threshold, rec_ts=None, traj=None, *, impl=None):
    mod = _select(impl)
    if mod is _fast and not stat_fits_int64(alpha, beta, horizon, threshold):
        mod = _pure
    return mod.walk_stat(
        off, succ, rot, n, start, horizon, alpha, beta, clamp_threshold(threshold), rec_ts, traj
    )


def stack_stat(off, succ, n, start, horizon, alpha, beta, threshold, rec_ts=None, traj=None, *, impl=None):
    mod = _select(impl)
    if mod is _fast and not stat_fits_int64(alpha, beta, horizon, threshold):
        mod = _pure
    return mod.stack_stat(
        off, succ, n, start, horizon, alpha, beta, clamp_threshold(threshold), rec_ts, traj
    )


def walk_events(off, succ, rot, n, start, mark, target, stop_type, max_steps, ev_type, ev_t, *, impl=None):
    return _select(impl).walk_events(
        off, succ, rot, n, start, mark, target, stop_type, max_steps, ev_type, ev_t
    )


def z2_experiment(ax, ay, bx, by, cx, cy, nstar, max_steps, init_mode, init_const, ev_type, ev_t, *, impl=None):
    return _select(impl).z2_experiment(
        ax, ay, bx, by, cx, cy, nstar, max_steps, init_mode, init_const, ev_type, ev_t
    )


def _select(impl):
    if impl == "python":
        return _pure
    if impl == "cython":
        if _fast is None:
            raise RuntimeError("compiled kernel requested but not built")
        return _fast
    return _fast if _fast is not None else _pure
