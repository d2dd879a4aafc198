"""The deterministic rotor-walk automaton.

A rotor mechanism realizes each transition probability as an exact frequency
inside the per-vertex successor list (d(u) entries, each target repeated
d(u)p(u,v) times).  Residues are stored 0-based: residue r means the arrow
currently points at succ[r]; a step increments the residue mod d and moves
the particle to the newly selected successor.  Display I/O converts to the
1-based convention.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .chains import Label, MarkovChain, PotentialVector, laplacian
from .errors import MissingValueError, OrderingMismatchError

_COMPASS = ((1, 0), (0, 1), (-1, 0), (0, -1))  # E, N, W, S


class RotorMechanism:
    """Per-vertex successor lists satisfying the exact-frequency condition."""

    __slots__ = ("chain", "succ", "_arrays")

    def __init__(self, chain: MarkovChain, succ: Sequence[Sequence[int]]):
        self.chain = chain
        self.succ: tuple[tuple[int, ...], ...] = tuple(tuple(s) for s in succ)
        self._arrays = None
        for u, lst in enumerate(self.succ):
            _check_multiplicities(chain, u, lst)

    def d(self, u: int) -> int:
        return len(self.succ[u])

    def d_of(self, label: Label) -> int:
        return len(self.succ[self.chain.vid(label)])

    def succ_of(self, label: Label) -> tuple[Label, ...]:
        return tuple(self.chain.labels[v] for v in self.succ[self.chain.vid(label)])

    def multiplicity(self, u: int, v: int) -> int:
        return sum(1 for w in self.succ[u] if w == v)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(off, flat) compressed successor arrays for the step kernels."""
        if self._arrays is None:
            off = np.zeros(len(self.succ) + 1, dtype=np.int32)
            for u, lst in enumerate(self.succ):
                off[u + 1] = off[u] + len(lst)
            flat = np.empty(int(off[-1]), dtype=np.int32)
            pos = 0
            for lst in self.succ:
                flat[pos : pos + len(lst)] = lst
                pos += len(lst)
            self._arrays = (off, flat)
        return self._arrays


def _check_multiplicities(chain: MarkovChain, u: int, lst: Sequence[int]) -> None:
    d = len(lst)
    if d < 1:
        raise OrderingMismatchError(f"vertex {chain.labels[u]!r}: empty successor list")
    counts: dict[int, int] = {}
    for v in lst:
        counts[v] = counts.get(v, 0) + 1
    row = dict(chain.rows[u])
    if set(counts) != set(row):
        raise OrderingMismatchError(
            f"vertex {chain.labels[u]!r}: successor set differs from the row support"
        )
    for v, m in counts.items():
        if Fraction(m, d) != row[v]:
            raise OrderingMismatchError(
                f"vertex {chain.labels[u]!r}: {chain.labels[v]!r} appears {m}/{d} times, "
                f"row says {row[v]}"
            )


def derive_mechanism(
    chain: MarkovChain,
    order: str | Mapping[Label, Sequence[Label]] | Callable = "by_id",
) -> RotorMechanism:
    """Build the mechanism with d(u) = lcm of the row denominators.

    ``order`` fixes the successor sequence:

    - ``"by_id"``: targets ascending by vertex id, each in one block;
    - ``"compass"``: lattice labels ordered East, North, West, South;
    - a mapping label -> explicit successor label list (validated against the
      exact-frequency condition; its length may be any valid multiple);
    - a callable ``(label, [(target_label, multiplicity), ...]) -> sequence``.
    """
    succ: list[list[int]] = []
    for u in range(chain.n):
        row = chain.rows[u]
        d = lcm(*(p.denominator for _, p in row))
        mults = [(v, int(p * d)) for v, p in row]
        label = chain.labels[u]
        if isinstance(order, Mapping) and label in order:
            lst = [chain.vid(t) for t in order[label]]
        elif callable(order) and not isinstance(order, str):
            pairs = [(chain.labels[v], m) for v, m in mults]
            lst = [chain.vid(t) for t in order(label, pairs)]
        elif order == "compass" and isinstance(label, tuple) and len(label) == 2 \
                and isinstance(label[0], int):
            lst = _compass_order(chain, label, dict(mults))
        else:
            lst = []
            for v, m in mults:  # rows are id-sorted already
                lst.extend([v] * m)
        succ.append(lst)
    return RotorMechanism(chain, succ)


def _compass_order(chain: MarkovChain, label, mults: dict[int, int]) -> list[int]:
    x, y = label
    lst: list[int] = []
    remaining = dict(mults)
    for dx, dy in _COMPASS:
        t = (x + dx, y + dy)
        try:
            vid = chain.vid(t)
        except Exception:
            continue
        if vid in remaining:
            lst.extend([vid] * remaining.pop(vid))
    for v in sorted(remaining):  # non-lattice targets (a0/a1 copies) trail
        lst.extend([v] * remaining[v])
    return lst


class RotorConfig:
    """Sparse rotor configuration: explicit overrides over a default rule."""

    __slots__ = ("default", "overrides")

    def __init__(self, default: int | Callable[[Label], int] = 0, overrides=None):
        self.default = default
        self.overrides: dict[Label, int] = dict(overrides or {})

    def residue(self, label: Label, d: int) -> int:
        if label in self.overrides:
            return self.overrides[label] % d
        if callable(self.default):
            return self.default(label) % d
        return self.default % d

    def array(self, mech: RotorMechanism) -> np.ndarray:
        chain = mech.chain
        out = np.empty(chain.n, dtype=np.int32)
        for u in range(chain.n):
            out[u] = self.residue(chain.labels[u], mech.d(u))
        return out


def next_emission_config(mech: RotorMechanism, choose: Callable[[Label], Label]) -> RotorConfig:
    """Residues arranged so each vertex's next emission is choose(label).

    The first occurrence of the chosen target in the successor list is
    selected; the stored residue is the index just before it.
    """
    overrides = {}
    chain = mech.chain
    for u in range(chain.n):
        label = chain.labels[u]
        want = chain.vid(choose(label))
        lst = mech.succ[u]
        try:
            i = lst.index(want)
        except ValueError:
            raise OrderingMismatchError(
                f"{label!r} cannot emit to {chain.labels[want]!r}"
            ) from None
        overrides[label] = (i - 1) % len(lst)
    return RotorConfig(0, overrides)


@dataclass
class WalkState:
    """Mutable state of a single rotor walk."""

    chain: MarkovChain
    x0: int
    x: int
    t: int
    rot: dict[int, int]
    n: dict[int, int]
    trace: deque | None = None

    @classmethod
    def start(
        cls,
        mech: RotorMechanism,
        x0: Label,
        r0: RotorConfig | None = None,
        trace_len: int | None = None,
    ) -> "WalkState":
        chain = mech.chain
        r0 = r0 or RotorConfig(0)
        rot = {
            u: r0.residue(chain.labels[u], mech.d(u)) for u in range(chain.n)
        }
        xi = chain.vid(x0)
        trace = deque(maxlen=trace_len) if trace_len else None
        return cls(chain, xi, xi, 0, rot, {}, trace)

    @property
    def label(self) -> Label:
        return self.chain.labels[self.x]

    def visits(self, label: Label) -> int:
        return self.n.get(self.chain.vid(label), 0)

    def copy(self) -> "WalkState":
        return WalkState(
            self.chain,
            self.x0,
            self.x,
            self.t,
            dict(self.rot),
            dict(self.n),
            deque(self.trace, maxlen=self.trace.maxlen) if self.trace is not None else None,
        )


def step(state: WalkState, mech: RotorMechanism) -> WalkState:
    """One rotor move: increment the rotor at x, follow the new arrow."""
    x = state.x
    lst = mech.succ[x]
    r = (state.rot[x] + 1) % len(lst)
    state.rot[x] = r
    state.n[x] = state.n.get(x, 0) + 1
    if state.trace is not None:
        state.trace.append(state.chain.labels[x])
    state.x = lst[r]
    state.t += 1
    return state


def run_until(
    state: WalkState,
    mech: RotorMechanism,
    stop: Callable[[WalkState], bool],
    max_steps: int,
) -> tuple[WalkState, str]:
    """Step until ``stop(state)`` or the budget runs out; reports which."""
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    for _ in range(max_steps):
        if stop(state):
            return state, "hit"
        step(state, mech)
    return state, ("hit" if stop(state) else "budget")


# -- the key identity -------------------------------------------------------


class PotentialTracker:
    """Tracks both sides of the telescoping identity along a walk.

    For a vertex function f, phi(u, m) is the partial sum over the first m
    successors of [f(u) - f(u^(i)) + Delta f(u)]; the full cycle sums to
    zero.  The tracker accumulates sum_s Delta f(x_s) step by step, while
    the right side is recomputed from rotor offsets on demand.
    """

    def __init__(self, chain: MarkovChain, mech: RotorMechanism, f):
        self.chain = chain
        self.mech = mech
        if isinstance(f, PotentialVector):
            self.f = {chain.vid(lab): val for lab, val in f.values.items()}
        else:
            self.f = {chain.vid(lab): Fraction(val) for lab, val in f.items()}
        self._lap: dict[int, Fraction] = {}
        self._phi_prefix: dict[int, list[Fraction]] = {}
        self.delta_sum = Fraction(0)
        self.r0: dict[int, int] = {}

    def bind(self, state: WalkState) -> "PotentialTracker":
        self.r0 = dict(state.rot)
        self.x0 = state.x0
        self.delta_sum = Fraction(0)
        return self

    def _value(self, u: int) -> Fraction:
        try:
            return self.f[u]
        except KeyError:
            raise MissingValueError(
                f"f has no value at {self.chain.labels[u]!r}"
            ) from None

    def lap(self, u: int) -> Fraction:
        if u not in self._lap:
            acc = -self._value(u)
            for v, p in self.chain.rows[u]:
                acc += p * self._value(v)
            self._lap[u] = acc
        return self._lap[u]

    def observe(self, u: int) -> None:
        """Record that the walk just stepped from vertex u."""
        self.delta_sum += self.lap(u)

    def phi(self, u: int, m: int) -> Fraction:
        """phi(u, m): prefix sums cached per vertex on first use."""
        if u not in self._phi_prefix:
            fu = self._value(u)
            du = self.lap(u)
            acc = Fraction(0)
            prefix = [acc]
            for v in self.mech.succ[u]:
                acc += fu - self._value(v) + du
                prefix.append(acc)
            self._phi_prefix[u] = prefix
        return self._phi_prefix[u][m]

    def rhs(self, state: WalkState) -> Fraction:
        """f(x_t) - f(x_0) + sum_u [phi(u, r_t(u)) - phi(u, r_0(u))]."""
        total = self._value(state.x) - self._value(state.x0)
        for u, r in state.rot.items():
            r0 = self.r0.get(u, r)
            if r != r0:
                total += self.phi(u, r + 1) - self.phi(u, r0 + 1)
        return total


def check_key_identity(
    tracker: PotentialTracker, state: WalkState, mech: RotorMechanism
) -> tuple[Fraction, Fraction]:
    """Both sides of the telescoping identity, computed independently."""
    return tracker.delta_sum, tracker.rhs(state)


def walk_with_tracker(
    mech: RotorMechanism,
    x0: Label,
    r0: RotorConfig,
    f,
    steps: int,
    check_every: int = 1,
):
    """Run ``steps`` rotor moves asserting the key identity along the way.

    Returns (state, tracker, checks) where checks counts the comparisons
    made; raises AssertionError on the first mismatch.
    """
    state = WalkState.start(mech, x0, r0)
    tracker = PotentialTracker(mech.chain, mech, f).bind(state)
    checks = 0
    for s in range(steps):
        tracker.observe(state.x)
        step(state, mech)
        if (s + 1) % check_every == 0 or s + 1 == steps:
            lhs, rhs = check_key_identity(tracker, state, mech)
            if lhs != rhs:
                raise AssertionError(
                    f"key identity broke at t={state.t}: {lhs} != {rhs}"
                )
            checks += 1
    return state, tracker, checks


# -- period detection --------------------------------------------------------


def detect_period(
    chain: MarkovChain,
    mech: RotorMechanism,
    r0: RotorConfig,
    x0: Label,
    max_steps: int,
) -> tuple[int, int] | None:
    """Least (preperiod, period) of the full state (x_t, r_t), or None."""
    state = WalkState.start(mech, x0, r0)
    seen: dict[tuple, int] = {}
    for t in range(max_steps + 1):
        key = (state.x, tuple(sorted(state.rot.items())))
        if key in seen:
            first = seen[key]
            return first, t - first
        seen[key] = t
        if t < max_steps:
            step(state, mech)
    return None


# -- interchange formats ------------------------------------------------------


def trajectory_csv_lines(
    mech: RotorMechanism, x0: Label, r0: RotorConfig, steps: int
) -> Iterable[str]:
    """CSV lines "t,x,rotor_at_x" (rotor shown 1-based) for a fresh walk."""
    state = WalkState.start(mech, x0, r0)
    yield "t,x,rotor_at_x"
    for _ in range(steps + 1):
        yield f"{state.t},{state.chain.labels[state.x]},{state.rot[state.x] + 1}"
        step(state, mech)


def snapshot_json(mech: RotorMechanism, rot: Mapping[int, int]) -> str:
    """Rotor configuration as a JSON map label -> 1-based residue."""
    chain = mech.chain
    doc = {str(chain.labels[u]): (r % mech.d(u)) + 1 for u, r in sorted(rot.items())}
    return json.dumps(doc, sort_keys=True)


def visits_total(state: WalkState) -> int:
    return sum(state.n.values())


def laplacian_of_state(chain: MarkovChain, f: PotentialVector, state: WalkState) -> Fraction:
    return laplacian(chain, f, chain.labels[state.x])
