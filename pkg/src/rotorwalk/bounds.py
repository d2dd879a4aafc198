"""Discrepancy constants and exact verification of the four walk bounds.

Each bound is checked in multiplied-out integer form at every single step of
the walk: the tracked statistic q_t is an integer linear functional of the
visit counts and the clock, and the comparison |q_t| <= floor(K * scale)
is exact (q_t is an integer, so flooring the right side loses nothing).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, lcm
from typing import Mapping, Sequence

import numpy as np

from . import _speed
from .chains import (
    Label,
    MarkovChain,
    PotentialVector,
    escape_prob,
    laplacian,
    solve_hitting_prob,
    solve_hitting_time,
    solve_stationary,
)
from .engine import RotorConfig, RotorMechanism, WalkState
from .errors import InfiniteConstantError, SetupError

_LEAD_ONE = Fraction(1)


@dataclass
class BoundConstant:
    """A discrepancy constant with its itemized summands.

    ``value = lead + sum(extra_by_vertex) + half * sum(summands)``;
    summands is the per-(u, v) table d(u)p(u,v)|f(u)-f(v)+correction| (the
    unweighted |h(u)-h(v)| table for K6, where half is 1), and
    extra_by_vertex carries the d(b)-style terms that the time-dependent
    refinement gates on the rotor at that vertex.
    """

    kind: str
    value: Fraction
    lead: Fraction
    extra_by_vertex: dict = field(default_factory=dict)
    half: Fraction = Fraction(1, 2)
    summands: dict = field(default_factory=dict)

    def __post_init__(self):
        assert self.value == self.lead + sum(
            self.extra_by_vertex.values(), Fraction(0)
        ) + self.half * sum(self.summands.values(), Fraction(0))


def _require_finite(chain) -> MarkovChain:
    if not isinstance(chain, MarkovChain):
        raise InfiniteConstantError(
            "bound constants need a finite chain; truncate the family first"
        )
    return chain


def compute_constant(
    kind: str,
    chain: MarkovChain,
    mech: RotorMechanism,
    *,
    b: Label = None,
    c: Label = None,
    h: PotentialVector | None = None,
    k: PotentialVector | None = None,
    pi: PotentialVector | None = None,
    g: PotentialVector | None = None,
) -> BoundConstant:
    """K1..K6 with exact rational arithmetic; missing potentials are solved."""
    _require_finite(chain)
    if kind == "K1":
        h = h or solve_hitting_prob(chain, b, c)
        summands = _pair_table(chain, mech, h, exclude={b, c})
        lead = _LEAD_ONE
        return BoundConstant("K1", lead + Fraction(1, 2) * _tot(summands), lead,
                             summands=summands)
    if kind == "K2":
        k = k or solve_hitting_time(chain, b)
        summands = _pair_table(chain, mech, k, exclude={b}, shift=Fraction(-1))
        lead = max(k.values.values())
        return BoundConstant("K2", lead + Fraction(1, 2) * _tot(summands), lead,
                             summands=summands)
    if kind == "K3":
        h = h or solve_hitting_prob(chain, b, c)
        summands = _pair_table(chain, mech, h, exclude=set())
        extra = {b: Fraction(mech.d_of(b), 2), c: Fraction(mech.d_of(c), 2)}
        lead = _LEAD_ONE
        return BoundConstant(
            "K3", lead + _tot(extra) + Fraction(1, 2) * _tot(summands),
            lead, extra_by_vertex=extra, summands=summands)
    if kind == "K4":
        k = k or solve_hitting_time(chain, b)
        pi = pi or solve_stationary(chain)
        summands = _pair_table(chain, mech, k, exclude=set(), shift=Fraction(-1))
        extra = {b: Fraction(mech.d_of(b), 1) / pi.of(b) / 2}
        lead = max(k.values.values())
        return BoundConstant(
            "K4", lead + _tot(extra) + Fraction(1, 2) * _tot(summands),
            lead, extra_by_vertex=extra, summands=summands)
    if kind == "K5":
        summands = _pair_table(chain, mech, g, exclude=set())
        extra = {b: Fraction(mech.d_of(b), 2)}
        lead = max(g.values.values())
        return BoundConstant(
            "K5", lead + _tot(extra) + Fraction(1, 2) * _tot(summands),
            lead, extra_by_vertex=extra, summands=summands)
    if kind == "K6":
        h = h or solve_hitting_prob(chain, b, c)
        summands = {}
        for u in range(chain.n):
            lu = chain.labels[u]
            if lu == b or lu == c:
                continue
            for v, p in chain.rows[u]:
                if p > 0:
                    d = abs(h.of(lu) - h.of(chain.labels[v]))
                    if d:
                        summands[(lu, chain.labels[v])] = d
        lead = _LEAD_ONE
        return BoundConstant("K6", lead + _tot(summands), lead,
                             half=Fraction(1), summands=summands)
    raise ValueError(f"unknown constant kind {kind!r}")


def _tot(summands: Mapping) -> Fraction:
    return sum(summands.values(), Fraction(0))


def _pair_table(
    chain: MarkovChain,
    mech: RotorMechanism,
    f: PotentialVector,
    exclude: set,
    shift: Fraction = Fraction(0),
) -> dict:
    """d(u)p(u,v)|f(u)-f(v)+shift| over rows, u outside `exclude`."""
    out = {}
    for u in range(chain.n):
        lu = chain.labels[u]
        if lu in exclude:
            continue
        fu = f.of(lu)
        for v, _ in chain.rows[u]:
            lv = chain.labels[v]
            m = mech.multiplicity(u, v)
            val = m * abs(fu - f.of(lv) + shift)
            if val:
                out[(lu, lv)] = val
    return out


def time_dependent_constant(
    constant: BoundConstant,
    state: WalkState,
    r0: Mapping[int, int],
) -> Fraction:
    """K_i(t): the leading term gated on x_t != x_0, every (u, .) summand
    (including the d(b)-style vertex terms) gated on r_t(u) != r_0(u)."""
    chain = state.chain
    value = constant.lead if state.x != state.x0 else Fraction(0)
    moved = {
        chain.labels[u]
        for u, r in state.rot.items()
        if r != r0.get(u, r)
    }
    value += sum(
        (val for u, val in constant.extra_by_vertex.items() if u in moved),
        Fraction(0),
    )
    value += sum(
        (val for (u, _v), val in constant.summands.items() if u in moved),
        Fraction(0),
    ) * constant.half
    return value


# -- theorem verification ----------------------------------------------------


@dataclass(frozen=True)
class TheoremSetup:
    a: Label = None
    b: Label = None
    c: Label = None


@dataclass
class Checkpoint:
    t: int
    lhs: Fraction
    rhs: Fraction
    ok: bool


@dataclass
class DiscrepancyReport:
    theorem: int
    constant: BoundConstant
    checkpoints: list[Checkpoint]
    violations: int
    first_violation_t: int
    worst_lhs: Fraction
    worst_t: int
    horizon: int
    scale: Fraction
    meta: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    @property
    def worst_ratio(self) -> Fraction:
        rhs = self.constant.value
        if rhs == 0:
            return Fraction(0)
        return self.worst_lhs / rhs

    def csv_lines(self):
        """Bounds-format CSV: t,lhs_num,lhs_den,rhs_num,rhs_den,ok."""
        yield "t,lhs_num,lhs_den,rhs_num,rhs_den,ok"
        for cp in self.checkpoints:
            yield (
                f"{cp.t},{cp.lhs.numerator},{cp.lhs.denominator},"
                f"{cp.rhs.numerator},{cp.rhs.denominator},{str(cp.ok).lower()}"
            )

    def to_csv(self) -> str:
        return "\n".join(self.csv_lines()) + "\n"


def apply_setup(theorem: int, chain: MarkovChain, setup: TheoremSetup) -> MarkovChain:
    """Perform the chain surgery the theorem expects."""
    from .chains import redirect_to

    if theorem == 1:
        if setup.a is None or setup.b is None or setup.c is None:
            raise SetupError("theorem 1 needs a, b and c")
        if setup.a in (setup.b, setup.c):
            raise SetupError("theorem 1 needs a outside {b, c}")
        return redirect_to(chain, [setup.b, setup.c], setup.a)
    if theorem == 2:
        if setup.a is None or setup.b is None:
            raise SetupError("theorem 2 needs a and b")
        if setup.a == setup.b:
            raise SetupError("theorem 2 needs a != b")
        return redirect_to(chain, [setup.b], setup.a)
    if theorem in (3, 4):
        return chain
    raise SetupError(f"unknown theorem {theorem}")


def _check_setup(theorem: int, chain: MarkovChain, setup: TheoremSetup) -> None:
    if theorem == 1:
        for s in (setup.b, setup.c):
            row = chain.row_items(s)
            if row != [(setup.a, Fraction(1))]:
                raise SetupError(
                    f"theorem 1 needs the row of {s!r} redirected to {setup.a!r}"
                )
    elif theorem == 2:
        row = chain.row_items(setup.b)
        if row != [(setup.a, Fraction(1))]:
            raise SetupError(
                f"theorem 2 needs the row of {setup.b!r} redirected to {setup.a!r}"
            )
    elif theorem == 3:
        if setup.b is None or setup.c is None or setup.b == setup.c:
            raise SetupError("theorem 3 needs two distinct vertices b, c")
    elif theorem == 4:
        if setup.b is None:
            raise SetupError("theorem 4 needs a vertex b")
    else:
        raise SetupError(f"unknown theorem {theorem}")


def _geometric_times(horizon: int, dense_upto: int = 64, ratio: float = 1.25) -> list[int]:
    ts = list(range(1, min(dense_upto, horizon) + 1))
    t = float(max(dense_upto, 1))
    while True:
        t *= ratio
        ti = int(t)
        if ti > horizon:
            break
        if ti > ts[-1]:
            ts.append(ti)
    if horizon >= 1 and ts[-1] != horizon:
        ts.append(horizon)
    return ts


def verify_theorem(
    theorem: int,
    chain: MarkovChain,
    mech: RotorMechanism,
    r0: RotorConfig,
    setup: TheoremSetup,
    horizon: int,
    *,
    record: str | Sequence[int] | None = "geometric",
    impl: str | None = None,
) -> DiscrepancyReport:
    """Run the rotor walk for `horizon` steps and check the bound at every t.

    `chain` must already carry the theorem's surgery (see `apply_setup`);
    `record` selects checkpoint rows for the report ("geometric", "all",
    an explicit time list, or None) - the per-step check is exhaustive
    regardless.
    """
    _check_setup(theorem, chain, setup)
    a, b, c = setup.a, setup.b, setup.c
    start = a if a is not None else chain.labels[0]

    alpha: dict[Label, int] = {}
    beta = 0
    if theorem == 1:
        h = solve_hitting_prob(chain, b, c)
        K = compute_constant("K1", chain, mech, b=b, c=c, h=h)
        ha = h.of(a)
        scale = Fraction(ha.denominator)
        alpha[b] = ha.numerator - ha.denominator
        alpha[c] = ha.numerator
        lhs_desc = "|h(a) - n_t(b)/(n_t(b)+n_t(c))| * (n_t(b)+n_t(c))"
        meta = {"h_a": ha}
    elif theorem == 2:
        k = solve_hitting_time(chain, b)
        K = compute_constant("K2", chain, mech, b=b, k=k)
        ka = k.of(a)
        scale = Fraction(ka.denominator)
        alpha[b] = ka.numerator + ka.denominator
        beta = -ka.denominator
        lhs_desc = "|(k(a)+1) n_t(b) - t|"
        meta = {"k_a": ka}
    elif theorem == 3:
        h = solve_hitting_prob(chain, b, c)
        K = compute_constant("K3", chain, mech, b=b, c=c, h=h)
        e_bc = -laplacian(chain, h, b)
        e_cb = laplacian(chain, h, c)
        L = Fraction(_lcm(e_bc.denominator, e_cb.denominator))
        scale = L
        alpha[b] = int(e_bc * L)
        alpha[c] = -int(e_cb * L)
        meta = {"e_bc": e_bc, "e_cb": e_cb}
        lhs_desc = "|n_t(b) e_bc - n_t(c) e_cb|"
    elif theorem == 4:
        k = solve_hitting_time(chain, b)
        pi = solve_stationary(chain)
        K = compute_constant("K4", chain, mech, b=b, k=k, pi=pi)
        pb = pi.of(b)
        # q = n_t(b) pi_den - t pi_num = pi_num (n_t(b)/pi(b) - t)
        scale = Fraction(pb.numerator)
        alpha[b] = pb.denominator
        beta = -pb.numerator
        meta = {"pi_b": pb}
        lhs_desc = "|n_t(b)/pi(b) - t|"
    else:
        raise SetupError(f"unknown theorem {theorem}")

    # integer threshold: |q| <= K*scale  <=>  |q| <= floor(K*scale)
    threshold = floor(K.value * scale)

    off, succ = mech.arrays()
    rot = r0.array(mech)
    n = np.zeros(chain.n, dtype=np.int64)
    alpha_arr = np.zeros(chain.n, dtype=np.int64)
    for lab, val in alpha.items():
        alpha_arr[chain.vid(lab)] = val

    if record == "geometric":
        rec_ts = _geometric_times(horizon)
    elif record == "all":
        rec_ts = list(range(1, horizon + 1))
    elif record is None:
        rec_ts = []
    else:
        rec_ts = sorted(int(t) for t in record)
    rec_arr = np.asarray(rec_ts, dtype=np.int64)

    res = _speed.walk_stat(
        off, succ, rot, n, chain.vid(start), horizon,
        alpha_arr, beta, threshold, rec_arr if len(rec_ts) else None, None,
        impl=impl,
    )

    checkpoints = []
    for t, q in zip(rec_ts, res["q_rec"]):
        lhs = Fraction(abs(int(q))) / scale
        checkpoints.append(Checkpoint(t, lhs, K.value, lhs <= K.value))
    worst = Fraction(res["max_abs_q"]) / scale
    meta.update({"lhs": lhs_desc, "theorem": theorem})
    return DiscrepancyReport(
        theorem=theorem,
        constant=K,
        checkpoints=checkpoints,
        violations=res["violations"],
        first_violation_t=res["first_viol_t"],
        worst_lhs=worst,
        worst_t=res["argmax_t"],
        horizon=horizon,
        scale=scale,
        meta=meta,
    )


def _lcm(a: int, b: int) -> int:
    return lcm(a, b)
