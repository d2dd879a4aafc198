"""Exact-rational Markov chains, chain surgeries and potential solvers.

Every transition probability is a `fractions.Fraction`; linear systems are
eliminated exactly so that the discrepancy inequalities checked elsewhere in
the package are decided with no rounding at all.

Vertices carry opaque hashable labels (strings for chains read from JSON,
ints or tuples for generated families) that are mapped to dense integer ids
at build time; all surgeries append new vertices, so ids of surviving
vertices stay stable.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .errors import (
    ChainSpecError,
    DanglingVertexError,
    MissingValueError,
    NegativeProbError,
    ReducibleChainError,
    RowSumError,
    SelfRedirectError,
    SingularSystemError,
)

Label = Hashable
Row = tuple[tuple[int, Fraction], ...]

ONE = Fraction(1)
ZERO = Fraction(0)


def as_fraction(value) -> Fraction:
    """Coerce ints, 'num/den' strings, (num, den) pairs and Fractions."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, tuple) and len(value) == 2:
        return Fraction(value[0], value[1])
    if isinstance(value, float):
        raise NegativeProbError(
            f"refusing float probability {value!r}; pass an exact rational"
        )
    raise ChainSpecError(f"cannot interpret {value!r} as a rational")


class MarkovChain:
    """A finite Markov chain with exact rational transition rows.

    Immutable after construction; surgeries return new chains.
    """

    __slots__ = ("labels", "rows", "_index")

    def __init__(self, labels: Sequence[Label], rows: Sequence[Row]):
        self.labels: tuple[Label, ...] = tuple(labels)
        self.rows: tuple[Row, ...] = tuple(tuple(r) for r in rows)
        self._index: dict[Label, int] = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != len(self.labels):
            raise ChainSpecError("duplicate vertex labels")
        self._validate()

    # -- construction ----------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Mapping[Label, Mapping[Label, object]]) -> "MarkovChain":
        labels = list(rows.keys())
        index = {lab: i for i, lab in enumerate(labels)}
        built: list[Row] = []
        for lab in labels:
            row = []
            for target, p in rows[lab].items():
                if target not in index:
                    raise DanglingVertexError(f"edge {lab!r}->{target!r}: undeclared target")
                row.append((index[target], as_fraction(p)))
            row.sort(key=lambda e: e[0])
            built.append(tuple(row))
        return cls(labels, built)

    def _validate(self) -> None:
        n = len(self.labels)
        for u, row in enumerate(self.rows):
            if not row:
                raise RowSumError(f"vertex {self.labels[u]!r} has no outgoing edges")
            seen = set()
            total = ZERO
            for v, p in row:
                if not (0 <= v < n):
                    raise DanglingVertexError(f"row {self.labels[u]!r}: bad target id {v}")
                if v in seen:
                    raise ChainSpecError(
                        f"row {self.labels[u]!r}: duplicate target {self.labels[v]!r}"
                    )
                seen.add(v)
                if p <= 0:
                    raise NegativeProbError(
                        f"p({self.labels[u]!r},{self.labels[v]!r}) = {p} is not positive"
                    )
                total += p
            if total != ONE:
                raise RowSumError(
                    f"row {self.labels[u]!r} sums to {total}, expected 1"
                )

    # -- accessors --------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.labels)

    def vid(self, label: Label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise DanglingVertexError(f"unknown vertex {label!r}") from None

    def label(self, vid: int) -> Label:
        return self.labels[vid]

    def row(self, label: Label) -> Row:
        return self.rows[self.vid(label)]

    def prob(self, u: Label, v: Label) -> Fraction:
        vi = self.vid(v)
        for w, p in self.rows[self.vid(u)]:
            if w == vi:
                return p
        return ZERO

    def row_items(self, label: Label) -> list[tuple[Label, Fraction]]:
        return [(self.labels[v], p) for v, p in self.rows[self.vid(label)]]

    def __repr__(self) -> str:
        return f"MarkovChain(n={self.n})"

    # -- structure --------------------------------------------------------

    def with_rows(self, replacements: Mapping[Label, Mapping[Label, object]]) -> "MarkovChain":
        """New chain with the given rows replaced, others untouched."""
        rows = list(self.rows)
        for lab, row in replacements.items():
            u = self.vid(lab)
            new = []
            for target, p in row.items():
                new.append((self.vid(target), as_fraction(p)))
            new.sort(key=lambda e: e[0])
            rows[u] = tuple(new)
        return MarkovChain(self.labels, rows)

    def successors(self, u: int) -> list[int]:
        return [v for v, _ in self.rows[u]]

    def is_irreducible(self) -> bool:
        n = self.n
        if n == 0:
            return False
        fwd = [[] for _ in range(n)]
        bwd = [[] for _ in range(n)]
        for u, row in enumerate(self.rows):
            for v, _ in row:
                fwd[u].append(v)
                bwd[v].append(u)

        def full_reach(adj) -> bool:
            seen = [False] * n
            seen[0] = True
            stack = [0]
            count = 1
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        count += 1
                        stack.append(v)
            return count == n

        return full_reach(fwd) and full_reach(bwd)

    def reaches(self, targets: Iterable[Label]) -> list[bool]:
        """reaches[u] == True iff some target is reachable from u."""
        n = self.n
        bwd = [[] for _ in range(n)]
        for u, row in enumerate(self.rows):
            for v, _ in row:
                bwd[v].append(u)
        seen = [False] * n
        stack = []
        for t in targets:
            ti = self.vid(t)
            if not seen[ti]:
                seen[ti] = True
                stack.append(ti)
        while stack:
            u = stack.pop()
            for w in bwd[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return seen

    def sinks(self) -> list[Label]:
        """Vertices v with p(v,v) = 1."""
        out = []
        for u, row in enumerate(self.rows):
            if len(row) == 1 and row[0][0] == u:
                out.append(self.labels[u])
        return out


# -- JSON ingestion -------------------------------------------------------


def build_chain(spec: Mapping) -> MarkovChain:
    """Build a validated chain from the JSON document structure.

    ``{"vertices": [...], "edges": [{"from","to","num","den"}, ...]}``;
    probabilities arrive as integer numerator/denominator pairs.
    """
    if "vertices" not in spec or "edges" not in spec:
        raise ChainSpecError("chain spec needs 'vertices' and 'edges'")
    labels = list(spec["vertices"])
    index = {lab: i for i, lab in enumerate(labels)}
    if len(index) != len(labels):
        raise ChainSpecError("duplicate vertex labels")
    rows: list[list[tuple[int, Fraction]]] = [[] for _ in labels]
    for e in spec["edges"]:
        u, v = e["from"], e["to"]
        if u not in index:
            raise DanglingVertexError(f"edge source {u!r} not declared")
        if v not in index:
            raise DanglingVertexError(f"edge target {v!r} not declared")
        num, den = int(e["num"]), int(e["den"])
        if den <= 0:
            raise NegativeProbError(f"edge {u!r}->{v!r}: denominator {den} not positive")
        rows[index[u]].append((index[v], Fraction(num, den)))
    for row in rows:
        row.sort(key=lambda t: t[0])
    return MarkovChain(labels, [tuple(r) for r in rows])


def load_chain_json(path) -> MarkovChain:
    with open(path, "r", encoding="utf-8") as fh:
        return build_chain(json.load(fh))


def chain_to_json(chain: MarkovChain) -> dict:
    edges = []
    for u, row in enumerate(chain.rows):
        for v, p in row:
            edges.append(
                {
                    "from": chain.labels[u],
                    "to": chain.labels[v],
                    "num": p.numerator,
                    "den": p.denominator,
                }
            )
    return {"vertices": list(chain.labels), "edges": edges}


# -- surgeries ------------------------------------------------------------


def redirect_to(chain: MarkovChain, sources: Iterable[Label], a: Label) -> MarkovChain:
    """Replace each source's row by the forced transition {a: 1}."""
    sources = set(sources)
    if a in sources:
        raise SelfRedirectError(f"redirect target {a!r} is among the sources")
    chain.vid(a)
    return chain.with_rows({s: {a: ONE} for s in sources})


class ChainFamily:
    """Row oracle for a countable chain; only ever solved after truncation."""

    def row(self, label: Label) -> list[tuple[Label, Fraction]]:  # pragma: no cover
        raise NotImplementedError

    def initial_residue(self, label: Label) -> int:
        return 0


def _row_oracle(chain_or_family) -> Callable[[Label], list[tuple[Label, Fraction]]]:
    if isinstance(chain_or_family, MarkovChain):
        return chain_or_family.row_items
    return chain_or_family.row


def split_and_truncate(
    chain_or_family,
    a: Label,
    d: int | None = None,
):
    """Split vertex ``a`` into an outgoing copy a0 and an incoming copy a1.

    a0 inherits the outgoing row of ``a`` (with any edge back into ``a``
    re-pointed at a1), every other vertex has its edges into ``a`` re-pointed
    at a1, and a1 carries the forced row {a0: 1}.  With a radius ``d``, the
    vertex set is clipped to the set reachable from ``a`` in at most ``d``
    steps and every vertex at distance exactly ``d`` has its row replaced by
    the forced row {a0: 1}.

    Returns ``(chain, a0, a1)`` where the copies are labelled
    ``(a, "out")`` and ``(a, "in")``.
    """
    row_of = _row_oracle(chain_or_family)
    if d is None:
        if not isinstance(chain_or_family, MarkovChain):
            raise ChainSpecError("an infinite family needs a truncation radius")
        d = chain_or_family.n  # large enough to cover every reachable vertex
    if d < 1:
        raise ChainSpecError("truncation radius must be >= 1")
    for target, _ in row_of(a):
        if target == a:
            raise ChainSpecError(f"cannot split {a!r}: it has a self-loop")

    a0 = (a, "out")
    a1 = (a, "in")

    # breadth-first closure of radius d around a, in deterministic order
    dist: dict[Label, int] = {a: 0}
    order: list[Label] = []
    queue = deque([a])
    while queue:
        u = queue.popleft()
        du = dist[u]
        if du >= d:
            continue
        for v, _ in row_of(u):
            if v not in dist:
                dist[v] = du + 1
                order.append(v)
                queue.append(v)

    labels: list[Label] = [a0, a1] + order
    rows: dict[Label, dict[Label, Fraction]] = {}

    def mapped(u: Label) -> dict[Label, Fraction]:
        out: dict[Label, Fraction] = {}
        for v, p in row_of(u):
            key = a1 if v == a else v
            out[key] = out.get(key, ZERO) + p
        return out

    rows[a0] = mapped(a)
    rows[a1] = {a0: ONE}
    for u in order:
        if dist[u] == d:
            rows[u] = {a0: ONE}
        else:
            rows[u] = mapped(u)

    index = {lab: i for i, lab in enumerate(labels)}
    built = []
    for lab in labels:
        row = sorted(((index[v], p) for v, p in rows[lab].items()), key=lambda t: t[0])
        built.append(tuple(row))
    return MarkovChain(labels, built), a0, a1


def truncate_to_ball(chain_or_family, a: Label, d: int, redirect: Label | None = None):
    """Clip to the radius-``d`` ball around ``a`` without splitting.

    Vertices at distance exactly ``d`` get the forced row ``{redirect: 1}``
    (``redirect`` defaults to ``a``).  Used for escape detection on chains
    where the return vertex is observed directly rather than via a split.
    """
    row_of = _row_oracle(chain_or_family)
    if d < 1:
        raise ChainSpecError("truncation radius must be >= 1")
    target = a if redirect is None else redirect
    dist: dict[Label, int] = {a: 0}
    order: list[Label] = [a]
    queue = deque([a])
    while queue:
        u = queue.popleft()
        du = dist[u]
        if du >= d:
            continue
        for v, _ in row_of(u):
            if v not in dist:
                dist[v] = du + 1
                order.append(v)
                queue.append(v)
    rows = {}
    for u in order:
        if dist[u] == d:
            rows[u] = {target: ONE}
        else:
            rows[u] = {v: p for v, p in row_of(u)}
    index = {lab: i for i, lab in enumerate(order)}
    built = []
    for lab in order:
        row = sorted(((index[v], p) for v, p in rows[lab].items()), key=lambda t: t[0])
        built.append(tuple(row))
    return MarkovChain(order, built)


# -- potentials -----------------------------------------------------------


@dataclass(frozen=True)
class PotentialVector:
    """Exact rational vertex function with its defining role."""

    kind: str  # "h" | "k" | "pi" | "g"
    values: Mapping[Label, Fraction]
    meta: dict = field(default_factory=dict, compare=False)

    def of(self, label: Label) -> Fraction:
        try:
            return self.values[label]
        except KeyError:
            raise MissingValueError(f"{self.kind} has no value at {label!r}") from None

    def __contains__(self, label: Label) -> bool:
        return label in self.values


def laplacian(chain: MarkovChain, f, u: Label) -> Fraction:
    """Delta f(u) = sum_v p(u,v) f(v) - f(u), exactly."""
    get = f.of if isinstance(f, PotentialVector) else None
    if get is None:
        values = f

        def get(lab):
            try:
                return values[lab]
            except KeyError:
                raise MissingValueError(f"no value at {lab!r}") from None

    acc = -get(u)
    for v, p in chain.row_items(u):
        acc += p * get(v)
    return acc


# -- exact sparse elimination ----------------------------------------------


def solve_sparse_linear(
    equations: dict[Hashable, dict[Hashable, Fraction]],
    rhs: dict[Hashable, Fraction],
) -> dict[Hashable, Fraction]:
    """Solve a square sparse rational system by exact elimination.

    ``equations[r]`` maps unknown -> coefficient for equation ``r``.  Pivots
    are chosen to keep fill low (fewest-entries column, then fewest-entries
    row), which keeps path-like systems near linear.  Raises
    SingularSystemError when no unique solution exists.
    """
    eqs = {r: dict(cols) for r, cols in equations.items()}
    b = {r: rhs.get(r, ZERO) for r in eqs}
    col_rows: dict[Hashable, set] = {}
    for r, cols in eqs.items():
        for cvar in cols:
            col_rows.setdefault(cvar, set()).add(r)
    unknowns = set(col_rows)
    if len(unknowns) != len(eqs):
        raise SingularSystemError("system is not square")

    pivots: list[tuple[Hashable, Hashable]] = []  # (row, column) in order
    active = set(eqs)
    while unknowns:
        # fewest-rows column, deterministic tie-break on repr
        cvar = min(unknowns, key=lambda cv: (len(col_rows[cv]), repr(cv)))
        candidates = [r for r in col_rows[cvar] if r in active and eqs[r].get(cvar)]
        if not candidates:
            raise SingularSystemError(f"no pivot available for unknown {cvar!r}")
        prow = min(candidates, key=lambda r: (len(eqs[r]), repr(r)))
        pivots.append((prow, cvar))
        active.discard(prow)
        unknowns.discard(cvar)
        pcoef = eqs[prow][cvar]
        for r in list(col_rows[cvar]):
            if r == prow or r not in active:
                continue
            factor = eqs[r].get(cvar)
            if not factor:
                col_rows[cvar].discard(r)
                continue
            scale = factor / pcoef
            for cv2, coef2 in eqs[prow].items():
                cur = eqs[r].get(cv2, ZERO) - scale * coef2
                if cur:
                    if cv2 not in eqs[r]:
                        col_rows.setdefault(cv2, set()).add(r)
                    eqs[r][cv2] = cur
                else:
                    if cv2 in eqs[r]:
                        del eqs[r][cv2]
                        col_rows[cv2].discard(r)
            b[r] = b[r] - scale * b[prow]

    solution: dict[Hashable, Fraction] = {}
    for prow, cvar in reversed(pivots):
        acc = b[prow]
        for cv2, coef in eqs[prow].items():
            if cv2 != cvar:
                acc -= coef * solution[cv2]
        solution[cvar] = acc / eqs[prow][cvar]
    return solution


# -- solvers ---------------------------------------------------------------


def solve_hitting_prob(chain: MarkovChain, b: Label, c: Label) -> PotentialVector:
    """h(v) = P_v(T_b < T_c) by the exact harmonic system.

    Requires every vertex to reach {b, c}; boundary values h(b)=1, h(c)=0.
    """
    if b == c:
        raise ChainSpecError("hitting probability needs two distinct targets")
    reach = chain.reaches([b, c])
    if not all(reach):
        bad = [chain.labels[i] for i, ok in enumerate(reach) if not ok]
        raise SingularSystemError(f"vertices cannot reach {{b,c}}: {bad[:5]}")
    bi, ci = chain.vid(b), chain.vid(c)
    known = {bi: ONE, ci: ZERO}
    eqs: dict[int, dict[int, Fraction]] = {}
    rhs: dict[int, Fraction] = {}
    for u in range(chain.n):
        if u in known:
            continue
        row: dict[int, Fraction] = {u: Fraction(-1)}
        r = ZERO
        for v, p in chain.rows[u]:
            if v in known:
                r -= p * known[v]
            else:
                row[v] = row.get(v, ZERO) + p
                if not row[v]:
                    del row[v]
        eqs[u] = row
        rhs[u] = r
    sol = solve_sparse_linear(eqs, rhs) if eqs else {}
    values = {chain.labels[bi]: ONE, chain.labels[ci]: ZERO}
    for u, val in sol.items():
        values[chain.labels[u]] = val
    return PotentialVector("h", values, {"b": b, "c": c})


def solve_hitting_time(chain: MarkovChain, b: Label) -> PotentialVector:
    """k(v) = E_v T_b, exact; requires b reachable from every vertex."""
    reach = chain.reaches([b])
    if not all(reach):
        bad = [chain.labels[i] for i, ok in enumerate(reach) if not ok]
        raise SingularSystemError(f"vertices cannot reach {b!r}: {bad[:5]}")
    bi = chain.vid(b)
    eqs: dict[int, dict[int, Fraction]] = {}
    rhs: dict[int, Fraction] = {}
    for u in range(chain.n):
        if u == bi:
            continue
        row: dict[int, Fraction] = {u: Fraction(-1)}
        for v, p in chain.rows[u]:
            if v != bi:
                row[v] = row.get(v, ZERO) + p
                if not row[v]:
                    del row[v]
        eqs[u] = row
        rhs[u] = Fraction(-1)
    sol = solve_sparse_linear(eqs, rhs) if eqs else {}
    values = {chain.labels[bi]: ZERO}
    for u, val in sol.items():
        values[chain.labels[u]] = val
    return PotentialVector("k", values, {"b": b})


def solve_stationary(chain: MarkovChain) -> PotentialVector:
    """Stationary distribution of a finite irreducible chain, normalized."""
    if not chain.is_irreducible():
        raise ReducibleChainError("stationary vector needs an irreducible chain")
    n = chain.n
    if n == 1:
        return PotentialVector("pi", {chain.labels[0]: ONE})
    # balance equations for all vertices but the last, plus normalization
    eqs: dict[int, dict[int, Fraction]] = {}
    rhs: dict[int, Fraction] = {}
    for v in range(n - 1):
        eqs[v] = {v: Fraction(-1)}
        rhs[v] = ZERO
    for u, row in enumerate(chain.rows):
        for v, p in row:
            if v < n - 1:
                eqs[v][u] = eqs[v].get(u, ZERO) + p
                if not eqs[v][u]:
                    del eqs[v][u]
    eqs[n - 1] = {u: ONE for u in range(n)}
    rhs[n - 1] = ONE
    sol = solve_sparse_linear(eqs, rhs)
    values = {chain.labels[u]: sol[u] for u in range(n)}
    if any(val <= 0 for val in values.values()):
        raise SingularSystemError("stationary solve produced non-positive mass")
    return PotentialVector("pi", values)


def escape_prob(chain: MarkovChain, b: Label, c: Label) -> Fraction:
    """e_{b,c} = P_b(T_c < T_b^+), computed exactly as -Delta h_{b,c}(b)."""
    h = solve_hitting_prob(chain, b, c)
    return -laplacian(chain, h, b)


def expected_visits(chain: MarkovChain, b: Label) -> PotentialVector:
    """g(v) = expected number of visits to b; sinks absorb and count nothing.

    Escape must be possible from b (some sink reachable), otherwise the visit
    count is infinite and the solve is refused.
    """
    sinks = set(chain.sinks())
    if b in sinks:
        raise ChainSpecError("g is not defined for a sink target")
    bi = chain.vid(b)
    reach_b = [False] * chain.n
    # vertices that can reach b (forward edges reversed)
    bwd = [[] for _ in range(chain.n)]
    for u, row in enumerate(chain.rows):
        for v, _ in row:
            bwd[v].append(u)
    stack = [bi]
    reach_b[bi] = True
    while stack:
        u = stack.pop()
        for w in bwd[u]:
            if not reach_b[w]:
                reach_b[w] = True
                stack.append(w)

    sink_ids = {chain.vid(s) for s in sinks}
    escape = chain.reaches(sinks) if sinks else [False] * chain.n
    if not escape[bi]:
        raise SingularSystemError("no escape route from b: g would be infinite")

    eqs: dict[int, dict[int, Fraction]] = {}
    rhs: dict[int, Fraction] = {}
    unknown = [
        u
        for u in range(chain.n)
        if reach_b[u] and u not in sink_ids
    ]
    unknown_set = set(unknown)
    for u in unknown:
        row: dict[int, Fraction] = {u: Fraction(-1)}
        for v, p in chain.rows[u]:
            if v in unknown_set:
                row[v] = row.get(v, ZERO) + p
                if not row[v]:
                    del row[v]
        eqs[u] = row
        rhs[u] = Fraction(-1) if u == bi else ZERO
    sol = solve_sparse_linear(eqs, rhs) if eqs else {}
    values = {}
    for u in range(chain.n):
        if u in sol:
            values[chain.labels[u]] = sol[u]
        else:
            values[chain.labels[u]] = ZERO
    g = PotentialVector("g", values, {"b": b})
    if any(val < 0 for val in values.values()):
        raise SingularSystemError("negative expected visits; system inconsistent")
    return g
