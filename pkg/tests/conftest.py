"""Shared helpers: seeded random chain generation and mechanism sampling."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from rotorwalk import MarkovChain, RotorConfig, derive_mechanism


def random_chain(rng: random.Random, n_min=3, n_max=12, max_den=6,
                 extra_edges=2, self_loops=True) -> MarkovChain:
    """Random finite irreducible chain, denominators <= max_den.

    Irreducibility comes from a hidden Hamiltonian cycle; extra edges and
    (optionally) self-loops are sprinkled on top.  Every probability is
    units/D with a per-row denominator D <= max_den.
    """
    n = rng.randint(n_min, n_max)
    labels = list(range(n))
    perm = labels[:]
    rng.shuffle(perm)
    nxt = {perm[i]: perm[(i + 1) % n] for i in range(n)}
    rows = {}
    for u in labels:
        targets = {nxt[u]}
        for _ in range(rng.randint(0, extra_edges)):
            t = rng.randrange(n)
            if t == u and not self_loops:
                continue
            targets.add(t)
        targets = sorted(targets)
        k = len(targets)
        D = rng.randint(max(k, 1), max_den) if k <= max_den else k
        units = [1] * k
        for _ in range(D - k):
            units[rng.randrange(k)] += 1
        rows[u] = {t: Fraction(units[i], D) for i, t in enumerate(targets)}
    return MarkovChain.from_rows(rows)


def shuffled_order(rng: random.Random):
    """Ordering policy: each vertex's successor multiset in random order."""

    def policy(label, pairs):
        lst = []
        for target, m in pairs:
            lst.extend([target] * m)
        rng.shuffle(lst)
        return lst

    return policy


def random_config(rng: random.Random, mech) -> RotorConfig:
    chain = mech.chain
    return RotorConfig(
        0,
        {chain.labels[u]: rng.randrange(mech.d(u)) for u in range(chain.n)},
    )


def sample_mechanisms(rng: random.Random, chain, count=3):
    """`count` mechanisms: id order first, then seeded shuffles."""
    mechs = [derive_mechanism(chain)]
    for _ in range(count - 1):
        mechs.append(derive_mechanism(chain, shuffled_order(rng)))
    return mechs


@pytest.fixture
def rng():
    return random.Random(20260809)
