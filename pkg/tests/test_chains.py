import random
from fractions import Fraction as F

import pytest

from rotorwalk import (
    MarkovChain,
    build_chain,
    chain_to_json,
    escape_prob,
    expected_visits,
    laplacian,
    redirect_to,
    solve_hitting_prob,
    solve_hitting_time,
    solve_stationary,
    split_and_truncate,
)
from rotorwalk.chains import ChainFamily, PotentialVector, truncate_to_ball
from rotorwalk.errors import (
    ChainSpecError,
    DanglingVertexError,
    NegativeProbError,
    ReducibleChainError,
    RowSumError,
    SelfRedirectError,
    SingularSystemError,
)

from conftest import random_chain


def two_cycle():
    return MarkovChain.from_rows({"a": {"b": 1}, "b": {"a": 1}})


def path4():
    return MarkovChain.from_rows({
        0: {1: 1},
        1: {0: F(1, 2), 2: F(1, 2)},
        2: {1: F(1, 2), 3: F(1, 2)},
        3: {2: 1},
    })


def triangle():
    half = F(1, 2)
    return MarkovChain.from_rows({
        "b": {"c": half, "x": half},
        "c": {"b": half, "x": half},
        "x": {"b": half, "c": half},
    })


class TestBuild:
    def test_two_cycle(self):
        ch = two_cycle()
        assert ch.n == 2
        assert ch.prob("a", "b") == 1

    def test_path_rows_sum_exactly(self):
        ch = path4()
        for u in range(4):
            assert sum(p for _, p in ch.rows[u]) == 1

    def test_row_sum_error(self):
        with pytest.raises(RowSumError):
            MarkovChain.from_rows({"u": {"v": F(1, 3), "w": F(1, 3)},
                                   "v": {"u": 1}, "w": {"u": 1}})

    def test_negative_prob(self):
        with pytest.raises(NegativeProbError):
            MarkovChain.from_rows({"u": {"v": F(-1, 2), "w": F(3, 2)},
                                   "v": {"u": 1}, "w": {"u": 1}})

    def test_json_document(self):
        doc = {
            "vertices": ["a", "b"],
            "edges": [
                {"from": "a", "to": "b", "num": 1, "den": 1},
                {"from": "b", "to": "a", "num": 1, "den": 2},
                {"from": "b", "to": "b", "num": 1, "den": 2},
            ],
        }
        ch = build_chain(doc)
        assert ch.prob("b", "b") == F(1, 2)
        assert build_chain(chain_to_json(ch)).rows == ch.rows

    def test_json_dangling(self):
        with pytest.raises(DanglingVertexError):
            build_chain({"vertices": ["a"], "edges": [{"from": "a", "to": "zz", "num": 1, "den": 1}]})

    def test_json_bad_denominator(self):
        with pytest.raises(NegativeProbError):
            build_chain({"vertices": ["a"], "edges": [{"from": "a", "to": "a", "num": 1, "den": 0}]})

    def test_refuses_floats(self):
        with pytest.raises(NegativeProbError):
            MarkovChain.from_rows({"a": {"a": 0.5, "b": 0.5}, "b": {"a": 1}})


class TestRedirect:
    def test_rows_replaced(self):
        ch = redirect_to(path4(), [0, 3], 1)
        assert ch.row_items(0) == [(1, F(1))]
        assert ch.row_items(3) == [(1, F(1))]
        assert ch.row_items(2) == path4().row_items(2)

    def test_self_redirect(self):
        with pytest.raises(SelfRedirectError):
            redirect_to(path4(), [1, 3], 1)

    def test_triangle_redirect(self):
        ch = redirect_to(triangle(), ["b"], "c")
        assert ch.prob("b", "c") == 1
        assert ch.row_items("x") == triangle().row_items("x")

    def test_h_unchanged_by_redirect(self):
        # the surgery only rewrites rows at b and c, where h is pinned anyway
        plain = path4()
        h0 = solve_hitting_prob(plain, 0, 3)
        h1 = solve_hitting_prob(redirect_to(plain, [0, 3], 1), 0, 3)
        for v in range(4):
            assert h0.of(v) == h1.of(v)


class _LineFamily(ChainFamily):
    def row(self, v):
        return [(v - 1, F(1, 2)), (v + 1, F(1, 2))]


class TestSplitTruncate:
    def test_two_cycle_split(self):
        ch, a0, a1 = split_and_truncate(two_cycle(), "a")
        assert ch.n == 3
        assert ch.row_items(a0) == [("b", F(1))]
        assert ch.row_items("b") == [(a1, F(1))]
        assert ch.row_items(a1) == [(a0, F(1))]

    def test_line_radius_two(self):
        ch, a0, a1 = split_and_truncate(_LineFamily(), 0, 2)
        assert set(ch.labels) == {a0, a1, -2, -1, 1, 2}
        assert ch.row_items(2) == [(a0, F(1))]
        assert ch.row_items(-2) == [(a0, F(1))]
        assert dict(ch.row_items(1)) == {a1: F(1, 2), 2: F(1, 2)}
        assert dict(ch.row_items(a0)) == {-1: F(1, 2), 1: F(1, 2)}

    def test_path_radius_one(self):
        ch, a0, a1 = split_and_truncate(path4(), 1, 1)
        assert set(ch.labels) == {a0, a1, 0, 2}
        assert ch.row_items(0) == [(a0, F(1))]
        assert ch.row_items(2) == [(a0, F(1))]

    def test_self_loop_rejected(self):
        loop = MarkovChain.from_rows({"a": {"a": F(1, 2), "b": F(1, 2)}, "b": {"a": 1}})
        with pytest.raises(ChainSpecError):
            split_and_truncate(loop, "a")

    def test_truncate_to_ball(self):
        ch = truncate_to_ball(_LineFamily(), 0, 3)
        assert set(ch.labels) == {-3, -2, -1, 0, 1, 2, 3}
        assert ch.row_items(3) == [(0, F(1))]


class TestLaplacian:
    def test_constant_harmonic(self):
        ch = path4()
        f = PotentialVector("h", {v: F(7, 3) for v in range(4)})
        for u in range(4):
            assert laplacian(ch, f, u) == 0

    def test_h_harmonic_interior(self):
        ch = path4()
        h = solve_hitting_prob(ch, 0, 3)
        assert laplacian(ch, h, 1) == 0
        assert laplacian(ch, h, 2) == 0

    def test_k_at_target(self):
        ch = two_cycle()
        k = solve_hitting_time(ch, "b")
        assert laplacian(ch, k, "b") == k.of("a") == 1


class TestHittingProb:
    def test_path_gamblers_ruin(self):
        h = solve_hitting_prob(path4(), 0, 3)
        assert [h.of(v) for v in range(4)] == [F(1), F(2, 3), F(1, 3), F(0)]

    def test_triangle_symmetry(self):
        h = solve_hitting_prob(triangle(), "b", "c")
        assert h.of("x") == F(1, 2)

    def test_unreachable(self):
        ch = MarkovChain.from_rows({
            0: {1: 1}, 1: {0: 1}, 2: {3: 1}, 3: {2: 1},
        })
        with pytest.raises(SingularSystemError):
            solve_hitting_prob(ch, 2, 3)

    def test_bounds_and_harmonicity_random(self, rng):
        for _ in range(15):
            ch = random_chain(rng)
            b, c = rng.sample(range(ch.n), 2)
            h = solve_hitting_prob(ch, b, c)
            assert h.of(b) == 1 and h.of(c) == 0
            for u in range(ch.n):
                assert 0 <= h.of(u) <= 1
                if u not in (b, c):
                    assert laplacian(ch, h, u) == 0


class TestHittingTime:
    def test_two_cycle(self):
        assert solve_hitting_time(two_cycle(), "b").of("a") == 1

    def test_reflecting_path(self):
        k = solve_hitting_time(path4(), 0)
        assert [k.of(v) for v in range(4)] == [F(0), F(5), F(8), F(9)]

    def test_three_cycle_symmetry(self):
        half = F(1, 2)
        ch = MarkovChain.from_rows({
            0: {1: half, 2: half},
            1: {0: half, 2: half},
            2: {0: half, 1: half},
        })
        k = solve_hitting_time(ch, 0)
        assert k.of(1) == k.of(2)


class TestStationary:
    def test_two_cycle(self):
        pi = solve_stationary(two_cycle())
        assert pi.of("a") == pi.of("b") == F(1, 2)

    def test_triangle_uniform(self):
        pi = solve_stationary(triangle())
        assert all(pi.of(v) == F(1, 3) for v in ("b", "c", "x"))

    def test_asymmetric(self):
        ch = MarkovChain.from_rows({"a": {"b": 1}, "b": {"a": F(1, 2), "b": F(1, 2)}})
        pi = solve_stationary(ch)
        assert pi.of("a") == F(1, 3) and pi.of("b") == F(2, 3)

    def test_reducible(self):
        ch = MarkovChain.from_rows({"a": {"b": 1}, "b": {"b": 1}})
        with pytest.raises(ReducibleChainError):
            solve_stationary(ch)

    def test_is_stationary_random(self, rng):
        for _ in range(10):
            ch = random_chain(rng, n_max=8)
            pi = solve_stationary(ch)
            for v in range(ch.n):
                inflow = sum(pi.of(u) * ch.prob(u, v) for u in range(ch.n))
                assert inflow == pi.of(v)
            assert sum(pi.values.values()) == 1


class TestEscape:
    def test_triangle(self):
        assert escape_prob(triangle(), "b", "c") == F(3, 4)

    def test_two_cycle_forced(self):
        assert escape_prob(two_cycle(), "a", "b") == 1

    def test_detailed_balance_random(self, rng):
        # pi(b) e_{b,c} = pi(c) e_{c,b}, exactly, on every sampled chain
        for _ in range(10):
            ch = random_chain(rng, n_min=6, n_max=6)
            b, c = rng.sample(range(ch.n), 2)
            pi = solve_stationary(ch)
            assert pi.of(b) * escape_prob(ch, b, c) == pi.of(c) * escape_prob(ch, c, b)

    def test_lemma_identities_random(self, rng):
        for _ in range(10):
            ch = random_chain(rng, n_max=8)
            b, c = rng.sample(range(ch.n), 2)
            h = solve_hitting_prob(ch, b, c)
            assert laplacian(ch, h, b) == -escape_prob(ch, b, c)
            assert laplacian(ch, h, c) == escape_prob(ch, c, b)


class TestExpectedVisits:
    def test_one_shot(self):
        ch = MarkovChain.from_rows({"b": {"s": 1}, "s": {"s": 1}})
        assert expected_visits(ch, "b").of("b") == 1

    def test_geometric_loop(self):
        ch = MarkovChain.from_rows({
            "b": {"b": F(1, 2), "s": F(1, 2)},
            "s": {"s": 1},
        })
        g = expected_visits(ch, "b")
        assert g.of("b") == 2
        assert g.of("s") == 0

    def test_cannot_reach(self):
        ch = MarkovChain.from_rows({
            "u": {"s": 1},
            "b": {"s": 1},
            "s": {"s": 1},
        })
        g = expected_visits(ch, "b")
        assert g.of("u") == 0

    def test_no_escape(self):
        with pytest.raises(SingularSystemError):
            expected_visits(two_cycle(), "b")

    def test_laplacian_characterization(self, rng):
        for _ in range(8):
            ch = random_chain(rng, n_max=7, self_loops=False)
            # graft a sink reachable from vertex 0
            rows = {u: dict(ch.row_items(u)) for u in range(ch.n)}
            rows[0] = {t: p * F(1, 2) for t, p in rows[0].items()}
            rows[0]["sink"] = F(1, 2)
            rows["sink"] = {"sink": F(1)}
            ch2 = MarkovChain.from_rows(rows)
            b = rng.randrange(1, ch.n)
            g = expected_visits(ch2, b)
            for u in range(ch.n):
                expect = F(-1) if u == b else F(0)
                assert laplacian(ch2, g, u) == expect


def test_monte_carlo_cross_check():
    # 1e5 seeded random-walk runs against the exact h(a) on the path
    ch = path4()
    h = solve_hitting_prob(ch, 0, 3)
    ha = float(h.of(1))
    rng = random.Random(12345)
    runs = 100_000
    hits = 0
    rows = {u: ch.row_items(u) for u in range(4)}
    for _ in range(runs):
        x = 1
        while x not in (0, 3):
            r = rng.random()
            acc = 0.0
            for t, p in rows[x]:
                acc += float(p)
                if r < acc:
                    x = t
                    break
        hits += x == 0
    freq = hits / runs
    se = (ha * (1 - ha) / runs) ** 0.5
    assert abs(freq - ha) < 4 * se
