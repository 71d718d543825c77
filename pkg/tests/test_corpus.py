"""Corpus generators: stated shapes, independent oracles, determinism."""

import pytest

from chasm import (
    BOOLEAN,
    CorpusSpec,
    Shape,
    check_shape,
    circuit_stats,
    emit_circuit,
    eval_semiring,
    gen_corpus,
)
from chasm.corpus import (
    gen_bool_reach,
    gen_const_tower,
    gen_imm,
    gen_power,
    gen_random,
    gen_ryser,
    permanent_poly_terms,
)
from chasm.poly import SparsePoly, expand_single

from conftest import permanent_by_permutations, poly_signature


def test_ryser2_is_the_permanent():
    got = poly_signature(expand_single(gen_ryser(2)))
    assert got == {"a1_1*a2_2": 1, "a1_2*a2_1": 1}


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_ryser_matches_permutation_oracle(n):
    assert poly_signature(expand_single(gen_ryser(n))) == permanent_by_permutations(n)


def test_permanent_poly_terms_agrees_with_expansion():
    p = expand_single(gen_ryser(3))
    q = SparsePoly(sorted(p.variables), permanent_poly_terms(3))
    assert p.with_variables(q.variables) == q


def test_ryser_shape():
    st = circuit_stats(gen_ryser(4))
    assert st.depth == 3
    assert st.formal_degree == 4
    assert st.max_mul_fanin == 4


def test_imm_matches_symbolic_matrix_product():
    # independent oracle: multiply symbolic matrices over SparsePoly
    n, k = 2, 3
    c = gen_imm(n, k)
    names = sorted(c.variables())

    def M(l):
        return [
            [SparsePoly.variable(names, f"a{l}_{i}{j}") for j in range(1, n + 1)]
            for i in range(1, n + 1)
        ]

    acc = M(1)
    for l in range(2, k + 1):
        B = M(l)
        acc = [
            [
                sum(
                    (acc[i][t] * B[t][j] for t in range(n)),
                    SparsePoly.zero(names),
                )
                for j in range(n)
            ]
            for i in range(n)
        ]
    want = acc[0][0]
    assert expand_single(c).with_variables(names) == want
    assert circuit_stats(c).formal_degree == k


def test_power_shape():
    c = gen_power(3)
    st = circuit_stats(c)
    assert (st.size, st.formal_degree) == (4, 8)
    assert poly_signature(expand_single(c)) == {"*".join(["x"] * 8): 1}


def test_const_tower_value():
    from chasm import INTEGERS

    for k in (0, 1, 3):
        c = gen_const_tower(k)
        assert c.size == k + 2
        assert eval_semiring(c, {}, INTEGERS) == [2 ** (2**k)]


def test_random_deterministic_bytes():
    a = emit_circuit(gen_random(3, 20, 6, seed=7))
    b = emit_circuit(gen_random(3, 20, 6, seed=7))
    assert a == b
    c = emit_circuit(gen_random(3, 20, 6, seed=8))
    assert a != c


def test_random_respects_caps():
    for seed in range(12):
        c = gen_random(3, 30, 7, seed)
        st = circuit_stats(c)
        assert st.size == 30
        assert st.formal_degree <= 7
        assert check_shape(c, Shape.BINARY_MULTIPLICATIONS_ONLY)[
            Shape.BINARY_MULTIPLICATIONS_ONLY
        ].ok
        assert check_shape(c, Shape.ORDINARY_ADDITIONS_ONLY)[
            Shape.ORDINARY_ADDITIONS_ONLY
        ].ok
        assert check_shape(c, Shape.CONSTANT_FREE)[Shape.CONSTANT_FREE].ok


def test_bool_reach_shape_and_oracle():
    for seed in range(6):
        c = gen_bool_reach(6, seed)
        assert check_shape(c, Shape.SEMI_UNBOUNDED)[Shape.SEMI_UNBOUNDED].ok
        names = c.variables()
        assert len(names) <= 8
        # independent oracle: BFS reachability on the realized graph
        edges_fixed, edges_var = _rebuild_edge_pattern(6, seed)
        for bits in range(1 << len(names)):
            point = {v: (bits >> i) & 1 for i, v in enumerate(sorted(names))}
            graph = set(edges_fixed)
            for (u, v), name in edges_var.items():
                if point.get(name, 0):
                    graph.add((u, v))
            want = 1 if _reaches(graph, 1, 6) else 0
            got = eval_semiring(c, point, BOOLEAN)[0]
            assert got == want, (seed, point)


def _rebuild_edge_pattern(nodes, seed):
    """Replays the generator's seeded edge choices (same rng protocol)."""
    import random

    rng = random.Random(f"chasm/boolreach/{nodes}/{seed}")
    fixed, variables = set(), {}
    var_count = 0
    for u in range(1, nodes + 1):
        for v in range(u + 1, nodes + 1):
            roll = rng.random()
            if roll < 0.5 and var_count < 8:
                var_count += 1
                variables[(u, v)] = f"x{var_count}"
            elif roll < 0.65:
                fixed.add((u, v))
    return fixed, variables


def _reaches(edges, s, t):
    seen, todo = {s}, [s]
    while todo:
        u = todo.pop()
        if u == t:
            return True
        for a, b in edges:
            if a == u and b not in seen:
                seen.add(b)
                todo.append(b)
    return t in seen


def test_gen_corpus_dispatch_and_validation():
    c = gen_corpus(CorpusSpec(family="power", k=2))
    assert c.name == "power2"
    with pytest.raises(ValueError):
        CorpusSpec(family="nope")
    with pytest.raises(ValueError):
        CorpusSpec(family="random", vars=5, size=3, max_degree=2)
    with pytest.raises(ValueError):
        CorpusSpec(family="ryser", n=0)
