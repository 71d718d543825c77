"""Weakly-skew conversion, branching programs, and the depth-4 targets."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chasm import (
    AddInputCondition,
    CircuitBuilder,
    NotWeaklySkew,
    PipelineConfig,
    Shape,
    abp_stats,
    abp_to_depth4,
    abp_to_depth_2delta,
    binarize_multiplications,
    check_shape,
    circuit_stats,
    circuit_to_abp,
    collapse_additions,
    equiv_exact,
    eval_semiring,
    reduce_to_depth4,
    to_weakly_skew,
    weakly_skew_to_abp,
    INTEGERS,
)
from chasm.corpus import gen_imm, gen_power, gen_random, gen_ryser
from chasm.poly import expand_single

from conftest import poly_signature, square_circuit, sub_circuit


def test_to_weakly_skew_square():
    c = square_circuit()  # size 4, formal degree 2
    out, rep = to_weakly_skew(c)
    assert out.size == 7 <= 4 ** 2  # t^log2(2d) = 4^2
    shapes = check_shape(out, [Shape.WEAKLY_SKEW, Shape.ADD_FEEDS_ONLY_MUL])
    assert shapes[Shape.WEAKLY_SKEW].ok and shapes[Shape.ADD_FEEDS_ONLY_MUL].ok
    assert poly_signature(expand_single(out)) == {"x*x": 1, "x*y": 2, "y*y": 1}
    assert circuit_stats(out).formal_degree == 2
    assert rep.all_ok()


def test_to_weakly_skew_keeps_weights():
    b = CircuitBuilder("w")
    x, y = b.input("x"), b.input("y")
    a = b.add([(x, 1), (y, -2)])
    c = b.build([b.mul([a, a])])
    out, rep = to_weakly_skew(c)
    assert check_shape(out, Shape.WEAKLY_SKEW)[Shape.WEAKLY_SKEW].ok
    weights = sorted(tuple(sorted(g.weights)) for g in out.gates if g.kind == "add")
    assert weights == [(-2, 1), (-2, 1)]
    assert equiv_exact(c, out)
    assert rep.all_ok()


def test_to_weakly_skew_already_skew_stays_equivalent():
    b = CircuitBuilder("skew")
    x, y, z = b.input("x"), b.input("y"), b.input("z")
    c = b.build([b.mul([b.mul([x, y]), z])])
    out, rep = to_weakly_skew(c)
    assert check_shape(out, Shape.WEAKLY_SKEW)[Shape.WEAKLY_SKEW].ok
    assert equiv_exact(c, out)
    assert rep.all_ok()


def test_to_weakly_skew_imm():
    c = gen_imm(2, 3)
    out, rep = to_weakly_skew(c)
    assert check_shape(out, Shape.WEAKLY_SKEW)[Shape.WEAKLY_SKEW].ok
    assert equiv_exact(c, out)
    assert rep.all_ok()


def test_weakly_skew_to_abp_single_input():
    b = CircuitBuilder("justx")
    c = b.build([b.input("x")])
    abp, rep = weakly_skew_to_abp(c)
    assert abp.m == 2
    assert abp.edges == ((1, 2, "x"),)
    assert abp_stats(abp).depth == 1  # = 3*1 - 2
    assert rep.all_ok()


def test_weakly_skew_to_abp_square():
    ws, _ = to_weakly_skew(square_circuit())
    abp, rep = weakly_skew_to_abp(ws)
    assert abp.m <= ws.size + 1 == 8
    assert abp_stats(abp).depth <= 3 * 2 - 1
    assert poly_signature(expand_single(abp)) == {"x*x": 1, "x*y": 2, "y*y": 1}
    assert rep.all_ok()


def test_weakly_skew_to_abp_weighted_edges():
    b = CircuitBuilder("w")
    c = b.build([b.add([(b.input("x"), 1), (b.input("y"), -2)])])
    abp, rep = weakly_skew_to_abp(c)
    labels = sorted(l for _, _, l in abp.edges if isinstance(l, int))
    assert labels == [-2, 1]
    assert poly_signature(expand_single(abp)) == {"x": 1, "y": -2}
    assert rep.all_ok()


def test_weakly_skew_to_abp_rejects_bad_inputs():
    with pytest.raises(NotWeaklySkew):
        weakly_skew_to_abp(collapse_additions(square_circuit())[0].with_outputs([4]))
    # additions fed by additions violate the input condition
    b = CircuitBuilder("chain")
    x, y, z = b.input("x"), b.input("y"), b.input("z")
    c = b.build([b.add2(b.add2(x, y), z)])
    with pytest.raises(AddInputCondition):
        weakly_skew_to_abp(c)


def test_weakly_skew_to_abp_multi_output():
    b = CircuitBuilder("multi")
    x, y = b.input("x"), b.input("y")
    m = b.mul([x, y])
    s = b.add([(m, 1), (x, 1)])
    c = b.build([m, s])
    abp, _ = weakly_skew_to_abp(c)
    polys = [poly_signature(p) for p in __import__("chasm").expand_to_poly(abp)]
    assert polys == [{"x*y": 1}, {"x*y": 1, "x": 1}]


def test_circuit_to_abp_subtraction():
    abp, rep = circuit_to_abp(sub_circuit())
    st = abp_stats(abp)
    assert st.depth <= 2
    assert all(abs(l) <= 2**3 for _, _, l in abp.edges if isinstance(l, int))
    assert poly_signature(expand_single(abp)) == {"x": 1, "y": -1}
    assert rep.all_ok()


def test_circuit_to_abp_power2():
    c = gen_power(2)  # t=3, d=4
    abp, rep = circuit_to_abp(c)
    st = abp_stats(abp)
    assert st.size <= 3 ** 3 + 1 == 28
    assert st.depth <= 11
    assert poly_signature(expand_single(abp)) == {"x*x*x*x": 1}
    assert st.trimmed
    assert rep.all_ok()


def test_circuit_to_abp_ryser3_permanent():
    c = gen_ryser(3)
    abp, rep = circuit_to_abp(c)
    from conftest import permanent_by_permutations

    assert poly_signature(expand_single(abp)) == permanent_by_permutations(3)
    assert rep.all_ok()


def test_abp_to_depth4_counts_dense_match_formulas(abp_a2):
    # m=3, depth 2, q=2: every entry enumerated, so the counts hit the stated
    # formulas exactly: m^2+1 additions, m^(q+1)+m^(q-1) products
    out, rep = abp_to_depth4(abp_a2, "circuit", prune_zero_terms=False)
    st = circuit_stats(out)
    assert st.adds == 3**2 + 1 == 10
    assert st.muls == 3**3 + 3 == 30
    assert {len(g.args) for g in out.gates if g.kind == "mul"} == {2}
    assert poly_signature(expand_single(out)) == {"x*y": 1, "z": 1}
    assert rep.all_ok()


def test_abp_to_depth4_pruned_smaller(abp_a2):
    out, rep = abp_to_depth4(abp_a2, "circuit")
    st = circuit_stats(out)
    assert st.adds == 3 and st.muls == 4  # hand count over nonzero entries
    assert st.adds <= 10 and st.muls <= 30
    assert check_shape(out, Shape.DEPTH4_SIGMA_PI_SIGMA_PI)[Shape.DEPTH4_SIGMA_PI_SIGMA_PI].ok
    assert poly_signature(expand_single(out)) == {"x*y": 1, "z": 1}
    assert rep.all_ok()


def test_abp_to_depth4_formula(abp_a2):
    out, rep = abp_to_depth4(abp_a2, "formula")
    st = circuit_stats(out)
    assert st.adds <= 3 ** 1 + 1
    assert st.muls <= 3 + 9
    # fan-out one everywhere except the output
    uses = {}
    for g in out.gates:
        for a in g.args:
            uses[a] = uses.get(a, 0) + 1
    assert all(n <= 1 for n in uses.values())
    assert poly_signature(expand_single(out)) == {"x*y": 1, "z": 1}
    assert rep.all_ok()


def test_abp_to_depth4_degenerate(abp_a1):
    out, rep = abp_to_depth4(abp_a1, "circuit")
    assert poly_signature(expand_single(out)) == {"x": 1}
    assert circuit_stats(out).depth <= 4
    assert rep.all_ok()


def test_abp_to_depth4_ryser_formula_mode():
    abp, _ = circuit_to_abp(gen_ryser(3))
    out, rep = abp_to_depth4(abp, "formula")
    from conftest import permanent_by_permutations

    assert poly_signature(expand_single(out)) == permanent_by_permutations(3)
    assert rep.all_ok()


def test_depth_2delta_matches_depth4_for_two_stages(abp_a2):
    d4, _ = abp_to_depth4(abp_a2, "circuit")
    d2, rep = abp_to_depth_2delta(abp_a2, 2)
    assert d4.gates == d2.gates
    assert rep.all_ok()


def test_depth_2delta_three_stages_on_depth8():
    abp, _ = circuit_to_abp(gen_power(3))  # x^8: chain of depth 8
    assert abp_stats(abp).depth == 8
    out, rep = abp_to_depth_2delta(abp, 3)
    assert rep.notes["stage_power"] == 2
    assert circuit_stats(out).depth <= 6
    assert poly_signature(expand_single(out)) == {"*".join(["x"] * 8): 1}
    assert rep.all_ok()


def test_depth_2delta_depth_bound_sweep():
    for seed in (0, 5, 9):
        abp, _ = circuit_to_abp(gen_random(2, 14, 6, seed))
        for delta in (2, 3):
            out, rep = abp_to_depth_2delta(abp, delta)
            assert circuit_stats(out).depth <= 2 * delta
            assert rep.all_ok()


def test_ryser_shape_progression():
    # the generator output is neither skew nor weakly skew (wide products,
    # shared entries); after binarizing and privatizing it is weakly skew
    c = gen_ryser(3)
    rep = check_shape(c, [Shape.SKEW, Shape.WEAKLY_SKEW])
    assert not rep[Shape.SKEW].ok
    assert not rep[Shape.WEAKLY_SKEW].ok
    ws, _ = to_weakly_skew(binarize_multiplications(c))
    assert check_shape(ws, Shape.WEAKLY_SKEW)[Shape.WEAKLY_SKEW].ok


def test_depth4_of_imm34_random_verification():
    from chasm import equiv_random

    c = gen_imm(3, 4)
    out, _ = reduce_to_depth4(c, PipelineConfig(verify="none"))
    verdict = equiv_random(c, out, trials=20, seed=0)
    assert verdict.equivalent
    assert float(verdict.failure_bound) < 1e-300


def test_reduce_to_depth4_power3():
    c = gen_power(3)  # t=4, d=8
    out, rep = reduce_to_depth4(c, PipelineConfig(verify="exact"))
    assert not rep.notes["fast_path"]
    assert eval_semiring(out, {"x": 2}, INTEGERS) == [256]
    st = circuit_stats(out)
    assert st.max_mul_fanin <= 5  # sqrt(3*8)+1 ~ 5.9
    assert rep.all_ok()


def test_reduce_to_depth4_fast_path_for_weakly_skew_input():
    ws, _ = to_weakly_skew(binarize_multiplications(gen_ryser(4)))
    out, rep = reduce_to_depth4(ws, PipelineConfig(verify="random", trials=8, seed=3))
    assert rep.notes["fast_path"]
    assert rep.notes["T"] == f"{ws.size}+1"
    assert rep.all_ok()


def test_reduce_to_depth4_constants_bounded():
    c = gen_random(2, 20, 6, seed=12)  # constant-free, ordinary adds and subs
    t = binarize_multiplications(c).size
    out, rep = reduce_to_depth4(c)
    assert circuit_stats(out).max_abs_constant <= 2**t
    assert rep.bound("const<=2^t").ok
    assert equiv_exact(c, out)
    assert rep.all_ok()


def test_reduce_to_depth4_formula_mode():
    c = gen_imm(2, 2)
    out, rep = reduce_to_depth4(c, PipelineConfig(mode="formula"))
    assert check_shape(out, Shape.DEPTH4_SIGMA_PI_SIGMA_PI)[Shape.DEPTH4_SIGMA_PI_SIGMA_PI].ok
    assert equiv_exact(c, out)
    assert rep.all_ok()


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_depth4_pipeline_equivalence_property(seed):
    c = gen_random(1 + seed % 3, 10 + seed % 12, 5, seed)
    out, rep = reduce_to_depth4(c, PipelineConfig(verify="none"))
    assert equiv_exact(c, out)
    assert rep.all_ok()


def test_degenerate_inputs_reduce_cleanly():
    b = CircuitBuilder("justx")
    c = b.build([b.input("x")])
    out, rep = reduce_to_depth4(c)
    assert poly_signature(expand_single(out)) == {"x": 1}
    assert rep.all_ok()
    b = CircuitBuilder("five")
    c = b.build([b.const(5)])
    out, rep = reduce_to_depth4(c)
    assert poly_signature(expand_single(out)) == {"": 5}
    assert rep.all_ok()


def test_zero_program_reduces_to_constant_zero():
    from chasm import trim

    b = CircuitBuilder("zero")
    x = b.input("x")
    c = b.build([b.sub(x, x)])
    # collapsing first cancels the weights, leaving an unreachable sink
    collapsed, _ = collapse_additions(c)
    abp = trim(weakly_skew_to_abp(collapsed)[0])
    assert abp.m == 2 and not abp.edges
    out, rep = abp_to_depth4(abp, "circuit")
    assert expand_single(out).terms == {}
    assert rep.all_ok()
    # the generic pipeline may keep cancelling paths; still the zero polynomial
    abp2, _ = circuit_to_abp(c)
    assert expand_single(abp2).terms == {}
    out2, _ = abp_to_depth4(abp2, "circuit")
    assert expand_single(out2).terms == {}
