"""Log-depth squaring for programs, degree layering to polylog depth, and
the boolean constant-depth flattening."""

import pytest

from chasm import (
    Abp,
    BOOLEAN,
    CircuitBuilder,
    StructureMismatch,
    abp_stats,
    abp_to_logdepth,
    circuit_stats,
    circuit_to_abp,
    equiv_exact,
    eval_semiring,
    reduce_boolean,
    reduce_to_polylog,
    truth_table,
)
from chasm.corpus import gen_bool_reach, gen_imm, gen_power, gen_random
from chasm.poly import expand_to_poly
from chasm.semiring import literal_layout

from conftest import poly_signature


def per_node_polys(abp: Abp):
    every = Abp(abp.name, abp.m, abp.edges, tuple(range(1, abp.m + 1)))
    return expand_to_poly(every)


def test_logdepth_a2(abp_a2):
    out, rep = abp_to_logdepth(abp_a2)
    assert circuit_stats(out).depth <= 2
    sigs = [poly_signature(p) for p in expand_to_poly(out)]
    assert sigs == [{"": 1}, {"x": 1}, {"x*y": 1, "z": 1}]
    assert rep.all_ok()


def test_logdepth_a1_zero_stages(abp_a1):
    out, rep = abp_to_logdepth(abp_a1)
    assert rep.notes["stages"] == 0
    assert circuit_stats(out).depth == 0
    sigs = [poly_signature(p) for p in expand_to_poly(out)]
    assert sigs == [{"": 1}, {"x": 1}]
    assert rep.all_ok()


def test_logdepth_matches_per_node_path_sums():
    for make in (lambda: gen_imm(2, 2), lambda: gen_random(2, 15, 5, 2)):
        abp, _ = circuit_to_abp(make())
        out, rep = abp_to_logdepth(abp)
        want = per_node_polys(abp)
        got = expand_to_poly(out)
        assert len(got) == abp.m
        for w, g in zip(want, got):
            assert g.with_variables(w.variables) == w
        assert rep.all_ok()


def test_logdepth_counts_and_depth():
    abp, _ = circuit_to_abp(gen_power(3))
    m, delta = abp.m, abp_stats(abp).depth
    out, rep = abp_to_logdepth(abp)
    stages = rep.notes["stages"]
    assert stages == (delta - 1).bit_length()
    st = circuit_stats(out)
    assert st.depth <= 2 * stages
    assert rep.bound("mul_count<=m^3*stages").ok
    assert rep.bound("add_count<=m^2*stages").ok
    assert all(len(g.args) == 2 for g in out.gates if g.kind == "mul")
    assert rep.all_ok()


def test_polylog_power4():
    c = gen_power(4)
    out, rep = reduce_to_polylog(c)
    assert eval_semiring(out, {"x": 2}, __import__("chasm").INTEGERS) == [65536]
    assert equiv_exact(c, out)
    t, d = c.size, 16
    assert circuit_stats(out).depth <= 4 * (1 + (t - 1).bit_length()) * (1 + 4)
    assert rep.all_ok()


def test_polylog_imm():
    c = gen_imm(2, 4)
    out, rep = reduce_to_polylog(c)
    assert rep.notes["layers"] <= 1 + 2  # d = 4
    assert equiv_exact(c, out)
    assert rep.all_ok()


def test_polylog_random_sweep():
    for seed in (1, 4, 8, 13):
        c = gen_random(3, 22, 7, seed)
        out, rep = reduce_to_polylog(c)
        assert equiv_exact(c, out)
        assert rep.all_ok()


def test_polylog_output_is_binary_mul_unbounded_add():
    out, _ = reduce_to_polylog(gen_random(2, 20, 6, 3))
    for g in out.gates:
        if g.kind == "mul":
            assert len(g.args) == 2
        assert g.kind != "sub"


def test_polylog_leaf_output():
    b = CircuitBuilder("leafout")
    x = b.input("x")
    c = b.build([b.add2(x, x), x])
    out, _ = reduce_to_polylog(c)
    sigs = [poly_signature(p) for p in expand_to_poly(out)]
    assert sigs == [{"x": 2}, {"x": 1}]


def or_of_ands() -> "Circuit":
    b = CircuitBuilder("orand")
    x1, x2, x3 = b.input("x1"), b.input("x2"), b.input("x3")
    return b.build([b.add([(b.mul([x1, x2]), 1), (b.mul([x2, x3]), 1)])])


def test_reduce_boolean_or_of_ands():
    c = or_of_ands()
    out, rep = reduce_boolean(c, 2)
    assert circuit_stats(out).depth <= 4
    layout = literal_layout(sorted(set(c.variables()) | set(out.variables())))
    assert truth_table(c, layout) == truth_table(out, layout)
    assert rep.bound("truth_table_identical").ok
    assert rep.all_ok()


def test_reduce_boolean_single_and():
    b = CircuitBuilder("and2")
    c = b.build([b.mul([b.input("x1"), b.input("x2")])])
    (mask,) = truth_table(c)
    assert mask == 0b1000
    out, rep = reduce_boolean(c, 2)
    layout = literal_layout(sorted(set(c.variables()) | set(out.variables())))
    assert truth_table(c, layout) == truth_table(out, layout)
    assert rep.all_ok()


def test_reduce_boolean_reachability_depth6():
    for seed in (0, 1):
        c = gen_bool_reach(6, seed)
        out, rep = reduce_boolean(c, 3)
        assert circuit_stats(out).depth <= 6
        assert rep.bound("truth_table_identical").ok
        assert rep.all_ok()


def test_reduce_boolean_rejects_sub_and_bad_consts():
    b = CircuitBuilder("bad")
    c = b.build([b.sub(b.input("x1"), b.input("x2"))])
    with pytest.raises(StructureMismatch):
        reduce_boolean(c, 2)
    b = CircuitBuilder("bad2")
    c = b.build([b.add2(b.input("x1"), b.const(2))])
    with pytest.raises(StructureMismatch):
        reduce_boolean(c, 2)


def test_reduce_boolean_uses_complement_literals():
    b = CircuitBuilder("withneg")
    x1, nx1, x2 = b.input("x1"), b.input("nx1"), b.input("x2")
    c = b.build([b.add([(b.mul([x1, x2]), 1), (nx1, 1)])])
    out, rep = reduce_boolean(c, 2)
    layout = literal_layout(sorted(set(c.variables()) | set(out.variables())))
    assert truth_table(c, layout) == truth_table(out, layout)
    assert rep.bound("truth_table_identical").ok


def test_boolean_semantics_match_semiring_eval():
    c = or_of_ands()
    out, _ = reduce_boolean(c, 2)
    for row in range(8):
        point = {f"x{i+1}": (row >> i) & 1 for i in range(3)}
        assert eval_semiring(out, point, BOOLEAN) == eval_semiring(c, point, BOOLEAN)
