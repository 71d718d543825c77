"""Branching programs: stats, trimming, and the matrix-powering view."""

import pytest

from chasm import (
    Abp,
    NotTrimmed,
    ParseError,
    abp_stats,
    abp_to_matrix,
    emit_abp,
    parse_abp,
    trim,
    zero_abp,
)
from chasm.poly import (
    equiv_exact,
    expand_single,
    poly_matpow,
    poly_row_power,
)

from conftest import poly_signature


def test_stats_a1(abp_a1):
    st = abp_stats(abp_a1)
    assert (st.size, st.depth, st.edge_count, st.trimmed) == (2, 1, 1, True)


def test_stats_a2(abp_a2):
    st = abp_stats(abp_a2)
    assert (st.size, st.depth) == (3, 2)
    assert st.trimmed


def test_trim_removes_isolated_node(abp_a2):
    g = Abp("A2plus", 4, tuple((u, v, l) for u, v, l in ((1, 2, "x"), (2, 4, "y"), (1, 4, "z"))))
    assert not g.is_trimmed()
    t = trim(g)
    assert t.m == 3
    assert equiv_exact(g, t)
    assert t.is_trimmed()


def test_trim_idempotent(abp_a2):
    assert trim(abp_a2) is abp_a2


def test_trim_removes_dangling_branch():
    g = Abp("dangle", 4, ((1, 2, "w"), (1, 3, "x"), (3, 4, "y")))
    before = expand_single(g)
    t = trim(g)
    assert t.m == 3
    assert expand_single(t).with_variables(before.variables) == before
    st_before, st_after = abp_stats(g), abp_stats(t)
    assert st_after.size <= st_before.size
    assert st_after.depth <= st_before.depth


def test_trim_no_path_gives_zero_program():
    g = Abp("nopath", 3, ((1, 2, "x"),))
    z = trim(g)
    assert z.m == 2 and not z.edges
    assert z.is_trimmed()
    assert expand_single(z).terms == {}
    assert trim(zero_abp()) == zero_abp()


def test_matrix_a1(abp_a1):
    M = abp_to_matrix(abp_a1)
    assert M.entries == ((None, "x"), (None, 1))
    rows = M.to_poly_rows()
    for p in (1, 2, 5):
        power = poly_matpow(rows, p)
        assert poly_signature(power[0][1]) == {"x": 1}


def test_matrix_requires_trimmed():
    g = Abp("u", 4, ((1, 2, "x"), (2, 4, "y"), (1, 4, "z")))
    with pytest.raises(NotTrimmed):
        abp_to_matrix(g)


def test_matrix_power_reads_polynomial(abp_a2):
    M = abp_to_matrix(abp_a2).to_poly_rows()
    sq = poly_matpow(M, 2)
    assert poly_signature(sq[0][2]) == {"x*y": 1, "z": 1}
    # the loop pads shorter paths for any higher power
    p4 = poly_matpow(M, 4)
    assert p4[0][2] == sq[0][2]


def test_matrix_power_row_one_zeros(abp_a2):
    # row 1 of M^p vanishes off the sink column once p >= depth; columns
    # other than the first row do carry path sums, so trimming plus the
    # first-row reading is the form of this claim that trimming makes true
    M = abp_to_matrix(abp_a2).to_poly_rows()
    delta = abp_stats(abp_a2).depth
    for p in (delta, delta + 1, delta + 3):
        row = poly_row_power(M, p, row=0)
        assert row[2] == expand_single(abp_a2).with_variables(row[2].variables)
        assert all(not row[j] for j in range(len(row) - 1))


def test_row_power_matches_full_power(abp_a2):
    M = abp_to_matrix(abp_a2).to_poly_rows()
    assert poly_row_power(M, 3, row=0) == list(poly_matpow(M, 3)[0])


def test_abp_text_round_trip(abp_a2):
    text = emit_abp(abp_a2)
    back = parse_abp(text)
    assert back == abp_a2
    assert emit_abp(back) == text


def test_abp_rejects_bad_edges():
    with pytest.raises(ParseError):
        Abp("bad", 3, ((2, 2, "x"),))
    with pytest.raises(ParseError):
        Abp("bad", 3, ((1, 2, "x"), (1, 2, "y")))


def test_multi_output_nodes_round_trip():
    g = Abp("multi", 3, ((1, 2, "x"), (2, 3, "y")), output_nodes=(2, 3))
    back = parse_abp(emit_abp(g))
    assert back.output_nodes == (2, 3)
