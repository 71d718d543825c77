"""Normalization passes preparing circuits for the depth pipeline.

* eliminate_subtractions: positive/negative pair encoding, one final
  multiplication by -1; size at most 6t+3, formal degree at most d+1.
* collapse_additions: maximal addition subcircuits become single weighted
  gates, so additions feed only multiplications; formal degree preserved.
* homogenize: per-gate homogeneous components pin the formal degree to the
  true polynomial degree, with a constant-free variant that realizes
  degree-0 factors as doubling chains.
"""

from __future__ import annotations

from ..circuit import (
    ADD,
    CONST,
    INPUT,
    MUL,
    SUB,
    Circuit,
    CircuitBuilder,
    Shape,
    check_shape,
    circuit_stats,
    has_only_ordinary_adds,
    is_constant_free,
)
from ..errors import DegreeOverflow, PreconditionViolated
from ..poly import expand_circuit, monomial_cap
from ..report import CONVENTION, THEOREM, PassReport


def _require_binary_muls(c: Circuit, who: str) -> None:
    r = check_shape(c, Shape.BINARY_MULTIPLICATIONS_ONLY)[Shape.BINARY_MULTIPLICATIONS_ONLY]
    if not r.ok:
        raise PreconditionViolated(f"{who}: gate {r.witness} is a non-binary multiplication")


def binarize_multiplications(c: Circuit) -> Circuit:
    """Rewrite wide products as left-nested binary chains.

    Formal degree is unchanged (the sum over children either way); this is
    the plumbing that lets fan-in-n generator output into the binary-only
    passes.
    """
    if check_shape(c, Shape.BINARY_MULTIPLICATIONS_ONLY)[Shape.BINARY_MULTIPLICATIONS_ONLY].ok:
        return c
    b = CircuitBuilder(c.name)
    m: dict[int, int] = {}
    for g in c.gates:
        if g.kind == MUL and len(g.args) > 2:
            acc = b.mul([m[g.args[0]], m[g.args[1]]])
            for a in g.args[2:]:
                acc = b.mul([acc, m[a]])
            m[g.gid] = acc
        else:
            m[g.gid] = b.copy_gate(g, m)
    return b.build([m[o] for o in c.outputs])


# ---------------------------------------------------------------------------
# subtraction elimination


def eliminate_subtractions(c: Circuit) -> tuple[Circuit, PassReport]:
    """Replace subtraction gates by a positive/negative pair per gate.

    Each original gate corresponds to a pair (pos, neg) with
    value = pos - neg; identically-zero components are simply absent.  The
    output re-assembles its pair as pos + (-1) * neg, which costs the single
    +1 of formal degree.
    """
    for g in c.gates:
        if g.kind == ADD and (len(g.args) != 2 or g.weights != (1, 1)):
            raise PreconditionViolated(
                f"eliminate_subtractions: gate {g.gid} is a weighted addition"
            )
        if g.kind == MUL and len(g.args) != 2:
            raise PreconditionViolated(
                f"eliminate_subtractions: gate {g.gid} is a non-binary multiplication"
            )

    in_stats = circuit_stats(c)
    b = CircuitBuilder(c.name)
    pos: dict[int, int | None] = {}
    neg: dict[int, int | None] = {}

    def plus(x: int | None, y: int | None) -> int | None:
        if x is None:
            return y
        if y is None:
            return x
        return b.add2(x, y)

    def times(x: int | None, y: int | None) -> int | None:
        if x is None or y is None:
            return None
        return b.mul([x, y])

    for g in c.gates:
        if g.kind == INPUT:
            pos[g.gid], neg[g.gid] = b.input(g.var), None
        elif g.kind == CONST:
            if g.value > 0:
                pos[g.gid], neg[g.gid] = b.const(g.value), None
            elif g.value < 0:
                pos[g.gid], neg[g.gid] = None, b.const(-g.value)
            else:
                pos[g.gid], neg[g.gid] = None, None
        elif g.kind == ADD:
            x, y = g.args
            pos[g.gid] = plus(pos[x], pos[y])
            neg[g.gid] = plus(neg[x], neg[y])
        elif g.kind == SUB:
            x, y = g.args
            pos[g.gid] = plus(pos[x], neg[y])
            neg[g.gid] = plus(neg[x], pos[y])
        else:
            x, y = g.args
            pos[g.gid] = plus(times(pos[x], pos[y]), times(neg[x], neg[y]))
            neg[g.gid] = plus(times(neg[x], pos[y]), times(pos[x], neg[y]))

    outputs = []
    for o in c.outputs:
        p, n = pos[o], neg[o]
        if n is None:
            outputs.append(p if p is not None else b.const(0))
        else:
            flipped = b.mul([b.const(-1), n])
            outputs.append(b.add2(p, flipped) if p is not None else flipped)
    out = b.build(outputs)

    out_stats = circuit_stats(out)
    t, d = in_stats.size, in_stats.formal_degree
    size_claim = 6 * t + 3 * len(c.outputs)
    rep = PassReport("eliminate_subtractions", in_stats, out_stats)
    rep.record(
        "size<=6t+3",
        size_claim,
        out_stats.size,
        out_stats.size <= size_claim,
        THEOREM if len(c.outputs) == 1 else CONVENTION,
    )
    rep.record("formal_degree<=d+1", d + 1, out_stats.formal_degree, out_stats.formal_degree <= d + 1)
    rep.record("no_sub_gates", 0, out_stats.subs, out_stats.subs == 0)
    return out, rep


# ---------------------------------------------------------------------------
# addition collapsing


def collapse_additions(c: Circuit) -> tuple[Circuit, PassReport]:
    """Collapse maximal addition/subtraction subcircuits into single weighted
    addition gates, so every addition input is a circuit input or a product.

    Zero net weights are kept (not dropped) so the formal degree is preserved
    exactly even under cancellation.  With only ordinary additions and
    subtractions in the input, every resulting total weight is at most 2^s.
    """
    _require_binary_muls(c, "collapse_additions")
    in_stats = circuit_stats(c)
    s = in_stats.adds + in_stats.subs
    ordinary = has_only_ordinary_adds(c)

    # linear form of every addition-ish gate over "base" gates (leaves, muls),
    # computable in one forward pass because children precede their users
    lin: dict[int, dict[int, int]] = {}

    def form(gid: int) -> dict[int, int]:
        return lin.get(gid, {gid: 1})

    for g in c.gates:
        if g.kind not in (ADD, SUB):
            continue
        acc: dict[int, int] = {}
        pairs = zip(g.args, g.weights) if g.kind == ADD else zip(g.args, (1, -1))
        for a, w in pairs:
            for base, bw in form(a).items():
                acc[base] = acc.get(base, 0) + w * bw
        lin[g.gid] = acc

    b = CircuitBuilder(c.name)
    mapped: dict[int, int] = {}
    realized: dict[int, int] = {}

    def realize(gid: int) -> int:
        """Map a child reference: base gates directly, addition subcircuits
        as one weighted gate each (shared between all their users)."""
        g = c.gate(gid)
        if g.kind not in (ADD, SUB):
            return mapped[gid]
        if gid in realized:
            return realized[gid]
        pairs = [(mapped[base], w) for base, w in form(gid).items()]
        pairs.sort(key=lambda p: p[0])
        if len(pairs) == 1 and pairs[0][1] == 1:
            realized[gid] = pairs[0][0]
        else:
            realized[gid] = b.add(pairs)
        return realized[gid]

    for g in c.gates:
        if g.kind == INPUT:
            mapped[g.gid] = b.input(g.var)
        elif g.kind == CONST:
            mapped[g.gid] = b.const(g.value)
        elif g.kind == MUL:
            mapped[g.gid] = b.mul([realize(a) for a in g.args])
    out = b.build([realize(o) for o in c.outputs])

    out_stats = circuit_stats(out)
    rep = PassReport("collapse_additions", in_stats, out_stats)
    rep.record("add_count<=s", s, out_stats.adds, out_stats.adds <= s)
    rep.record("mul_count==m", in_stats.muls, out_stats.muls, out_stats.muls == in_stats.muls)
    rep.record(
        "formal_degree_preserved",
        in_stats.formal_degree,
        out_stats.formal_degree,
        out_stats.formal_degree == in_stats.formal_degree,
    )
    shape = check_shape(out, Shape.ADD_FEEDS_ONLY_MUL)[Shape.ADD_FEEDS_ONLY_MUL]
    rep.record("add_feeds_only_mul", True, shape.ok, shape.ok)
    if ordinary:
        bound = 2**s
        rep.record(
            "total_weight<=2^s",
            bound,
            out_stats.max_add_total_weight,
            out_stats.max_add_total_weight <= bound,
        )
    return out, rep


# ---------------------------------------------------------------------------
# homogenization


def homogenize(
    c: Circuit,
    mode: str = "vp",
    degree: int | None = None,
    degree_limit: int = 4096,
    cap: int | None = None,
) -> tuple[Circuit, PassReport]:
    out, rep, _ = homogenize_with_components(c, mode, degree, degree_limit, cap)
    return out, rep


def homogenize_with_components(
    c: Circuit,
    mode: str = "vp",
    degree: int | None = None,
    degree_limit: int = 4096,
    cap: int | None = None,
):
    """Rewrite so gate i of the result computes one homogeneous component.

    Degree-0 components are never materialized as gates: multiplying by a
    constant term becomes a unary weighted addition (mode "vp") or a
    constant-free doubling-and-adding chain, most significant bit first, plus
    one subtraction for negative values (mode "vp0").  The constant term of
    each output is re-added at the end the same way.

    The true degree D is taken from the oracle unless supplied; components
    above D cannot contribute and are dropped.  Returns the circuit, the pass
    report, and a {(source gate, i): component gate} map for verification.
    """
    if mode not in ("vp", "vp0"):
        raise ValueError(f"unknown homogenize mode {mode!r}")
    for g in c.gates:
        if g.kind == SUB:
            raise PreconditionViolated(f"homogenize: gate {g.gid} is a subtraction")
        if g.kind == ADD and (len(g.args) != 2 or g.weights != (1, 1)):
            raise PreconditionViolated(f"homogenize: gate {g.gid} is a weighted addition")
        if g.kind == MUL and len(g.args) != 2:
            raise PreconditionViolated(f"homogenize: gate {g.gid} is a non-binary multiplication")
    if mode == "vp0" and not is_constant_free(c):
        raise PreconditionViolated("homogenize: mode vp0 needs a constant-free circuit")

    in_stats = circuit_stats(c)
    if degree is None:
        polys = expand_circuit(c, monomial_cap(cap))
        D = max(p.degree() for p in polys)
    else:
        D = degree
    if D > degree_limit:
        raise DegreeOverflow(f"true degree {D} exceeds the limit {degree_limit}")

    b = CircuitBuilder(c.name)
    # comp[gid][i] = gate computing the degree-i part (1 <= i <= D), absent
    # entries are structurally zero; c0[gid] = exact integer constant term.
    comp: dict[int, dict[int, int]] = {}
    c0: dict[int, int] = {}
    leaf_cache: dict[str, int] = {}

    def scaled(x: int, k: int) -> int | None:
        """Gate computing k * value(x), without touching formal degree."""
        if k == 0:
            return None
        if k == 1:
            return x
        if mode == "vp":
            return b.add([(x, k)])
        # doubling chain on |k|, Horner order; the caller folds the sign
        acc = x
        for bit in bin(abs(k))[3:]:
            acc = b.add2(acc, acc)
            if bit == "1":
                acc = b.add2(acc, x)
        if k < 0:
            acc = b.sub(b.const(0), acc)
        return acc

    def combine(parts: list[int | None]) -> int | None:
        acc: int | None = None
        for p in parts:
            if p is None:
                continue
            acc = p if acc is None else b.add2(acc, p)
        return acc

    for g in c.gates:
        if g.kind == INPUT:
            if g.var not in leaf_cache:
                leaf_cache[g.var] = b.input(g.var)
            comp[g.gid] = {1: leaf_cache[g.var]}
            c0[g.gid] = 0
        elif g.kind == CONST:
            comp[g.gid] = {}
            c0[g.gid] = g.value
        elif g.kind == ADD:
            x, y = g.args
            parts: dict[int, int] = {}
            for i in range(1, D + 1):
                merged = combine([comp[x].get(i), comp[y].get(i)])
                if merged is not None:
                    parts[i] = merged
            comp[g.gid] = parts
            c0[g.gid] = c0[x] + c0[y]
        else:  # MUL
            x, y = g.args
            parts = {}
            for i in range(1, D + 1):
                terms: list[int | None] = []
                for j in range(1, i):
                    a, bb = comp[x].get(j), comp[y].get(i - j)
                    if a is not None and bb is not None:
                        terms.append(b.mul([a, bb]))
                if comp[y].get(i) is not None:
                    terms.append(scaled(comp[y][i], c0[x]))
                if comp[x].get(i) is not None:
                    terms.append(scaled(comp[x][i], c0[y]))
                merged = combine(terms)
                if merged is not None:
                    parts[i] = merged
            comp[g.gid] = parts
            c0[g.gid] = c0[x] * c0[y]

    outputs = []
    for o in c.outputs:
        total = combine([comp[o].get(i) for i in range(1, D + 1)])
        k = c0[o]
        if k != 0:
            if mode == "vp":
                const_gate = b.const(k)
            else:
                const_gate = scaled(b.const(1), abs(k))
            if total is None:
                total = const_gate if (mode == "vp" or k > 0) else b.sub(b.const(0), const_gate)
            elif mode == "vp" or k > 0:
                total = b.add2(total, const_gate)
            else:
                total = b.sub(total, const_gate)
        if total is None:
            total = b.const(0)
        outputs.append(total)
    out = b.build(outputs)

    out_stats = circuit_stats(out)
    rep = PassReport(f"homogenize[{mode}]", in_stats, out_stats)
    expected_fd = max(D, 1)  # formal degree is >= 1 by definition
    rep.record(
        "formal_degree==true_degree",
        expected_fd,
        out_stats.formal_degree,
        out_stats.formal_degree == expected_fd,
    )
    size_claim = 10 * in_stats.size * (D + 1) ** 2
    rep.record("size<=10t(D+1)^2", size_claim, out_stats.size, out_stats.size <= size_claim, CONVENTION)
    if mode == "vp0":
        cf = is_constant_free(out)
        rep.record("constant_free", True, cf, cf)
    rep.notes["true_degree"] = D
    comp_map = {(gid, i): gate for gid, parts in comp.items() for i, gate in parts.items()}
    return out, rep, comp_map
