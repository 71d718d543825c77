"""The depth pipeline: circuit -> weakly-skew -> branching program ->
{depth-4, depth-2D, logarithmic depth}, plus degree layering to polylog depth
and the boolean constant-depth flattening.

All passes are pure circuit/program functions returning (result, PassReport);
every numeric claim they make is re-measured on the output and recorded as a
bound check.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from ..abp import Abp, abp_stats, abp_to_matrix, trim
from ..circuit import (
    ADD,
    CONST,
    INPUT,
    MUL,
    SUB,
    Circuit,
    CircuitAnalysis,
    CircuitBuilder,
    Shape,
    check_shape,
    circuit_stats,
    formal_degree,
    has_only_ordinary_adds,
    is_constant_free,
    private_child,
)
from ..errors import (
    AddInputCondition,
    LayerNotSkew,
    NotWeaklySkew,
    PreconditionViolated,
    StructureMismatch,
)
from ..poly import equiv_exact, equiv_random
from ..report import (
    CONVENTION,
    PassReport,
    approx,
    bound_expr,
    fanin_bound_holds,
    iv,
    log2iv,
    pow_bound_holds,
    sqrtiv,
    weakly_skew_size_bound_holds,
)
from .normalize import binarize_multiplications, collapse_additions


@dataclass(frozen=True)
class PipelineConfig:
    target: str = "depth4"  # depth4 | depth2delta | polylog | boolean
    mode: str = "circuit"  # depth4 only: circuit | formula
    delta: int = 2
    prune_zero_terms: bool = True
    verify: str = "exact"  # exact | random | none
    trials: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.target in ("depth2delta", "boolean") and self.delta < 2:
            raise ValueError("delta must be >= 2")
        if self.mode not in ("circuit", "formula"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.verify not in ("exact", "random", "none"):
            raise ValueError(f"unknown verify policy {self.verify!r}")


def integer_root_ceil(x: int, k: int) -> int:
    """Smallest r >= 1 with r^k >= x."""
    r = 1
    while r**k < x:
        r += 1
    return r


def ceil_log2(x: int) -> int:
    return (x - 1).bit_length() if x >= 1 else 0


# ---------------------------------------------------------------------------
# circuit -> weakly skew


def to_weakly_skew(c: Circuit) -> tuple[Circuit, PassReport]:
    """Duplicate shared subcircuits so every product owns one operand.

    Additions are first collapsed onto multiplication boundaries; then gates
    are copied top-down, and at every product the child of smaller formal
    degree (ties: smaller sub-DAG, then smaller id) is rebuilt as a
    completely fresh private subcircuit while the other child stays shared.
    Copies keep the weights of the originals, and every leaf reference gets
    its own input gate, so input fan-out is 1 throughout.
    """
    bin_shape = check_shape(c, Shape.BINARY_MULTIPLICATIONS_ONLY)
    if not bin_shape[Shape.BINARY_MULTIPLICATIONS_ONLY].ok:
        raise PreconditionViolated(
            f"to_weakly_skew: gate {bin_shape[Shape.BINARY_MULTIPLICATIONS_ONLY].witness}"
            " is a non-binary multiplication"
        )
    in_stats = circuit_stats(c)
    t, d = in_stats.size, in_stats.formal_degree
    ordinary = has_only_ordinary_adds(c)

    # collapsing first both moves additions onto product boundaries and merges
    # duplicate references into weights, which the size bound needs (a leaf
    # referenced twice by one sum would otherwise become two private copies)
    work, crep = collapse_additions(c)
    stages = [crep]

    fd = formal_degree(work)
    analysis = CircuitAnalysis(work)
    b = CircuitBuilder(c.name)

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * work.size + 1000))
    try:

        def build(gid: int, memo: dict[int, int]) -> int:
            g = work.gate(gid)
            if g.kind == INPUT:
                return b.input(g.var)
            if g.kind == CONST:
                return b.const(g.value)
            if gid in memo:
                return memo[gid]
            if g.kind == ADD:
                r = b.add([(build(a, memo), w) for a, w in zip(g.args, g.weights)])
            elif g.kind == SUB:
                r = b.sub(build(g.args[0], memo), build(g.args[1], memo))
            else:
                x, y = g.args
                if x == y:
                    shared, priv = x, y
                else:
                    priv = min(x, y, key=lambda a: (fd[a], analysis.cone_size[a], a))
                    shared = y if priv == x else x
                r = b.mul([build(shared, memo), build(priv, {})])
            memo[gid] = r
            return r

        top: dict[int, int] = {}
        out = b.build([build(o, top) for o in work.outputs])
    finally:
        sys.setrecursionlimit(old_limit)

    out_stats = circuit_stats(out)
    rep = PassReport("to_weakly_skew", in_stats, out_stats, stages=stages)
    rep.record(
        "size<=t^log2(2d)",
        bound_expr(f"{t}^log2(2*{d})", iv.exp(log2iv(2 * d) * iv.log(iv.mpf(t)))),
        out_stats.size,
        weakly_skew_size_bound_holds(out_stats.size, t, d),
    )
    rep.record(
        "formal_degree_preserved", d, out_stats.formal_degree, out_stats.formal_degree == d
    )
    ws = check_shape(out, [Shape.WEAKLY_SKEW, Shape.ADD_FEEDS_ONLY_MUL])
    rep.record("weakly_skew", True, ws[Shape.WEAKLY_SKEW].ok, ws[Shape.WEAKLY_SKEW].ok)
    rep.record(
        "add_feeds_only_mul",
        True,
        ws[Shape.ADD_FEEDS_ONLY_MUL].ok,
        ws[Shape.ADD_FEEDS_ONLY_MUL].ok,
    )
    if ordinary:
        rep.record(
            "total_weight<=2^t",
            2**t,
            out_stats.max_add_total_weight,
            out_stats.max_add_total_weight <= 2**t,
        )
    return out, rep


# ---------------------------------------------------------------------------
# weakly skew -> branching program


def weakly_skew_to_abp(c: Circuit) -> tuple[Abp, PassReport]:
    """Translate a weakly skew circuit into a branching program.

    Gates become nodes with weight(source -> node) equal to the gate's
    polynomial: leaves hang off the context source by one labeled edge,
    additions collect weighted edges from their children, and a product
    grafts the private child's subprogram onto the shared child's node (the
    private subprogram's source is that node).  Size is at most m+1 because
    products reuse their private root's node; depth at most 3d-1.
    """
    in_stats = circuit_stats(c)
    shape = check_shape(c, Shape.ADD_FEEDS_ONLY_MUL)[Shape.ADD_FEEDS_ONLY_MUL]
    if not shape.ok:
        raise AddInputCondition(shape.witness)
    analysis = CircuitAnalysis(c)
    priv: dict[int, int] = {}
    for g in c.gates:
        if g.kind == MUL:
            if len(g.args) != 2:
                raise NotWeaklySkew(g.gid)
            child = private_child(c, g.gid, analysis)
            if child is None:
                raise NotWeaklySkew(g.gid)
            priv[g.gid] = child

    pos = analysis.pos

    def local_order(roots) -> list[int]:
        """Context gates reachable from the roots: additions pull in all
        children, products only their shared child (the private child starts
        a nested context)."""
        seen: set[int] = set()
        stack = list(roots)
        while stack:
            gid = stack.pop()
            if gid in seen:
                continue
            seen.add(gid)
            g = c.gate(gid)
            if g.kind == MUL:
                x, y = g.args
                stack.append(x if priv[gid] == y else y)
            elif not g.is_leaf():
                stack.extend(g.args)
        return sorted(seen, key=lambda gid: pos[gid])

    node_count = 1  # node 1 is the source
    edges: list[tuple[int, int, object]] = []

    def new_node() -> int:
        nonlocal node_count
        node_count += 1
        return node_count

    # explicit frame stack: [order, index, source node, env, completion hook]
    frames = [[local_order(c.outputs), 0, 1, {}, None]]
    top_env = frames[0][3]
    while frames:
        frame = frames[-1]
        order, i, source, env, hook = frame
        if i == len(order):
            frames.pop()
            if hook is not None:
                parent_env, mul_gid, gamma = hook
                parent_env[mul_gid] = env[gamma]
            continue
        gid = order[i]
        g = c.gate(gid)
        if g.kind == MUL:
            if gid in env:
                frame[1] += 1
                continue
            gamma = priv[gid]
            beta = g.args[0] if priv[gid] == g.args[1] else g.args[1]
            frames.append([local_order([gamma]), 0, env[beta], {}, (env, gid, gamma)])
            continue
        if g.is_leaf():
            v = new_node()
            edges.append((source, v, g.var if g.kind == INPUT else g.value))
        else:  # (weighted) addition; children are leaves or products by shape
            v = new_node()
            merged: dict[int, int] = {}
            weights = g.weights if g.kind == ADD else (1, -1)
            for a, w in zip(g.args, weights):
                merged[env[a]] = merged.get(env[a], 0) + w
            for u in sorted(merged):
                if merged[u] != 0:
                    edges.append((u, v, merged[u]))
        env[gid] = v
        frame[1] += 1

    output_nodes = [top_env[o] for o in c.outputs]
    if len(output_nodes) == 1:
        abp = _renumber_sink_last(c.name, node_count, edges, output_nodes[0])
    else:
        abp = Abp(c.name, node_count, tuple(edges), tuple(output_nodes))

    st = abp_stats(abp)
    d = in_stats.formal_degree
    rep = PassReport("weakly_skew_to_abp", in_stats, st)
    rep.record("abp_size<=m+1", in_stats.size + 1, st.size, st.size <= in_stats.size + 1)
    dist = abp.longest_from_source()
    observed_depth = max((dist.get(n, 0) for n in abp.output_nodes), default=0)
    rep.record("abp_depth<=3d-1", 3 * d - 1, observed_depth, observed_depth <= 3 * d - 1)
    return abp, rep


def _renumber_sink_last(name, node_count, edges, sink) -> Abp:
    """Drop the (path-irrelevant) descendants of the sink and renumber so the
    sink is the highest node; creation order is already topological."""
    succ: dict[int, list[int]] = {}
    for u, v, _ in edges:
        succ.setdefault(u, []).append(v)
    dropped: set[int] = set()
    stack = list(succ.get(sink, []))
    while stack:
        v = stack.pop()
        if v in dropped:
            continue
        dropped.add(v)
        stack.extend(succ.get(v, []))
    keep = [v for v in range(1, node_count + 1) if v not in dropped and v != sink]
    keep.append(sink)
    renumber = {old: new for new, old in enumerate(keep, start=1)}
    kept_edges = tuple(
        (renumber[u], renumber[v], label)
        for u, v, label in edges
        if u not in dropped and v not in dropped
    )
    return Abp(name, len(keep), kept_edges)


# ---------------------------------------------------------------------------
# circuit -> branching program (composition)


def circuit_to_abp(c: Circuit) -> tuple[Abp, PassReport]:
    """collapse_additions -> to_weakly_skew -> weakly_skew_to_abp -> trim.

    Wide products are first binarized (the theorem sizes t and d are measured
    on the binary-product form).
    """
    work = binarize_multiplications(c)
    in_stats = circuit_stats(work)
    t, d = in_stats.size, in_stats.formal_degree
    cf_ordinary = is_constant_free(work) and has_only_ordinary_adds(work)

    ws, rep_ws = to_weakly_skew(work)  # collapses internally when needed
    abp, rep_abp = weakly_skew_to_abp(ws)
    abp = trim(abp)

    st = abp_stats(abp)
    rep = PassReport("circuit_to_abp", in_stats, st, stages=[rep_ws, rep_abp])
    size_ok = st.size <= 1 or pow_bound_holds(st.size - 1, t, log2iv(2 * d))
    rep.record(
        "abp_size<=t^log2(2d)+1",
        bound_expr(f"{t}^log2(2*{d})+1", iv.exp(log2iv(2 * d) * iv.log(iv.mpf(t))) + 1),
        st.size,
        size_ok,
    )
    rep.record("abp_depth<=3d-1", 3 * d - 1, st.depth, st.depth <= 3 * d - 1)
    if cf_ordinary:
        biggest = max((abs(l) for _, _, l in abp.edges if isinstance(l, int)), default=0)
        rep.record("edge_const<=2^t", 2**t, biggest, biggest <= 2**t)
    if work is not c:
        rep.notes["binarized_products"] = True
    return abp, rep


# ---------------------------------------------------------------------------
# matrix powering cascades


class _PowerStage:
    """Nonzero structure bookkeeping for one symbolic matrix power."""

    def __init__(self, succ: dict[int, list[int]]):
        self.succ = {u: sorted(vs) for u, vs in succ.items() if vs}
        self.succ_sets = {u: set(vs) for u, vs in self.succ.items()}

    def compose_power(self, r: int) -> "_PowerStage":
        """Structure of the r-th power of this structure."""
        acc = {u: {u} for u in self._nodes()}
        for _ in range(r):
            nxt: dict[int, set[int]] = {}
            for u, mids in acc.items():
                s: set[int] = set()
                for v in mids:
                    s.update(self.succ_sets.get(v, ()))
                if s:
                    nxt[u] = s
            acc = nxt
        return _PowerStage({u: sorted(vs) for u, vs in acc.items()})

    def _nodes(self):
        nodes = set(self.succ)
        for vs in self.succ.values():
            nodes.update(vs)
        return nodes

    def has(self, u: int, v: int) -> bool:
        return v in self.succ_sets.get(u, ())

    def backward_layers(self, target: int, r: int) -> list[set[int]]:
        """back[s] = nodes that reach ``target`` in exactly s steps."""
        pred: dict[int, list[int]] = {}
        for u, vs in self.succ.items():
            for v in vs:
                pred.setdefault(v, []).append(u)
        back = [{target}]
        for _ in range(r):
            cur: set[int] = set()
            for v in back[-1]:
                cur.update(pred.get(v, ()))
            back.append(cur)
        return back

    def paths(self, a: int, b: int, r: int, back: list[set[int]]):
        """All node sequences a -> ... -> b of exactly r steps, lexicographic."""
        seq = [a]
        out: list[tuple[int, ...]] = []

        def go(node: int, left: int) -> None:
            if left == 0:
                if node == b:
                    out.append(tuple(seq))
                return
            for nxt in self.succ.get(node, ()):
                if nxt in back[left - 1]:
                    seq.append(nxt)
                    go(nxt, left - 1)
                    seq.pop()

        go(a, r)
        return out


def _dense_stage(m: int) -> _PowerStage:
    return _PowerStage({u: list(range(1, m + 1)) for u in range(1, m + 1)})


def _matrix_cascade(
    g: Abp, powers: list[int], builder: CircuitBuilder, prune: bool, formula: bool
) -> int:
    """Emit gates computing (M^(prod powers))_{1,m} for the sink-loop matrix.

    Each cascade step raises the current symbolic matrix to one power by
    brute-force path expansion: a product gate per node sequence (fan-in =
    the step's power) and a sum gate per needed entry.  With pruning only
    sequences over structurally nonzero entries are kept; a power of 1 is a
    pass-through.  Formula mode rebuilds entries (and leaves) per use, so
    every gate has fan-out one.
    """
    M = abp_to_matrix(g)
    m = g.m
    label_of: dict[tuple[int, int], object] = {}
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            e = M.entry(i, j)
            if e is not None:
                label_of[(i, j)] = e

    shared_leaves: dict[object, int] = {}

    def leaf_gate(i: int, j: int) -> int:
        label = label_of.get((i, j), 0)
        if formula:
            return builder.input(label) if isinstance(label, str) else builder.const(label)
        key = ("v", label) if isinstance(label, str) else ("c", label)
        if key not in shared_leaves:
            shared_leaves[key] = (
                builder.input(label) if isinstance(label, str) else builder.const(label)
            )
        return shared_leaves[key]

    # structs[k] = nonzero structure of the matrix entering cascade step k
    if prune:
        adj: dict[int, list[int]] = {}
        for u, v in label_of:
            adj.setdefault(u, []).append(v)
        structs = [_PowerStage(adj)]
    else:
        structs = [_dense_stage(m)]
    for r in powers[:-1]:
        structs.append(structs[-1].compose_power(r) if prune else _dense_stage(m))

    # needed[k] = entries of the step-k input matrix that must exist as gates,
    # walked backward from the single top entry; the dense (no-prune) variant
    # materializes every entry of every intermediate power, as the stated
    # gate-count formulas assume
    K = len(powers)
    needed: list[set[tuple[int, int]]] = [set() for _ in range(K + 1)]
    needed[K] = {(1, m)}
    if not prune:
        allpairs = {(i, j) for i in range(1, m + 1) for j in range(1, m + 1)}
        for k in range(K):
            needed[k] = set(allpairs)
        return _cascade_emit(builder, structs, powers, needed, leaf_gate, formula, m)
    for k in range(K - 1, -1, -1):
        st = structs[k]
        r = powers[k]
        factors: set[tuple[int, int]] = set()
        for a, b2 in needed[k + 1]:
            if r == 1:
                factors.add((a, b2))
                continue
            back = st.backward_layers(b2, r)
            forward = {a}
            for s in range(1, r + 1):
                step: set[int] = set()
                for u in forward:
                    for v in st.succ.get(u, ()):
                        if v in back[r - s]:
                            factors.add((u, v))
                            step.add(v)
                forward = step
        needed[k] = factors
    return _cascade_emit(builder, structs, powers, needed, leaf_gate, formula, m)


def _cascade_emit(builder, structs, powers, needed, leaf_gate, formula, m) -> int:
    K = len(powers)
    if formula:

        def entry_gate(k: int, a: int, b2: int) -> int:
            if k == 0:
                return leaf_gate(a, b2)
            st = structs[k - 1]
            r = powers[k - 1]
            if r == 1:
                return entry_gate(k - 1, a, b2)
            back = st.backward_layers(b2, r)
            prods = []
            for seq in st.paths(a, b2, r, back):
                prods.append(builder.mul([entry_gate(k - 1, seq[l], seq[l + 1]) for l in range(r)]))
            return builder.add([(p, 1) for p in prods])

        return entry_gate(K, 1, m)

    entries: dict[tuple[int, int], int] = {}
    for i, j in sorted(needed[0]):
        entries[(i, j)] = leaf_gate(i, j)
    for k, r in enumerate(powers):
        if r == 1:  # degenerate pass-through step
            entries = {t: entries[t] for t in needed[k + 1]}
            continue
        st = structs[k]
        nxt_entries: dict[tuple[int, int], int] = {}
        for a, b2 in sorted(needed[k + 1]):
            back = st.backward_layers(b2, r)
            prods = []
            for seq in st.paths(a, b2, r, back):
                prods.append(builder.mul([entries[(seq[l], seq[l + 1])] for l in range(r)]))
            nxt_entries[(a, b2)] = builder.add([(p, 1) for p in prods])
        entries = nxt_entries
    return entries[(1, m)]


def abp_to_depth4(g: Abp, mode: str = "circuit", prune_zero_terms: bool = True) -> tuple[Circuit, PassReport]:
    """Two cascaded powering steps with q = ceil(sqrt(depth)).

    The bottom sum-of-products layer computes the needed entries of N = M^q,
    the top one reads (N^q)_{1,m}; products have fan-in exactly q.  Circuit
    mode shares the N-entry gates, formula mode recomputes them per use.
    """
    if mode not in ("circuit", "formula"):
        raise ValueError(f"unknown mode {mode!r}")
    st_in = abp_stats(g)
    m, delta = st_in.size, st_in.depth

    b = CircuitBuilder(f"{g.name}.depth4")
    if g.is_zero():
        out = b.build([b.const(0)])
        q = 1
    else:
        q = integer_root_ceil(delta, 2)
        gate = _matrix_cascade(g, [q, q], b, prune_zero_terms, mode == "formula")
        out = b.build([gate])

    st_out = circuit_stats(out)
    rep = PassReport(f"abp_to_depth4[{mode}]", st_in, st_out)
    rep.notes["q"] = q
    fanins = {len(gg.args) for gg in out.gates if gg.kind == MUL}
    fan_ok = fanins <= {q}
    rep.record("mul_fanin==q", q, max(fanins) if fanins else 0, fan_ok)
    rep.record("depth<=4", 4, st_out.depth, st_out.depth <= 4)
    if mode == "circuit":
        rep.record("add_count<=m^2+1", m**2 + 1, st_out.adds, st_out.adds <= m**2 + 1)
        mul_bound = m ** (q + 1) + m ** (q - 1)
        rep.record("mul_count<=m^(q+1)+m^(q-1)", mul_bound, st_out.muls, st_out.muls <= mul_bound)
    else:
        add_bound = m ** (q - 1) + 1
        rep.record("add_count<=m^(q-1)+1", add_bound, st_out.adds, st_out.adds <= add_bound)
        mul_bound = m ** (q - 1) + m ** (2 * q - 2)
        rep.record("mul_count<=m^(q-1)+m^(2q-2)", mul_bound, st_out.muls, st_out.muls <= mul_bound)
    shape = check_shape(out, Shape.DEPTH4_SIGMA_PI_SIGMA_PI)[Shape.DEPTH4_SIGMA_PI_SIGMA_PI]
    rep.record("sigma_pi_sigma_pi", True, shape.ok, shape.ok)
    return out, rep


def abp_to_depth_2delta(g: Abp, delta_stages: int, prune_zero_terms: bool = True) -> tuple[Circuit, PassReport]:
    """Cascade of delta_stages depth-2 powering steps, each raising the matrix
    to the power ceil(depth^(1/delta_stages)); the sink loop absorbs the
    overshoot."""
    if delta_stages < 2:
        raise PreconditionViolated("depth-2D reduction needs delta >= 2")
    st_in = abp_stats(g)
    b = CircuitBuilder(f"{g.name}.depth{2 * delta_stages}")
    if g.is_zero():
        out = b.build([b.const(0)])
        r = 1
    else:
        r = integer_root_ceil(st_in.depth, delta_stages)
        gate = _matrix_cascade(g, [r] * delta_stages, b, prune_zero_terms, False)
        out = b.build([gate])

    st_out = circuit_stats(out)
    rep = PassReport(f"abp_to_depth_2delta[{delta_stages}]", st_in, st_out)
    rep.notes["stage_power"] = r
    rep.record("depth<=2*delta", 2 * delta_stages, st_out.depth, st_out.depth <= 2 * delta_stages)
    if st_in.size >= 2 and st_out.size >= 2:
        exponent = approx(iv.log(iv.mpf(st_out.size)) / iv.log(iv.mpf(st_in.size)))
        rep.record("size_exponent_log_m", None, round(exponent, 4), True, CONVENTION)
    return out, rep


# ---------------------------------------------------------------------------
# full reduction to depth 4


def reduce_to_depth4(c: Circuit, cfg: PipelineConfig | None = None) -> tuple[Circuit, PassReport]:
    """Whole pipeline with the four headline bounds checked.

    Weakly skew inputs take the fast path (no duplication pass), for which
    the effective program-size base is T = t+1 instead of T = t^log2(2d)+1.
    """
    cfg = cfg or PipelineConfig()
    work = binarize_multiplications(c)
    in_stats = circuit_stats(work)
    t, d = in_stats.size, in_stats.formal_degree
    cf_ordinary = is_constant_free(work) and has_only_ordinary_adds(work)

    stages = []
    fast = check_shape(work, Shape.WEAKLY_SKEW)[Shape.WEAKLY_SKEW].ok
    if fast:
        collapsed, rep_c = collapse_additions(work)
        abp, rep_a = weakly_skew_to_abp(collapsed)
        abp = trim(abp)
        stages.extend([rep_c, rep_a])
        T = iv.mpf(t + 1)
        T_text = f"{t}+1"
    else:
        abp, rep_a = circuit_to_abp(work)
        stages.append(rep_a)
        T = iv.exp(log2iv(2 * d) * iv.log(iv.mpf(t))) + 1
        T_text = f"{t}^log2(2*{d})+1"

    out, rep_d4 = abp_to_depth4(abp, cfg.mode, cfg.prune_zero_terms)
    stages.append(rep_d4)
    out_stats = circuit_stats(out)

    rep = PassReport(f"reduce_to_depth4[{cfg.mode}]", in_stats, out_stats, stages=stages)
    rep.notes["fast_path"] = fast
    rep.notes["T"] = T_text

    if cfg.mode == "circuit":
        add_claim = T**2 + 1
        add_ok = not (iv.mpf(out_stats.adds) > add_claim)
        rep.record("add_count<=T^2+1", bound_expr(f"({T_text})^2+1", add_claim), out_stats.adds, add_ok)
        mul_claim = 2 * iv.exp((sqrtiv(3 * d) + 2) * iv.log(T))
        mul_ok = not (iv.mpf(out_stats.muls) > mul_claim)
        rep.record(
            "mul_count<=2T^(sqrt(3d)+2)",
            bound_expr(f"2*({T_text})^(sqrt(3*{d})+2)", mul_claim),
            out_stats.muls,
            mul_ok,
        )
    else:
        add_claim = iv.exp(sqrtiv(3 * d) * iv.log(T)) + 1
        add_ok = not (iv.mpf(out_stats.adds) > add_claim)
        rep.record(
            "add_count<=T^sqrt(3d)+1",
            bound_expr(f"({T_text})^sqrt(3*{d})+1", add_claim),
            out_stats.adds,
            add_ok,
        )
        mul_claim = 2 * iv.exp(2 * sqrtiv(3 * d) * iv.log(T))
        mul_ok = not (iv.mpf(out_stats.muls) > mul_claim)
        rep.record(
            "mul_count<=2T^(2sqrt(3d))",
            bound_expr(f"2*({T_text})^(2*sqrt(3*{d}))", mul_claim),
            out_stats.muls,
            mul_ok,
        )
    rep.record(
        "mul_fanin<=sqrt(3d)+1",
        bound_expr(f"sqrt(3*{d})+1", sqrtiv(3 * d) + 1),
        out_stats.max_mul_fanin,
        fanin_bound_holds(out_stats.max_mul_fanin, d),
    )
    if cf_ordinary:
        rep.record(
            "const<=2^t",
            2**t,
            out_stats.max_abs_constant,
            out_stats.max_abs_constant <= 2**t,
        )
    _verify(rep, c, out, cfg)
    return out, rep


def _verify(rep: PassReport, before, after, cfg: PipelineConfig) -> None:
    if cfg.verify == "none":
        return
    if cfg.verify == "exact":
        ok = equiv_exact(before, after)
        rep.record("equivalent[exact]", True, ok, ok)
    else:
        verdict = equiv_random(before, after, cfg.trials, cfg.seed)
        rep.record("equivalent[random]", True, verdict.equivalent, verdict.equivalent)
        rep.notes["failure_bound"] = float(verdict.failure_bound)


# ---------------------------------------------------------------------------
# logarithmic depth for branching programs


def abp_to_logdepth(g: Abp) -> tuple[Circuit, PassReport]:
    """Repeated squaring of the adjacency matrix with a unit loop at the
    source; row 1 of the final power carries, for every node j, the sum over
    all source-to-j paths (the loop pads shorter paths uniquely as a prefix,
    which keeps path sums exact over any ring -- a full identity diagonal
    would count a length-L path C(p, L) times).

    Output j (for j = 1..m) computes node j's polynomial; ceil(log2 depth)
    squaring stages of binary products and unbounded sums give depth
    2*ceil(log2 depth).
    """
    st_in = abp_stats(g)
    m = g.m
    dist = g.longest_from_source()
    delta = max(dist.values()) if dist else 0
    delta = max(delta, 1)
    k_stages = ceil_log2(delta)

    b = CircuitBuilder(f"{g.name}.logdepth")
    shared: dict[object, int] = {}

    def leaf(label) -> int:
        key = ("v", label) if isinstance(label, str) else ("c", label)
        if key not in shared:
            shared[key] = b.input(label) if isinstance(label, str) else b.const(label)
        return shared[key]

    # stage 0: adjacency plus the source loop; track known-one entries so
    # products with them pass through instead of multiplying by 1
    entries: dict[tuple[int, int], int] = {}
    ones: set[tuple[int, int]] = {(1, 1)}
    for u, v, label in g.edges:
        entries[(u, v)] = leaf(label)
    entries[(1, 1)] = leaf(1)

    muls = adds = 0
    for _ in range(k_stages):
        struct: dict[int, list[int]] = {}
        for (u, v) in entries:
            struct.setdefault(u, []).append(v)
        nxt: dict[tuple[int, int], int] = {}
        nxt_ones: set[tuple[int, int]] = set()
        pairs = sorted(
            {(a, bb) for a in struct for mid in struct[a] for bb in struct.get(mid, [])}
        )
        for (a, bb) in pairs:
            terms: list[int] = []
            term_is_one = False
            for mid in sorted(struct.get(a, [])):
                if (mid, bb) not in entries:
                    continue
                left_one = (a, mid) in ones
                right_one = (mid, bb) in ones
                if left_one and right_one:
                    term_is_one = True
                    terms.append(entries[(a, mid)])
                elif left_one:
                    terms.append(entries[(mid, bb)])
                elif right_one:
                    terms.append(entries[(a, mid)])
                else:
                    muls += 1
                    terms.append(b.mul([entries[(a, mid)], entries[(mid, bb)]]))
            if not terms:
                continue
            if len(terms) == 1:
                nxt[(a, bb)] = terms[0]
                if term_is_one:
                    nxt_ones.add((a, bb))
            else:
                adds += 1
                nxt[(a, bb)] = b.add([(t, 1) for t in terms])
        entries, ones = nxt, nxt_ones

    # row 1 of the final power: one output per node (0 for unreachable nodes)
    outputs = [entries.get((1, j), None) for j in range(1, m + 1)]
    outputs = [o if o is not None else leaf(0) for o in outputs]
    out = b.build(outputs)

    st_out = circuit_stats(out)
    rep = PassReport("abp_to_logdepth", st_in, st_out)
    rep.notes["stages"] = k_stages
    rep.record("depth<=2ceil(log2(delta))", 2 * k_stages, st_out.depth, st_out.depth <= 2 * k_stages)
    rep.record("mul_count<=m^3*stages", m**3 * k_stages, muls, muls <= m**3 * k_stages)
    rep.record("add_count<=m^2*stages", m**2 * k_stages, adds, adds <= m**2 * k_stages)
    binary = all(len(gg.args) == 2 for gg in out.gates if gg.kind == MUL)
    rep.record("binary_muls", True, binary, binary)
    return out, rep


# ---------------------------------------------------------------------------
# polylogarithmic depth for circuits


def reduce_to_polylog(c: Circuit) -> tuple[Circuit, PassReport]:
    """Partition gates into formal-degree layers [2^i, 2^(i+1)), parallelize
    each layer through a branching program, and stitch the results.

    Every layer is skew once lower-layer results are treated as its inputs: a
    product of two gates of degree >= 2^i leaves the layer, so each in-layer
    product has an external operand.  That observation is asserted per gate
    and its failure raises LayerNotSkew.
    """
    work = binarize_multiplications(c)
    in_stats = circuit_stats(work)
    t, d = in_stats.size, in_stats.formal_degree
    fd = formal_degree(work)

    n_layers = d.bit_length()  # i = 0 .. floor(log2 d)
    layer_of: dict[int, int] = {}
    for g in work.gates:
        if not g.is_leaf():
            layer_of[g.gid] = fd[g.gid].bit_length() - 1
    for g in work.gates:
        if g.kind == MUL:
            i = layer_of[g.gid]
            if all(fd[a] >= 2**i for a in g.args):
                raise LayerNotSkew(i, g.gid)

    prefix = "_g"
    while any(v.startswith(prefix) for v in work.variables()):
        prefix += "_"

    out_b = CircuitBuilder(c.name)
    shared: dict[object, int] = {}

    def global_leaf(g) -> int:
        key = ("v", g.var) if g.kind == INPUT else ("c", g.value)
        if key not in shared:
            shared[key] = out_b.input(g.var) if g.kind == INPUT else out_b.const(g.value)
        return shared[key]

    built: dict[int, int] = {}  # work gate -> gate in the stitched circuit
    stages = []
    layers_used = 0

    for i in range(n_layers):
        members = [g for g in work.gates if layer_of.get(g.gid) == i]
        if not members:
            continue
        layers_used += 1
        lb = CircuitBuilder(f"{c.name}.layer{i}")
        local: dict[int, int] = {}

        def ref(a: int) -> int:
            # fresh leaf per reference keeps the layer's input fan-out at 1
            ag = work.gate(a)
            if ag.kind == INPUT:
                return lb.input(ag.var)
            if ag.kind == CONST:
                return lb.const(ag.value)
            if layer_of[a] == i:
                return local[a]
            return lb.input(f"{prefix}{a}")

        for g in members:
            if g.kind == ADD:
                local[g.gid] = lb.add([(ref(a), w) for a, w in zip(g.args, g.weights)])
            elif g.kind == SUB:
                local[g.gid] = lb.sub(ref(g.args[0]), ref(g.args[1]))
            else:
                local[g.gid] = lb.mul([ref(a) for a in g.args])
        layer_circuit = lb.build([local[g.gid] for g in members])

        skew = check_shape(layer_circuit, Shape.SKEW)[Shape.SKEW]
        if not skew.ok:
            raise LayerNotSkew(i, skew.witness)

        collapsed, rep_c = collapse_additions(layer_circuit)
        abp, rep_a = weakly_skew_to_abp(collapsed)
        block, rep_l = abp_to_logdepth(abp)
        stages.extend([rep_c, rep_a, rep_l])

        # splice the block, remapping its synthetic inputs to built gates
        splice: dict[int, int] = {}
        for g in block.gates:
            if g.kind == INPUT:
                if g.var.startswith(prefix):
                    splice[g.gid] = built[int(g.var[len(prefix):])]
                else:
                    key = ("v", g.var)
                    if key not in shared:
                        shared[key] = out_b.input(g.var)
                    splice[g.gid] = shared[key]
            elif g.kind == CONST:
                key = ("c", g.value)
                if key not in shared:
                    shared[key] = out_b.const(g.value)
                splice[g.gid] = shared[key]
            else:
                splice[g.gid] = out_b.copy_gate(g, splice)
        for member, node in zip(members, abp.output_nodes):
            built[member.gid] = splice[block.outputs[node - 1]]

    outputs = []
    for o in work.outputs:
        og = work.gate(o)
        outputs.append(global_leaf(og) if og.is_leaf() else built[o])
    out = out_b.build(outputs)

    out_stats = circuit_stats(out)
    rep = PassReport("reduce_to_polylog", in_stats, out_stats, stages=stages)
    rep.notes["layers"] = layers_used
    depth_claim = 4 * (1 + ceil_log2(max(t, 1))) * (1 + (d.bit_length() - 1))
    rep.record(
        "depth<=4(1+ceil(log2 t))(1+floor(log2 d))",
        depth_claim,
        out_stats.depth,
        out_stats.depth <= depth_claim,
        CONVENTION,
    )
    rep.record("layers<=1+floor(log2 d)", d.bit_length(), layers_used, layers_used <= d.bit_length())
    rep.record("all_layers_skew", True, True, True)
    return out, rep


# ---------------------------------------------------------------------------
# boolean constant-depth flattening


def reduce_boolean(c: Circuit, delta_stages: int = 2) -> tuple[Circuit, PassReport]:
    """Flatten a semi-unbounded circuit (unbounded fan-in sums as OR, binary
    products as AND over {0,1}) to depth 2*delta_stages.

    The arithmetic pipeline runs with weights clamped to {0,1}, which is
    exact over the boolean semiring; equivalence is confirmed by an
    exhaustive truth table when at most 12 free bits are involved (inputs
    follow the complementary-literal convention: ``nx`` names the complement
    of ``x``).
    """
    from ..semiring import literal_layout, truth_table

    shape = check_shape(c, Shape.SEMI_UNBOUNDED)[Shape.SEMI_UNBOUNDED]
    if not shape.ok:
        raise StructureMismatch(
            f"reduce_boolean: gate {shape.witness} is not semi-unbounded boolean"
        )
    if delta_stages < 2:
        raise PreconditionViolated("reduce_boolean needs delta >= 2")
    in_stats = circuit_stats(c)

    collapsed, rep_c = collapse_additions(c)
    clamped = _clamp_weights(collapsed)
    ws, rep_w = to_weakly_skew(clamped)
    abp, rep_a = weakly_skew_to_abp(ws)
    abp = trim(abp)
    out, rep_p = abp_to_depth_2delta(abp, delta_stages)

    out_stats = circuit_stats(out)
    rep = PassReport(
        f"reduce_boolean[{delta_stages}]", in_stats, out_stats, stages=[rep_c, rep_w, rep_a, rep_p]
    )
    rep.record("depth<=2*delta", 2 * delta_stages, out_stats.depth, out_stats.depth <= 2 * delta_stages)
    names = sorted(set(c.variables()) | set(out.variables()))
    layout = literal_layout(names)
    if len(layout[0]) <= 12:
        same = truth_table(c, layout) == truth_table(out, layout)
        rep.record("truth_table_identical", True, same, same)
    else:
        rep.notes["truth_table"] = "skipped (more than 12 free bits)"
    return out, rep


def _clamp_weights(c: Circuit) -> Circuit:
    """Idempotent-sum clamp: weights above 1 become 1 (a+a=a over booleans)."""
    b = CircuitBuilder(c.name)
    mapping: dict[int, int] = {}
    for g in c.gates:
        if g.kind == ADD:
            pairs = []
            for a, w in zip(g.args, g.weights):
                if w < 0:
                    raise StructureMismatch(f"gate {g.gid}: negative weight over booleans")
                if w > 0:
                    pairs.append((mapping[a], 1))
            if not pairs:
                mapping[g.gid] = b.const(0)
            else:
                mapping[g.gid] = b.add(pairs)
        else:
            mapping[g.gid] = b.copy_gate(g, mapping)
    return b.build([mapping[o] for o in c.outputs])


# ---------------------------------------------------------------------------
# pipeline dispatch


def run_pipeline(c: Circuit, cfg: PipelineConfig) -> tuple[Circuit, PassReport]:
    if cfg.target == "depth4":
        return reduce_to_depth4(c, cfg)
    if cfg.target == "depth2delta":
        abp, rep_a = circuit_to_abp(c)
        out, rep = abp_to_depth_2delta(abp, cfg.delta, cfg.prune_zero_terms)
        rep.stages.insert(0, rep_a)
        _verify(rep, c, out, cfg)
        return out, rep
    if cfg.target == "polylog":
        out, rep = reduce_to_polylog(c)
        _verify(rep, c, out, cfg)
        return out, rep
    if cfg.target == "boolean":
        return reduce_boolean(c, cfg.delta)
    raise ValueError(f"unknown pipeline target {cfg.target!r}")
