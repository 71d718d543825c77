"""Arithmetic circuit IR: gates, parsing, metrics, and structural validators.

A circuit is a DAG of gates over integer constants and named variables.
Gates are stored in topological order (children defined first); gate ids are
arbitrary positive integers, though every constructor in this package numbers
them 1..n in order.  Circuits are immutable after construction and all
operations here are pure functions.

Depth convention: the depth of a gate is the number of edges on the longest
path from any leaf; leaves have depth 0, so a sum of products of sums of
products of leaves has depth 4.  The input layer is never counted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import ParseError, PreconditionViolated

INPUT = "input"
CONST = "const"
ADD = "add"
SUB = "sub"
MUL = "mul"


@dataclass(frozen=True)
class Gate:
    """One gate: a leaf (input/const) or an arithmetic operation.

    For ``add`` gates ``args`` and ``weights`` run in parallel and the gate
    computes sum(w * child); arity >= 1 and weights are arbitrary integers.
    ``sub`` has exactly two children, ``mul`` at least two.
    """

    gid: int
    kind: str
    var: str | None = None
    value: int | None = None
    args: tuple[int, ...] = ()
    weights: tuple[int, ...] = ()

    def is_leaf(self) -> bool:
        return self.kind in (INPUT, CONST)


@dataclass(frozen=True)
class Circuit:
    name: str
    gates: tuple[Gate, ...]
    outputs: tuple[int, ...]
    index: dict[int, int] = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self):
        index = {}
        for pos, g in enumerate(self.gates):
            if g.gid <= 0:
                raise ParseError(f"gate id {g.gid} is not positive")
            if g.gid in index:
                raise ParseError(f"duplicate gate id {g.gid}")
            for c in g.args:
                if c not in index:
                    raise ParseError(f"gate {g.gid} uses gate {c} before its definition")
            _check_arity(g)
            index[g.gid] = pos
        if not self.outputs:
            raise ParseError("circuit has no outputs")
        for o in self.outputs:
            if o not in index:
                raise ParseError(f"output {o} is not a defined gate")
        object.__setattr__(self, "index", index)

    def gate(self, gid: int) -> Gate:
        return self.gates[self.index[gid]]

    @property
    def size(self) -> int:
        """Total number of gates, input gates included."""
        return len(self.gates)

    def variables(self) -> tuple[str, ...]:
        """Distinct variable names in first-appearance order."""
        seen: dict[str, None] = {}
        for g in self.gates:
            if g.kind == INPUT:
                seen.setdefault(g.var, None)
        return tuple(seen)

    def with_outputs(self, outputs) -> "Circuit":
        return Circuit(self.name, self.gates, tuple(outputs))


def _check_arity(g: Gate) -> None:
    if g.kind == INPUT:
        if not g.var:
            raise ParseError(f"gate {g.gid}: input gate needs a variable name")
    elif g.kind == CONST:
        if g.value is None:
            raise ParseError(f"gate {g.gid}: const gate needs a value")
    elif g.kind == ADD:
        if len(g.args) < 1 or len(g.args) != len(g.weights):
            raise ParseError(f"gate {g.gid}: add needs >= 1 weighted child")
    elif g.kind == SUB:
        if len(g.args) != 2:
            raise ParseError(f"gate {g.gid}: sub needs exactly 2 children")
    elif g.kind == MUL:
        if len(g.args) < 2:
            raise ParseError(f"gate {g.gid}: mul arity < 2")
    else:
        raise ParseError(f"gate {g.gid}: unknown kind {g.kind!r}")


class CircuitBuilder:
    """Mutable helper for passes and generators; gates are numbered 1..n."""

    def __init__(self, name: str = "circuit"):
        self.name = name
        self.gates: list[Gate] = []

    def _push(self, gate: Gate) -> int:
        self.gates.append(gate)
        return gate.gid

    def _next(self) -> int:
        return len(self.gates) + 1

    def input(self, var: str) -> int:
        return self._push(Gate(self._next(), INPUT, var=var))

    def const(self, value: int) -> int:
        return self._push(Gate(self._next(), CONST, value=int(value)))

    def add(self, pairs) -> int:
        """Weighted addition over (child, weight) pairs."""
        pairs = list(pairs)
        args = tuple(c for c, _ in pairs)
        weights = tuple(int(w) for _, w in pairs)
        return self._push(Gate(self._next(), ADD, args=args, weights=weights))

    def add2(self, a: int, b: int) -> int:
        """Ordinary (binary, unweighted) addition."""
        return self.add([(a, 1), (b, 1)])

    def sub(self, a: int, b: int) -> int:
        return self._push(Gate(self._next(), SUB, args=(a, b)))

    def mul(self, children) -> int:
        return self._push(Gate(self._next(), MUL, args=tuple(children)))

    def copy_gate(self, g: Gate, arg_map) -> int:
        """Append a copy of ``g`` with children remapped through ``arg_map``."""
        args = tuple(arg_map[a] for a in g.args)
        return self._push(
            Gate(self._next(), g.kind, var=g.var, value=g.value, args=args, weights=g.weights)
        )

    def build(self, outputs) -> Circuit:
        return Circuit(self.name, tuple(self.gates), tuple(outputs))


# ---------------------------------------------------------------------------
# metrics


def formal_degree(c: Circuit) -> dict[int, int]:
    """Syntactic degree bound per gate.

    Leaves have formal degree 1; additions and subtractions take the maximum
    over children, multiplications the sum.  Always >= the true degree of the
    polynomial computed at the gate.
    """
    fd: dict[int, int] = {}
    for g in c.gates:
        if g.is_leaf():
            fd[g.gid] = 1
        elif g.kind == MUL:
            fd[g.gid] = sum(fd[a] for a in g.args)
        else:
            fd[g.gid] = max(fd[a] for a in g.args)
    return fd


def circuit_formal_degree(c: Circuit) -> int:
    fd = formal_degree(c)
    return max(fd[o] for o in c.outputs)


def gate_depth(c: Circuit) -> dict[int, int]:
    depth: dict[int, int] = {}
    for g in c.gates:
        depth[g.gid] = 0 if g.is_leaf() else 1 + max(depth[a] for a in g.args)
    return depth


@dataclass(frozen=True)
class CircuitStats:
    size: int
    depth: int
    formal_degree: int
    inputs: int
    consts: int
    adds: int
    subs: int
    muls: int
    max_mul_fanin: int
    max_add_fanin: int
    max_abs_constant: int
    max_add_total_weight: int

    def to_json(self) -> dict:
        d = {
            "size": self.size,
            "depth": self.depth,
            "formal_degree": str(self.formal_degree),
            "inputs": self.inputs,
            "consts": self.consts,
            "adds": self.adds,
            "subs": self.subs,
            "muls": self.muls,
            "max_mul_fanin": self.max_mul_fanin,
            "max_add_fanin": self.max_add_fanin,
            "max_abs_constant": str(self.max_abs_constant),
            "max_add_total_weight": str(self.max_add_total_weight),
        }
        return d


def circuit_stats(c: Circuit) -> CircuitStats:
    fd = formal_degree(c)
    depth = gate_depth(c)
    counts = {INPUT: 0, CONST: 0, ADD: 0, SUB: 0, MUL: 0}
    max_mul_fanin = 0
    max_add_fanin = 0
    max_abs_constant = 0
    max_add_total_weight = 0
    for g in c.gates:
        counts[g.kind] += 1
        if g.kind == MUL:
            max_mul_fanin = max(max_mul_fanin, len(g.args))
        elif g.kind == ADD:
            max_add_fanin = max(max_add_fanin, len(g.args))
            max_add_total_weight = max(max_add_total_weight, sum(abs(w) for w in g.weights))
        elif g.kind == CONST:
            max_abs_constant = max(max_abs_constant, abs(g.value))
    return CircuitStats(
        size=c.size,
        depth=max(depth[o] for o in c.outputs),
        formal_degree=max(fd[o] for o in c.outputs),
        inputs=counts[INPUT],
        consts=counts[CONST],
        adds=counts[ADD],
        subs=counts[SUB],
        muls=counts[MUL],
        max_mul_fanin=max_mul_fanin,
        max_add_fanin=max_add_fanin,
        max_abs_constant=max_abs_constant,
        max_add_total_weight=max_add_total_weight,
    )


# ---------------------------------------------------------------------------
# structural shape validators


class Shape(Enum):
    ORDINARY_ADDITIONS_ONLY = "ordinary-additions-only"
    BINARY_MULTIPLICATIONS_ONLY = "binary-multiplications-only"
    INPUT_FANOUT_AT_MOST_ONE = "input-fanout-at-most-one"
    CONSTANT_FREE = "constant-free"
    WEAKLY_SKEW = "weakly-skew"
    SKEW = "skew"
    ADD_FEEDS_ONLY_MUL = "add-feeds-only-mul"
    DEPTH4_SIGMA_PI_SIGMA_PI = "depth4-sigma-pi-sigma-pi"
    SEMI_UNBOUNDED = "semi-unbounded"


@dataclass(frozen=True)
class ShapeResult:
    ok: bool
    witness: int | None = None


def parents_with_multiplicity(c: Circuit) -> dict[int, list[int]]:
    """For each gate, the list of gates using it (one entry per edge)."""
    out: dict[int, list[int]] = {g.gid: [] for g in c.gates}
    for g in c.gates:
        for a in g.args:
            out[a].append(g.gid)
    return out


def reachable_cone(c: Circuit, root: int) -> set[int]:
    """The sub-DAG feeding ``root``: the root plus everything below it."""
    cone = set()
    stack = [root]
    while stack:
        gid = stack.pop()
        if gid in cone:
            continue
        cone.add(gid)
        stack.extend(c.gate(gid).args)
    return cone


class CircuitAnalysis:
    """Shared per-circuit tables for the structural validators.

    Cones are kept as bitmasks over topological positions so the disjointness
    search stays near-quadratic on multi-thousand-gate pass outputs.
    """

    def __init__(self, c: Circuit):
        self.circuit = c
        self.parents = parents_with_multiplicity(c)
        self.fd = formal_degree(c)
        self.pos = {g.gid: i for i, g in enumerate(c.gates)}
        self.cone_mask: dict[int, int] = {}
        self.cone_size: dict[int, int] = {}
        for g in c.gates:
            m = 1 << self.pos[g.gid]
            for a in g.args:
                m |= self.cone_mask[a]
            self.cone_mask[g.gid] = m
            self.cone_size[g.gid] = m.bit_count()
        self.outputs_mask = 0
        for o in c.outputs:
            self.outputs_mask |= 1 << self.pos[o]

    def is_private(self, child: int, mul_gid: int) -> bool:
        """True when the cone of ``child`` meets the rest of the circuit only
        through its single edge into ``mul_gid``.  Circuit outputs count as
        external uses."""
        c = self.circuit
        if len(self.parents[child]) != 1:
            return False
        mask = self.cone_mask[child]
        if mask & self.outputs_mask:
            return False
        rest = mask & ~(1 << self.pos[child])
        while rest:
            lsb = rest & -rest
            rest ^= lsb
            u = c.gates[lsb.bit_length() - 1].gid
            for p in self.parents[u]:
                if not (mask >> self.pos[p]) & 1:
                    return False
        return True


def private_child(c: Circuit, mul_gid: int, analysis: CircuitAnalysis | None = None) -> int | None:
    """Return a child of the product gate whose subcircuit is disjoint from
    the remainder of the circuit (shared with nothing but the one edge into
    the gate), or None if neither child qualifies.

    When both children qualify the one of smaller formal degree is preferred
    (ties: smaller cone, then smaller id).
    """
    g = c.gate(mul_gid)
    a = analysis or CircuitAnalysis(c)
    order = sorted(set(g.args), key=lambda x: (a.fd[x], a.cone_size[x], x))
    for child in order:
        if g.args.count(child) == 1 and a.is_private(child, mul_gid):
            return child
    return None


def _depth4_min_level(c: Circuit) -> dict[int, int]:
    """Minimal layer (0..4) each gate fits in a sum-product-sum-product tower.

    Leaves sit at 0, products at 1 or 3, sums at 2 or 4; 5 marks a misfit.
    Degenerate (absent) levels are allowed, so a leaf may feed any layer.
    """
    lvl: dict[int, int] = {}
    for g in c.gates:
        if g.is_leaf():
            lvl[g.gid] = 0
        elif g.kind == MUL:
            worst = max(lvl[a] for a in g.args)
            lvl[g.gid] = 1 if worst == 0 else (3 if worst <= 2 else 5)
        elif g.kind == ADD:
            worst = max(lvl[a] for a in g.args)
            lvl[g.gid] = 2 if worst <= 1 else (4 if worst <= 3 else 5)
        else:  # sub gates never appear in the depth-4 normal form
            lvl[g.gid] = 5
    return lvl


def check_shape(c: Circuit, shapes) -> dict[Shape, ShapeResult]:
    """Decide structural predicates; failures carry a witness gate id."""
    if isinstance(shapes, Shape):
        shapes = [shapes]
    return {shape: _check_one(c, shape) for shape in shapes}


def _check_one(c: Circuit, shape: Shape) -> ShapeResult:
    if shape is Shape.ORDINARY_ADDITIONS_ONLY:
        for g in c.gates:
            if g.kind == ADD and (len(g.args) != 2 or g.weights != (1, 1)):
                return ShapeResult(False, g.gid)
        return ShapeResult(True)

    if shape is Shape.BINARY_MULTIPLICATIONS_ONLY:
        for g in c.gates:
            if g.kind == MUL and len(g.args) != 2:
                return ShapeResult(False, g.gid)
        return ShapeResult(True)

    if shape is Shape.INPUT_FANOUT_AT_MOST_ONE:
        uses: dict[int, int] = {}
        for g in c.gates:
            for a in g.args:
                uses[a] = uses.get(a, 0) + 1
        for g in c.gates:
            if g.is_leaf() and uses.get(g.gid, 0) > 1:
                return ShapeResult(False, g.gid)
        return ShapeResult(True)

    if shape is Shape.CONSTANT_FREE:
        for g in c.gates:
            if g.kind == CONST and g.value not in (-1, 0, 1):
                return ShapeResult(False, g.gid)
            if g.kind == ADD and any(w not in (-1, 0, 1) for w in g.weights):
                return ShapeResult(False, g.gid)
        return ShapeResult(True)

    if shape is Shape.WEAKLY_SKEW:
        analysis = CircuitAnalysis(c)
        for g in c.gates:
            if g.kind == MUL:
                if len(g.args) != 2:
                    return ShapeResult(False, g.gid)
                if private_child(c, g.gid, analysis) is None:
                    return ShapeResult(False, g.gid)
        return ShapeResult(True)

    if shape is Shape.SKEW:
        for g in c.gates:
            if g.kind == MUL and not any(c.gate(a).is_leaf() for a in g.args):
                return ShapeResult(False, g.gid)
        return ShapeResult(True)

    if shape is Shape.ADD_FEEDS_ONLY_MUL:
        for g in c.gates:
            if g.kind in (ADD, SUB):
                for a in g.args:
                    child = c.gate(a)
                    if not (child.is_leaf() or child.kind == MUL):
                        return ShapeResult(False, g.gid)
        return ShapeResult(True)

    if shape is Shape.DEPTH4_SIGMA_PI_SIGMA_PI:
        lvl = _depth4_min_level(c)
        for o in c.outputs:
            if lvl[o] > 4:
                return ShapeResult(False, o)
        return ShapeResult(True)

    if shape is Shape.SEMI_UNBOUNDED:
        for g in c.gates:
            if g.kind == SUB:
                return ShapeResult(False, g.gid)
            if g.kind == MUL and len(g.args) != 2:
                return ShapeResult(False, g.gid)
            if g.kind == ADD and any(w != 1 for w in g.weights):
                return ShapeResult(False, g.gid)
            if g.kind == CONST and g.value not in (0, 1):
                return ShapeResult(False, g.gid)
        return ShapeResult(True)

    raise ValueError(f"unknown shape {shape}")


def has_only_ordinary_adds(c: Circuit) -> bool:
    """True when every addition gate is binary with both weights 1.

    Subtraction gates are allowed; this is the condition under which the
    2^s / 2^t total-weight bounds of the collapsing passes apply.
    """
    return check_shape(c, Shape.ORDINARY_ADDITIONS_ONLY)[Shape.ORDINARY_ADDITIONS_ONLY].ok


def is_constant_free(c: Circuit) -> bool:
    return check_shape(c, Shape.CONSTANT_FREE)[Shape.CONSTANT_FREE].ok


# ---------------------------------------------------------------------------
# normalization of leaf fan-out


def normalize_leaf_fanout(c: Circuit) -> Circuit:
    """Duplicate input/const gates so every leaf has fan-out at most one.

    Several leaves may carry the same variable or constant; the expanded
    polynomial is unchanged.  Already-normalized circuits are returned as-is.
    """
    uses: dict[int, int] = {}
    for g in c.gates:
        for a in g.args:
            uses[a] = uses.get(a, 0) + 1
    if all(uses.get(g.gid, 0) <= 1 for g in c.gates if g.is_leaf()):
        return c

    b = CircuitBuilder(c.name)
    mapping: dict[int, int] = {}
    spent: set[int] = set()

    def leaf_ref(gid: int) -> int:
        src = c.gate(gid)
        if gid not in spent:
            spent.add(gid)
            return mapping[gid]
        if src.kind == INPUT:
            return b.input(src.var)
        return b.const(src.value)

    for g in c.gates:
        if g.is_leaf():
            mapping[g.gid] = b.input(g.var) if g.kind == INPUT else b.const(g.value)
        else:
            refs = tuple(leaf_ref(a) if c.gate(a).is_leaf() else mapping[a] for a in g.args)
            mapping[g.gid] = b._push(
                Gate(b._next(), g.kind, args=refs, weights=g.weights)
            )
    return b.build(tuple(mapping[o] for o in c.outputs))


# ---------------------------------------------------------------------------
# text format


def parse_circuit(text: str) -> Circuit:
    """Parse the line-oriented circuit format.

    ``circuit <name>`` header, then ``gate <id> ...`` lines in topological
    order and ``output <id>`` lines; ``#`` starts a comment.  The header is
    optional on input (emit always writes one).
    """
    name = "circuit"
    gates: list[Gate] = []
    outputs: list[int] = []
    defined: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "circuit":
            if len(tok) != 2:
                raise ParseError("expected: circuit <name>", lineno)
            name = tok[1]
        elif tok[0] == "gate":
            gates.append(_parse_gate(tok, defined, lineno))
            defined.add(gates[-1].gid)
        elif tok[0] == "output":
            if len(tok) != 2:
                raise ParseError("expected: output <id>", lineno)
            oid = _parse_int(tok[1], lineno)
            if oid not in defined:
                raise ParseError(f"output {oid} is not a defined gate", lineno)
            outputs.append(oid)
        else:
            raise ParseError(f"unknown directive {tok[0]!r}", lineno)
    if not outputs:
        raise ParseError("no output line")
    try:
        return Circuit(name, tuple(gates), tuple(outputs))
    except ParseError:
        raise
    except Exception as exc:  # pragma: no cover - construction re-validates
        raise ParseError(str(exc))


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", lineno)


def _parse_gate(tok: list[str], defined: set[int], lineno: int) -> Gate:
    if len(tok) < 4:
        raise ParseError("truncated gate line", lineno)
    gid = _parse_int(tok[1], lineno)
    if gid <= 0:
        raise ParseError(f"gate id {gid} is not positive", lineno)
    if gid in defined:
        raise ParseError(f"duplicate id {gid}", lineno)
    kind = tok[2]
    rest = tok[3:]

    def child(t: str) -> int:
        cid = _parse_int(t, lineno)
        if cid not in defined:
            raise ParseError(f"use-before-definition: gate {cid}", lineno)
        return cid

    if kind == "input":
        return Gate(gid, INPUT, var=rest[0])
    if kind == "const":
        return Gate(gid, CONST, value=_parse_int(rest[0], lineno))
    if kind == "add":
        args, weights = [], []
        for t in rest:
            if ":" in t:
                cs, ws = t.split(":", 1)
                args.append(child(cs))
                weights.append(_parse_int(ws, lineno))
            else:
                args.append(child(t))
                weights.append(1)
        if not args:
            raise ParseError("add needs at least one child", lineno)
        return Gate(gid, ADD, args=tuple(args), weights=tuple(weights))
    if kind == "sub":
        if len(rest) != 2:
            raise ParseError("sub needs exactly two children", lineno)
        return Gate(gid, SUB, args=(child(rest[0]), child(rest[1])))
    if kind == "mul":
        if len(rest) < 2:
            raise ParseError("mul arity < 2", lineno)
        return Gate(gid, MUL, args=tuple(child(t) for t in rest))
    raise ParseError(f"unknown gate kind {kind!r}", lineno)


def emit_circuit(c: Circuit) -> str:
    """Deterministic canonical serialization: stored (topological) order,
    weight-1 annotations omitted.  Constructors in this package number gates
    1..n in order, so for their circuits stored order and id order coincide."""
    lines = [f"circuit {c.name}"]
    for g in c.gates:
        if g.kind == INPUT:
            lines.append(f"gate {g.gid} input {g.var}")
        elif g.kind == CONST:
            lines.append(f"gate {g.gid} const {g.value}")
        elif g.kind == ADD:
            parts = [
                str(a) if w == 1 else f"{a}:{w}" for a, w in zip(g.args, g.weights)
            ]
            lines.append(f"gate {g.gid} add " + " ".join(parts))
        elif g.kind == SUB:
            lines.append(f"gate {g.gid} sub {g.args[0]} {g.args[1]}")
        else:
            lines.append(f"gate {g.gid} mul " + " ".join(str(a) for a in g.args))
    for o in c.outputs:
        lines.append(f"output {o}")
    return "\n".join(lines) + "\n"


def require(condition: bool, message: str) -> None:
    if not condition:
        raise PreconditionViolated(message)
