"""Generic-semiring evaluation of circuits and branching programs.

A SemiringSpec packages the evaluation structure (commutative semiring, with
an optional ring flag enabling negation, subtraction and arbitrary integer
weights).  Specs self-test the semiring laws on their sample elements at
construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .circuit import ADD, CONST, INPUT, MUL, SUB, Circuit
from .errors import StructureMismatch


@dataclass(frozen=True)
class SemiringSpec:
    name: str
    add: Callable
    mul: Callable
    zero: object
    one: object
    is_ring: bool
    description: str = ""
    neg: Callable | None = None
    from_int: Callable | None = None
    samples: tuple = field(default=())

    def __post_init__(self):
        if self.is_ring and self.neg is None:
            raise ValueError(f"{self.name}: ring flag set but no negation given")
        self._self_test()

    def _self_test(self):
        """Commutativity, associativity, distributivity and identities on the
        sampled elements."""
        xs = list(self.samples) or [self.zero, self.one]
        add, mul = self.add, self.mul
        for a in xs:
            assert add(a, self.zero) == a, f"{self.name}: 0 is not additive identity"
            assert mul(a, self.one) == a, f"{self.name}: 1 is not multiplicative identity"
            assert mul(a, self.zero) == self.zero, f"{self.name}: 0 does not absorb"
            if self.is_ring:
                assert add(a, self.neg(a)) == self.zero, f"{self.name}: negation broken"
            for b in xs:
                assert add(a, b) == add(b, a), f"{self.name}: + not commutative"
                assert mul(a, b) == mul(b, a), f"{self.name}: * not commutative"
                for c in xs:
                    assert add(add(a, b), c) == add(a, add(b, c)), f"{self.name}: + not associative"
                    assert mul(mul(a, b), c) == mul(a, mul(b, c)), f"{self.name}: * not associative"
                    assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c)), f"{self.name}: not distributive"

    def embed(self, value: int):
        """Embed an integer constant, or fail with StructureMismatch."""
        if self.from_int is not None:
            return self.from_int(value)
        if value == 0:
            return self.zero
        if value == 1:
            return self.one
        if self.is_ring:
            raise ValueError(f"{self.name}: no integer embedding configured")
        raise StructureMismatch(f"constant {value} does not embed in {self.name}")

    def scale(self, weight: int, value):
        """weight * value where weight is an integer gate weight."""
        if weight == 0:
            return self.zero
        if weight == 1:
            return value
        if not self.is_ring:
            raise StructureMismatch(
                f"weight {weight} needs a ring, {self.name} is not one"
            )
        return self.mul(self.embed(weight), value)


def integer_ring() -> SemiringSpec:
    return SemiringSpec(
        name="integers",
        add=lambda a, b: a + b,
        mul=lambda a, b: a * b,
        zero=0,
        one=1,
        is_ring=True,
        neg=lambda a: -a,
        from_int=lambda v: v,
        description="arbitrary-precision integers",
        samples=(-3, -1, 0, 1, 2, 5),
    )


def boolean_semiring() -> SemiringSpec:
    def embed(v: int):
        if v in (0, 1):
            return v
        raise StructureMismatch(f"constant {v} not in the boolean semiring")

    return SemiringSpec(
        name="boolean",
        add=lambda a, b: a | b,
        mul=lambda a, b: a & b,
        zero=0,
        one=1,
        is_ring=False,
        from_int=embed,
        description="({0,1}, or, and)",
        samples=(0, 1),
    )


def natural_semiring() -> SemiringSpec:
    def embed(v: int):
        if v < 0:
            raise StructureMismatch(f"constant {v} not in the naturals")
        return v

    return SemiringSpec(
        name="naturals",
        add=lambda a, b: a + b,
        mul=lambda a, b: a * b,
        zero=0,
        one=1,
        is_ring=False,
        from_int=embed,
        description="(N, +, *)",
        samples=(0, 1, 2, 3),
    )


def modular_ring(p: int) -> SemiringSpec:
    return SemiringSpec(
        name=f"Z/{p}",
        add=lambda a, b: (a + b) % p,
        mul=lambda a, b: (a * b) % p,
        zero=0,
        one=1 % p,
        is_ring=True,
        neg=lambda a: (-a) % p,
        from_int=lambda v: v % p,
        description=f"integers modulo {p}",
        samples=tuple(x % p for x in (0, 1, 2, p - 1, 7)),
    )


INTEGERS = integer_ring()
BOOLEAN = boolean_semiring()
NATURALS = natural_semiring()


def _needs_ring(c: Circuit) -> int | None:
    """Gate id requiring negation (sub gate or weight outside {0,1}), if any."""
    for g in c.gates:
        if g.kind == SUB:
            return g.gid
        if g.kind == ADD and any(w not in (0, 1) for w in g.weights):
            return g.gid
    return None


def eval_circuit(c: Circuit, assignment: dict, spec: SemiringSpec) -> list:
    """Bottom-up evaluation of every output under the given structure."""
    culprit = _needs_ring(c)
    if culprit is not None and not spec.is_ring:
        raise StructureMismatch(
            f"gate {culprit} needs subtraction/weights; {spec.name} is not a ring"
        )
    vals: dict[int, object] = {}
    for g in c.gates:
        if g.kind == INPUT:
            vals[g.gid] = assignment[g.var]
        elif g.kind == CONST:
            vals[g.gid] = spec.embed(g.value)
        elif g.kind == ADD:
            acc = spec.zero
            for a, w in zip(g.args, g.weights):
                if w == 0:
                    continue
                acc = spec.add(acc, spec.scale(w, vals[a]))
            vals[g.gid] = acc
        elif g.kind == SUB:
            vals[g.gid] = spec.add(vals[g.args[0]], spec.neg(vals[g.args[1]]))
        elif g.kind == MUL:
            acc = vals[g.args[0]]
            for a in g.args[1:]:
                acc = spec.mul(acc, vals[a])
            vals[g.gid] = acc
    return [vals[o] for o in c.outputs]


def eval_abp(abp, assignment: dict, spec: SemiringSpec) -> list:
    """One topological pass accumulating path sums from the source (which
    holds the multiplicative unit); linear in the number of edges."""
    vals = {u: spec.zero for u in range(1, abp.m + 1)}
    vals[1] = spec.one
    for u, v, label in abp.edges:
        if isinstance(label, str):
            lv = assignment[label]
        else:
            lv = spec.embed(label)
        vals[v] = spec.add(vals[v], spec.mul(vals[u], lv))
    return [vals[n] for n in abp.output_nodes]


def eval_obj(obj, assignment: dict, spec: SemiringSpec) -> list:
    if isinstance(obj, Circuit):
        return eval_circuit(obj, assignment, spec)
    return eval_abp(obj, assignment, spec)


def eval_semiring(obj, assignment: dict, spec: SemiringSpec) -> list:
    return eval_obj(obj, assignment, spec)


# ---------------------------------------------------------------------------
# exhaustive boolean comparison


def literal_layout(variables) -> tuple[list[str], dict[str, tuple[int, bool]]]:
    """Assign one truth-table bit per base name under the complementary-literal
    convention: ``nx<i>`` is the complement of ``x<i>``; any other variable
    gets its own bit.

    Returns (ordered base names, var -> (bit index, negated)).
    """
    variables = list(variables)
    bases: list[str] = []
    where: dict[str, tuple[int, bool]] = {}

    def bit_for(base: str) -> int:
        if base not in bases:
            bases.append(base)
        return bases.index(base)

    for v in variables:
        if v.startswith("n") and v[1:] in variables:
            where[v] = (bit_for(v[1:]), True)
        else:
            where[v] = (bit_for(v), False)
    return bases, where


def truth_table(c: Circuit, layout=None) -> tuple[int, ...]:
    """Full truth table of each output over the boolean semiring, one bitmask
    per output (bit r = value on assignment r, base bits little-endian).

    Gates are evaluated once over row bitmasks, so the sweep is a single
    bottom-up pass with word-level or/and.
    """
    bases, where = layout or literal_layout(c.variables())
    n = len(bases)
    rows = 1 << n
    full = (1 << rows) - 1

    # mask of rows where base bit b is 1
    base_mask = []
    for b in range(n):
        m = 0
        for r in range(rows):
            if (r >> b) & 1:
                m |= 1 << r
        base_mask.append(m)

    vals: dict[int, int] = {}
    for g in c.gates:
        if g.kind == INPUT:
            bit, negated = where[g.var]
            vals[g.gid] = base_mask[bit] ^ (full if negated else 0)
        elif g.kind == CONST:
            if g.value not in (0, 1):
                raise StructureMismatch(f"constant {g.value} is not boolean")
            vals[g.gid] = full if g.value else 0
        elif g.kind == ADD:
            if any(w != 1 for w in g.weights):
                raise StructureMismatch(f"gate {g.gid}: weighted sum over booleans")
            acc = 0
            for a in g.args:
                acc |= vals[a]
            vals[g.gid] = acc
        elif g.kind == MUL:
            acc = full
            for a in g.args:
                acc &= vals[a]
            vals[g.gid] = acc
        else:
            raise StructureMismatch(f"gate {g.gid}: subtraction over booleans")
    return tuple(vals[o] for o in c.outputs)


def truth_tables_equal(a: Circuit, b: Circuit, max_bits: int = 14) -> bool:
    """Exhaustive 2^n-row comparison under the shared literal layout."""
    names = sorted(set(a.variables()) | set(b.variables()))
    layout = literal_layout(names)
    if len(layout[0]) > max_bits:
        raise ValueError(f"{len(layout[0])} free bits exceed the exhaustive limit")
    return truth_table(a, layout) == truth_table(b, layout)
