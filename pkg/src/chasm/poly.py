"""Exact sparse-polynomial oracle and equivalence testing.

SparsePoly is the ground truth every pass is verified against: an exact map
from exponent vectors to arbitrary-precision integer coefficients.  Expansion
is bottom-up over the circuit (or a topological path-sum for branching
programs) and aborts once any intermediate result exceeds the monomial cap.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from fractions import Fraction

from .circuit import ADD, CONST, INPUT, SUB, Circuit, formal_degree
from .errors import CapExceeded

DEFAULT_MONOMIAL_CAP = 10**6
# Mersenne prime 2^61 - 1: fits in a machine word with headroom, far above
# every degree bound in the corpus.
IDENTITY_TEST_PRIME = 2305843009213693951


def monomial_cap(cap: int | None = None) -> int:
    """Resolve the effective cap: explicit argument, else CHASM_MONOMIAL_CAP."""
    if cap is not None:
        return cap
    env = os.environ.get("CHASM_MONOMIAL_CAP")
    return int(env) if env else DEFAULT_MONOMIAL_CAP


class SparsePoly:
    """Multivariate polynomial: {exponent vector: nonzero int coefficient}."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms=None):
        self.variables = tuple(variables)
        self.terms: dict[tuple[int, ...], int] = {}
        if terms:
            for exps, coeff in dict(terms).items():
                if coeff:
                    self.terms[tuple(exps)] = coeff

    @classmethod
    def zero(cls, variables) -> "SparsePoly":
        return cls(variables)

    @classmethod
    def constant(cls, variables, value: int) -> "SparsePoly":
        p = cls(variables)
        if value:
            p.terms[(0,) * len(p.variables)] = value
        return p

    @classmethod
    def variable(cls, variables, name: str) -> "SparsePoly":
        p = cls(variables)
        exps = [0] * len(p.variables)
        exps[p.variables.index(name)] = 1
        p.terms[tuple(exps)] = 1
        return p

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparsePoly)
            and self.variables == other.variables
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        out = SparsePoly(self.variables)
        out.terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            new = out.terms.get(exps, 0) + coeff
            if new:
                out.terms[exps] = new
            else:
                out.terms.pop(exps, None)
        return out

    def __neg__(self) -> "SparsePoly":
        out = SparsePoly(self.variables)
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def __mul__(self, other: "SparsePoly") -> "SparsePoly":
        out = SparsePoly(self.variables)
        acc = out.terms
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                new = acc.get(exps, 0) + c1 * c2
                if new:
                    acc[exps] = new
                else:
                    acc.pop(exps, None)
        return out

    def scale(self, k: int) -> "SparsePoly":
        out = SparsePoly(self.variables)
        if k:
            out.terms = {e: c * k for e, c in self.terms.items()}
        return out

    def degree(self) -> int:
        """Total degree; 0 for constants and for the zero polynomial."""
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def homogeneous_part(self, d: int) -> "SparsePoly":
        out = SparsePoly(self.variables)
        out.terms = {e: c for e, c in self.terms.items() if sum(e) == d}
        return out

    def evaluate(self, point: dict[str, int]) -> int:
        total = 0
        for exps, coeff in self.terms.items():
            term = coeff
            for name, e in zip(self.variables, exps):
                if e:
                    term *= point[name] ** e
            total += term
        return total

    def with_variables(self, variables) -> "SparsePoly":
        """Re-express over a superset (or reordering) of the variable list."""
        variables = tuple(variables)
        src = {v: i for i, v in enumerate(self.variables)}
        for v in self.variables:
            if v not in variables:
                raise ValueError(f"cannot drop variable {v}")
        out = SparsePoly(variables)
        for exps, coeff in self.terms.items():
            new = [0] * len(variables)
            for j, v in enumerate(variables):
                if v in src:
                    new[j] = exps[src[v]]
            out.terms[tuple(new)] = coeff
        return out

    def canonical_text(self) -> str:
        """One term per line, ``<coeff> <e1> ... <ek>``, sorted by exponents."""
        lines = []
        for exps in sorted(self.terms):
            lines.append(" ".join([str(self.terms[exps])] + [str(e) for e in exps]))
        return "\n".join(lines) + ("\n" if lines else "")

    def __repr__(self):
        return f"SparsePoly({self.variables!r}, {self.terms!r})"


def parse_poly_text(text: str, variables) -> SparsePoly:
    p = SparsePoly(variables)
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        coeff = int(parts[0])
        exps = tuple(int(t) for t in parts[1:])
        if coeff:
            p.terms[exps] = p.terms.get(exps, 0) + coeff
    return p


# ---------------------------------------------------------------------------
# expansion


def _capped(p: SparsePoly, where, cap: int) -> SparsePoly:
    if len(p.terms) > cap:
        raise CapExceeded(where, len(p.terms), cap)
    return p


def expand_circuit(c: Circuit, cap: int | None = None) -> list[SparsePoly]:
    """Exact expanded polynomial for each output, bottom-up."""
    cap = monomial_cap(cap)
    variables = c.variables()
    vals: dict[int, SparsePoly] = {}
    for g in c.gates:
        if g.kind == INPUT:
            p = SparsePoly.variable(variables, g.var)
        elif g.kind == CONST:
            p = SparsePoly.constant(variables, g.value)
        elif g.kind == ADD:
            p = SparsePoly.zero(variables)
            for a, w in zip(g.args, g.weights):
                if w:
                    p = p + vals[a].scale(w)
        elif g.kind == SUB:
            p = vals[g.args[0]] - vals[g.args[1]]
        else:
            p = vals[g.args[0]]
            for a in g.args[1:]:
                p = _capped(p * vals[a], f"gate {g.gid}", cap)
        vals[g.gid] = _capped(p, f"gate {g.gid}", cap)
    return [vals[o] for o in c.outputs]


def expand_abp(abp, cap: int | None = None) -> list[SparsePoly]:
    """Path-sum polynomial at each designated node of a branching program.

    One topological pass: the source holds the constant 1 and every node
    accumulates sum(value(u) * label) over its incoming edges.
    """
    cap = monomial_cap(cap)
    variables = abp.variables()
    vals = {u: SparsePoly.zero(variables) for u in range(1, abp.m + 1)}
    vals[1] = SparsePoly.constant(variables, 1)
    incoming: dict[int, list] = {}
    for u, v, label in abp.edges:
        incoming.setdefault(v, []).append((u, label))
    for v in range(2, abp.m + 1):
        acc = SparsePoly.zero(variables)
        for u, label in incoming.get(v, []):
            if isinstance(label, str):
                term = vals[u] * SparsePoly.variable(variables, label)
            else:
                term = vals[u].scale(label)
            acc = _capped(acc + term, f"node {v}", cap)
        vals[v] = acc
    return [vals[n] for n in abp.output_nodes]


def expand_to_poly(obj, cap: int | None = None) -> list[SparsePoly]:
    """Oracle expansion of a Circuit or an Abp (one polynomial per output)."""
    if isinstance(obj, Circuit):
        return expand_circuit(obj, cap)
    return expand_abp(obj, cap)


def expand_single(obj, cap: int | None = None) -> SparsePoly:
    polys = expand_to_poly(obj, cap)
    if len(polys) != 1:
        raise ValueError(f"expected a single output, got {len(polys)}")
    return polys[0]


# ---------------------------------------------------------------------------
# equivalence


def _unify(polys_a, polys_b):
    names = []
    for p in list(polys_a) + list(polys_b):
        for v in p.variables:
            if v not in names:
                names.append(v)
    names = sorted(names)
    return (
        [p.with_variables(names) for p in polys_a],
        [p.with_variables(names) for p in polys_b],
    )


def equiv_exact(a, b, cap: int | None = None) -> bool:
    """Term-for-term equality of expanded polynomials (after unifying the
    variable sets).  Output arity must match."""
    pa, pb = _unify(expand_to_poly(a, cap), expand_to_poly(b, cap))
    if len(pa) != len(pb):
        return False
    return all(x.terms == y.terms for x, y in zip(pa, pb))


@dataclass(frozen=True)
class EquivVerdict:
    equivalent: bool
    trials: int
    failure_bound: Fraction
    witness: dict[str, int] | None = None
    values: tuple | None = None

    def __bool__(self) -> bool:
        return self.equivalent


def _formal_degree_bound(obj) -> int:
    if isinstance(obj, Circuit):
        fd = formal_degree(obj)
        return max(fd[o] for o in obj.outputs)
    dist = obj.longest_from_source()
    return max(max((dist.get(n, 0) for n in obj.output_nodes), default=0), 1)


def equiv_random(a, b, trials: int = 20, seed: int = 0) -> EquivVerdict:
    """Randomized identity test at uniform points modulo a fixed 61-bit prime.

    Distinct verdicts return the first witness point.  Equivalent verdicts
    report failure probability at most (D/p)^trials where D bounds the degree
    of the difference (taken from formal degrees).
    """
    from .semiring import eval_obj, modular_ring

    p = IDENTITY_TEST_PRIME
    ring = modular_ring(p)
    names = set()
    for obj in (a, b):
        vs = obj.variables()
        names.update(vs)
    names = sorted(names)
    deg = max(_formal_degree_bound(a), _formal_degree_bound(b), 1)
    for t in range(trials):
        rng = random.Random(f"{seed}:{t}")
        point = {v: rng.randrange(p) for v in names}
        va = eval_obj(a, point, ring)
        vb = eval_obj(b, point, ring)
        if va != vb:
            return EquivVerdict(False, t + 1, Fraction(0), witness=point, values=(va, vb))
    return EquivVerdict(True, trials, Fraction(deg, p) ** trials)


# ---------------------------------------------------------------------------
# symbolic label matrices (independent cross-check of the powering passes)


def label_to_poly(label, variables) -> SparsePoly:
    if label is None:
        return SparsePoly.zero(variables)
    if isinstance(label, str):
        return SparsePoly.variable(variables, label)
    return SparsePoly.constant(variables, label)


def poly_matmul(A, B):
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = None
            for k in range(n):
                if not A[i][k] or not B[k][j]:
                    continue
                term = A[i][k] * B[k][j]
                acc = term if acc is None else acc + term
            if acc is None:
                acc = SparsePoly.zero(A[i][i].variables)
            row.append(acc)
        out.append(row)
    return out


def poly_matpow(M, p: int):
    if p < 1:
        raise ValueError("power must be >= 1")
    acc = M
    for _ in range(p - 1):
        acc = poly_matmul(acc, M)
    return acc


def poly_row_power(M, p: int, row: int = 0):
    """Row ``row`` of M^p via repeated vector-matrix products (cheap even for
    large matrices, which full symbolic powering is not)."""
    n = len(M)
    variables = M[0][0].variables
    vec = [SparsePoly.zero(variables) for _ in range(n)]
    vec[row] = SparsePoly.constant(variables, 1)
    for _ in range(p):
        nxt = [SparsePoly.zero(variables) for _ in range(n)]
        for i in range(n):
            if not vec[i]:
                continue
            for j in range(n):
                if M[i][j]:
                    nxt[j] = nxt[j] + vec[i] * M[i][j]
        vec = nxt
    return vec
