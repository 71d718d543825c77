"""Test-corpus generators: permanent formulas, iterated matrix products,
power chains, seeded random circuits, and boolean reachability.

Generation is a pure function of the parameters, so identical parameters always
produce byte-identical circuit files.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .circuit import Circuit, CircuitBuilder

# Rejection threshold on the all-ones coefficient mass of random circuits;
# keeps branching-program path counts (and so the desk-scale oracles and
# brute-force expansions) tractable.
RANDOM_MASS_CAP = 2000


@dataclass(frozen=True)
class CorpusSpec:
    family: str
    n: int = 0
    k: int = 0
    vars: int = 0
    size: int = 0
    max_degree: int = 0
    seed: int = 0
    nodes: int = 0

    def __post_init__(self):
        checks = {
            "ryser": self.n >= 1,
            "imm": self.n >= 1 and self.k >= 1,
            "power": self.k >= 1,
            "random": self.vars >= 1 and self.size >= self.vars and self.max_degree >= 1,
            "bool_reach": self.nodes >= 2,
        }
        if self.family not in checks:
            raise ValueError(f"unknown corpus family {self.family!r}")
        if not checks[self.family]:
            raise ValueError(f"invalid parameters for family {self.family!r}")


def gen_corpus(spec: CorpusSpec) -> Circuit:
    if spec.family == "ryser":
        return gen_ryser(spec.n)
    if spec.family == "imm":
        return gen_imm(spec.n, spec.k)
    if spec.family == "power":
        return gen_power(spec.k)
    if spec.family == "random":
        return gen_random(spec.vars, spec.size, spec.max_degree, spec.seed)
    return gen_bool_reach(spec.nodes, spec.seed)


def gen_ryser(n: int) -> Circuit:
    """Inclusion-exclusion permanent formula over an n x n variable matrix.

    per(A) = (-1)^n * sum over nonempty column sets S of
    (-1)^|S| * prod_i sum_{j in S} a_ij; the empty set contributes a zero
    product and is omitted, and the sign lands on the top gate's weights so
    the formula keeps depth 3 and formal degree n.
    """
    b = CircuitBuilder(f"ryser{n}")
    a = {(i, j): b.input(f"a{i}_{j}") for i in range(1, n + 1) for j in range(1, n + 1)}
    top = []
    for mask in range(1, 1 << n):
        cols = [j for j in range(1, n + 1) if (mask >> (j - 1)) & 1]
        rows = []
        for i in range(1, n + 1):
            if len(cols) == 1:
                rows.append(a[(i, cols[0])])
            else:
                rows.append(b.add([(a[(i, j)], 1) for j in cols]))
        prod = rows[0] if n == 1 else b.mul(rows)
        sign = 1 if (n - len(cols)) % 2 == 0 else -1
        top.append((prod, sign))
    return b.build([b.add(top)])


def permanent_poly_terms(n: int) -> dict[tuple[int, ...], int]:
    """Brute-force permutation-sum permanent over variables a{i}_{j} in the
    sorted order gen_ryser uses; independent of the circuit construction."""
    names = sorted(f"a{i}_{j}" for i in range(1, n + 1) for j in range(1, n + 1))
    pos = {v: idx for idx, v in enumerate(names)}
    terms: dict[tuple[int, ...], int] = {}
    for perm in itertools.permutations(range(1, n + 1)):
        exps = [0] * len(names)
        for i, j in enumerate(perm, start=1):
            exps[pos[f"a{i}_{j}"]] += 1
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + 1
    return terms


def gen_imm(n: int, k: int) -> Circuit:
    """Top-left entry of a product of k symbolic n x n matrices, built as a
    row-vector chain; formal degree k."""
    b = CircuitBuilder(f"imm{n}_{k}")
    ins = {
        (l, i, j): b.input(f"a{l}_{i}{j}")
        for l in range(1, k + 1)
        for i in range(1, n + 1)
        for j in range(1, n + 1)
    }
    row = [ins[(1, 1, j)] for j in range(1, n + 1)]
    for l in range(2, k + 1):
        nxt = []
        for j in range(1, n + 1):
            terms = [b.mul([row[c - 1], ins[(l, c, j)]]) for c in range(1, n + 1)]
            acc = terms[0]
            for t in terms[1:]:
                acc = b.add2(acc, t)
            nxt.append(acc)
        row = nxt
    return b.build([row[0]])


def gen_power(k: int) -> Circuit:
    """x squared k times: size k+1, formal degree 2^k."""
    b = CircuitBuilder(f"power{k}")
    g = b.input("x")
    for _ in range(k):
        g = b.mul([g, g])
    return b.build([g])


def gen_const_tower(k: int) -> Circuit:
    """Variable-free constant-free chain computing 2^(2^k) by squaring;
    size k+2, formal degree 2^k."""
    b = CircuitBuilder(f"tower{k}")
    one = b.const(1)
    g = b.add2(one, one)
    for _ in range(k):
        g = b.mul([g, g])
    return b.build([g])


def gen_random(nvars: int, size: int, max_degree: int, seed: int) -> Circuit:
    """Seeded DAG of binary products and ordinary additions/subtractions over
    nvars variables and the constants {-1, 1}.

    The formal degree is tracked and capped at max_degree by rejecting
    product operand pairs; operand pairs whose all-ones coefficient mass
    would pass RANDOM_MASS_CAP are rejected the same way to keep instances
    desk-scale.
    """
    rng = random.Random(f"chasm/random/{nvars}/{size}/{max_degree}/{seed}")
    b = CircuitBuilder(f"random_v{nvars}_s{size}_d{max_degree}_seed{seed}")
    fd: dict[int, int] = {}
    mass: dict[int, int] = {}
    pool: list[int] = []
    for i in range(nvars):
        g = b.input(f"x{i + 1}")
        fd[g], mass[g] = 1, 1
        pool.append(g)
    while len(b.gates) < size:
        roll = rng.random()
        if roll < 0.08 and len(b.gates) < size - 1:
            g = b.const(rng.choice([1, -1]))
            fd[g], mass[g] = 1, 1
            pool.append(g)
            continue
        op = rng.choice(["add", "add", "sub", "mul", "mul"])
        x, y = rng.choice(pool), rng.choice(pool)
        if op == "mul":
            ok = False
            for _ in range(12):
                if fd[x] + fd[y] <= max_degree and mass[x] * mass[y] <= RANDOM_MASS_CAP:
                    ok = True
                    break
                x, y = rng.choice(pool), rng.choice(pool)
            if not ok:
                op = "add"
        if op == "add":
            g = b.add2(x, y)
            fd[g], mass[g] = max(fd[x], fd[y]), mass[x] + mass[y]
        elif op == "sub":
            g = b.sub(x, y)
            fd[g], mass[g] = max(fd[x], fd[y]), mass[x] + mass[y]
        else:
            g = b.mul([x, y])
            fd[g], mass[g] = fd[x] + fd[y], mass[x] * mass[y]
        pool.append(g)
    return b.build([pool[-1]])


def gen_bool_reach(nodes: int, seed: int) -> Circuit:
    """Semi-unbounded reachability circuit for a seeded DAG pattern on the
    given vertices: repeated boolean matrix squaring, unbounded ORs over
    binary ANDs, asking whether vertex 1 reaches vertex `nodes`.

    Some forward edges are variables (named x1, x2, ...; at most 8 so the
    exhaustive truth table stays small), some are fixed present or absent.
    """
    rng = random.Random(f"chasm/boolreach/{nodes}/{seed}")
    b = CircuitBuilder(f"boolreach{nodes}_seed{seed}")
    TRUE = "true"  # symbolic known-present entry, no gate materialized
    entry: dict[tuple[int, int], object] = {}
    var_count = 0
    for u in range(1, nodes + 1):
        for v in range(u + 1, nodes + 1):
            roll = rng.random()
            if roll < 0.5 and var_count < 8:
                var_count += 1
                entry[(u, v)] = b.input(f"x{var_count}")
            elif roll < 0.65:
                entry[(u, v)] = TRUE
            # else absent

    def AND(x, y):
        if x is TRUE:
            return y
        if y is TRUE:
            return x
        return b.mul([x, y])

    def OR(terms):
        if any(t is TRUE for t in terms):
            return TRUE
        terms = [t for t in terms if t is not None]
        if not terms:
            return None
        if len(terms) == 1:
            return terms[0]
        return b.add([(t, 1) for t in terms])

    for _ in range((nodes - 2).bit_length() if nodes > 2 else 0):
        nxt: dict[tuple[int, int], object] = {}
        for u in range(1, nodes + 1):
            for v in range(u + 1, nodes + 1):
                terms = [entry.get((u, v))]
                for c in range(u + 1, v):
                    if (u, c) in entry and (c, v) in entry:
                        terms.append(AND(entry[(u, c)], entry[(c, v)]))
                r = OR(terms)
                if r is not None:
                    nxt[(u, v)] = r
        entry = nxt

    final = entry.get((1, nodes))
    if final is None:
        out = b.const(0)
    elif final is TRUE:
        out = b.const(1)
    else:
        out = final
    return b.build([out])
