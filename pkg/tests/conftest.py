"""Shared fixtures: hand programs, the fixed corpus, and independent
reference implementations used as oracles."""

from __future__ import annotations

import itertools

import pytest

from chasm import Abp, Circuit, CircuitBuilder
from chasm.corpus import (
    gen_const_tower,
    gen_imm,
    gen_power,
    gen_random,
    gen_ryser,
)


@pytest.fixture
def abp_a1() -> Abp:
    return Abp("A1", 2, ((1, 2, "x"),))


@pytest.fixture
def abp_a2() -> Abp:
    return Abp("A2", 3, ((1, 2, "x"), (2, 3, "y"), (1, 3, "z")))


def square_circuit() -> Circuit:
    """(x+y)^2 with the addition shared by both product operands."""
    b = CircuitBuilder("sq")
    x, y = b.input("x"), b.input("y")
    a = b.add2(x, y)
    return b.build([b.mul([a, a])])


def sub_circuit() -> Circuit:
    b = CircuitBuilder("xminusy")
    return b.build([b.sub(b.input("x"), b.input("y"))])


def variable_free_circuits() -> list[Circuit]:
    """Constant-free circuits with no variables, including the 2^(2^k)
    squaring chains."""
    out = [gen_const_tower(k) for k in range(7)]
    b = CircuitBuilder("three")
    one = b.const(1)
    out.append(b.build([b.add2(b.add2(one, one), one)]))
    b = CircuitBuilder("neg_nine")
    one = b.const(1)
    m1 = b.const(-1)
    three = b.add2(b.add2(one, one), one)
    nine = b.mul([three, three])
    out.append(b.build([b.mul([m1, nine])]))
    return out


def random_params(seed: int) -> tuple[int, int, int]:
    nvars = 1 + seed % 4
    size = 10 + (seed * 7) % 31
    max_degree = 2 + seed % 9
    return nvars, size, max_degree


def build_corpus() -> list[tuple[str, Circuit]]:
    """The fixed acceptance corpus: 190 seeded random circuits plus the
    structured families (207 instances in all)."""
    instances: list[tuple[str, Circuit]] = []
    for seed in range(190):
        nvars, size, max_degree = random_params(seed)
        instances.append((f"random{seed}", gen_random(nvars, size, max_degree, seed)))
    for n in (2, 3, 4):
        instances.append((f"ryser{n}", gen_ryser(n)))
    for k in (2, 3, 4):
        instances.append((f"imm2_{k}", gen_imm(2, k)))
    for k in (1, 2, 3, 4):
        instances.append((f"power{k}", gen_power(k)))
    for c in variable_free_circuits():
        instances.append((c.name, c))
    return instances


@pytest.fixture(scope="session")
def corpus() -> list[tuple[str, Circuit]]:
    return build_corpus()


# ---------------------------------------------------------------------------
# independent reference implementations


def brute_force_private_children(c: Circuit, mul_gid: int) -> list[int]:
    """Edge-cut disjointness by plain graph search, written independently of
    the library's bitmask version: a child is private when its reachable
    set has exactly one edge leaving it, namely the child's single edge into
    the product gate, and contains no circuit output."""
    gate = c.gate(mul_gid)
    result = []
    for child in dict.fromkeys(gate.args):
        seen: set[int] = set()
        todo = [child]
        while todo:
            g = todo.pop()
            if g in seen:
                continue
            seen.add(g)
            todo.extend(c.gate(g).args)
        external = 0
        good = True
        for other in c.gates:
            for a in other.args:
                if a in seen and other.gid not in seen:
                    external += 1
                    if not (a == child and other.gid == mul_gid):
                        good = False
        if any(o in seen for o in c.outputs):
            good = False
        if good and external == 1:
            result.append(child)
    return result


def permanent_by_permutations(n: int) -> dict[str, int]:
    """Sum over permutations, keyed by a sorted monomial signature."""
    terms: dict[str, int] = {}
    for perm in itertools.permutations(range(1, n + 1)):
        key = "*".join(sorted(f"a{i}_{j}" for i, j in enumerate(perm, start=1)))
        terms[key] = terms.get(key, 0) + 1
    return terms


def poly_signature(p) -> dict[str, int]:
    """SparsePoly terms keyed the same way as permanent_by_permutations."""
    out: dict[str, int] = {}
    for exps, coeff in p.terms.items():
        parts = []
        for name, e in zip(p.variables, exps):
            parts.extend([name] * e)
        out["*".join(sorted(parts))] = coeff
    return out
