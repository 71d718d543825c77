"""Arithmetic branching programs and their matrix-powering view.

An Abp is an edge-labeled DAG over nodes 1..m in a fixed topological
numbering (every edge goes from a lower to a higher node).  Node 1 is the
source, node m the sink, and the represented polynomial is the sum over all
source-to-sink paths of the product of edge labels.  Labels are variable
names or arbitrary-precision integer constants.

Multi-output programs (one polynomial per marked node) carry their marked
nodes in ``output_nodes``; the plain single-output case marks just the sink.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NotTrimmed, ParseError
from .poly import label_to_poly

Label = int | str
Edge = tuple[int, int, Label]


@dataclass(frozen=True)
class Abp:
    name: str
    m: int
    edges: tuple[Edge, ...]
    output_nodes: tuple[int, ...] = ()

    def __post_init__(self):
        if self.m < 2:
            raise ParseError("a branching program needs at least source and sink")
        seen: set[tuple[int, int]] = set()
        for u, v, label in self.edges:
            if not (1 <= u < v <= self.m):
                raise ParseError(f"edge {u}->{v} breaks the topological numbering")
            if (u, v) in seen:
                raise ParseError(f"parallel edge {u}->{v}")
            if not isinstance(label, (int, str)):
                raise ParseError(f"edge {u}->{v}: bad label {label!r}")
            seen.add((u, v))
        if not self.output_nodes:
            object.__setattr__(self, "output_nodes", (self.m,))
        for n in self.output_nodes:
            if not (1 <= n <= self.m):
                raise ParseError(f"output node {n} out of range")

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for _, _, label in self.edges:
            if isinstance(label, str):
                seen.setdefault(label, None)
        return tuple(sorted(seen))

    def successors(self) -> dict[int, list[tuple[int, Label]]]:
        out: dict[int, list[tuple[int, Label]]] = {u: [] for u in range(1, self.m + 1)}
        for u, v, label in self.edges:
            out[u].append((v, label))
        return out

    def depth(self) -> int:
        """Length in edges of the longest source-to-sink path (0 if none)."""
        return self.longest_from_source().get(self.m, 0)

    def longest_from_source(self) -> dict[int, int]:
        """Longest path length from the source to each reachable node."""
        dist = {1: 0}
        for u, v, _ in self.edges:
            if u in dist:
                d = dist[u] + 1
                if d > dist.get(v, -1):
                    dist[v] = d
        return dist

    def reaches_sink(self) -> set[int]:
        back: dict[int, list[int]] = {}
        for u, v, _ in self.edges:
            back.setdefault(v, []).append(u)
        seen = {self.m}
        stack = [self.m]
        while stack:
            v = stack.pop()
            for u in back.get(v, []):
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen

    def is_zero(self) -> bool:
        return self.m not in self.longest_from_source()

    def is_trimmed(self) -> bool:
        """Every node lies on some source-to-sink path.  The canonical zero
        program (two nodes, no edges) counts as trimmed."""
        if self.is_zero():
            return self.m == 2 and not self.edges
        on_path = set(self.longest_from_source()) & self.reaches_sink()
        return len(on_path) == self.m


def zero_abp(name: str = "zero") -> Abp:
    return Abp(name, 2, ())


@dataclass(frozen=True)
class AbpStats:
    size: int
    depth: int
    edge_count: int
    trimmed: bool

    def to_json(self) -> dict:
        return {
            "kind": "abp",
            "size": self.size,
            "depth": self.depth,
            "edges": self.edge_count,
            "trimmed": self.trimmed,
        }


def abp_stats(g: Abp) -> AbpStats:
    return AbpStats(g.m, g.depth(), len(g.edges), g.is_trimmed())


def trim(g: Abp) -> Abp:
    """Drop nodes off every source-to-sink path (the polynomial is unchanged).

    Programs with no source-to-sink path collapse to the canonical zero
    program.
    """
    if g.is_zero():
        return zero_abp(g.name)
    keep = set(g.longest_from_source()) & g.reaches_sink()
    if len(keep) == g.m:
        return g
    renumber = {old: new for new, old in enumerate(sorted(keep), start=1)}
    edges = tuple(
        (renumber[u], renumber[v], label)
        for u, v, label in g.edges
        if u in keep and v in keep
    )
    return Abp(g.name, len(keep), edges)


# ---------------------------------------------------------------------------
# matrix view


@dataclass(frozen=True)
class LabeledMatrix:
    """m x m entry labels: None (zero), an integer, or a variable name.

    Row/column indices are 1-based to match node numbers.  After
    ``abp_to_matrix`` the matrix is upper triangular with a single 1 in the
    bottom-right corner (the sink self-loop that pads short paths).
    """

    dim: int
    entries: tuple[tuple[Label | None, ...], ...]

    def entry(self, i: int, j: int) -> Label | None:
        return self.entries[i - 1][j - 1]

    def to_poly_rows(self, variables=None):
        variables = tuple(variables if variables is not None else self._variables())
        return [
            [label_to_poly(e, variables) for e in row] for row in self.entries
        ]

    def _variables(self):
        seen: dict[str, None] = {}
        for row in self.entries:
            for e in row:
                if isinstance(e, str):
                    seen.setdefault(e, None)
        return tuple(sorted(seen))


def abp_to_matrix(g: Abp) -> LabeledMatrix:
    """Adjacency labels plus a unit self-loop on the sink.

    For a trimmed program, row 1 of the p-th symbolic power holds the program
    polynomial at column m and zero everywhere else, for every p >= depth;
    the loop pads shorter paths.  Trimming is required: a dangling branch
    longer than the deepest source-to-sink path would leak into row 1.
    """
    if not g.is_trimmed():
        raise NotTrimmed(f"{g.name}: trim() before building the matrix")
    rows = [[None] * g.m for _ in range(g.m)]
    for u, v, label in g.edges:
        rows[u - 1][v - 1] = label
    rows[g.m - 1][g.m - 1] = 1
    return LabeledMatrix(g.m, tuple(tuple(r) for r in rows))


# ---------------------------------------------------------------------------
# text format


def parse_abp(text: str) -> Abp:
    """Parse ``abp <name> nodes <m>`` followed by ``edge <u> <v> var|const <x>``
    lines; ``#`` starts a comment."""
    name = None
    m = None
    edges: list[Edge] = []
    outputs: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "abp":
            if len(tok) != 4 or tok[2] != "nodes":
                raise ParseError("expected: abp <name> nodes <m>", lineno)
            name = tok[1]
            m = int(tok[3])
        elif tok[0] == "edge":
            if m is None:
                raise ParseError("edge before the abp header", lineno)
            if len(tok) != 5 or tok[3] not in ("var", "const"):
                raise ParseError("expected: edge <u> <v> var|const <x>", lineno)
            u, v = int(tok[1]), int(tok[2])
            label: Label = tok[4] if tok[3] == "var" else int(tok[4])
            edges.append((u, v, label))
        elif tok[0] == "node-output":
            outputs.append(int(tok[1]))
        else:
            raise ParseError(f"unknown directive {tok[0]!r}", lineno)
    if m is None:
        raise ParseError("missing abp header")
    return Abp(name, m, tuple(edges), tuple(outputs))


def emit_abp(g: Abp) -> str:
    lines = [f"abp {g.name} nodes {g.m}"]
    for u, v, label in g.edges:
        if isinstance(label, str):
            lines.append(f"edge {u} {v} var {label}")
        else:
            lines.append(f"edge {u} {v} const {label}")
    if g.output_nodes != (g.m,):
        for n in g.output_nodes:
            lines.append(f"node-output {n}")
    return "\n".join(lines) + "\n"
