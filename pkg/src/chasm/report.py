"""Pass reports: per-pass stats, bound checks, and aggregation.

Bounds with irrational exponents (t^(log2 2d), T^(sqrt(3d)+2), ...) are
compared in log space with interval arithmetic and outward rounding: a check
only fails when the violation is certain, so no bound check can fail from
floating-point error.  Integer bounds are compared exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from mpmath import iv

iv.prec = 120

THEOREM = "theorem"
CONVENTION = "convention"


@dataclass(frozen=True)
class BoundCheck:
    name: str
    claimed: object  # int, float, str expression rendering, or None (tracked only)
    observed: object
    ok: bool
    source: str = THEOREM

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "claimed": _num_json(self.claimed),
            "observed": _num_json(self.observed),
            "ok": self.ok,
            "source": self.source,
        }


def _num_json(v):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, int):
        return str(v)
    return repr(v)


@dataclass
class PassReport:
    pass_name: str
    input_stats: object
    output_stats: object
    bounds: list[BoundCheck] = field(default_factory=list)
    stages: list["PassReport"] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def record(self, name, claimed, observed, ok, source=THEOREM) -> bool:
        if any(b.name == name for b in self.bounds):
            raise ValueError(f"bound {name!r} recorded twice in {self.pass_name}")
        self.bounds.append(BoundCheck(name, claimed, observed, bool(ok), source))
        return bool(ok)

    def all_ok(self) -> bool:
        return all(b.ok for b in self.bounds) and all(s.all_ok() for s in self.stages)

    def bound(self, name: str) -> BoundCheck:
        for b in self.bounds:
            if b.name == name:
                return b
        raise KeyError(name)

    def to_json(self) -> dict:
        d = {
            "pass": self.pass_name,
            "all_bounds_ok": self.all_ok(),
            "input": _stats_json(self.input_stats),
            "output": _stats_json(self.output_stats),
            "bounds": [b.to_json() for b in self.bounds],
        }
        if self.notes:
            d["notes"] = {k: _num_json(v) for k, v in self.notes.items()}
        if self.stages:
            d["stages"] = [s.to_json() for s in self.stages]
        return d


def _stats_json(stats):
    if stats is None:
        return None
    if hasattr(stats, "to_json"):
        return stats.to_json()
    return stats


# ---------------------------------------------------------------------------
# rigorous comparisons for real-valued bounds


def pow_bound_holds(observed: int, base: int, exponent) -> bool:
    """observed <= base^exponent, failing only on certain violation.

    ``exponent`` is an mpmath interval (or number); the comparison happens as
    log2(observed) <= exponent * log2(base) with outward rounding.
    """
    if observed <= 1:
        return True
    if base <= 1:
        return False
    lhs = iv.log(iv.mpf(observed), 2)
    rhs = iv.convert(exponent) * iv.log(iv.mpf(base), 2)
    return not (lhs > rhs)


def log2iv(x: int):
    return iv.log(iv.mpf(x), 2)


def sqrtiv(x):
    return iv.sqrt(iv.convert(x))


def approx(x) -> float:
    """Midpoint float for display."""
    v = iv.convert(x)
    return float(v.mid)


def size_to_weakly_skew_exponent(t: int, d: int):
    """Exponent log2(2d) for the size bound t^log2(2d)."""
    return log2iv(2 * d)


def weakly_skew_size_bound_holds(observed: int, t: int, d: int) -> bool:
    return pow_bound_holds(observed, t, size_to_weakly_skew_exponent(t, d))


def fanin_bound_holds(observed: int, d: int) -> bool:
    """observed <= sqrt(3d) + 1, exactly in integers."""
    return observed <= 1 or (observed - 1) ** 2 <= 3 * d


def bound_expr(text: str, value) -> str:
    """Render a symbolic claim with a numeric approximation for reports."""
    return f"{text} ~= {approx(value):.6g}"


# ---------------------------------------------------------------------------
# aggregation


def bound_report(reports) -> dict:
    """Flatten pass reports into one row per (instance, bound) plus totals.

    ``reports`` is a list of (instance name, PassReport) pairs or bare
    PassReports (instance defaults to the pass name).
    """
    items = []
    for entry in reports:
        if isinstance(entry, tuple):
            items.append(entry)
        else:
            items.append((entry.pass_name, entry))
    if not items:
        raise ValueError("bound_report needs at least one pass report")

    rows = []

    def walk(instance, rep):
        if isinstance(rep, PassReport):
            rep = rep.to_json()
        for b in rep.get("bounds", []):
            rows.append(
                {
                    "instance": instance,
                    "pass": rep.get("pass", "?"),
                    "bound": b["name"],
                    "claimed": _num_json(b.get("claimed")),
                    "observed": _num_json(b.get("observed")),
                    "ok": bool(b["ok"]),
                    "source": b.get("source", THEOREM),
                }
            )
        for s in rep.get("stages", []):
            walk(instance, s)

    for instance, rep in items:
        walk(instance, rep)
    failures = sum(1 for r in rows if not r["ok"])
    return {
        "rows": rows,
        "totals": {"checks": len(rows), "failures": failures},
        "all_bounds_ok": failures == 0,
    }


def render_table(agg: dict) -> str:
    """Human-readable table of an aggregated bound report."""
    headers = ["instance", "pass", "bound", "claimed", "observed", "ok", "source"]
    rows = [
        [
            str(r["instance"]),
            str(r["pass"]),
            str(r["bound"]),
            _clip(r["claimed"]),
            _clip(r["observed"]),
            "ok" if r["ok"] else "FAIL",
            str(r["source"]),
        ]
        for r in agg["rows"]
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    out = []
    out.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    out.append("  ".join("-" * w for w in widths))
    for r in rows:
        out.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    t = agg["totals"]
    out.append(f"{t['checks']} checks, {t['failures']} failures; all_bounds_ok={agg['all_bounds_ok']}")
    return "\n".join(out)


def _clip(v, width: int = 28) -> str:
    s = "-" if v is None else str(v)
    return s if len(s) <= width else s[: width - 3] + "..."


def write_csv(agg: dict, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(
            fh, fieldnames=["instance", "pass", "bound", "claimed", "observed", "ok", "source"]
        )
        w.writeheader()
        for r in agg["rows"]:
            w.writerow(r)


def dump_report_json(report: PassReport | dict, path) -> None:
    data = report.to_json() if isinstance(report, PassReport) else report
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
