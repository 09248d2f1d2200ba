"""Labeled weighted walks on finite directed graphs.

A walk assigns, to each vertex i and label lam, a complex amplitude
``alpha[i, lam]``; an edge i --lam--> j exists exactly when the amplitude is
nonzero.  Squared moduli of each row sum to 1, so ``|alpha|**2`` are
transition probabilities.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

# Amplitudes below this modulus are snapped to exact zero on input, so the
# combinatorics (possible transitions, invariant sets) is discrete and never
# tolerance-dependent.
ZERO_SNAP = 1e-12

DEFAULT_ROW_TOL = 1e-9

Vertex = str | int
Label = str | int


class WalkInputError(ValueError):
    """Raised for malformed walk inputs (unknown vertices, bad schemas...)."""


@dataclass(frozen=True)
class LabeledWalk:
    """A finite labeled weighted directed graph.

    ``edges`` maps ``(vertex, label)`` to ``(target, amplitude)``; pairs that
    are absent carry amplitude 0.  Instances are immutable after construction
    and safe to share.
    """

    vertices: tuple[Vertex, ...]
    labels: tuple[Label, ...]
    edges: dict[tuple[Vertex, Label], tuple[Vertex, complex]]

    # dense index maps, assigned in input order for reproducibility
    vindex: dict[Vertex, int] = field(init=False, repr=False, compare=False)
    lindex: dict[Label, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise WalkInputError("duplicate vertex identifiers")
        if len(set(self.labels)) != len(self.labels):
            raise WalkInputError("duplicate label identifiers")
        if not self.vertices:
            raise WalkInputError("need at least one vertex")
        clean = {}
        for (i, lam), (j, a) in self.edges.items():
            if i not in set(self.vertices) or j not in set(self.vertices):
                raise WalkInputError(f"edge ({i},{lam})->{j} uses unknown vertex")
            if lam not in set(self.labels):
                raise WalkInputError(f"edge ({i},{lam}) uses unknown label")
            a = complex(a)
            if abs(a) < ZERO_SNAP:
                continue
            clean[(i, lam)] = (j, a)
        object.__setattr__(self, "edges", clean)
        object.__setattr__(self, "vindex", {v: k for k, v in enumerate(self.vertices)})
        object.__setattr__(self, "lindex", {l: k for k, l in enumerate(self.labels)})

    # -- basic accessors -------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def amplitude(self, i: Vertex, lam: Label) -> complex:
        e = self.edges.get((i, lam))
        return e[1] if e is not None else 0.0 + 0.0j

    def target(self, i: Vertex, lam: Label) -> Optional[Vertex]:
        """End vertex of the edge i --lam--> j, or None if absent."""
        e = self.edges.get((i, lam))
        return e[0] if e is not None else None

    def out_labels(self, i: Vertex) -> list[Label]:
        """Labels with a (nonzero) edge leaving i, in input order."""
        return [l for l in self.labels if (i, l) in self.edges]

    def in_labels(self, j: Vertex) -> list[Label]:
        """Labels with an edge arriving at j, in input order."""
        return [l for l in self.labels if self.source(j, l) is not None]

    def source(self, j: Vertex, lam: Label) -> Optional[Vertex]:
        """The vertex i with i --lam--> j, or None.

        Assumes the walk is in-injective; with duplicates the first source in
        input order wins.
        """
        for i in self.vertices:
            e = self.edges.get((i, lam))
            if e is not None and e[0] == j:
                return i
        return None


@dataclass(frozen=True)
class Violation:
    kind: str
    vertex: Optional[Vertex]
    label: Optional[Label]
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "valid": self.ok,
            "violations": [
                {"kind": v.kind, "vertex": v.vertex, "label": v.label, "detail": v.detail}
                for v in self.violations
            ],
        }


def validate_walk(w: LabeledWalk, tol: float = DEFAULT_ROW_TOL) -> ValidationReport:
    """Check the walk invariants; never raises, reports every violation.

    Checks: row normalization of |alpha|**2, out-injectivity (distinct labels
    from a vertex reach distinct targets) and in-injectivity (at most one
    incoming edge per (vertex, label)).
    """
    bad: list[Violation] = []
    for i in w.vertices:
        s = sum(abs(w.amplitude(i, l)) ** 2 for l in w.labels)
        if abs(s - 1.0) > tol:
            bad.append(Violation("row_normalization", i, None,
                                 f"sum of |alpha|^2 over labels is {s:.12g}, not 1"))
        seen: dict[Vertex, Label] = {}
        for l in w.out_labels(i):
            j = w.target(i, l)
            if j in seen:
                bad.append(Violation("out_injectivity", i, l,
                                     f"labels {seen[j]!r} and {l!r} both reach vertex {j!r}"))
            else:
                seen[j] = l
    for l in w.labels:
        sources: dict[Vertex, Vertex] = {}
        for i in w.vertices:
            e = w.edges.get((i, l))
            if e is None:
                continue
            j = e[0]
            if j in sources:
                bad.append(Violation("in_injectivity", j, l,
                                     f"vertices {sources[j]!r} and {i!r} both reach {j!r} with label {l!r}"))
            else:
                sources[j] = i
    return ValidationReport(tuple(bad))


def walk_step(w: LabeledWalk, i: Vertex, word: Sequence[Label]) -> Optional[tuple[Vertex, complex]]:
    """Follow ``word`` from vertex ``i``, multiplying amplitudes along the way.

    Returns ``(end_vertex, amplitude)`` when every step has a nonzero
    amplitude, ``None`` otherwise.  The empty word returns ``(i, 1)``.
    """
    if i not in w.vindex:
        raise WalkInputError(f"unknown vertex {i!r}")
    amp = 1.0 + 0.0j
    cur = i
    for lam in word:
        if lam not in w.lindex:
            raise WalkInputError(f"unknown label {lam!r}")
        e = w.edges.get((cur, lam))
        if e is None:
            return None
        cur, a = e[0], e[1]
        amp *= a
    return cur, amp


def cayley_walk(group_table: Sequence[Sequence[int]],
                generators: Mapping[Label, int] | Iterable[int],
                phases: Optional[Mapping[Label, complex]] = None) -> LabeledWalk:
    """Walk on the Cayley graph of a finite group, with equal probabilities.

    ``group_table[a][b]`` is the product a*b over element indices 0..n-1.
    ``generators`` is either a mapping label -> element, or an iterable of
    elements (labels default to the elements themselves).  Edges go
    g --lam--> lam*g (left multiplication), with amplitude
    phase(lam)/sqrt(#labels).  Phases, when given, must be unimodular and are
    per generator; per-vertex phase maps are rejected by this signature.
    """
    n = len(group_table)
    if n == 0 or any(len(row) != n for row in group_table):
        raise WalkInputError("group table must be a nonempty square table")
    elems = range(n)
    for row in group_table:
        if sorted(row) != list(elems):
            raise WalkInputError("group table rows must be permutations (not a group)")
    for col in range(n):
        if sorted(group_table[row_i][col] for row_i in elems) != list(elems):
            raise WalkInputError("group table columns must be permutations (not a group)")
    # identity element
    ident = None
    for e in elems:
        if all(group_table[e][x] == x and group_table[x][e] == x for x in elems):
            ident = e
            break
    if ident is None:
        raise WalkInputError("group table has no identity element (not a group)")
    for a in elems:
        for b in elems:
            for c in elems:
                if group_table[group_table[a][b]][c] != group_table[a][group_table[b][c]]:
                    raise WalkInputError("group table is not associative (not a group)")

    if isinstance(generators, Mapping):
        gens = dict(generators)
    else:
        gens = {g: g for g in generators}
    if not gens:
        raise WalkInputError("empty generator set")
    for g in gens.values():
        if not (0 <= g < n):
            raise WalkInputError(f"generator {g} not a group element")
    # closure of the generators must be the whole group
    reached = {ident}
    frontier = [ident]
    while frontier:
        x = frontier.pop()
        for g in gens.values():
            y = group_table[g][x]
            if y not in reached:
                reached.add(y)
                frontier.append(y)
    if len(reached) != n:
        raise WalkInputError("generators do not generate the group")

    scale = 1.0 / math.sqrt(len(gens))
    edges = {}
    for x in elems:
        for lab, g in gens.items():
            ph = 1.0 + 0.0j
            if phases is not None and lab in phases:
                ph = complex(phases[lab])
                if abs(abs(ph) - 1.0) > 1e-9:
                    raise WalkInputError(f"phase for generator {lab!r} is not unimodular")
            edges[(x, lab)] = (group_table[g][x], ph * scale)
    return LabeledWalk(tuple(elems), tuple(gens.keys()), edges)


# -- JSON serialization --------------------------------------------------
#
# Schema:
#   { "vertices": [id...], "labels": [id...],
#     "edges": [ {"from": id, "label": id, "to": id,
#                 "alpha": {"re": number, "im": number}} ... ] }
# Omitted edges mean alpha = 0.  binary64 round-trip is exact.

def save_walk(w: LabeledWalk) -> str:
    doc = {
        "vertices": list(w.vertices),
        "labels": list(w.labels),
        "edges": [
            {"from": i, "label": lam, "to": j, "alpha": {"re": a.real, "im": a.imag}}
            for (i, lam), (j, a) in sorted(
                w.edges.items(), key=lambda kv: (w.vindex[kv[0][0]], w.lindex[kv[0][1]]))
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def load_walk(text: str | bytes) -> LabeledWalk:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise WalkInputError(f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise WalkInputError("walk document must be a JSON object")
    for key in ("vertices", "labels"):
        if key not in doc or not isinstance(doc[key], list):
            raise WalkInputError(f"missing or malformed {key!r} array")
    vertices = doc["vertices"]
    labels = doc["labels"]
    edges_doc = doc.get("edges", [])
    if not isinstance(edges_doc, list):
        raise WalkInputError("'edges' must be an array")
    edges = {}
    for e in edges_doc:
        if not isinstance(e, dict) or not {"from", "label", "to", "alpha"} <= set(e):
            raise WalkInputError(f"malformed edge entry: {e!r}")
        a = e["alpha"]
        if not isinstance(a, dict) or "re" not in a or "im" not in a:
            raise WalkInputError(f"edge alpha must be {{re, im}}: {e!r}")
        key = (e["from"], e["label"])
        if key in edges:
            raise WalkInputError(f"duplicate edge for vertex/label {key!r}")
        edges[key] = (e["to"], complex(float(a["re"]), float(a["im"])))
    return LabeledWalk(tuple(vertices), tuple(labels), edges)
