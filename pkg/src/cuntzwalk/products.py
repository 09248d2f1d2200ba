"""Product transition structure of two walks on V x V'.

A product transition (i,i') --lam--> (i.lam, i'.lam) is possible exactly when
both coordinate amplitudes are nonzero.  Minimal invariant sets are the sink
strongly connected components of this digraph; the balanced ones index the
intertwiner space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .walks import LabeledWalk, Vertex, Label

HOLONOMY_TOL = 1e-9

Pair = tuple[Vertex, Vertex]


@dataclass(frozen=True)
class ProductGraph:
    walk: LabeledWalk
    walk2: LabeledWalk
    nodes: tuple[Pair, ...]
    # (pair, label) -> successor pair, present iff both transitions possible
    succ: dict[tuple[Pair, Label], Pair]
    nindex: dict[Pair, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nindex", {p: k for k, p in enumerate(self.nodes)})

    def successors(self, node: Pair) -> list[tuple[Label, Pair]]:
        return [(lam, self.succ[(node, lam)])
                for lam in self.walk.labels if (node, lam) in self.succ]

    def step_weight(self, node: Pair, lam: Label) -> complex:
        """alpha[i, lam] * conj(alpha'[i', lam]) for a possible product edge."""
        i, i2 = node
        return self.walk.amplitude(i, lam) * np.conj(self.walk2.amplitude(i2, lam))


def product_graph(w: LabeledWalk, w2: LabeledWalk) -> ProductGraph:
    if set(w.labels) != set(w2.labels):
        raise ValueError("label alphabets differ")
    nodes = tuple((i, i2) for i in w.vertices for i2 in w2.vertices)
    succ = {}
    for i in w.vertices:
        for i2 in w2.vertices:
            for lam in w.labels:
                e1 = w.edges.get((i, lam))
                e2 = w2.edges.get((i2, lam))
                if e1 is not None and e2 is not None:
                    succ[((i, i2), lam)] = (e1[0], e2[0])
    return ProductGraph(w, w2, nodes, succ)


def orbit(pg: ProductGraph, node: Pair) -> set[Pair]:
    """Forward-reachable closure of ``node`` (the smallest invariant set
    containing it)."""
    if node not in pg.nindex:
        raise ValueError(f"{node!r} is not a node of the product graph")
    seen = {node}
    frontier = [node]
    while frontier:
        x = frontier.pop()
        for _, y in pg.successors(x):
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


@dataclass(frozen=True)
class MinimalSet:
    pairs: tuple[Pair, ...]          # sorted by (source index, target index)
    representative: Pair             # lexicographically smallest pair
    balanced: Optional[bool] = None
    witness: Optional[str] = None    # human-readable failure witness

    def to_dict(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "representative": list(self.representative),
            "balanced": self.balanced,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class MinimalSetReport:
    sets: tuple[MinimalSet, ...]

    @property
    def balanced_sets(self) -> tuple[MinimalSet, ...]:
        return tuple(m for m in self.sets if m.balanced)

    @property
    def representatives(self) -> tuple[Pair, ...]:
        return tuple(m.representative for m in self.sets)

    def to_dict(self) -> dict:
        return {"minimal_sets": [m.to_dict() for m in self.sets]}


def minimal_invariant_sets(pg: ProductGraph) -> MinimalSetReport:
    """Minimal invariant sets = sink strongly connected components.

    A set is minimal invariant iff it is forward closed and every element's
    orbit is the whole set, i.e. it is a strongly connected component with no
    outgoing edges.  Ordering of sets and of pairs inside each set is by
    vertex input order, so the result is deterministic.
    """
    n = len(pg.nodes)
    rows, cols = [], []
    for (node, _lam), tgt in pg.succ.items():
        rows.append(pg.nindex[node])
        cols.append(pg.nindex[tgt])
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    # a component is a sink iff no edge leaves it
    is_sink = np.ones(ncomp, dtype=bool)
    for (node, _lam), tgt in pg.succ.items():
        a, b = labels[pg.nindex[node]], labels[pg.nindex[tgt]]
        if a != b:
            is_sink[a] = False
    key = lambda p: (pg.walk.vindex[p[0]], pg.walk2.vindex[p[1]])
    sets = []
    for comp in range(ncomp):
        if not is_sink[comp]:
            continue
        pairs = sorted((pg.nodes[k] for k in np.nonzero(labels == comp)[0]), key=key)
        sets.append(MinimalSet(tuple(pairs), pairs[0]))
    sets.sort(key=lambda m: key(m.representative))
    return MinimalSetReport(tuple(sets))


def classify_balanced(pg: ProductGraph, report: MinimalSetReport,
                      tol: float = HOLONOMY_TOL) -> MinimalSetReport:
    """Flag each minimal set balanced/unbalanced, with a witness on failure.

    Condition (i): |alpha[i,lam]| == |alpha'[i',lam]| pointwise for every pair
    in the set and every label, zero patterns included.  Condition (ii): every
    loop's amplitude products agree; checked by assigning a potential over a
    spanning arborescence with edge ratios alpha/alpha' and verifying every
    edge against it.
    """
    w, w2 = pg.walk, pg.walk2
    out = []
    for mset in report.sets:
        balanced, witness = _check_balanced(pg, w, w2, mset, tol)
        out.append(MinimalSet(mset.pairs, mset.representative, balanced, witness))
    return MinimalSetReport(tuple(out))


def _check_balanced(pg, w, w2, mset, tol):
    members = set(mset.pairs)
    for (i, i2) in mset.pairs:
        for lam in w.labels:
            a = abs(w.amplitude(i, lam))
            b = abs(w2.amplitude(i2, lam))
            if abs(a - b) > tol:
                return False, (f"modulus mismatch at pair ({i!r},{i2!r}) label {lam!r}: "
                               f"|alpha|={a:.12g} vs |alpha'|={b:.12g}")
    # potentials over a BFS arborescence rooted at the representative
    theta = {mset.representative: 1.0 + 0.0j}
    order = [mset.representative]
    qi = 0
    parent_edge = {}
    while qi < len(order):
        x = order[qi]
        qi += 1
        for lam, y in pg.successors(x):
            if y in members and y not in theta:
                theta[y] = theta[x] * _ratio(pg, x, lam)
                parent_edge[y] = (x, lam)
                order.append(y)
    for x in mset.pairs:
        for lam, y in pg.successors(x):
            if y not in members:
                continue
            if abs(theta[y] - theta[x] * _ratio(pg, x, lam)) > tol:
                cycle = _witness_cycle(parent_edge, mset.representative, x, lam, y)
                return False, f"loop amplitude products differ along cycle {cycle}"
    return True, None


def _ratio(pg, node, lam):
    i, i2 = node
    return pg.walk.amplitude(i, lam) / pg.walk2.amplitude(i2, lam)


def _witness_cycle(parent_edge, root, x, lam, y):
    def path_to(n):
        labels = []
        while n != root and n in parent_edge:
            p, l = parent_edge[n]
            labels.append(l)
            n = p
        return list(reversed(labels))

    return {"to_tail": path_to(x), "edge": lam, "tail": list(x), "head": list(y)}


def first_passage(pg: ProductGraph, representatives: Sequence[Pair],
                  node: Pair, n: int) -> list[float]:
    """P((i,i'); k) for k = 0..n: total |alpha| |alpha'| mass over length-k
    words avoiding all designated representatives at every time 0..k.

    Computed by dynamic programming with the designated nodes absorbing.  The
    sequence is non-increasing and tends to 0.
    """
    reps = set(representatives)
    mass = {node: 1.0} if node not in reps else {}
    out = [sum(mass.values())]
    for _ in range(n):
        nxt: dict[Pair, float] = {}
        for x, m in mass.items():
            i, i2 = x
            for lam, y in pg.successors(x):
                if y in reps:
                    continue
                wgt = abs(pg.walk.amplitude(i, lam)) * abs(pg.walk2.amplitude(i2, lam))
                nxt[y] = nxt.get(y, 0.0) + m * wgt
        mass = nxt
        out.append(sum(mass.values()))
    return out


def first_arrival_words(pg: ProductGraph, representatives: Sequence[Pair],
                        node: Pair, max_len: int) -> list[tuple[tuple[Label, ...], Pair]]:
    """All words of length 1..max_len reaching a designated representative for
    the first time, with the representative reached.  Exponential in max_len;
    meant for small oracles and dilation-space checks."""
    reps = set(representatives)
    out = []
    if node in reps:
        return out

    def rec(x, word):
        for lam, y in pg.successors(x):
            w2 = word + (lam,)
            if y in reps:
                out.append((w2, y))
            elif len(w2) < max_len:
                rec(y, w2)

    rec(node, ())
    return out


# -- single-walk structure tests ----------------------------------------

def possible_digraph(w: LabeledWalk) -> sp.csr_matrix:
    n = w.n_vertices
    rows, cols = [], []
    for (i, _lam), (j, _a) in w.edges.items():
        rows.append(w.vindex[i])
        cols.append(w.vindex[j])
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))


def is_connected(w: LabeledWalk) -> bool:
    """True when the possible-transition digraph is strongly connected."""
    if w.n_vertices == 1:
        return True
    ncomp, _ = connected_components(possible_digraph(w), directed=True, connection="strong")
    return ncomp == 1


def is_separating(w: LabeledWalk) -> bool:
    """True when, for every pair of distinct vertices, some word length admits
    no simultaneously possible word from both.

    The set of "alive" pairs shrinks monotonically under the pair-transition
    map, so a fixpoint is reached within |V|^2 iterations; the walk is
    separating iff the fixpoint contains no off-diagonal pair.
    """
    pg = product_graph(w, w)
    alive = set(pg.nodes)
    for _ in range(w.n_vertices ** 2 + 1):
        nxt = {x for x in alive if any(y in alive for _, y in pg.successors(x))}
        if nxt == alive:
            break
        alive = nxt
    return all(i == j for (i, j) in alive)


def irreducibility_verdict(w: LabeledWalk) -> dict:
    """Sufficient-condition verdict: connected and separating implies the
    Cuntz dilation is irreducible.  Inconclusive otherwise (the definitive
    answer is the commutant dimension)."""
    c = is_connected(w)
    s = is_separating(w)
    return {
        "connected": c,
        "separating": s,
        "verdict": "irreducible (sufficient condition)" if (c and s) else "inconclusive",
    }
