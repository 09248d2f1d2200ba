"""Self-affine spectral systems: min-sets and Parseval frame frequencies.

A system is a scale R, digit set B, frequency set L and amplitudes alpha_l.
The finite minimal invariant sets of the maps t -> (t - l)/R consist of
extreme cycle points; each exports a labeled walk, and together they generate
a Parseval frame of exponentials for the self-affine measure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .walks import LabeledWalk

ISOMETRY_TOL = 1e-10
MB_ZERO_TOL = 1e-12

DEFAULT_FRAME_DEPTH = 10
DEFAULT_MU_HAT_TERMS = 40


@dataclass(frozen=True)
class SpectralSystem:
    """Scale R >= 2, digits B (0 in B), frequencies L (0 in L) and nonzero
    amplitudes alpha_l with alpha_0 = 1.

    ``no_overlap`` attests the measure-theoretic no-overlap condition; it is
    an input flag, not decided algorithmically.  The default heuristic grants
    it when the digits are distinct mod R.
    """

    R: int
    B: tuple[int, ...]
    L: tuple[int, ...]
    alpha: tuple[complex, ...]
    no_overlap: Optional[bool] = None

    def __post_init__(self):
        if self.R < 2:
            raise ValueError("scale R must be >= 2")
        if 0 not in self.B:
            raise ValueError("digit set must contain 0")
        if 0 not in self.L:
            raise ValueError("frequency set must contain 0")
        if len(self.alpha) != len(self.L):
            raise ValueError("need one amplitude per frequency")
        if self.no_overlap is None:
            distinct = len({b % self.R for b in self.B}) == len(self.B)
            object.__setattr__(self, "no_overlap", distinct)

    @property
    def N(self) -> int:
        return len(self.B)

    @property
    def M(self) -> int:
        return len(self.L)

    def alpha_of(self, l: int) -> complex:
        return self.alpha[self.L.index(l)]

    def m_B(self, x: float | Fraction) -> complex:
        """(1/N) sum_b exp(2 pi i b x)."""
        return sum(cmath.exp(2j * cmath.pi * b * float(x)) for b in self.B) / self.N

    def g(self, l: int, t: Fraction) -> Fraction:
        return (t - l) / self.R

    def isometry_matrix(self) -> np.ndarray:
        """The M x N matrix (1/sqrt N) exp(2 pi i l b / R) alpha_l whose
        columns must be orthonormal."""
        T = np.empty((self.M, self.N), dtype=complex)
        for r, l in enumerate(self.L):
            for c, b in enumerate(self.B):
                T[r, c] = cmath.exp(2j * cmath.pi * l * b / self.R) * self.alpha[r] / math.sqrt(self.N)
        return T

    def to_dict(self) -> dict:
        return {
            "R": self.R, "B": list(self.B), "L": list(self.L),
            "alpha": [{"re": a.real, "im": a.imag} for a in map(complex, self.alpha)],
            "no_overlap": self.no_overlap,
        }

    @staticmethod
    def from_dict(doc: dict) -> "SpectralSystem":
        alpha = tuple(complex(a["re"], a["im"]) if isinstance(a, dict) else complex(a)
                      for a in doc["alpha"])
        return SpectralSystem(int(doc["R"]), tuple(doc["B"]), tuple(doc["L"]),
                              alpha, doc.get("no_overlap"))


@dataclass(frozen=True)
class AssumptionReport:
    alpha0_is_one: bool
    isometry_residual: float
    no_overlap_attested: bool

    def passed(self, tol: float = ISOMETRY_TOL) -> bool:
        return self.alpha0_is_one and self.isometry_residual <= tol and self.no_overlap_attested

    def to_dict(self) -> dict:
        return {
            "alpha0_is_one": self.alpha0_is_one,
            "isometry_residual": self.isometry_residual,
            "no_overlap_attested": self.no_overlap_attested,
            "passed": self.passed(),
        }


def check_assumptions(sys: SpectralSystem, tol: float = ISOMETRY_TOL) -> AssumptionReport:
    T = sys.isometry_matrix()
    resid = float(np.abs(T.conj().T @ T - np.eye(sys.N)).max())
    a0 = abs(sys.alpha_of(0) - 1.0) <= 1e-12
    return AssumptionReport(a0, resid, bool(sys.no_overlap))


@dataclass(frozen=True)
class MinSet:
    """A finite minimal invariant set of t -> (t - l)/R; points are exact
    rationals and extreme cycle points."""

    points: tuple[Fraction, ...]            # sorted ascending
    transitions: dict[tuple[Fraction, int], Fraction]   # (t, l) -> g_l(t)

    @property
    def representative(self) -> Fraction:
        return self.points[0]

    def to_dict(self) -> dict:
        return {
            "points": [str(t) for t in self.points],
            "transitions": [
                {"from": str(t), "digit": l, "to": str(u)}
                for (t, l), u in sorted(self.transitions.items(), key=lambda kv: (kv[0][0], kv[0][1]))
            ],
        }


def _candidate_points(sys: SpectralSystem) -> list[Fraction]:
    # min-set points t satisfy t*b integral for every digit b, so they live
    # on the lattice (1/g)Z with g = gcd of the nonzero digits, inside the
    # invariant interval
    nonzero = [abs(b) for b in sys.B if b != 0]
    g = reduce(math.gcd, nonzero) if nonzero else 1
    lo = Fraction(-max(sys.L), sys.R - 1)
    hi = Fraction(-min(sys.L), sys.R - 1)
    k_lo = math.ceil(lo * g)
    k_hi = math.floor(hi * g)
    return [Fraction(k, g) for k in range(k_lo, k_hi + 1)]


def _transition_possible(sys: SpectralSystem, t: Fraction, l: int) -> bool:
    # all amplitudes are nonzero, so possibility reduces to m_B(g_l(t)) != 0
    return abs(sys.m_B(sys.g(l, t))) > MB_ZERO_TOL


def find_min_sets(sys: SpectralSystem) -> list[MinSet]:
    """Finite minimal invariant sets, via sink strongly connected components
    of the possible-transition digraph on the exact rational candidates.

    Candidates whose transitions leave the candidate set cannot belong to a
    finite minimal set and are routed to an exterior sink node.
    """
    if not check_assumptions(sys).passed():
        raise ValueError("system does not satisfy the standing assumptions")
    cands = _candidate_points(sys)
    cset = set(cands)
    n = len(cands)
    cindex = {t: k for k, t in enumerate(cands)}
    EXTERIOR = n
    rows, cols = [], []
    trans: dict[tuple[Fraction, int], Fraction] = {}
    for t in cands:
        for l in sys.L:
            if not _transition_possible(sys, t, l):
                continue
            u = sys.g(l, t)
            rows.append(cindex[t])
            if u in cset:
                cols.append(cindex[u])
                trans[(t, l)] = u
            else:
                cols.append(EXTERIOR)
    # exterior self-loop so it is never a sink partner of a real component
    rows.append(EXTERIOR)
    cols.append(EXTERIOR)
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n + 1, n + 1))
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    is_sink = np.ones(ncomp, dtype=bool)
    for r, c in zip(rows, cols):
        if labels[r] != labels[c]:
            is_sink[labels[r]] = False
    out = []
    ext_comp = labels[EXTERIOR]
    for comp in range(ncomp):
        if comp == ext_comp or not is_sink[comp]:
            continue
        pts = sorted(cands[k] for k in np.nonzero(labels[:n] == comp)[0])
        pset = set(pts)
        sub = {k: v for k, v in trans.items() if k[0] in pset}
        out.append(MinSet(tuple(pts), sub))
    out.sort(key=lambda m: m.representative)
    return out


def export_min_set_walk(sys: SpectralSystem, m: MinSet) -> LabeledWalk:
    """The labeled walk on the min-set's points: labels are the frequencies,
    amplitudes conj(alpha_l) on possible transitions.  Row normalization
    holds because the possible digits from any point carry total probability
    one."""
    vertices = tuple(str(t) for t in m.points)
    labels = tuple(sys.L)
    edges = {}
    for (t, l), u in m.transitions.items():
        edges[(str(t), l)] = (str(u), np.conj(complex(sys.alpha_of(l))))
    return LabeledWalk(vertices, labels, edges)


def cycle_words(sys: SpectralSystem, m: MinSet, max_len: int) -> set[tuple[int, ...]]:
    """First-return digit words at the representative, up to max_len."""
    c = m.representative
    out: set[tuple[int, ...]] = set()

    def rec(t, word):
        for l in sys.L:
            if (t, l) not in m.transitions:
                continue
            u = m.transitions[(t, l)]
            w2 = word + (l,)
            if u == c:
                out.add(w2)
            elif len(w2) < max_len:
                rec(u, w2)

    rec(c, ())
    return out


def frame_frequencies(sys: SpectralSystem, min_sets: Sequence[MinSet],
                      depth: int) -> list[tuple[Fraction, complex]]:
    """Frame elements (frequency, coefficient) from digit words of length <=
    depth that do not end in a cycle word of the representative.

    A word l0..lk emits frequency l0 + R l1 + ... + R^k lk + R^(k+1) c and
    coefficient prod alpha_lj; the empty word emits the representative
    itself.  Multiset semantics: repetitions are kept.
    """
    return [(f, co) for f, co, _d in _frame_elements(sys, min_sets, depth)]


def _frame_elements(sys: SpectralSystem, min_sets: Sequence[MinSet],
                    depth: int) -> list[tuple[Fraction, complex, int]]:
    out: list[tuple[Fraction, complex, int]] = []
    for m in min_sets:
        c = m.representative
        cyc = cycle_words(sys, m, depth)

        def ends_in_cycle(word):
            return any(len(cw) <= len(word) and word[len(word) - len(cw):] == cw
                       for cw in cyc)

        stack: list[tuple[int, ...]] = [()]
        words: list[tuple[int, ...]] = []
        while stack:
            word = stack.pop()
            words.append(word)
            if len(word) < depth:
                for l in sys.L:
                    stack.append(word + (l,))
        for word in sorted(words, key=lambda w: (len(w), w)):
            if word and ends_in_cycle(word):
                continue
            freq = Fraction(0)
            coeff = 1.0 + 0.0j
            for k, l in enumerate(word):
                freq += l * sys.R ** k
                coeff *= complex(sys.alpha_of(l))
            freq += c * sys.R ** len(word)
            out.append((freq, coeff, len(word)))
    return out


def mu_hat(sys: SpectralSystem, xi: float, K: Optional[int] = None) -> complex:
    """Fourier transform of the self-affine measure, as the truncated product
    of m_B over the scales R^-1, ..., R^-K.

    The omitted factors differ from 1 by O(R^-K |xi|), so K defaults to
    max(40, ceil(log_R |xi|) + 40).
    """
    xi = float(xi)
    if K is None:
        K = DEFAULT_MU_HAT_TERMS
        if abs(xi) > 1:
            K = max(K, math.ceil(math.log(abs(xi), sys.R)) + DEFAULT_MU_HAT_TERMS)
    if K < 1:
        raise ValueError("K must be >= 1")
    val = 1.0 + 0.0j
    x = xi
    for _ in range(K):
        x /= sys.R
        val *= sys.m_B(x)
    return val


def verify_parseval(sys: SpectralSystem, test_points: Sequence[float],
                    depth: int = DEFAULT_FRAME_DEPTH,
                    K: int = DEFAULT_MU_HAT_TERMS) -> dict[float, list[float]]:
    """Partial Parseval sums sum |coeff|^2 |mu_hat(t - freq)|^2 per depth.

    For each test point, returns the partial sums at depths 0..depth; the
    sequence is non-decreasing and bounded by 1 for a Parseval frame.
    """
    min_sets = find_min_sets(sys)
    elements = _frame_elements(sys, min_sets, depth)
    out: dict[float, list[float]] = {}
    for t in test_points:
        terms = np.zeros(depth + 1)
        for freq, coeff, d in elements:
            terms[d] += abs(coeff) ** 2 * abs(mu_hat(sys, float(t) - float(freq), K)) ** 2
        out[float(t)] = [float(x) for x in np.cumsum(terms)]
    return out
