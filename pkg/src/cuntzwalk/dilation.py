"""Explicit Cuntz dilation of a walk's coisometry on a truncated word space.

The dilation lives on l2 of pairs (vertex, w) where w runs over finite words
over the digits {0..N-1} that do not end in 0.  The generator S_lam maps the
level-<=L part of the space into the level-<=(L+1) part and its adjoint
strictly lowers word length, so both Cuntz relations hold *exactly* on the
truncation, with no boundary error.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .walks import LabeledWalk, Vertex, Label
from .coisometry import build_coisometry, Coisometry
from . import products

Digit = int
Word = tuple[Digit, ...]   # not ending in 0 when nonempty

UNITARY_TOL = 1e-12


def prepend(k: Digit, w: Word) -> Word:
    """Concatenation k.w with the convention 0.empty = empty."""
    if k == 0 and not w:
        return ()
    return (k,) + w


def strip(w: Word, k: Digit) -> Optional[Word]:
    """Inverse concatenation: w' if k.w' == w, else None.

    strip(empty, 0) = empty; strip(empty, k) = None for k != 0.
    """
    if not w:
        return () if k == 0 else None
    if w[0] == k:
        return w[1:]
    return None


def words_up_to(n_digits: int, max_len: int) -> list[Word]:
    """All words over {0..n_digits-1} of length <= max_len not ending in 0,
    ordered by length then lexicographically."""
    out: list[Word] = [()]
    for m in range(1, max_len + 1):
        for w in itertools.product(range(n_digits), repeat=m):
            if w[-1] != 0:
                out.append(w)
    return out


def complete_unitary(column: np.ndarray) -> np.ndarray:
    """Deterministic unitary with the given unit vector as first column.

    Uses a Householder reflector sending e0 to the column (standard sign
    convention), scaled by the leading entry's phase; the first column is then
    set to the input exactly.
    """
    a = np.asarray(column, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(a)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"column norm {nrm:.12g} is not 1")
    n = a.size
    if n == 1:
        return a.reshape(1, 1).copy()
    a = a / nrm
    mu = a[0] / abs(a[0]) if abs(a[0]) > 0 else 1.0 + 0.0j
    v = a - mu * np.eye(n, dtype=complex)[:, 0]
    vv = np.vdot(v, v).real
    if vv < 1e-30:
        U = mu * np.eye(n, dtype=complex)
    else:
        H = np.eye(n, dtype=complex) - 2.0 * np.outer(v, v.conj()) / vv
        U = mu * H
    U[:, 0] = a
    return U


@dataclass(frozen=True)
class DilationSpace:
    """Truncated word-indexed basis, ordered by word length, then
    lexicographic word, then vertex input order.

    The level-<=m bases are prefixes of each other, so restriction to a lower
    level is a slice.
    """

    walk: LabeledWalk
    depth: int                       # L; basis covers levels 0..L+1
    basis: tuple[tuple[Vertex, Word], ...]
    index: dict[tuple[Vertex, Word], int] = field(init=False, repr=False, compare=False)
    level_dims: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {b: k for k, b in enumerate(self.basis)})
        dims = []
        for m in range(self.depth + 2):
            dims.append(sum(1 for (_v, w) in self.basis if len(w) <= m))
        object.__setattr__(self, "level_dims", tuple(dims))

    def dim(self, level: int) -> int:
        """Dimension of the level-<=level subspace."""
        return self.level_dims[level]


@dataclass(frozen=True)
class DilationOperators:
    """The truncated generators and their adjoints.

    ``S[lam]`` has shape (dim(L+1), dim(L)); ``Sstar[lam]`` has shape
    (dim(L), dim(L+1)) and is the conjugate transpose of ``S[lam]`` on
    matching levels.
    """

    space: DilationSpace
    coisometry: Coisometry
    completions: dict[Vertex, np.ndarray]      # unitary C_i, rows = out-labels of i
    pairing: dict[tuple[Vertex, Label], tuple[Vertex, Digit]]   # phi
    S: dict[Label, sp.csc_matrix]
    Sstar: dict[Label, sp.csc_matrix]

    @property
    def walk(self) -> LabeledWalk:
        return self.space.walk


def _build_pairing(w: LabeledWalk) -> dict[tuple[Vertex, Label], tuple[Vertex, Digit]]:
    """Lexicographic bijection (j, lam not arriving at j) -> (i, spare digit).

    Both sets have the same cardinality on a finite graph (counting edges by
    start or by end); pairing in input order keeps the build deterministic.
    """
    N = w.n_labels
    missing = [(j, lam) for j in w.vertices for lam in w.labels
               if w.source(j, lam) is None]
    spare = [(i, k) for i in w.vertices
             for k in range(len(w.out_labels(i)), N)]
    assert len(missing) == len(spare), "edge count mismatch; walk is not finite/consistent"
    return dict(zip(missing, spare))


def build_dilation(w: LabeledWalk, depth: int,
                   completions: Optional[dict[Vertex, np.ndarray]] = None
                   ) -> tuple[DilationSpace, DilationOperators]:
    """Assemble the truncated dilation operators at truncation depth >= 1.

    For each vertex, a unitary whose first column holds that vertex's
    amplitudes drives the first branch of S_lam; the deterministic pairing
    covers labels with no incoming edge.  Explicit unitary completions may be
    injected (rows indexed by the vertex's out-labels in input order).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cois = build_coisometry(w)
    N = w.n_labels

    C: dict[Vertex, np.ndarray] = {}
    for i in w.vertices:
        lams = w.out_labels(i)
        col = np.array([w.amplitude(i, l) for l in lams], dtype=complex)
        if completions is not None and i in completions:
            Ci = np.asarray(completions[i], dtype=complex)
            if Ci.shape != (len(lams), len(lams)):
                raise ValueError(f"completion for vertex {i!r} has wrong shape")
            if np.abs(Ci[:, 0] - col).max() > 1e-9:
                raise ValueError(f"completion for vertex {i!r} does not start with the amplitudes")
        else:
            Ci = complete_unitary(col)
        C[i] = Ci

    phi = _build_pairing(w)
    phi_inv = {v: k for k, v in phi.items()}

    basis = tuple((v, wd) for wd in words_up_to(N, depth + 1) for v in w.vertices)
    space = DilationSpace(w, depth, basis)
    dimL = space.dim(depth)
    dimL1 = space.dim(depth + 1)
    idx = space.index

    S = {}
    Sstar = {}
    for lam in w.labels:
        rows, cols, vals = [], [], []
        # S_lam on basis elements of level <= L
        for c in range(dimL):
            j, wd = basis[c]
            i = w.source(j, lam)
            if i is not None:
                lams_i = w.out_labels(i)
                Ci = C[i]
                r_lam = lams_i.index(lam)
                for k in range(len(lams_i)):
                    coeff = np.conj(Ci[r_lam, k])
                    if coeff == 0:
                        continue
                    rows.append(idx[(i, prepend(k, wd))])
                    cols.append(c)
                    vals.append(coeff)
            else:
                f, g = phi[(j, lam)]
                rows.append(idx[(f, prepend(g, wd))])
                cols.append(c)
                vals.append(1.0 + 0.0j)
        S[lam] = sp.csc_matrix((vals, (rows, cols)), shape=(dimL1, dimL), dtype=complex)

        rows, cols, vals = [], [], []
        # S_lam* on basis elements of level <= L+1; output level strictly lower
        # (the empty word decomposes as 0.empty)
        for c in range(dimL1):
            i, wd = basis[c]
            kp = wd[0] if wd else 0
            tail = wd[1:] if wd else ()
            lams_i = w.out_labels(i)
            if lam in lams_i:
                if kp < len(lams_i):
                    j = w.target(i, lam)
                    coeff = C[i][lams_i.index(lam), kp]
                    if coeff != 0:
                        rows.append(idx[(j, tail)])
                        cols.append(c)
                        vals.append(coeff)
            if kp >= len(lams_i):
                src = phi_inv.get((i, kp))
                if src is not None and src[1] == lam:
                    rows.append(idx[(src[0], tail)])
                    cols.append(c)
                    vals.append(1.0 + 0.0j)
        Sstar[lam] = sp.csc_matrix((vals, (rows, cols)), shape=(dimL, dimL1), dtype=complex)

    ops = DilationOperators(space, cois, C, phi, S, Sstar)
    return space, ops


# -- verification --------------------------------------------------------

@dataclass(frozen=True)
class CuntzReport:
    isometry_residual: float        # max over (mu, lam) of S_mu* S_lam - delta I
    completeness_residual: float    # sum_lam S_lam S_lam* - I on level <= L
    compression_residual: float     # P_K S_lam* P_K - V_lam*
    unitary_residual: float         # worst C_i C_i* - I

    def ok(self, tol: float) -> bool:
        return max(self.isometry_residual, self.completeness_residual,
                   self.compression_residual) <= tol

    def to_dict(self) -> dict:
        return {
            "isometry_residual": self.isometry_residual,
            "completeness_residual": self.completeness_residual,
            "compression_residual": self.compression_residual,
            "unitary_residual": self.unitary_residual,
        }


def verify_cuntz(ops: DilationOperators, tol: float = 1e-10) -> CuntzReport:
    """Max residuals of the Cuntz relations and the compression identity on
    the truncation.  Reports, never raises."""
    space = ops.space
    L = space.depth
    dimL = space.dim(L)
    nv = ops.walk.n_vertices
    eye = sp.identity(dimL, dtype=complex, format="csc")

    iso = 0.0
    for mu in ops.walk.labels:
        for lam in ops.walk.labels:
            prod = ops.Sstar[mu] @ ops.S[lam]
            if mu == lam:
                prod = prod - eye
            if prod.nnz:
                iso = max(iso, float(np.abs(prod.toarray()).max()))

    acc = sp.csc_matrix((dimL, dimL), dtype=complex)
    for lam in ops.walk.labels:
        # restrict S* to level <= L inputs; outputs are level <= L-1 which
        # embed into level <= L by the prefix property of the basis order
        acc = acc + ops.S[lam][:dimL, :] @ ops.Sstar[lam][:, :dimL]
    comp = float(np.abs((acc - eye).toarray()).max())

    cmp_res = 0.0
    for lam in ops.walk.labels:
        pk = ops.Sstar[lam][:nv, :nv].toarray()
        cmp_res = max(cmp_res, float(np.abs(pk - ops.coisometry.Vstar[lam].toarray()).max()))

    uni = 0.0
    for i, Ci in ops.completions.items():
        uni = max(uni, float(np.abs(Ci @ Ci.conj().T - np.eye(Ci.shape[0])).max()))

    return CuntzReport(iso, comp, cmp_res, uni)


def _word_vectors(ops: DilationOperators, start_level_vectors: np.ndarray,
                  length: int) -> list[np.ndarray]:
    """Apply every length-``length`` product of generators to the given
    level-0 column vectors; returns the resulting columns (level <= length)."""
    space = ops.space
    out = []
    for word in itertools.product(ops.walk.labels, repeat=length):
        vecs = start_level_vectors
        lvl = 0
        for lam in reversed(word):
            d_in, d_out = space.dim(lvl), space.dim(lvl + 1)
            vecs = ops.S[lam][:d_out, :d_in] @ vecs
            lvl += 1
        out.append(vecs)
    return out


def cyclicity_rank(ops: DilationOperators, depth: Optional[int] = None) -> int:
    """Rank of span{S_word (i, empty) : |word| <= depth} inside the
    level-<=depth space; equals the full truncated dimension for a correct
    build."""
    space = ops.space
    L = space.depth if depth is None else depth
    if L > space.depth:
        raise ValueError("depth exceeds the built truncation")
    nv = ops.walk.n_vertices
    dimL = space.dim(L)
    start = np.eye(space.dim(0), dtype=complex)[:, :nv]
    cols = []
    for m in range(L + 1):
        for block in _word_vectors(ops, start, m):
            padded = np.zeros((dimL, block.shape[1]), dtype=complex)
            padded[: block.shape[0], :] = block
            cols.append(padded)
    mat = np.hstack(cols)
    return int(np.linalg.matrix_rank(mat, tol=1e-8))


def km_projection(ops: DilationOperators, m: int) -> np.ndarray:
    """Projection onto the span of level-m images of the coisometry space:
    sum over length-m words of S_word P_K S_word*.  Returned dense on the
    level-<=L space; idempotent and self-adjoint there."""
    space = ops.space
    if m > space.depth:
        raise ValueError("m exceeds the built truncation")
    nv = ops.walk.n_vertices
    dimL = space.dim(space.depth)
    P = np.zeros((dimL, dimL), dtype=complex)
    start = np.eye(space.dim(0), dtype=complex)[:, :nv]
    for block in _word_vectors(ops, start, m):
        padded = np.zeros((dimL, nv), dtype=complex)
        padded[: block.shape[0], :] = block
        P += padded @ padded.conj().T
    return P


def first_return_decomposition(ops: DilationOperators, i: Vertex,
                               representatives: Sequence[tuple[Vertex, Vertex]],
                               n_max: int) -> list[float]:
    """Squared norms of (i, empty) minus its first-return expansion truncated
    at word length n, for n = 1..n_max (n_max <= truncation depth).

    The expansion runs over words reaching a designated diagonal
    representative for the first time, weighted by the path amplitudes; the
    residual equals the probability of not having returned yet.
    """
    space = ops.space
    if n_max > space.depth:
        raise ValueError("n_max exceeds the built truncation")
    w = ops.walk
    pg = products.product_graph(w, w)
    arrivals = products.first_arrival_words(pg, representatives, (i, i), n_max)

    dim = space.dim(space.depth)
    target = np.zeros(dim, dtype=complex)
    target[space.index[(i, ())]] = 1.0
    residuals = []
    for n in range(1, n_max + 1):
        acc = np.zeros(dim, dtype=complex)
        for word, _rep in arrivals:
            if len(word) > n:
                continue
            end, amp = _follow(w, i, word)
            vec = np.zeros(space.dim(0), dtype=complex)
            vec = vec.reshape(-1, 1)
            vec[space.index[(end, ())], 0] = 1.0
            lvl = 0
            for lam in reversed(word):
                d_in, d_out = space.dim(lvl), space.dim(lvl + 1)
                vec = ops.S[lam][:d_out, :d_in] @ vec
                lvl += 1
            acc[: vec.shape[0]] += amp * vec[:, 0]
        residuals.append(float(np.linalg.norm(target - acc) ** 2))
    return residuals


def _follow(w: LabeledWalk, i: Vertex, word) -> tuple[Vertex, complex]:
    amp = 1.0 + 0.0j
    cur = i
    for lam in word:
        j, a = w.edges[(cur, lam)]
        amp *= a
        cur = j
    return cur, amp
