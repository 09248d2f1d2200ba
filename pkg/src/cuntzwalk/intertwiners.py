"""Intertwining operators between two Cuntz dilations.

Two independent computations are shipped on purpose: a structured build that
propagates matrix entries from one designated pair per balanced minimal
invariant set, and a brute-force null-space oracle for Id - sigma.  The
oracle referees the structured build at desk scale; the structured build
scales further.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .walks import LabeledWalk, Vertex
from .coisometry import build_coisometry, apply_sigma, Coisometry
from . import products
from .products import ProductGraph, MinimalSetReport, Pair

SVD_NULLSPACE_TOL = 1e-8
FIXED_POINT_TOL = 1e-10
ORACLE_SIZE_LIMIT = 400


@dataclass(frozen=True)
class IntertwinerSpace:
    walk: LabeledWalk
    walk2: LabeledWalk
    report: MinimalSetReport
    # one basis matrix per balanced minimal set, in representative order;
    # shape (|V'|, |V|), entry <T(i), (i')> at (row i', column i)
    basis: tuple[np.ndarray, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def balanced_representatives(self) -> tuple[Pair, ...]:
        return tuple(m.representative for m in self.report.balanced_sets)


def intertwiner_basis(w: LabeledWalk, w2: LabeledWalk) -> IntertwinerSpace:
    """Structured basis of the fixed points of sigma(T) = sum V'_lam T V_lam*.

    For each balanced minimal set: put 1 at its designated pair, propagate
    inside the set along possible edges via the amplitude ratio, set 0 on all
    other minimal sets, and solve the one-step recursion on transient pairs
    with the minimal-set values as absorbing boundary (the transient submap
    is a strict contraction, so the solution is unique).
    """
    pg = products.product_graph(w, w2)
    report = products.classify_balanced(pg, products.minimal_invariant_sets(pg))
    basis = []
    for mset in report.balanced_sets:
        basis.append(_build_fixed_point(pg, report, mset))
    return IntertwinerSpace(w, w2, report, tuple(basis))


def _build_fixed_point(pg: ProductGraph, report: MinimalSetReport, active) -> np.ndarray:
    w, w2 = pg.walk, pg.walk2
    values: dict[Pair, complex] = {}
    in_min = set()
    for mset in report.sets:
        for p in mset.pairs:
            in_min.add(p)
            values[p] = 0.0 + 0.0j
    # propagate from the designated pair over a spanning arborescence of the
    # active balanced set; balance guarantees path independence
    values[active.representative] = 1.0 + 0.0j
    members = set(active.pairs)
    frontier = [active.representative]
    seen = {active.representative}
    while frontier:
        x = frontier.pop()
        i, i2 = x
        for lam, y in pg.successors(x):
            if y in members and y not in seen:
                values[y] = values[x] * (w.amplitude(i, lam) / w2.amplitude(i2, lam))
                seen.add(y)
                frontier.append(y)

    transient = [p for p in pg.nodes if p not in in_min]
    if transient:
        tindex = {p: k for k, p in enumerate(transient)}
        n = len(transient)
        rows, cols, vals = [], [], []
        b = np.zeros(n, dtype=complex)
        for p in transient:
            r = tindex[p]
            for lam, y in pg.successors(p):
                wgt = pg.step_weight(p, lam)
                if y in tindex:
                    rows.append(r)
                    cols.append(tindex[y])
                    vals.append(wgt)
                else:
                    b[r] += wgt * values[y]
        A = sp.identity(n, dtype=complex, format="csc") - sp.csc_matrix(
            (vals, (rows, cols)), shape=(n, n), dtype=complex)
        try:
            x = spla.spsolve(A, b)
        except Exception:
            x = _iterate_transient(A, b)
        for p, xv in zip(transient, np.atleast_1d(x)):
            values[p] = complex(xv)

    T = np.zeros((w2.n_vertices, w.n_vertices), dtype=complex)
    for (i, i2), v in values.items():
        T[w2.vindex[i2], w.vindex[i]] = v
    return T


def _iterate_transient(A: sp.csc_matrix, b: np.ndarray,
                       tol: float = 1e-12, cap: int = 100_000) -> np.ndarray:
    # plain fixed-point iteration x <- (I - A) x + b; converges without
    # damping because the transient step map is a strict contraction
    M = sp.identity(A.shape[0], dtype=complex, format="csc") - A
    x = b.copy()
    for _ in range(cap):
        nxt = M @ x + b
        if np.abs(nxt - x).max() <= tol:
            return nxt
        x = nxt
    raise RuntimeError("transient fixed-point iteration did not converge")


def fixed_point_oracle(w: LabeledWalk, w2: Optional[LabeledWalk] = None,
                       svd_tol: float = SVD_NULLSPACE_TOL,
                       size_limit: int = ORACLE_SIZE_LIMIT
                       ) -> tuple[int, list[np.ndarray]]:
    """Null space of Id - sigma as a dense linear map on matrices.

    Independent of the structured build: vectorizes sigma via Kronecker
    products and thresholds singular values.  Returns the dimension and an
    orthonormal basis of matrices.
    """
    if w2 is None:
        w2 = w
    c = build_coisometry(w)
    c2 = c if w2 is w else build_coisometry(w2)
    n, n2 = w.n_vertices, w2.n_vertices
    if n * n2 > size_limit:
        raise ValueError(f"oracle size {n * n2} exceeds limit {size_limit}")
    # vec is column-major stacking of T (shape n2 x n):
    # vec(V' T Vstar) = (Vstar^T kron V') vec(T)
    L = np.zeros((n * n2, n * n2), dtype=complex)
    for lam in w.labels:
        L += np.kron(c.Vstar[lam].toarray().T, c2.V[lam].toarray())
    A = np.eye(n * n2, dtype=complex) - L
    _u, s, vh = np.linalg.svd(A)
    null_mask = s <= svd_tol
    dim = int(null_mask.sum())
    mats = [vh[len(s) - dim + k].conj().reshape((n2, n), order="F") for k in range(dim)]
    return dim, mats


def commutant_product(w: LabeledWalk, T1: np.ndarray, T2: np.ndarray,
                      tol: float = FIXED_POINT_TOL, cap: int = 10_000) -> np.ndarray:
    """Product of two commutant elements in compressed form.

    Iterates sigma on T1 @ T2 to convergence; the limit is again a fixed
    point and the operation is bilinear.  Non-convergence signals that one of
    the inputs is not a fixed point of sigma.
    """
    c = build_coisometry(w)
    cur = np.asarray(T1, dtype=complex) @ np.asarray(T2, dtype=complex)
    for _ in range(cap):
        nxt = apply_sigma(c, c, cur)
        if np.abs(nxt - cur).max() <= tol:
            return nxt
        cur = nxt
    raise RuntimeError("sigma iteration did not converge; inputs may not be fixed points")


def first_arrival_deviation(w: LabeledWalk, w2: LabeledWalk, T: np.ndarray,
                            n_max: int) -> float:
    """Max deviation between the entries of a fixed point T and their
    first-arrival expansion truncated at word length n_max.

    The expansion sums path amplitudes over words reaching a designated
    minimal-set representative for the first time; the tail is bounded by
    ||T|| times the first-passage mass, so the deviation decays geometrically.
    """
    pg = products.product_graph(w, w2)
    report = products.minimal_invariant_sets(pg)
    reps = set(report.representatives)
    T = np.asarray(T, dtype=complex)

    worst = 0.0
    for (i, i2) in pg.nodes:
        lhs = T[w2.vindex[i2], w.vindex[i]]
        # complex DP over paths avoiding representatives, collecting mass on
        # first arrival
        amp = {(i, i2): 1.0 + 0.0j} if (i, i2) not in reps else {}
        total = 0.0 + 0.0j
        if (i, i2) in reps:
            total = lhs  # zero-length arrival: the entry itself
            worst = max(worst, 0.0)
            continue
        for _n in range(n_max):
            nxt: dict[Pair, complex] = {}
            for x, a in amp.items():
                for lam, y in pg.successors(x):
                    contrib = a * pg.step_weight(x, lam)
                    if y in reps:
                        total += contrib * T[w2.vindex[y[1]], w.vindex[y[0]]]
                    else:
                        nxt[y] = nxt.get(y, 0.0) + contrib
            amp = nxt
        worst = max(worst, abs(lhs - total))
    return worst


def span_residual(basis_a: Sequence[np.ndarray], basis_b: Sequence[np.ndarray]) -> float:
    """Largest residual of projecting either basis onto the span of the
    other; 0 means the two spans coincide."""
    if not basis_a and not basis_b:
        return 0.0
    if not basis_a or not basis_b:
        return 1.0

    def to_cols(mats):
        return np.stack([m.reshape(-1) for m in mats], axis=1)

    A = np.linalg.qr(to_cols(basis_a))[0]
    B = np.linalg.qr(to_cols(basis_b))[0]
    res_a = np.linalg.norm(A - B @ (B.conj().T @ A), ord=2) if A.size else 0.0
    res_b = np.linalg.norm(B - A @ (A.conj().T @ B), ord=2) if B.size else 0.0
    return float(max(res_a, res_b))
